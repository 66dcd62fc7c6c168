from django.urls import path, include
from rest_framework.routers import SimpleRouter
from .views import ScenarioListView, StudyViewSet

router = SimpleRouter()
router.register(r'studies', StudyViewSet, basename='study')

urlpatterns = [
    path('scenarios/', ScenarioListView.as_view(), name='scenario-list'),
    path('', include(router.urls)),
]
