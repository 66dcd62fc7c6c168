from django.contrib import admin
from .models import Study


@admin.register(Study)
class StudyAdmin(admin.ModelAdmin):
    list_display = ['scenario', 'replications', 'seed', 'processing_status', 'created_at']
    list_filter = ['scenario', 'processing_status', 'created_at']
    search_fields = ['scenario']
    readonly_fields = ['tallies', 'failures', 'processing_status', 'processing_error', 'created_at', 'updated_at']
