import io
from collections import Counter
from unittest import mock

import numpy as np
import pandas as pd
from django.conf import settings
from django.test import SimpleTestCase, TestCase, override_settings, tag
from django.urls import reverse
from rest_framework import status
from rest_framework.test import APITestCase

from validitykit.exceptions import DegenerateClusterError, InvalidInputError
from indices.utils import CH_AS_PRINTED
from geometry.utils import squared_distance_matrix
from linkage.utils import complete_linkage, cut
from . import study as study_module
from .models import Study
from .scenarios import GAUSSIAN_MIXTURE, UNIFORM, ScenarioSpec, builtin_scenarios, sample, sample_with_labels, scenario_by_name
from .serializers import ScenarioSpecSerializer, TallyTableSerializer
from .study import (
    CH, GAP_PCA, GAP_UNIFORM, METHODS, PHI, PHI_THRESHOLD, SILHOUETTE, StudyParameters, TallyTable,
    run_replicate, run_study,
)
from .tasks import run_study_async

STUDY_SEED = 20190611


def majority_agreement(labels, truth):
    """Share of rows whose cluster's majority generating group matches their own."""
    agree = 0
    for cluster in np.unique(labels):
        members = truth[labels == cluster]
        agree += Counter(members.tolist()).most_common(1)[0][1]
    return agree / len(truth)


class ScenarioSpecTests(SimpleTestCase):
    def test_builtin_names(self):
        self.assertEqual(
            [s.name for s in builtin_scenarios()],
            ['uniform', 'four-2d', 'four-2d-n5', 'four-4d', 'nested-sd05', 'nested-sd1'],
        )

    def test_gaussian_sd_only_moves_four_cluster_scenarios(self):
        specs = {s.name: s for s in builtin_scenarios(gaussian_sd=2.5)}
        self.assertEqual(specs['four-2d'].sd, 2.5)
        self.assertEqual(specs['four-4d'].sd, 2.5)
        self.assertEqual(specs['nested-sd05'].sd, 0.5)
        self.assertEqual(specs['nested-sd1'].sd, 1.0)

    def test_unknown_name(self):
        with self.assertRaises(InvalidInputError):
            scenario_by_name('five-3d')

    def test_invalid_specs(self):
        with self.assertRaises(InvalidInputError):
            ScenarioSpec('x', GAUSSIAN_MIXTURE, 2, sizes=(5, 5), centers=((0, 0),))
        with self.assertRaises(InvalidInputError):
            ScenarioSpec('x', GAUSSIAN_MIXTURE, 2, sizes=(5,), centers=((0, 0, 0),))
        with self.assertRaises(InvalidInputError):
            ScenarioSpec('x', GAUSSIAN_MIXTURE, 2, sizes=(5,), centers=((0, 0),), sd=0)
        with self.assertRaises(InvalidInputError):
            ScenarioSpec('x', UNIFORM, 2, sizes=(5,), lower=(0, 1), upper=(1, 1))
        with self.assertRaises(InvalidInputError):
            ScenarioSpec('x', 'poisson', 2, sizes=(5,))


class SampleTests(SimpleTestCase):
    def test_shapes(self):
        self.assertEqual(sample(scenario_by_name('four-4d'), 1).values.shape, (95, 4))
        self.assertEqual(sample(scenario_by_name('nested-sd05'), 1).values.shape, (100, 2))
        self.assertEqual(sample(scenario_by_name('four-2d-n5'), 1).values.shape, (20, 2))

    def test_uniform_within_bounds(self):
        values = sample(scenario_by_name('uniform'), 3).values
        self.assertEqual(values.shape, (100, 6))
        self.assertTrue(np.all((values >= 0) & (values <= 1)))

    def test_deterministic(self):
        spec = scenario_by_name('four-2d')
        np.testing.assert_array_equal(sample(spec, 8).values, sample(spec, 8).values)
        self.assertFalse(np.array_equal(sample(spec, 8).values, sample(spec, 9).values))

    def test_vanishing_sd_sits_on_centers(self):
        spec = ScenarioSpec('tight', GAUSSIAN_MIXTURE, 2, sizes=(3, 2), centers=((1, 2), (-4, 5)), sd=1e-9)
        data, labels = sample_with_labels(spec, 0)
        expected = np.array([[1, 2]] * 3 + [[-4, 5]] * 2, dtype=float)
        np.testing.assert_allclose(data.values, expected, atol=1e-6)
        self.assertEqual(labels.tolist(), [1, 1, 1, 2, 2])

    def test_nested_groups_recovered_at_six(self):
        data, truth = sample_with_labels(scenario_by_name('nested-sd05'), STUDY_SEED)
        dm = squared_distance_matrix(data)
        labels = cut(complete_linkage(dm), 6).labels
        self.assertGreaterEqual(majority_agreement(labels, truth), 0.95)


class TallyTableTests(SimpleTestCase):
    def setUp(self):
        self.spec = scenario_by_name('four-2d-n5')

    def test_single_replicate_rows_sum_to_one(self):
        params = StudyParameters(R=1, k_max=10, seed=5, B=10)
        table = run_study([self.spec], params)[0]
        for method in METHODS:
            row = table.row(method)
            self.assertEqual(sum(c for c in row if c is not None) + table.failures[method], 1)

    def test_one_cluster_cell_absent_except_for_gap(self):
        table = TallyTable.empty(self.spec, StudyParameters(k_max=10))
        for method in (SILHOUETTE, CH, PHI, PHI_THRESHOLD):
            self.assertIsNone(table.row(method)[0])
        for method in (GAP_UNIFORM, GAP_PCA):
            self.assertEqual(table.row(method)[0], 0)

    def test_csv_layout(self):
        params = StudyParameters(methods=(GAP_UNIFORM, PHI), R=2, k_max=6, seed=1, B=10)
        table = run_study([self.spec], params)[0]
        frame = pd.read_csv(io.StringIO(table.to_csv()), index_col=0)
        self.assertEqual(list(frame.index), ['GAP, unif', 'phi ratio'])
        self.assertEqual(list(frame.columns), ['1', '2', '3', '4', '5', '6', 'failures'])
        self.assertTrue(pd.isna(frame.loc['phi ratio', '1']))
        self.assertEqual(int(frame.loc['GAP, unif'].drop('failures').sum()), 2)

    def test_reproducible_and_order_independent(self):
        params = StudyParameters(methods=(SILHOUETTE, CH, PHI, PHI_THRESHOLD), R=6, k_max=8, seed=42)

        def shuffled_map(fn, items):
            items = list(items)
            order = np.random.default_rng(0).permutation(len(items))
            results = {items[i]: fn(items[i]) for i in order}
            return [results[i] for i in items]

        first = run_study([self.spec], params)[0]
        second = run_study([self.spec], params)[0]
        shuffled = run_study([self.spec], params, map_fn=shuffled_map)[0]
        self.assertEqual(first.counts, second.counts)
        self.assertEqual(first.counts, shuffled.counts)

    def test_replicate_data_logged_by_digest(self):
        params = StudyParameters(methods=(PHI,), R=1, k_max=6, seed=3)
        with self.assertLogs('simulate.study', level='DEBUG') as logs:
            run_replicate(self.spec, params, 0)
            run_replicate(self.spec, params, 0)
        digests = [line.split('data=')[1].split()[0] for line in logs.output if 'data=' in line]
        self.assertEqual(len(digests), 2)
        self.assertEqual(digests[0], digests[1])

    def test_failures_are_counted(self):
        params = StudyParameters(methods=(CH, PHI), R=3, k_max=6, seed=2)
        real_select = study_module._select

        def flaky(method, *args):
            if method == PHI:
                raise DegenerateClusterError(1, 2, k=4)
            return real_select(method, *args)

        with mock.patch('simulate.study._select', side_effect=flaky):
            table = run_study([self.spec], params)[0]
        self.assertEqual(table.failures[PHI], 3)
        self.assertEqual(sum(c for c in table.row(PHI) if c is not None), 0)
        self.assertEqual(sum(c for c in table.row(CH) if c is not None), 3)

    def test_parameter_validation(self):
        with self.assertRaises(InvalidInputError):
            StudyParameters(methods=('elbow',))
        with self.assertRaises(InvalidInputError):
            StudyParameters(R=0)
        with self.assertRaises(InvalidInputError):
            StudyParameters(ch_formula='harmonic')
        with self.assertRaises(InvalidInputError):
            StudyParameters(d_power=3)
        with self.assertRaises(InvalidInputError):
            run_study([self.spec], StudyParameters(k_max=25))

    def test_serializer(self):
        params = StudyParameters(methods=(PHI,), R=2, k_max=5, seed=1)
        data = TallyTableSerializer(run_study([self.spec], params)[0]).data
        self.assertEqual(data['scenario']['name'], 'four-2d-n5')
        self.assertEqual(data['R'], 2)
        self.assertEqual(data['d_power'], 1)
        self.assertIsNone(data['rows']['phi ratio'][0])
        self.assertEqual(data['failures'], {'phi ratio': 0})


class ScenarioSpecSerializerTests(SimpleTestCase):
    def test_round_trip_of_builtin(self):
        spec = scenario_by_name('four-4d')
        serializer = ScenarioSpecSerializer(data=ScenarioSpecSerializer(spec).data)
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(serializer.save(), spec)

    def test_field_errors(self):
        serializer = ScenarioSpecSerializer(data={'name': 'bad', 'kind': 'gaussian-mixture', 'dims': 0, 'sizes': []})
        self.assertFalse(serializer.is_valid())
        self.assertIn('dims', serializer.errors)
        self.assertIn('sizes', serializer.errors)

    def test_cross_field_errors(self):
        serializer = ScenarioSpecSerializer(data={
            'name': 'bad', 'kind': 'gaussian-mixture', 'dims': 2, 'sizes': [5, 5], 'centers': [[0, 0]],
        })
        self.assertFalse(serializer.is_valid())
        self.assertIn('2 sizes', str(serializer.errors['non_field_errors'][0]))


class StudyTaskTests(TestCase):
    def test_runs_stored_study(self):
        study = Study.objects.create(
            scenario='four-2d-n5',
            spec=ScenarioSpecSerializer(scenario_by_name('four-2d-n5')).data,
            methods=[CH, PHI], replications=2, k_max=6, seed=11, bootstraps=10, threshold=0.1,
        )
        result = run_study_async(study.id)
        study.refresh_from_db()
        self.assertEqual(result['status'], 'completed')
        self.assertEqual(study.processing_status, 'completed')
        self.assertEqual(sum(c for c in study.tallies['CH'] if c is not None), 2)
        self.assertEqual(study.failures, {'CH': 0, 'phi ratio': 0})

    def test_stored_settings_reach_the_study(self):
        study = Study.objects.create(
            scenario='four-2d-n5',
            spec=ScenarioSpecSerializer(scenario_by_name('four-2d-n5')).data,
            methods=[CH, GAP_UNIFORM], replications=1, k_max=5, seed=3, bootstraps=10, threshold=0.1,
            ch_formula=CH_AS_PRINTED, gap_d_power=2,
        )
        validity = {**settings.VALIDITY, 'DELTA_T_CLAMP': 1e-6}
        with override_settings(VALIDITY=validity), \
                mock.patch('simulate.tasks.run_study', wraps=study_module.run_study) as runner:
            run_study_async(study.id)
        params = runner.call_args[0][1]
        self.assertEqual(params.ch_formula, CH_AS_PRINTED)
        self.assertEqual(params.d_power, 2)
        self.assertEqual(params.clamp, 1e-6)
        study.refresh_from_db()
        self.assertEqual(study.processing_status, 'completed')

    def test_invalid_stored_spec_fails(self):
        study = Study.objects.create(scenario='broken', spec={'name': 'broken'}, methods=[PHI])
        run_study_async(study.id)
        study.refresh_from_db()
        self.assertEqual(study.processing_status, 'failed')
        self.assertTrue(study.processing_error)

    def test_missing_study(self):
        self.assertEqual(run_study_async(999)['status'], 'error')


class SimulateApiTests(APITestCase):
    def test_scenario_list(self):
        response = self.client.get(reverse('scenario-list'))
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(len(response.data), 6)
        self.assertEqual(response.data[3]['n'], 95)

    def test_create_and_fetch_study(self):
        response = self.client.post(reverse('study-list'), {
            'scenario': 'four-2d-n5', 'methods': [SILHOUETTE, PHI], 'replications': 2, 'k_max': 6, 'seed': 4,
        }, format='json')
        self.assertEqual(response.status_code, status.HTTP_201_CREATED, response.data)
        self.assertEqual(response.data['processing_status'], 'completed')
        self.assertEqual(sorted(response.data['tallies']), ['Silhouette', 'phi ratio'])
        self.assertEqual(response.data['ch_formula'], 'standard')
        self.assertEqual(response.data['gap_d_power'], 1)

        detail = self.client.get(reverse('study-detail', args=[response.data['id']]))
        self.assertEqual(detail.data['spec']['name'], 'four-2d-n5')
        listing = self.client.get(reverse('study-list'))
        self.assertEqual(listing.data['count'], 1)

    def test_create_from_spec(self):
        spec = {'name': 'two-blobs', 'kind': 'gaussian-mixture', 'dims': 2, 'sizes': [10, 10],
                'centers': [[0, 0], [8, 8]], 'sd': 0.5}
        response = self.client.post(reverse('study-list'), {
            'spec': spec, 'methods': [PHI], 'replications': 1, 'k_max': 5,
        }, format='json')
        self.assertEqual(response.status_code, status.HTTP_201_CREATED, response.data)
        self.assertEqual(response.data['scenario'], 'two-blobs')

    def test_rejects_unknown_scenario(self):
        response = self.client.post(reverse('study-list'), {'scenario': 'five-3d'}, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('scenario', response.data)

    def test_rejects_large_k_max(self):
        response = self.client.post(reverse('study-list'), {'scenario': 'four-2d-n5', 'k_max': 20}, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('k_max', response.data)


@tag('slow')
class StudyAcceptanceTests(SimpleTestCase):
    """Monte-Carlo runs over 100 replicates."""

    def tally(self, name, methods, B=100):
        params = StudyParameters(methods=methods, R=100, k_max=10, seed=STUDY_SEED, B=B)
        return run_study([scenario_by_name(name)], params)[0]

    def test_four_clusters_two_dims(self):
        table = self.tally('four-2d', (SILHOUETTE, CH, PHI_THRESHOLD))
        self.assertGreaterEqual(table.counts[SILHOUETTE][4], 95)
        self.assertGreaterEqual(table.counts[PHI_THRESHOLD][4], 90)
        self.assertGreaterEqual(table.counts[CH][4], 90)

    def test_uniform_has_no_clusters(self):
        table = self.tally('uniform', (GAP_UNIFORM, GAP_PCA, PHI), B=50)
        self.assertGreaterEqual(table.counts[GAP_UNIFORM][1], 85)
        self.assertGreaterEqual(table.counts[GAP_PCA][1], 85)
        for k in range(5, 11):
            self.assertLessEqual(table.counts[PHI][k], 5)

    def test_nested_clusters_merge_at_sd_one(self):
        table = self.tally('nested-sd1', (SILHOUETTE, PHI, PHI_THRESHOLD))
        for method in (SILHOUETTE, PHI, PHI_THRESHOLD):
            self.assertGreaterEqual(table.counts[method][3], 95, method)

    def test_nested_clusters_split_at_sd_half(self):
        table = self.tally('nested-sd05', (PHI, PHI_THRESHOLD))
        phi = table.counts[PHI]
        self.assertGreaterEqual(phi[3] + phi[6], 90)
        self.assertGreaterEqual(min(phi[3], phi[6]), 25)
        self.assertEqual(sum(table.counts[PHI_THRESHOLD].values()) + table.failures[PHI_THRESHOLD], 100)
