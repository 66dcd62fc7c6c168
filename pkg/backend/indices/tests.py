import math

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase, tag

from validitykit.exceptions import InvalidInputError, UnsupportedKError
from geometry.datasets import Dataset, read_csv_dataset
from geometry.utils import squared_distance_matrix
from linkage.utils import ClusterAssignment, complete_linkage, cuts
from .serializers import GapSeriesSerializer, IndexSeriesSerializer
from .utils import (
    CH_AS_PRINTED, REFERENCE_PCA, REFERENCE_UNIFORM, IndexSeries, between_ss, calinski_harabasz,
    ch_series, gap_statistic, log_dispersion, pooled_dispersion, select_by_argmax, silhouette,
    silhouette_series, total_ss, within_ss,
)

FOUR_POINTS = Dataset([0.0, 1.0, 10.0, 11.0])
TWO_GROUPS = ClusterAssignment([1, 1, 2, 2])
IRIS_LOG_W = [6.31154, 5.15176, 3.72755, 3.09823, 2.95676, 2.53215, 2.35686, 2.23152, 2.11704, 2.00528]


def tree_of(data):
    return complete_linkage(squared_distance_matrix(data))


class SumOfSquaresTests(SimpleTestCase):
    def test_four_points(self):
        self.assertEqual(within_ss(FOUR_POINTS, TWO_GROUPS), 1.0)
        self.assertEqual(between_ss(FOUR_POINTS, TWO_GROUPS), 100.0)

    def test_singletons_and_single_cluster(self):
        self.assertEqual(within_ss(FOUR_POINTS, ClusterAssignment([1, 2, 3, 4])), 0.0)
        single = ClusterAssignment([1, 1, 1, 1])
        self.assertEqual(within_ss(FOUR_POINTS, single), total_ss(FOUR_POINTS))
        self.assertEqual(between_ss(FOUR_POINTS, single), 0.0)

    def test_decomposition_on_random_partitions(self):
        for seed in range(200):
            rng = np.random.default_rng(seed)
            n, p, k = int(rng.integers(5, 9)), int(rng.integers(1, 4)), int(rng.integers(2, 5))
            labels = np.concatenate([np.arange(1, k + 1), rng.integers(1, k + 1, size=n - k)])
            data = Dataset(rng.standard_normal((n, p)))
            assign = ClusterAssignment(labels)
            self.assertAlmostEqual(within_ss(data, assign) + between_ss(data, assign), total_ss(data), delta=1e-9)

    def test_within_ss_shrinks_down_the_tree(self):
        data = Dataset(np.random.default_rng(2).uniform(size=(40, 2)))
        values = log_dispersion(squared_distance_matrix(data), tree_of(data), 12, d_power=2)
        self.assertTrue(all(values[k + 1] <= values[k] + 1e-9 for k in range(1, 12)))

    def test_iris_log_within_ss(self):
        data = read_csv_dataset(settings.BASE_DIR / 'testdata' / 'iris_petals.csv')
        values = log_dispersion(squared_distance_matrix(data), tree_of(data), 10, d_power=2)
        np.testing.assert_allclose([values[k] for k in range(1, 11)], IRIS_LOG_W, atol=1e-4)

    def test_pooled_dispersion(self):
        data = Dataset([0.0, 1.0, 3.0, 10.0, 11.0])
        dm = squared_distance_matrix(data)
        assign = ClusterAssignment([1, 1, 1, 2, 2])
        self.assertAlmostEqual(pooled_dispersion(dm, assign, d_power=1), 2.5)
        self.assertAlmostEqual(pooled_dispersion(dm, assign, d_power=2), 31 / 6)
        self.assertAlmostEqual(pooled_dispersion(dm, assign, d_power=2), within_ss(data, assign))
        with self.assertRaises(InvalidInputError):
            pooled_dispersion(dm, assign, d_power=3)

    def test_squared_pooled_dispersion_is_within_ss(self):
        for seed in range(50):
            rng = np.random.default_rng(seed)
            n, k = int(rng.integers(5, 12)), int(rng.integers(1, 5))
            labels = np.concatenate([np.arange(1, k + 1), rng.integers(1, k + 1, size=n - k)])
            data = Dataset(rng.standard_normal((n, 3)))
            assign = ClusterAssignment(labels)
            self.assertAlmostEqual(
                pooled_dispersion(squared_distance_matrix(data), assign, d_power=2), within_ss(data, assign),
                delta=1e-9,
            )


class CalinskiHarabaszTests(SimpleTestCase):
    def test_standard(self):
        self.assertAlmostEqual(calinski_harabasz(FOUR_POINTS, TWO_GROUPS), 200.0)

    def test_as_printed(self):
        self.assertAlmostEqual(calinski_harabasz(FOUR_POINTS, TWO_GROUPS, CH_AS_PRINTED), 50.0)

    def test_zero_within_is_infinite(self):
        data = Dataset([0.0, 0.0, 5.0, 5.0])
        self.assertEqual(calinski_harabasz(data, TWO_GROUPS), math.inf)
        series = ch_series(Dataset([0.0, 0.0, 5.0, 5.0, 9.0]), tree_of(Dataset([0.0, 0.0, 5.0, 5.0, 9.0])), 3)
        self.assertEqual(series.infinite_k, (3,))
        self.assertEqual(series.selected_k, 3)
        self.assertIsNone(IndexSeriesSerializer(series).data['value_by_k']['3'])

    def test_requires_two_clusters(self):
        with self.assertRaises(UnsupportedKError):
            calinski_harabasz(FOUR_POINTS, ClusterAssignment([1, 1, 1, 1]))

    def test_unknown_formula(self):
        with self.assertRaises(InvalidInputError):
            calinski_harabasz(FOUR_POINTS, TWO_GROUPS, 'swapped')


class SilhouetteTests(SimpleTestCase):
    def test_four_points(self):
        distances = squared_distance_matrix(FOUR_POINTS).euclidean()
        expected = (2 * (9.5 / 10.5) + 2 * (8.5 / 9.5)) / 4
        self.assertAlmostEqual(silhouette(distances, TWO_GROUPS), expected, places=12)
        self.assertAlmostEqual(9.5 / 10.5, 0.9048, places=4)

    def test_coincident_groups_score_one(self):
        data = Dataset([0.0, 0.0, 100.0, 100.0])
        distances = squared_distance_matrix(data).euclidean()
        self.assertEqual(silhouette(distances, TWO_GROUPS), 1.0)

    def test_random_labels_on_symmetric_data(self):
        rng = np.random.default_rng(13)
        data = Dataset(rng.standard_normal((60, 2)))
        labels = ClusterAssignment(np.concatenate([[1, 2], rng.integers(1, 3, size=58)]))
        score = silhouette(squared_distance_matrix(data).euclidean(), labels)
        self.assertLess(abs(score), 0.2)

    def test_all_singletons(self):
        distances = squared_distance_matrix(FOUR_POINTS).euclidean()
        self.assertEqual(silhouette(distances, ClusterAssignment([1, 2, 3, 4])), 0.0)

    def test_requires_two_clusters(self):
        with self.assertRaises(UnsupportedKError):
            silhouette(np.zeros((2, 2)), ClusterAssignment([1, 1]))

    def test_range_and_iris_selection(self):
        data = read_csv_dataset(settings.BASE_DIR / 'testdata' / 'iris_petals.csv')
        dm = squared_distance_matrix(data)
        series = silhouette_series(dm, complete_linkage(dm), 10)
        self.assertTrue(all(-1 <= value <= 1 for value in series.value_by_k.values()))
        self.assertEqual(series.selected_k, 3)

    def test_iris_ch_selects_six(self):
        data = read_csv_dataset(settings.BASE_DIR / 'testdata' / 'iris_petals.csv')
        self.assertEqual(ch_series(data, tree_of(data), 10).selected_k, 6)


class SelectByArgmaxTests(SimpleTestCase):
    def test_argmax_and_ties(self):
        self.assertEqual(select_by_argmax(IndexSeries('ch', {2: 0.2, 3: 0.9, 4: 0.4}, 3)), 3)
        self.assertEqual(select_by_argmax(IndexSeries('ch', {2: 0.9, 3: 0.9}, 2)), 2)


class GapStatisticTests(SimpleTestCase):
    def test_reproducible(self):
        data = Dataset(np.random.default_rng(4).uniform(size=(30, 2)))
        first = gap_statistic(data, k_max=5, B=12, seed=99)
        second = gap_statistic(data, k_max=5, B=12, seed=99)
        self.assertEqual(first, second)
        other = gap_statistic(data, k_max=5, B=12, seed=100)
        self.assertNotEqual(first.gap_by_k, other.gap_by_k)

    def test_order_of_reference_draws_does_not_matter(self):
        data = Dataset(np.random.default_rng(5).uniform(size=(25, 2)))

        def reversed_map(fn, items):
            items = list(items)
            results = {b: fn(b) for b in reversed(items)}
            return [results[b] for b in items]

        forward = gap_statistic(data, k_max=4, B=10, seed=3)
        backward = gap_statistic(data, k_max=4, B=10, seed=3, map_fn=reversed_map)
        self.assertEqual(forward, backward)

    def test_series_shape(self):
        data = Dataset(np.random.default_rng(6).uniform(size=(30, 3)))
        series = gap_statistic(data, k_max=6, B=10, reference_kind=REFERENCE_PCA, seed=1)
        self.assertEqual(sorted(series.gap_by_k), list(range(1, 7)))
        self.assertTrue(all(se >= 0 for se in series.se_by_k.values()))
        self.assertEqual(series.reference_kind, REFERENCE_PCA)
        for k in series.gap_by_k:
            self.assertAlmostEqual(series.gap_by_k[k], series.expected_log_w_by_k[k] - series.log_w_by_k[k])
        self.assertEqual(GapSeriesSerializer(series).data['B'], 10)

    def test_selection_follows_one_standard_error_rule(self):
        data = Dataset(np.random.default_rng(7).uniform(size=(30, 2)))
        series = gap_statistic(data, k_max=6, B=10, seed=2)
        k = series.selected_k
        if k < series.k_max:
            self.assertGreaterEqual(series.gap_by_k[k], series.gap_by_k[k + 1] - series.se_by_k[k + 1])
        for j in range(1, k):
            self.assertLess(series.gap_by_k[j], series.gap_by_k[j + 1] - series.se_by_k[j + 1])

    def test_single_blob_has_one_cluster(self):
        votes = 0
        for seed in range(20):
            blob = Dataset(np.random.default_rng(seed).standard_normal((40, 2)) * 0.1)
            votes += gap_statistic(blob, k_max=5, B=10, seed=seed).selected_k == 1
        self.assertGreater(votes, 10)

    def test_well_separated_groups(self):
        rng = np.random.default_rng(12)
        centers = np.array([[0, 0], [10, 0], [0, 10]])
        data = Dataset(np.vstack([c + 0.5 * rng.standard_normal((15, 2)) for c in centers]))
        for kind in (REFERENCE_UNIFORM, REFERENCE_PCA):
            self.assertEqual(gap_statistic(data, k_max=6, B=20, reference_kind=kind, seed=5).selected_k, 3)

    def test_selection_survives_rigid_motion(self):
        agreements = 0
        for seed in range(10):
            rng = np.random.default_rng(seed)
            centers = np.array([[0, 0], [6, 0], [3, 5]])
            x = np.vstack([c + 0.5 * rng.standard_normal((10, 2)) for c in centers])
            q, _ = np.linalg.qr(rng.standard_normal((2, 2)))
            moved = x @ q + np.array([25.0, -40.0])
            original = gap_statistic(Dataset(x), k_max=5, B=10, seed=seed).selected_k
            rotated = gap_statistic(Dataset(moved), k_max=5, B=10, seed=seed).selected_k
            agreements += original == rotated
        self.assertGreaterEqual(agreements, 8)

    @tag('slow')
    def test_iris_petals_select_four(self):
        data = read_csv_dataset(settings.BASE_DIR / 'testdata' / 'iris_petals.csv')
        tree = tree_of(data)
        for kind in (REFERENCE_UNIFORM, REFERENCE_PCA):
            series = gap_statistic(
                data, k_max=10, B=100, reference_kind=kind, seed=settings.VALIDITY['SEED'], tree=tree,
            )
            self.assertEqual(series.selected_k, 4)
            self.assertEqual(series.d_power, 1)

    def test_squared_dispersion_option(self):
        data = Dataset(np.random.default_rng(9).uniform(size=(20, 2)))
        series = gap_statistic(data, k_max=4, B=10, seed=1, d_power=2)
        self.assertEqual(series.d_power, 2)
        self.assertEqual(GapSeriesSerializer(series).data['d_power'], 2)
        with self.assertRaises(InvalidInputError):
            gap_statistic(data, k_max=4, B=10, seed=1, d_power=3)

    def test_identical_points_rejected(self):
        with self.assertRaises(InvalidInputError):
            gap_statistic(Dataset(np.ones((10, 2))), k_max=3, B=10)

    def test_too_few_draws(self):
        with self.assertRaises(InvalidInputError):
            gap_statistic(FOUR_POINTS, k_max=3, B=5)

    def test_uses_supplied_tree(self):
        data = Dataset(np.random.default_rng(8).uniform(size=(20, 2)))
        tree = tree_of(data)
        self.assertEqual(
            gap_statistic(data, k_max=4, B=10, seed=1, tree=tree),
            gap_statistic(data, k_max=4, B=10, seed=1),
        )
        self.assertEqual(cuts(tree, [1])[1].k, 1)
