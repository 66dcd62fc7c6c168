import numpy as np
from django.conf import settings
from django.test import SimpleTestCase

from validitykit.exceptions import DegenerateClusterError, InfiniteOddsError, InvalidInputError
from geometry.datasets import Dataset, read_csv_dataset
from geometry.utils import squared_distance_matrix
from linkage.utils import complete_linkage
from .serializers import PhiSeriesSerializer
from .utils import PhiSeries, phi_ratio, select_k, smallest_argmax


def pipeline(data):
    dm = squared_distance_matrix(data)
    return dm, complete_linkage(dm)


class PhiRatioTests(SimpleTestCase):
    def test_even_odds(self):
        self.assertEqual(phi_ratio(0.5), 1.0)

    def test_published_delta_t(self):
        self.assertAlmostEqual(phi_ratio(0.940), 15.67, places=2)

    def test_four_point_oracle(self):
        self.assertAlmostEqual(phi_ratio(201 / 202), 201.0, places=9)

    def test_one_has_infinite_odds(self):
        with self.assertRaises(InfiniteOddsError):
            phi_ratio(1.0)

    def test_out_of_range(self):
        for value in (0.0, -0.2, 1.5):
            with self.assertRaises(InvalidInputError):
                phi_ratio(value)


class SmallestArgmaxTests(SimpleTestCase):
    def test_argmax(self):
        self.assertEqual(smallest_argmax({2: 0.2, 3: 0.9, 4: 0.4}), 3)

    def test_ties_go_to_smallest_k(self):
        self.assertEqual(smallest_argmax({2: 0.9, 3: 0.9}), 2)

    def test_nan_is_skipped(self):
        self.assertEqual(smallest_argmax({2: float('nan'), 3: 0.1}), 3)


class PhiSeriesTests(SimpleTestCase):
    def test_constant_ratio_selects_two(self):
        series = PhiSeries.from_delta_t({2: 0.5, 3: 0.5, 4: 0.5})
        self.assertEqual(series.phi1_by_k, {2: 1.0, 3: 1.0})
        self.assertEqual(series.selected_k, 2)

    def test_clamps_perfect_membership(self):
        series = PhiSeries.from_delta_t({2: 1.0, 3: 0.9})
        self.assertTrue(np.isfinite(series.phi_by_k[2]))
        self.assertEqual(series.selected_k, 2)

    def test_reconstruction(self):
        series = PhiSeries.from_delta_t({2: 0.93, 3: 0.81, 4: 0.84, 5: 0.7})
        for k, ratio in series.phi1_by_k.items():
            self.assertAlmostEqual(ratio * series.phi_by_k[k + 1], series.phi_by_k[k], delta=1e-9)


class SelectKTests(SimpleTestCase):
    def test_iris_petals_select_three(self):
        data = read_csv_dataset(settings.BASE_DIR / 'testdata' / 'iris_petals.csv')
        series = select_k(*pipeline(data), k_max=10)
        self.assertEqual(series.selected_k, 3)
        self.assertAlmostEqual(series.phi1_by_k[3], 2.61, delta=0.02)
        self.assertAlmostEqual(series.delta_T_by_k[3], 0.935, delta=0.005)
        self.assertEqual(sorted(series.phi1_by_k), list(range(2, 10)))

    def test_four_points(self):
        series = select_k(*pipeline(Dataset([0.0, 1.0, 10.0, 11.0])), k_max=3)
        self.assertEqual(series.selected_k, 2)
        self.assertAlmostEqual(series.phi_by_k[2], 201.0, places=6)
        self.assertAlmostEqual(series.delta_T_by_k[3], 0.5964, places=4)

    def test_scale_invariance(self):
        rng = np.random.default_rng(8)
        centers = np.array([[0, 0], [8, 0], [0, 8], [8, 8]])
        points = np.vstack([c + rng.standard_normal((12, 2)) for c in centers])
        dm, tree = pipeline(Dataset(points))
        base = select_k(dm, tree, k_max=4)
        scaled = select_k(dm.scaled(3.7), complete_linkage(dm.scaled(3.7)), k_max=4)
        self.assertEqual(scaled.selected_k, base.selected_k)
        for k in base.delta_T_by_k:
            self.assertAlmostEqual(scaled.delta_T_by_k[k], base.delta_T_by_k[k], delta=1e-9)
            self.assertAlmostEqual(scaled.phi_by_k[k] / base.phi_by_k[k], 1.0, delta=1e-9)

    def test_threshold_raises_delta_t(self):
        rng = np.random.default_rng(9)
        dm, tree = pipeline(Dataset(rng.uniform(size=(30, 2))))
        plain = select_k(dm, tree, k_max=6)
        thresholded = select_k(dm, tree, k_max=6, threshold=0.1)
        self.assertEqual(thresholded.threshold, 0.1)
        for k in plain.delta_T_by_k:
            self.assertGreaterEqual(thresholded.delta_T_by_k[k], plain.delta_T_by_k[k] - 1e-15)

    def test_deterministic(self):
        dm, tree = pipeline(Dataset(np.random.default_rng(1).uniform(size=(25, 3))))
        self.assertEqual(select_k(dm, tree, k_max=8), select_k(dm, tree, k_max=8))

    def test_degenerate_error_names_k(self):
        dm, tree = pipeline(Dataset([0.0, 0.0, 0.0, 10.0, 20.0, 30.0]))
        with self.assertRaises(DegenerateClusterError) as ctx:
            select_k(dm, tree, k_max=4)
        self.assertEqual(ctx.exception.k, 4)

    def test_k_max_bounds(self):
        dm, tree = pipeline(Dataset([0.0, 1.0, 10.0, 11.0]))
        with self.assertRaises(InvalidInputError):
            select_k(dm, tree, k_max=2)
        with self.assertRaises(InvalidInputError):
            select_k(dm, tree, k_max=4)

    def test_serializes(self):
        series = select_k(*pipeline(Dataset([0.0, 1.0, 10.0, 11.0])), k_max=3)
        payload = PhiSeriesSerializer(series).data
        self.assertEqual(payload['selected_k'], 2)
        self.assertIn('3', payload['delta_T_by_k'])
