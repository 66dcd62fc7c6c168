import numpy as np
import pandas as pd
from django.conf import settings
from django.test import SimpleTestCase
from rest_framework.renderers import JSONRenderer

from validitykit.exceptions import DegenerateClusterError, InvalidInputError, UnsupportedKError
from geometry.datasets import Dataset, read_csv_dataset
from geometry.utils import DistanceMatrix, squared_distance_matrix
from linkage.utils import ClusterAssignment, complete_linkage, cut
from selection.utils import DEFAULT_DELTA_T_CLAMP, phi_ratio
from simulate.scenarios import sample, scenario_by_name
from .serializers import MembershipMatrixSerializer
from .utils import (
    apply_threshold, degree_of_closeness, membership_for, membership_from_gamma, membership_matrix,
)

TESTDATA = settings.BASE_DIR / 'testdata'
IRIS_K3_MEMBERSHIP = [
    [0.985, 0.004, 0.011],
    [0.040, 0.714, 0.246],
    [0.036, 0.092, 0.872],
]


def four_points():
    dm = squared_distance_matrix(Dataset([0.0, 1.0, 10.0, 11.0]))
    return dm, ClusterAssignment([1, 1, 2, 2])


def brute_force_delta_mk(x, labels):
    """Degree of membership straight from its definition, one term at a time."""
    n, p = len(x), len(x[0])
    k = max(labels)
    gamma = [[0.0] * k for _ in range(k)]
    for m in range(1, k + 1):
        for c in range(1, k + 1):
            cluster = [j for j in range(n) if labels[j] == c]
            for i in range(n):
                if labels[i] != m:
                    continue
                distances = [sum((x[i][q] - x[j][q]) ** 2 for q in range(p)) for j in cluster]
                gamma[m - 1][c - 1] += sum(distances) / len(cluster)
    for m in range(1, k + 1):
        if labels.count(m) == 1:
            gamma[m - 1][m - 1] = 1.0
    delta = []
    for row in gamma:
        mass = sum(1.0 / g for g in row)
        delta.append([(1.0 / g) / mass for g in row])
    return delta


def oracle_corpus(count=200):
    for seed in range(count):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(5, 9))
        p = int(rng.integers(1, 4))
        k = int(rng.integers(2, 5))
        labels = np.concatenate([np.arange(1, k + 1), rng.integers(1, k + 1, size=n - k)])
        rng.shuffle(labels)
        yield rng.standard_normal((n, p)), labels


def blobs(seed, centers, size=15, scale=0.5):
    rng = np.random.default_rng(seed)
    points = np.vstack([np.asarray(c) + scale * rng.standard_normal((size, len(c))) for c in centers])
    labels = np.repeat(np.arange(1, len(centers) + 1), size)
    return Dataset(points), ClusterAssignment(labels)


class DegreeOfClosenessTests(SimpleTestCase):
    def test_equidistant_observation_splits_evenly(self):
        d2 = np.array([[0.0, 2.0, 1.0], [2.0, 0.0, 5.0], [1.0, 5.0, 0.0]])
        closeness = degree_of_closeness(DistanceMatrix(d2), ClusterAssignment([1, 1, 2]))
        np.testing.assert_allclose(closeness.delta_ik[0], [0.5, 0.5])

    def test_four_points(self):
        closeness = degree_of_closeness(*four_points())
        np.testing.assert_allclose(closeness.mean_d2[0], [0.5, 110.5])
        self.assertAlmostEqual(closeness.delta_ik[0, 0], 2.0 / (2.0 + 1.0 / 110.5), places=12)
        self.assertAlmostEqual(closeness.delta_ik[0, 0], 0.99550, places=5)

    def test_singleton_sits_on_its_own_cluster(self):
        dm = squared_distance_matrix(Dataset([0.0, 1.0, 10.0]))
        closeness = degree_of_closeness(dm, ClusterAssignment([1, 1, 2]))
        self.assertEqual(closeness.delta_ik[2].tolist(), [0.0, 1.0])

    def test_single_cluster_is_unsupported(self):
        dm, _ = four_points()
        with self.assertRaises(UnsupportedKError):
            degree_of_closeness(dm, ClusterAssignment([1, 1, 1, 1]))

    def test_separation_drives_diagonal_up(self):
        rng = np.random.default_rng(2)
        a, b = rng.standard_normal((20, 2)), rng.standard_normal((20, 2))
        labels = ClusterAssignment(np.repeat([1, 2], 20))
        diagonal, totals = [], []
        for shift in (2.0, 4.0, 8.0, 16.0, 32.0):
            dm = squared_distance_matrix(Dataset(np.vstack([a, b + [shift, 0.0]])))
            closeness = degree_of_closeness(dm, labels)
            own = closeness.delta_ik[np.arange(40), labels.labels - 1]
            diagonal.append(own.mean())
            totals.append(membership_for(dm, labels).delta_T)
        self.assertTrue(np.all(np.diff(diagonal) > 0))
        self.assertTrue(np.all(np.diff(totals) > 0))
        self.assertGreater(diagonal[-1], 0.99)


class MembershipMatrixTests(SimpleTestCase):
    def test_four_points(self):
        dm, assign = four_points()
        mm = membership_for(dm, assign)
        np.testing.assert_allclose(mm.gamma, [[1.0, 201.0], [201.0, 1.0]])
        np.testing.assert_allclose(mm.delta_mk, [[201 / 202, 1 / 202], [1 / 202, 201 / 202]])
        np.testing.assert_allclose(mm.delta_m_dot, [0.5, 0.5])
        self.assertAlmostEqual(mm.delta_T, 0.99505, places=5)

    def test_iris_petals_at_three_clusters(self):
        data = read_csv_dataset(TESTDATA / 'iris_petals.csv')
        dm = squared_distance_matrix(data)
        mm = membership_for(dm, cut(complete_linkage(dm), 3))
        np.testing.assert_allclose(mm.delta_mk, IRIS_K3_MEMBERSHIP, atol=0.005)
        self.assertAlmostEqual(mm.delta_T, 0.935, delta=0.005)

    def test_singleton_override(self):
        dm = squared_distance_matrix(Dataset([0.0, 1.0, 10.0]))
        assign = ClusterAssignment([1, 1, 2])
        mm = membership_for(dm, assign)
        self.assertEqual(mm.gamma[1, 1], 1.0)
        self.assertAlmostEqual(mm.gamma[1, 0], 90.5)
        np.testing.assert_allclose(mm.delta_mk.sum(axis=1), 1.0, atol=1e-12)

    def test_duplicate_cluster_is_degenerate(self):
        dm = squared_distance_matrix(Dataset([0.0, 0.0, 10.0]))
        with self.assertRaises(DegenerateClusterError) as ctx:
            membership_for(dm, ClusterAssignment([1, 1, 2]))
        self.assertEqual((ctx.exception.m, ctx.exception.k_col), (1, 1))

    def test_marginals_sum_to_one(self):
        data, assign = blobs(1, [(0, 0), (5, 0), (0, 5)])
        mm = membership_for(squared_distance_matrix(data), assign)
        self.assertAlmostEqual(mm.delta_m_dot.sum(), 1.0, delta=1e-9)
        self.assertAlmostEqual(mm.delta_dot_k.sum(), 1.0, delta=1e-9)
        expected = np.sum(np.diag(mm.delta_mk) * mm.delta_m_dot)
        self.assertAlmostEqual(mm.delta_T, expected, delta=1e-15)
        self.assertTrue(0 < mm.delta_T <= 1)

    def test_matches_brute_force_on_small_instances(self):
        for x, labels in oracle_corpus():
            dm = squared_distance_matrix(Dataset(x))
            assign = ClusterAssignment(labels)
            mm = membership_matrix(degree_of_closeness(dm, assign), assign)
            expected = brute_force_delta_mk(x.tolist(), labels.tolist())
            np.testing.assert_allclose(mm.delta_mk, expected, rtol=0, atol=1e-12)

    def test_rows_are_stochastic(self):
        data = Dataset(np.random.default_rng(6).uniform(size=(40, 3)))
        dm = squared_distance_matrix(data)
        tree = complete_linkage(dm)
        for k in range(2, 11):
            assign = cut(tree, k)
            closeness = degree_of_closeness(dm, assign)
            mm = membership_matrix(closeness, assign)
            np.testing.assert_allclose(closeness.delta_ik.sum(axis=1), 1.0, atol=1e-9)
            np.testing.assert_allclose(mm.delta_mk.sum(axis=1), 1.0, atol=1e-9)
            self.assertTrue(np.all((closeness.delta_ik >= 0) & (closeness.delta_ik <= 1)))

    def test_scale_invariance_without_singletons(self):
        data, assign = blobs(3, [(0, 0), (6, 0), (0, 6), (6, 6)])
        dm = squared_distance_matrix(data)
        base = membership_for(dm, assign)
        scaled = membership_for(dm.scaled(3.7), assign)
        np.testing.assert_allclose(scaled.delta_mk, base.delta_mk, atol=1e-9)
        self.assertAlmostEqual(scaled.delta_T, base.delta_T, delta=1e-9)

    def test_label_permutation_is_equivariant(self):
        data, assign = blobs(4, [(0, 0), (4, 1), (1, 5)])
        dm = squared_distance_matrix(data)
        permutation = np.array([3, 1, 2])  # old label m becomes permutation[m - 1]
        relabeled = ClusterAssignment(permutation[assign.labels - 1])
        base = membership_for(dm, assign)
        moved = membership_for(dm, relabeled)
        index = permutation - 1
        np.testing.assert_allclose(moved.delta_mk[np.ix_(index, index)], base.delta_mk, atol=1e-12)
        self.assertAlmostEqual(moved.delta_T, base.delta_T, delta=1e-12)

    def test_gamma_must_be_positive(self):
        with self.assertRaises(InvalidInputError):
            membership_from_gamma([[1.0, 0.0], [2.0, 1.0]])


class ThresholdTests(SimpleTestCase):
    def setUp(self):
        self.table_a = pd.read_csv(TESTDATA / 'threshold_before.csv').to_numpy()
        self.table_b = pd.read_csv(TESTDATA / 'threshold_after.csv').to_numpy()
        # reciprocal entries as gamma reproduce the reference rows exactly
        self.reference = membership_from_gamma(1.0 / self.table_a)

    def test_reproduces_reference_transform(self):
        thresholded = apply_threshold(self.reference, 0.1)
        np.testing.assert_allclose(thresholded.delta_mk, self.table_b, atol=0.001)
        np.testing.assert_allclose(thresholded.delta_mk.sum(axis=1), 1.0, atol=1e-12)
        self.assertTrue(thresholded.thresholded)

    def test_keeps_gamma_and_weights(self):
        thresholded = apply_threshold(self.reference, 0.1)
        np.testing.assert_array_equal(thresholded.gamma, self.reference.gamma)
        expected = np.sum(np.diag(thresholded.delta_mk) * self.reference.delta_m_dot)
        self.assertAlmostEqual(thresholded.delta_T, expected, delta=1e-15)
        self.assertGreater(thresholded.delta_T, self.reference.delta_T)

    def test_zero_threshold_is_identity(self):
        thresholded = apply_threshold(self.reference, 0.0)
        np.testing.assert_array_equal(thresholded.delta_mk, self.reference.delta_mk)
        self.assertEqual(thresholded.delta_T, self.reference.delta_T)

    def test_diagonal_is_never_zeroed(self):
        mm = membership_from_gamma([[10.0, 1.0], [1.0, 1.0]])
        thresholded = apply_threshold(mm, 0.5)
        self.assertGreater(thresholded.delta_mk[0, 0], 0)

    def test_fully_separated_clusters_reach_exactly_one(self):
        mm = membership_from_gamma([[1.0, 100.0, 300.0], [100.0, 3.0, 100.0], [300.0, 100.0, 7.0]])
        thresholded = apply_threshold(mm, 0.1)
        np.testing.assert_array_equal(np.diag(thresholded.delta_mk), 1.0)
        self.assertEqual(thresholded.delta_T, 1.0)

    def test_delta_T_never_exceeds_one(self):
        spec = scenario_by_name('nested-sd05', 1.0)
        for seed in (settings.VALIDITY['SEED'], 1, 2, 3):
            dm = squared_distance_matrix(sample(spec, seed))
            tree = complete_linkage(dm)
            for k in range(2, 8):
                thresholded = apply_threshold(membership_for(dm, cut(tree, k)), 0.1)
                self.assertGreater(thresholded.delta_T, 0.0)
                self.assertLessEqual(thresholded.delta_T, 1.0)
                phi_ratio(min(thresholded.delta_T, 1.0 - DEFAULT_DELTA_T_CLAMP))

    def test_rejects_threshold_of_one(self):
        with self.assertRaises(InvalidInputError):
            apply_threshold(self.reference, 1.0)

    def test_rejects_second_threshold(self):
        with self.assertRaises(InvalidInputError):
            apply_threshold(apply_threshold(self.reference, 0.1), 0.1)


class MembershipSerializerTests(SimpleTestCase):
    def test_renders_json(self):
        mm = membership_for(*four_points())
        payload = MembershipMatrixSerializer(mm).data
        self.assertEqual(payload['k'], 2)
        self.assertEqual(payload['gamma'], [[1.0, 201.0], [201.0, 1.0]])
        self.assertIn(b'"delta_T"', JSONRenderer().render(payload))
