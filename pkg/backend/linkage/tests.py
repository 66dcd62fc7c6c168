import numpy as np
from django.test import SimpleTestCase
from scipy.cluster.hierarchy import fcluster, is_valid_linkage, linkage
from scipy.spatial.distance import pdist

from validitykit.exceptions import InvalidInputError
from geometry.datasets import Dataset
from geometry.utils import DistanceMatrix, squared_distance_matrix
from .utils import ClusterAssignment, Dendrogram, complete_linkage, cut, cuts, to_scipy_linkage

FOUR_POINTS = Dataset([0.0, 1.0, 10.0, 11.0])


def random_points(seed, n=25, p=2):
    return Dataset(np.random.default_rng(seed).standard_normal((n, p)))


class CompleteLinkageTests(SimpleTestCase):
    def test_four_points(self):
        tree = complete_linkage(squared_distance_matrix(FOUR_POINTS))
        self.assertEqual(tree.merges, [(1, 2, 1.0), (3, 4, 1.0), (5, 6, 121.0)])

    def test_equidistant_points_take_lowest_pair(self):
        d2 = np.ones((3, 3)) - np.eye(3)
        tree = complete_linkage(DistanceMatrix(d2))
        self.assertEqual(tree.merges[0][:2], (1, 2))
        self.assertEqual(tree.merges[1][2], 1.0)

    def test_two_points(self):
        tree = complete_linkage(squared_distance_matrix(Dataset([2.0, 5.0])))
        self.assertEqual(tree.merges, [(1, 2, 9.0)])

    def test_single_point_is_rejected(self):
        with self.assertRaises(InvalidInputError):
            complete_linkage(squared_distance_matrix(Dataset([1.0])))

    def test_heights_are_monotone(self):
        for seed in range(5):
            tree = complete_linkage(squared_distance_matrix(random_points(seed)))
            self.assertTrue(np.all(np.diff(tree.height) >= 0))

    def test_matches_scipy_on_tie_free_data(self):
        data = random_points(11, n=30, p=3)
        tree = complete_linkage(squared_distance_matrix(data))
        reference = linkage(pdist(data.values), method='complete')
        np.testing.assert_allclose(np.sqrt(tree.height), reference[:, 2], rtol=1e-10)
        for k in range(2, 8):
            expected = ClusterAssignment(fcluster(reference, k, criterion='maxclust'))
            self.assertEqual(cut(tree, k).partition(), expected.partition())

    def test_scipy_export(self):
        data = random_points(12, n=15)
        tree = complete_linkage(squared_distance_matrix(data))
        z = to_scipy_linkage(tree)
        self.assertTrue(is_valid_linkage(z))
        self.assertEqual(z[-1, 3], 15)
        np.testing.assert_allclose(to_scipy_linkage(tree, squared=True)[:, 2], tree.height)
        for k in (2, 4):
            exported = ClusterAssignment(fcluster(z, k, criterion='maxclust'))
            self.assertEqual(cut(tree, k).partition(), exported.partition())


class CutTests(SimpleTestCase):
    def setUp(self):
        self.tree = complete_linkage(squared_distance_matrix(FOUR_POINTS))

    def test_two_clusters(self):
        self.assertEqual(cut(self.tree, 2).labels.tolist(), [1, 1, 2, 2])

    def test_root_and_leaves(self):
        self.assertEqual(cut(self.tree, 1).labels.tolist(), [1, 1, 1, 1])
        self.assertEqual(cut(self.tree, 4).labels.tolist(), [1, 2, 3, 4])

    def test_out_of_range(self):
        with self.assertRaises(InvalidInputError):
            cut(self.tree, 5)
        with self.assertRaises(InvalidInputError):
            cut(self.tree, 0)

    def test_every_k_has_k_clusters_and_refines(self):
        tree = complete_linkage(squared_distance_matrix(random_points(4, n=20)))
        assignments = cuts(tree, range(1, 21))
        for k, assignment in assignments.items():
            self.assertEqual(assignment.k, k)
            self.assertTrue(np.all(assignment.sizes > 0))
        for k in range(1, 20):
            coarse = assignments[k].partition()
            for cluster in assignments[k + 1].partition():
                self.assertTrue(any(cluster <= parent for parent in coarse))

    def test_labels_follow_smallest_member(self):
        assignment = cut(complete_linkage(squared_distance_matrix(random_points(8))), 5)
        firsts = [int(np.flatnonzero(assignment.labels == m)[0]) for m in range(1, 6)]
        self.assertEqual(firsts, sorted(firsts))

    def test_cut_does_not_depend_on_merge_side(self):
        # the larger subtree representative sits on the left of the first merge
        tree = Dendrogram(n=3, left=np.array([3, 1]), right=np.array([2, 4]), height=np.array([1.0, 5.0]))
        assignments = cuts(tree, [1, 2, 3])
        self.assertEqual(assignments[1].labels.tolist(), [1, 1, 1])
        self.assertEqual(assignments[2].labels.tolist(), [1, 2, 2])
        self.assertEqual(assignments[3].labels.tolist(), [1, 2, 3])

    def test_relabeling_invariance(self):
        data = random_points(21, n=18)
        order = np.random.default_rng(0).permutation(data.n)
        tree = complete_linkage(squared_distance_matrix(data))
        shuffled = complete_linkage(squared_distance_matrix(Dataset(data.values[order])))
        for k in (2, 3, 5):
            back = cut(shuffled, k).partition()
            mapped = {frozenset(int(order[i]) for i in cluster) for cluster in back}
            self.assertEqual(mapped, cut(tree, k).partition())


class ClusterAssignmentTests(SimpleTestCase):
    def test_rejects_empty_cluster(self):
        with self.assertRaises(InvalidInputError):
            ClusterAssignment([1, 1, 3])

    def test_indicator_and_sizes(self):
        assignment = ClusterAssignment([2, 1, 2])
        self.assertEqual(assignment.sizes.tolist(), [1, 2])
        self.assertEqual(assignment.indicator().tolist(), [[0, 1], [1, 0], [0, 1]])
