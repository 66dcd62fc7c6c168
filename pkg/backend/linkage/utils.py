"""
Complete-linkage agglomerative clustering over squared distances.

Ties between pairs at the same linkage distance go to the lexicographically
smallest pair, where each cluster is identified by its smallest member index.
This is the order R's hclust merges in, and the Iris golden values depend on
it (the petal data holds many duplicate points).

Node ids: leaves are 1..n, the merge at step s (0-based) creates node n+s+1.
"""
import logging
from dataclasses import dataclass

import numpy as np

from validitykit.exceptions import InvalidInputError
from geometry.utils import DistanceMatrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Dendrogram:
    n: int
    left: np.ndarray
    right: np.ndarray
    height: np.ndarray

    @property
    def merges(self):
        return list(zip(self.left.tolist(), self.right.tolist(), self.height.tolist()))

    def representatives(self):
        """Smallest member index (0-based) of each side of every merge."""
        smallest = np.empty(2 * self.n - 1, dtype=int)
        smallest[:self.n] = np.arange(self.n)
        a = np.empty(self.n - 1, dtype=int)
        b = np.empty(self.n - 1, dtype=int)
        for step in range(self.n - 1):
            a[step] = smallest[self.left[step] - 1]
            b[step] = smallest[self.right[step] - 1]
            smallest[self.n + step] = min(a[step], b[step])
        return a, b


@dataclass(frozen=True)
class ClusterAssignment:
    """Labels 1..k over n observations; every label occurs."""
    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=int)
        if labels.ndim != 1 or labels.size == 0:
            raise InvalidInputError("labels must be a non-empty vector")
        k = int(labels.max())
        if labels.min() < 1 or np.unique(labels).size != k:
            raise InvalidInputError(f"labels must cover 1..{k} with no empty cluster")
        labels.setflags(write=False)
        object.__setattr__(self, 'labels', labels)

    @property
    def n(self):
        return self.labels.size

    @property
    def k(self):
        return int(self.labels.max())

    @property
    def sizes(self):
        return np.bincount(self.labels, minlength=self.k + 1)[1:]

    def indicator(self):
        """n x k 0/1 matrix, column m-1 marks cluster m."""
        return (self.labels[:, None] == np.arange(1, self.k + 1)[None, :]).astype(float)

    def partition(self):
        """Clusters as a set of frozensets of observation indices."""
        return {frozenset(np.flatnonzero(self.labels == m).tolist()) for m in range(1, self.k + 1)}


def _row_minimum(d, i):
    tail = d[i, i + 1:]
    if tail.size == 0:
        return np.inf, -1
    j = int(np.argmin(tail))
    return tail[j], i + 1 + j


def complete_linkage(dm: DistanceMatrix) -> Dendrogram:
    n = dm.n
    if n < 2:
        raise InvalidInputError("complete linkage needs at least 2 observations")

    d = np.array(dm.d2, dtype=float)
    np.fill_diagonal(d, np.inf)
    node = np.arange(1, n + 1)
    row_min = np.empty(n)
    row_arg = np.empty(n, dtype=int)
    for i in range(n):
        row_min[i], row_arg[i] = _row_minimum(d, i)

    left = np.empty(n - 1, dtype=int)
    right = np.empty(n - 1, dtype=int)
    height = np.empty(n - 1)
    for step in range(n - 1):
        s = int(np.argmin(row_min))
        t = int(row_arg[s])
        left[step], right[step], height[step] = node[s], node[t], row_min[s]

        merged = np.maximum(d[s], d[t])
        merged[s] = np.inf
        d[s, :] = merged
        d[:, s] = merged
        d[t, :] = np.inf
        d[:, t] = np.inf
        node[s] = n + step + 1
        row_min[t], row_arg[t] = np.inf, -1

        for i in np.flatnonzero((row_arg == s) | (row_arg == t)).tolist() + [s]:
            row_min[i], row_arg[i] = _row_minimum(d, i)

    logger.debug(f"Complete linkage over {n} observations, final height {height[-1]}")
    return Dendrogram(n=n, left=left, right=right, height=height)


def _labels_from_representatives(rep):
    return np.searchsorted(np.unique(rep), rep) + 1


def cuts(tree: Dendrogram, ks) -> dict:
    """Cut the tree at every k in ks in one pass over the merges."""
    wanted = set(int(k) for k in ks)
    for k in wanted:
        if not 1 <= k <= tree.n:
            raise InvalidInputError(f"cannot cut {tree.n} observations into k={k} clusters")

    a, b = tree.representatives()
    rep = np.arange(tree.n)
    result = {}
    for step in range(tree.n):
        k = tree.n - step
        if k in wanted:
            result[k] = ClusterAssignment(_labels_from_representatives(rep))
        if step < tree.n - 1:
            keep, absorbed = min(a[step], b[step]), max(a[step], b[step])
            rep[rep == absorbed] = keep
    return result


def cut(tree: Dendrogram, k: int) -> ClusterAssignment:
    """Undo the last k-1 merges; subtrees are labelled by smallest member index."""
    return cuts(tree, [k])[int(k)]


def to_scipy_linkage(tree: Dendrogram, squared=False) -> np.ndarray:
    """SciPy linkage matrix (0-based ids); heights square-rooted unless squared."""
    counts = np.ones(2 * tree.n - 1)
    for step in range(tree.n - 1):
        counts[tree.n + step] = counts[tree.left[step] - 1] + counts[tree.right[step] - 1]
    heights = tree.height if squared else np.sqrt(tree.height)
    return np.column_stack([tree.left - 1, tree.right - 1, heights, counts[tree.n:]]).astype(float)
