"""
Baseline cluster-number criteria: sums of squares, Calinski-Harabasz,
average silhouette and the GAP statistic with the 1-standard-error rule.

Every criterion is evaluated on cuts of a complete-linkage tree.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from sklearn.metrics import silhouette_samples

from validitykit.exceptions import InvalidInputError, UnsupportedKError
from validitykit.seeding import GAP_PCA_STREAM, GAP_UNIFORM_STREAM, stream
from geometry.datasets import Dataset
from geometry.utils import DistanceMatrix, center_columns, principal_axes, squared_distance_matrix
from linkage.utils import ClusterAssignment, Dendrogram, complete_linkage, cuts
from selection.utils import smallest_argmax

logger = logging.getLogger(__name__)

CH_STANDARD = 'standard'
CH_AS_PRINTED = 'as-printed'
CH_FORMULAS = (CH_STANDARD, CH_AS_PRINTED)

REFERENCE_UNIFORM = 'uniform'
REFERENCE_PCA = 'pca'
REFERENCE_KINDS = (REFERENCE_UNIFORM, REFERENCE_PCA)

MIN_BOOTSTRAPS = 10

# exponent on pairwise distances in the pooled GAP dispersion; 2 is the centroid sum of squares
DISPERSION_POWERS = (1, 2)
DEFAULT_DISPERSION_POWER = 1


@dataclass(frozen=True)
class IndexSeries:
    kind: str
    value_by_k: Dict[int, float]
    selected_k: int
    infinite_k: Tuple[int, ...] = field(default=())


@dataclass(frozen=True)
class GapSeries:
    k_min: int
    k_max: int
    gap_by_k: Dict[int, float]
    se_by_k: Dict[int, float]
    log_w_by_k: Dict[int, float]
    expected_log_w_by_k: Dict[int, float]
    B: int
    reference_kind: str
    seed: int
    selected_k: int
    infinite_k: Tuple[int, ...] = field(default=())
    d_power: int = DEFAULT_DISPERSION_POWER


def _centroids(x, assign):
    return (assign.indicator().T @ x) / assign.sizes[:, None]


def within_ss(data: Dataset, assign: ClusterAssignment) -> float:
    x = data.values
    residual = x - _centroids(x, assign)[assign.labels - 1]
    return float(np.sum(residual ** 2))


def between_ss(data: Dataset, assign: ClusterAssignment) -> float:
    x = data.values
    offsets = _centroids(x, assign) - x.mean(axis=0)
    return float(np.sum(assign.sizes * np.sum(offsets ** 2, axis=1)))


def total_ss(data: Dataset) -> float:
    return float(np.sum((data.values - data.values.mean(axis=0)) ** 2))


def calinski_harabasz(data: Dataset, assign: ClusterAssignment, formula: str = CH_STANDARD) -> float:
    """
    Variance ratio B/(k-1) over W/(n-k). The as-printed variant swaps the
    degrees of freedom: B/(n-k) over W/(k-1).
    """
    n, k = assign.n, assign.k
    if k < 2:
        raise UnsupportedKError(f"Calinski-Harabasz needs k > 1 (got k={k})")
    if n <= k:
        raise InvalidInputError(f"Calinski-Harabasz needs n > k (n={n}, k={k})")
    if formula not in CH_FORMULAS:
        raise InvalidInputError(f"unknown Calinski-Harabasz formula {formula!r}")

    w = within_ss(data, assign)
    b = between_ss(data, assign)
    if w == 0:
        logger.warning(f"Zero within-cluster sum of squares at k={k}: index is infinite")
        return math.inf
    if formula == CH_STANDARD:
        return (b / (k - 1)) / (w / (n - k))
    return (b / (n - k)) / (w / (k - 1))


def silhouette(distances, assign: ClusterAssignment) -> float:
    """Mean silhouette over plain Euclidean distances; singletons score 0."""
    if assign.k < 2:
        raise UnsupportedKError(f"silhouette needs k > 1 (got k={assign.k})")
    if assign.k == assign.n:
        return 0.0
    distances = np.asarray(distances, dtype=float)
    return float(np.mean(silhouette_samples(distances, assign.labels, metric='precomputed')))


def select_by_argmax(series: IndexSeries) -> int:
    return smallest_argmax(series.value_by_k)


def _index_series(kind, values):
    infinite = tuple(k for k, value in sorted(values.items()) if math.isinf(value))
    return IndexSeries(kind=kind, value_by_k=values, selected_k=smallest_argmax(values), infinite_k=infinite)


def ch_series(data: Dataset, tree: Dendrogram, k_max: int, formula: str = CH_STANDARD) -> IndexSeries:
    values = {
        k: calinski_harabasz(data, assign, formula)
        for k, assign in sorted(cuts(tree, range(2, k_max + 1)).items())
    }
    return _index_series('ch', values)


def silhouette_series(dm: DistanceMatrix, tree: Dendrogram, k_max: int) -> IndexSeries:
    distances = dm.euclidean()
    values = {
        k: silhouette(distances, assign)
        for k, assign in sorted(cuts(tree, range(2, k_max + 1)).items())
    }
    return _index_series('silhouette', values)


def pooled_dispersion(dm: DistanceMatrix, assign: ClusterAssignment, d_power: int = DEFAULT_DISPERSION_POWER) -> float:
    """
    Sum over clusters of the pairwise distances to the power d_power, each
    cluster divided by twice its size. d_power=2 equals within_ss.
    """
    if d_power not in DISPERSION_POWERS:
        raise InvalidInputError(f"d_power must be one of {DISPERSION_POWERS}, got {d_power}")
    distances = dm.euclidean() if d_power == 1 else dm.d2
    indicator = assign.indicator()
    per_cluster = np.sum(indicator * (distances @ indicator), axis=0)
    return float(np.sum(per_cluster / (2 * assign.sizes)))


def log_dispersion(dm: DistanceMatrix, tree: Dendrogram, k_max: int,
                   d_power: int = DEFAULT_DISPERSION_POWER) -> Dict[int, float]:
    result = {}
    for k, assign in sorted(cuts(tree, range(1, k_max + 1)).items()):
        w = pooled_dispersion(dm, assign, d_power)
        if w == 0:
            logger.warning(f"Zero pooled dispersion at k={k}")
        result[k] = math.log(w) if w > 0 else -math.inf
    return result


class _ReferenceSampler:
    """Draws n points uniformly over the data's box, optionally in principal-axis coordinates."""

    def __init__(self, data: Dataset, kind: str, seed: int):
        self.n = data.n
        self.seed = seed
        x = data.values
        if kind == REFERENCE_UNIFORM:
            self.stream_key = GAP_UNIFORM_STREAM
            self.mean = np.zeros(data.p)
            self.rotation = np.eye(data.p)
            rotated = x
        else:
            self.stream_key = GAP_PCA_STREAM
            centered = center_columns(data)
            self.mean = x.mean(axis=0)
            self.rotation = principal_axes(centered)
            rotated = centered.values @ self.rotation
        self.low = rotated.min(axis=0)
        self.high = rotated.max(axis=0)

    def draw(self, b):
        rng = stream(self.seed, self.stream_key, b)
        box = rng.uniform(self.low, self.high, size=(self.n, self.low.size))
        return Dataset(box @ self.rotation.T + self.mean)


def _reference_log_w(sampler, k_max, d_power, b):
    dm = squared_distance_matrix(sampler.draw(b))
    return log_dispersion(dm, complete_linkage(dm), k_max, d_power)


def gap_statistic(data: Dataset, k_max: int = 10, B: int = 100, reference_kind: str = REFERENCE_UNIFORM,
                  seed: int = 0, tree: Optional[Dendrogram] = None, map_fn=map,
                  d_power: int = DEFAULT_DISPERSION_POWER) -> GapSeries:
    """
    GAP_k = mean_b log W_kb - log W_k over B reference draws, for k = 1..k_max.
    W_k pools the within-cluster pairwise distances to the power d_power,
    see pooled_dispersion.

    The reference spread is sd_b(log W_kb) with the n-1 divisor, inflated by
    sqrt(1 + 1/B). The selected k is the smallest with
    GAP_k >= GAP_(k+1) - se_(k+1), or k_max when none qualifies.
    """
    if B < MIN_BOOTSTRAPS:
        raise InvalidInputError(f"GAP needs at least {MIN_BOOTSTRAPS} reference draws, got B={B}")
    if k_max < 2:
        raise InvalidInputError(f"GAP needs k_max >= 2, got {k_max}")
    if k_max > data.n:
        raise InvalidInputError(f"k_max={k_max} exceeds n={data.n}")
    if reference_kind not in REFERENCE_KINDS:
        raise InvalidInputError(f"unknown GAP reference {reference_kind!r}")
    if d_power not in DISPERSION_POWERS:
        raise InvalidInputError(f"d_power must be one of {DISPERSION_POWERS}, got {d_power}")
    if np.all(data.values == data.values[0]):
        raise InvalidInputError("GAP is undefined when all observations are identical")

    dm = squared_distance_matrix(data)
    if tree is None:
        tree = complete_linkage(dm)
    log_w = log_dispersion(dm, tree, k_max, d_power)

    sampler = _ReferenceSampler(data, reference_kind, seed)
    draws = list(map_fn(lambda b: _reference_log_w(sampler, k_max, d_power, b), range(B)))
    ks = list(range(1, k_max + 1))
    reference = np.array([[draw[k] for k in ks] for draw in draws])

    expected = reference.mean(axis=0)
    se = reference.std(axis=0, ddof=1) * math.sqrt(1 + 1 / B)
    gap = {k: float(expected[i] - log_w[k]) for i, k in enumerate(ks)}
    se_by_k = {k: float(se[i]) for i, k in enumerate(ks)}

    selected = k_max
    for k in ks[:-1]:
        if gap[k] >= gap[k + 1] - se_by_k[k + 1]:
            selected = k
            break

    logger.debug(f"GAP ({reference_kind}, B={B}, seed={seed}, d_power={d_power}) selects k={selected}")
    return GapSeries(
        k_min=1,
        k_max=k_max,
        gap_by_k=gap,
        se_by_k=se_by_k,
        log_w_by_k=log_w,
        expected_log_w_by_k={k: float(expected[i]) for i, k in enumerate(ks)},
        B=B,
        reference_kind=reference_kind,
        seed=seed,
        selected_k=selected,
        infinite_k=tuple(k for k in ks if math.isinf(gap[k])),
        d_power=d_power,
    )
