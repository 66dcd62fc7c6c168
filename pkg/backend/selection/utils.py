"""
Cluster-number selection from the degree of membership across k.

phi_k is the odds form of delta_T at k; the lag-1 ratio phi_k / phi_(k+1)
is indexed at k, and the selected k is the smallest k attaining its maximum.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional

from validitykit.exceptions import DegenerateClusterError, InfiniteOddsError, InvalidInputError
from geometry.utils import DistanceMatrix
from linkage.utils import Dendrogram, cuts
from membership.utils import apply_threshold, membership_for

logger = logging.getLogger(__name__)

DEFAULT_DELTA_T_CLAMP = 1e-12


def phi_ratio(delta_T: float) -> float:
    if not 0 < delta_T <= 1:
        raise InvalidInputError(f"delta_T must lie in (0, 1], got {delta_T}")
    if delta_T == 1:
        raise InfiniteOddsError("delta_T = 1 has infinite odds; clamp it below 1 first")
    return delta_T / (1.0 - delta_T)


def smallest_argmax(values_by_k: Dict[int, float]) -> int:
    """Smallest k attaining the maximum; NaN entries never win."""
    best_k, best = None, None
    for k in sorted(values_by_k):
        value = values_by_k[k]
        if value is None or math.isnan(value):
            continue
        if best is None or value > best:
            best_k, best = k, value
    if best_k is None:
        raise InvalidInputError("cannot select k from an empty series")
    return best_k


@dataclass(frozen=True)
class PhiSeries:
    k_min: int
    k_max: int
    delta_T_by_k: Dict[int, float]
    phi_by_k: Dict[int, float]
    phi1_by_k: Dict[int, float]
    selected_k: int
    threshold: Optional[float] = None

    @classmethod
    def from_delta_t(cls, delta_T_by_k, threshold=None, clamp=DEFAULT_DELTA_T_CLAMP):
        ks = sorted(delta_T_by_k)
        if len(ks) < 2:
            raise InvalidInputError("the lag-1 ratio needs delta_T at two or more k")
        phi = {}
        for k in ks:
            delta_T = delta_T_by_k[k]
            if delta_T > 1 - clamp:
                logger.debug(f"delta_T at k={k} clamped from {delta_T}")
                delta_T = 1 - clamp
            phi[k] = phi_ratio(delta_T)
        phi1 = {k: phi[k] / phi[k + 1] for k in ks[:-1]}
        return cls(
            k_min=ks[0],
            k_max=ks[-1],
            delta_T_by_k=dict(delta_T_by_k),
            phi_by_k=phi,
            phi1_by_k=phi1,
            selected_k=smallest_argmax(phi1),
            threshold=threshold,
        )


def delta_t_series(dm: DistanceMatrix, tree: Dendrogram, k_max: int, threshold=None):
    """delta_T for k = 2..k_max from cuts of one tree."""
    result = {}
    for k, assign in sorted(cuts(tree, range(2, k_max + 1)).items()):
        try:
            mm = membership_for(dm, assign)
        except DegenerateClusterError as e:
            raise e.at_k(k) from e
        if threshold is not None:
            mm = apply_threshold(mm, threshold)
        result[k] = mm.delta_T
    return result


def select_k(dm: DistanceMatrix, tree: Dendrogram, k_max: int = 10, threshold=None,
             clamp=DEFAULT_DELTA_T_CLAMP) -> PhiSeries:
    if k_max < 3:
        raise InvalidInputError(f"k_max must be at least 3 for one lag-1 ratio, got {k_max}")
    if k_max > dm.n - 1:
        raise InvalidInputError(f"k_max={k_max} exceeds n-1={dm.n - 1}")
    series = PhiSeries.from_delta_t(
        delta_t_series(dm, tree, k_max, threshold), threshold=threshold, clamp=clamp,
    )
    logger.debug(f"phi ratio selects k={series.selected_k} (threshold={threshold})")
    return series
