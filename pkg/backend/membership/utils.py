"""
Degree of closeness and degree of membership.

For a partition into k clusters over a squared distance matrix:

    mean_d2[i, c]  mean squared distance from observation i to the members of
                   cluster c, self-distance included when i is in c
    delta_ik[i, c] reciprocal mean_d2, normalised over clusters
    gamma[m, c]    sum of mean_d2[i, c] over the members i of cluster m
    delta_mk[m, c] reciprocal gamma, normalised over c

delta_T weights the diagonal of delta_mk by each membership's share of the
reciprocal-gamma mass, which reduces to trace(1/gamma) / sum(1/gamma).
"""
import logging
from dataclasses import dataclass, replace

import numpy as np

from validitykit.exceptions import DegenerateClusterError, InvalidInputError, UnsupportedKError
from geometry.utils import DistanceMatrix
from linkage.utils import ClusterAssignment

logger = logging.getLogger(__name__)

# With a single cluster every observation belongs wholly to it.
SINGLE_CLUSTER_DELTA_T = 1.0


@dataclass(frozen=True)
class ClosenessMatrix:
    delta_ik: np.ndarray
    mean_d2: np.ndarray


@dataclass(frozen=True)
class MembershipMatrix:
    gamma: np.ndarray
    delta_mk: np.ndarray
    delta_dot_k: np.ndarray
    delta_m_dot: np.ndarray
    delta_T: float
    thresholded: bool = False
    threshold: float = 0.0

    @property
    def k(self):
        return self.delta_mk.shape[0]


def _require_k_above_one(k):
    if k < 2:
        raise UnsupportedKError(
            f"the degree of membership may only be considered at k > 1 (got k={k})"
        )


def degree_of_closeness(dm: DistanceMatrix, assign: ClusterAssignment) -> ClosenessMatrix:
    if assign.n != dm.n:
        raise InvalidInputError(f"assignment covers {assign.n} observations, distance matrix {dm.n}")
    _require_k_above_one(assign.k)

    mean_d2 = dm.d2 @ assign.indicator() / assign.sizes
    zero = mean_d2 == 0
    on_cluster = zero.any(axis=1)
    delta = np.empty_like(mean_d2)

    inverse = 1.0 / mean_d2[~on_cluster]
    delta[~on_cluster] = inverse / inverse.sum(axis=1, keepdims=True)

    # an observation sitting on a cluster splits itself over the zero-distance clusters
    hits = zero[on_cluster].astype(float)
    delta[on_cluster] = hits / hits.sum(axis=1, keepdims=True)

    return ClosenessMatrix(delta_ik=delta, mean_d2=mean_d2)


def membership_from_gamma(gamma) -> MembershipMatrix:
    gamma = np.array(gamma, dtype=float)
    if gamma.ndim != 2 or gamma.shape[0] != gamma.shape[1]:
        raise InvalidInputError(f"gamma must be a square matrix, got shape {gamma.shape}")
    _require_k_above_one(gamma.shape[0])
    if not np.all(np.isfinite(gamma)) or np.any(gamma <= 0):
        raise InvalidInputError("gamma entries must be finite and positive")

    inverse = 1.0 / gamma
    total = inverse.sum()
    row_mass = inverse.sum(axis=1)
    delta_mk = inverse / row_mass[:, None]
    delta_m_dot = row_mass / total
    return MembershipMatrix(
        gamma=gamma,
        delta_mk=delta_mk,
        delta_dot_k=inverse.sum(axis=0) / total,
        delta_m_dot=delta_m_dot,
        delta_T=float(np.sum(np.diag(delta_mk) * delta_m_dot)),
    )


def membership_matrix(closeness: ClosenessMatrix, assign: ClusterAssignment) -> MembershipMatrix:
    _require_k_above_one(assign.k)
    gamma = assign.indicator().T @ closeness.mean_d2

    sizes = assign.sizes
    for m in np.flatnonzero((sizes == 1) & (np.diag(gamma) == 0)):
        # singleton: its own-cluster distance is zero by construction
        gamma[m, m] = 1.0
        logger.debug(f"Singleton override applied to cluster {m + 1} of {assign.k}")

    zeros = np.argwhere(gamma == 0)
    if len(zeros):
        m, c = zeros[0]
        raise DegenerateClusterError(int(m) + 1, int(c) + 1)
    return membership_from_gamma(gamma)


def membership_for(dm: DistanceMatrix, assign: ClusterAssignment) -> MembershipMatrix:
    return membership_matrix(degree_of_closeness(dm, assign), assign)


def apply_threshold(mm: MembershipMatrix, threshold: float) -> MembershipMatrix:
    """
    Zero off-diagonal delta_mk entries strictly below threshold and renormalise
    the affected rows. delta_T is recomputed from the new diagonal with the
    original membership weights; gamma is kept.
    """
    if mm.thresholded:
        raise InvalidInputError(f"membership matrix is already thresholded at {mm.threshold}")
    if not 0 <= threshold < 1:
        raise InvalidInputError(f"threshold must lie in [0, 1), got {threshold}")

    delta = mm.delta_mk.copy()
    below = delta < threshold
    np.fill_diagonal(below, False)
    changed = below.any(axis=1)
    delta[below] = 0.0
    delta[changed] /= delta[changed].sum(axis=1, keepdims=True)

    diagonal = np.diag(delta)
    # rounding in the weighted sum can land either side of 1
    delta_T = 1.0 if np.all(diagonal == 1) else min(float(np.sum(diagonal * mm.delta_m_dot)), 1.0)
    return replace(
        mm,
        delta_mk=delta,
        delta_T=delta_T,
        thresholded=True,
        threshold=float(threshold),
    )
