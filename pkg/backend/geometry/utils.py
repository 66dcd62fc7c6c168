"""
Distance and rotation helpers over a Dataset.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from validitykit.exceptions import InvalidInputError
from .datasets import Dataset

logger = logging.getLogger(__name__)

CENTERED_TOLERANCE = 1e-9


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric n x n matrix of squared Euclidean distances, zero diagonal."""
    d2: np.ndarray

    def __post_init__(self):
        d2 = np.array(self.d2, dtype=float)
        if d2.ndim != 2 or d2.shape[0] != d2.shape[1] or d2.shape[0] < 1:
            raise InvalidInputError(f"distance matrix must be square, got shape {d2.shape}")
        if not np.all(np.isfinite(d2)):
            raise InvalidInputError("distance matrix has non-finite entries")
        if np.any(d2 < 0):
            raise InvalidInputError("distance matrix has negative entries")
        if np.any(np.diag(d2) != 0):
            raise InvalidInputError("distance matrix diagonal must be zero")
        if not np.allclose(d2, d2.T, rtol=1e-12, atol=0):
            raise InvalidInputError("distance matrix is not symmetric")
        d2.setflags(write=False)
        object.__setattr__(self, 'd2', d2)

    @property
    def n(self):
        return self.d2.shape[0]

    def euclidean(self):
        """Plain (non-squared) Euclidean distances."""
        return np.sqrt(self.d2)

    def scaled(self, factor):
        return DistanceMatrix(self.d2 * factor)


def squared_distance_matrix(data: Dataset) -> DistanceMatrix:
    if data.n == 1:
        return DistanceMatrix(np.zeros((1, 1)))
    return DistanceMatrix(squareform(pdist(data.values, metric='sqeuclidean')))


def center_columns(data: Dataset) -> Dataset:
    return data.with_values(data.values - data.values.mean(axis=0))


def _complete_basis(axes, p):
    """Extend orthonormal columns to a basis of R^p from the canonical vectors, in order."""
    basis = [axes[:, j] for j in range(axes.shape[1])]
    for j in range(p):
        if len(basis) == p:
            break
        candidate = np.zeros(p)
        candidate[j] = 1.0
        # two passes keep the result orthogonal to working precision
        for _ in range(2):
            for vector in basis:
                candidate = candidate - (vector @ candidate) * vector
        norm = np.linalg.norm(candidate)
        if norm > 1e-8:
            basis.append(candidate / norm)
    return np.column_stack(basis)


def principal_axes(data: Dataset) -> np.ndarray:
    """
    p x p orthonormal rotation whose columns are the principal axes of
    column-centered data, by descending singular value.

    Each axis is signed so its largest-magnitude component is positive. Axes
    for zero singular values are completed deterministically by Gram-Schmidt
    over the canonical vectors.
    """
    x = data.values
    n, p = x.shape
    if n < 2:
        raise InvalidInputError("principal axes need at least 2 observations")
    scale = max(1.0, float(np.abs(x).max()))
    if np.any(np.abs(x.mean(axis=0)) > CENTERED_TOLERANCE * scale):
        raise InvalidInputError("principal axes need column-centered data")

    _, s, vt = np.linalg.svd(x, full_matrices=False)
    rank = 0
    if s.size and s[0] > 0:
        rank = int(np.sum(s > s[0] * max(n, p) * np.finfo(float).eps))
    if rank < p:
        logger.debug(f"Rank {rank} < {p}: completing principal axes")
    rotation = _complete_basis(vt[:rank].T, p)

    for j in range(p):
        pivot = np.argmax(np.abs(rotation[:, j]))
        if rotation[pivot, j] < 0:
            rotation[:, j] = -rotation[:, j]
    return rotation
