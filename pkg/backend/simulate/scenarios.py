"""
Simulation scenarios: uniform boxes and isotropic Gaussian mixtures.

Cluster sizes are fixed per replicate. Gaussian draws use numpy's Ziggurat
normal sampler on the replicate's sample stream.
"""
import logging
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from validitykit.exceptions import InvalidInputError
from validitykit.seeding import SAMPLE_STREAM, stream
from geometry.datasets import Dataset

logger = logging.getLogger(__name__)

UNIFORM = 'uniform'
GAUSSIAN_MIXTURE = 'gaussian-mixture'
SCENARIO_KINDS = (UNIFORM, GAUSSIAN_MIXTURE)


@dataclass(frozen=True)
class ScenarioSpec:
    """
    A data-generating scenario.

    Uniform scenarios draw ``sizes[0]`` points inside ``lower``..``upper``.
    Gaussian mixtures draw ``sizes[j]`` points around ``centers[j]`` with
    standard deviation ``sd`` in every coordinate.
    """
    name: str
    kind: str
    dims: int
    sizes: Tuple[int, ...]
    lower: Tuple[float, ...] = field(default=())
    upper: Tuple[float, ...] = field(default=())
    centers: Tuple[Tuple[float, ...], ...] = field(default=())
    sd: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, 'sizes', tuple(int(s) for s in self.sizes))
        object.__setattr__(self, 'lower', tuple(float(v) for v in self.lower))
        object.__setattr__(self, 'upper', tuple(float(v) for v in self.upper))
        object.__setattr__(self, 'centers', tuple(tuple(float(v) for v in c) for c in self.centers))

        if self.kind not in SCENARIO_KINDS:
            raise InvalidInputError(f"unknown scenario kind {self.kind!r}")
        if self.dims < 1:
            raise InvalidInputError(f"dims must be at least 1, got {self.dims}")
        if not self.sizes or min(self.sizes) < 1:
            raise InvalidInputError("every group needs at least one observation")

        if self.kind == UNIFORM:
            if len(self.sizes) != 1:
                raise InvalidInputError("a uniform scenario has exactly one size")
            if len(self.lower) != self.dims or len(self.upper) != self.dims:
                raise InvalidInputError(f"bounds must have {self.dims} entries")
            for j, (low, high) in enumerate(zip(self.lower, self.upper)):
                if not low < high:
                    raise InvalidInputError(f"dimension {j + 1}: lower bound {low} is not below {high}")
        else:
            if len(self.centers) != len(self.sizes):
                raise InvalidInputError(f"{len(self.centers)} centers for {len(self.sizes)} sizes")
            for j, center in enumerate(self.centers):
                if len(center) != self.dims:
                    raise InvalidInputError(f"center {j + 1} has {len(center)} coordinates, expected {self.dims}")
            if not self.sd > 0:
                raise InvalidInputError(f"sd must be positive, got {self.sd}")

    @property
    def n(self):
        return sum(self.sizes)

    @property
    def groups(self):
        return len(self.sizes)


def builtin_scenarios(gaussian_sd: float = 1.0):
    """The six study scenarios; ``gaussian_sd`` applies to the four-cluster ones."""
    four_2d = ((-4, -6), (-8, 1), (4, -5), (-6, 9))
    nested = ((12, -15), (15, -18), (-16, -15), (-16, -18), (17, 14), (14, 11))
    nested_sizes = (25, 25, 15, 15, 10, 10)
    return [
        ScenarioSpec('uniform', UNIFORM, 6, sizes=(100,), lower=(0,) * 6, upper=(1,) * 6),
        ScenarioSpec('four-2d', GAUSSIAN_MIXTURE, 2, sizes=(25, 25, 10, 10), centers=four_2d, sd=gaussian_sd),
        ScenarioSpec('four-2d-n5', GAUSSIAN_MIXTURE, 2, sizes=(5, 5, 5, 5), centers=four_2d, sd=gaussian_sd),
        ScenarioSpec(
            'four-4d', GAUSSIAN_MIXTURE, 4, sizes=(30, 30, 20, 15),
            centers=((11, -8, 0, -3), (-8, 4, 4, 2), (9, -2, -2, 3), (3, 7, -4, 0)), sd=gaussian_sd,
        ),
        ScenarioSpec('nested-sd05', GAUSSIAN_MIXTURE, 2, sizes=nested_sizes, centers=nested, sd=0.5),
        ScenarioSpec('nested-sd1', GAUSSIAN_MIXTURE, 2, sizes=nested_sizes, centers=nested, sd=1.0),
    ]


def scenario_by_name(name: str, gaussian_sd: float = 1.0) -> ScenarioSpec:
    for spec in builtin_scenarios(gaussian_sd):
        if spec.name == name:
            return spec
    known = ', '.join(s.name for s in builtin_scenarios())
    raise InvalidInputError(f"unknown scenario {name!r} (known: {known})")


def sample_with_labels(spec: ScenarioSpec, seed: int):
    """One draw of the scenario and the generating group (1-based) of each row."""
    rng = stream(seed, SAMPLE_STREAM)
    if spec.kind == UNIFORM:
        values = rng.uniform(spec.lower, spec.upper, size=(spec.n, spec.dims))
        labels = np.ones(spec.n, dtype=int)
    else:
        values = np.vstack([
            np.asarray(center) + spec.sd * rng.standard_normal((size, spec.dims))
            for center, size in zip(spec.centers, spec.sizes)
        ])
        labels = np.repeat(np.arange(1, spec.groups + 1), spec.sizes)
    return Dataset(values, source=spec.name), labels


def sample(spec: ScenarioSpec, seed: int) -> Dataset:
    return sample_with_labels(spec, seed)[0]
