"""
Replication harness: sample a scenario R times, let every method pick k on
the same draw, and tally the picks with methods as rows and k = 1..k_max
as columns.
"""
import hashlib
import logging
from dataclasses import dataclass, field
from functools import partial
from typing import Dict, Optional, Tuple

import pandas as pd

from validitykit.exceptions import InvalidInputError, ValidityError
from validitykit.seeding import replicate_seed
from geometry.utils import squared_distance_matrix
from indices.utils import (
    CH_FORMULAS, CH_STANDARD, DEFAULT_DISPERSION_POWER, DISPERSION_POWERS, REFERENCE_PCA, REFERENCE_UNIFORM, ch_series,
    gap_statistic, silhouette_series,
)
from linkage.utils import complete_linkage
from selection.utils import DEFAULT_DELTA_T_CLAMP, select_k
from .scenarios import ScenarioSpec, sample

logger = logging.getLogger(__name__)

GAP_UNIFORM = 'gap-unif'
GAP_PCA = 'gap-pca'
SILHOUETTE = 'silhouette'
CH = 'ch'
PHI = 'phi'
PHI_THRESHOLD = 'phi-threshold'
METHODS = (GAP_UNIFORM, GAP_PCA, SILHOUETTE, CH, PHI, PHI_THRESHOLD)

METHOD_LABELS = {
    GAP_UNIFORM: 'GAP, unif',
    GAP_PCA: 'GAP, PCA',
    SILHOUETTE: 'Silhouette',
    CH: 'CH',
    PHI: 'phi ratio',
    PHI_THRESHOLD: 'phi ratio, threshold',
}

# Only the GAP statistic can report a single cluster.
SELECTS_ONE_CLUSTER = {GAP_UNIFORM, GAP_PCA}


@dataclass(frozen=True)
class StudyParameters:
    methods: Tuple[str, ...] = METHODS
    R: int = 100
    k_max: int = 10
    seed: int = 0
    B: int = 100
    threshold: float = 0.1
    ch_formula: str = CH_STANDARD
    clamp: float = DEFAULT_DELTA_T_CLAMP
    d_power: int = DEFAULT_DISPERSION_POWER

    def __post_init__(self):
        object.__setattr__(self, 'methods', tuple(self.methods))
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise InvalidInputError(f"unknown methods {unknown} (known: {', '.join(METHODS)})")
        if not self.methods:
            raise InvalidInputError("a study needs at least one method")
        if self.R < 1:
            raise InvalidInputError(f"R must be at least 1, got {self.R}")
        if self.k_max < 3:
            raise InvalidInputError(f"k_max must be at least 3, got {self.k_max}")
        if self.ch_formula not in CH_FORMULAS:
            raise InvalidInputError(f"unknown Calinski-Harabasz formula {self.ch_formula!r}")
        if self.d_power not in DISPERSION_POWERS:
            raise InvalidInputError(f"d_power must be one of {DISPERSION_POWERS}, got {self.d_power}")


@dataclass
class TallyTable:
    scenario: ScenarioSpec
    parameters: StudyParameters
    counts: Dict[str, Dict[int, int]] = field(default_factory=dict)
    failures: Dict[str, int] = field(default_factory=dict)

    @classmethod
    def empty(cls, scenario, parameters):
        ks = range(1, parameters.k_max + 1)
        return cls(
            scenario=scenario,
            parameters=parameters,
            counts={m: {k: 0 for k in ks if k > 1 or m in SELECTS_ONE_CLUSTER} for m in parameters.methods},
            failures={m: 0 for m in parameters.methods},
        )

    @property
    def R(self):
        return self.parameters.R

    @property
    def seed(self):
        return self.parameters.seed

    def record(self, method, selected_k: Optional[int]):
        if selected_k is None:
            self.failures[method] += 1
        else:
            self.counts[method][selected_k] += 1

    def row(self, method):
        """Counts for k = 1..k_max, None where the method cannot select k."""
        return [self.counts[method].get(k) for k in range(1, self.parameters.k_max + 1)]

    def rows(self):
        return {METHOD_LABELS[m]: self.row(m) for m in self.parameters.methods}

    def labelled_failures(self):
        return {METHOD_LABELS[m]: self.failures[m] for m in self.parameters.methods}

    def to_frame(self) -> pd.DataFrame:
        ks = range(1, self.parameters.k_max + 1)
        frame = pd.DataFrame(
            [self.row(m) + [self.failures[m]] for m in self.parameters.methods],
            index=pd.Index([METHOD_LABELS[m] for m in self.parameters.methods], name=self.scenario.name),
            columns=[str(k) for k in ks] + ['failures'],
            dtype=object,
        )
        return frame.astype('Int64')

    def to_csv(self, path_or_buffer=None):
        return self.to_frame().to_csv(path_or_buffer)


def dataset_digest(data):
    return hashlib.sha256(data.values.tobytes()).hexdigest()[:16]


def _select(method, data, dm, tree, params, seed):
    if method == GAP_UNIFORM:
        return gap_statistic(data, params.k_max, params.B, REFERENCE_UNIFORM, seed=seed, tree=tree,
                             d_power=params.d_power).selected_k
    if method == GAP_PCA:
        return gap_statistic(data, params.k_max, params.B, REFERENCE_PCA, seed=seed, tree=tree,
                             d_power=params.d_power).selected_k
    if method == SILHOUETTE:
        return silhouette_series(dm, tree, params.k_max).selected_k
    if method == CH:
        return ch_series(data, tree, params.k_max, params.ch_formula).selected_k
    if method == PHI:
        return select_k(dm, tree, params.k_max, clamp=params.clamp).selected_k
    return select_k(dm, tree, params.k_max, threshold=params.threshold, clamp=params.clamp).selected_k


def run_replicate(spec: ScenarioSpec, params: StudyParameters, replicate: int) -> Dict[str, Optional[int]]:
    """Selected k per method for one replicate; None marks a method that failed."""
    seed = replicate_seed(params.seed, replicate)
    data = sample(spec, seed)
    dm = squared_distance_matrix(data)
    tree = complete_linkage(dm)

    selections = {}
    for method in params.methods:
        try:
            selections[method] = _select(method, data, dm, tree, params, seed)
        except ValidityError as e:
            logger.warning(f"{spec.name} replicate {replicate}: {method} failed: [{e.code}] {e.message}")
            selections[method] = None
    logger.debug(f"{spec.name} replicate {replicate} data={dataset_digest(data)} selections={selections}")
    return selections


def run_study(specs, params: StudyParameters, map_fn=map):
    """
    Tally every scenario in ``specs``.

    ``map_fn`` maps over replicate indices and may evaluate them in any order
    or in parallel; the tallies only depend on the root seed.
    """
    specs = list(specs)
    if not specs:
        raise InvalidInputError("a study needs at least one scenario")
    if params.k_max > min(spec.n for spec in specs) - 1:
        raise InvalidInputError(f"k_max={params.k_max} needs at least {params.k_max + 1} observations per scenario")

    tables = []
    for spec in specs:
        logger.info(f"Running study {spec.name}: R={params.R}, seed={params.seed}, methods={list(params.methods)}")
        table = TallyTable.empty(spec, params)
        for selections in map_fn(partial(run_replicate, spec, params), range(params.R)):
            for method, selected_k in selections.items():
                table.record(method, selected_k)
        logger.info(f"Finished study {spec.name}: failures={table.failures}")
        tables.append(table)
    return tables
