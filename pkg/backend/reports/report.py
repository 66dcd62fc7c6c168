"""
Per-k validity report for one dataset.

The distance matrix and the complete-linkage tree are built once and every
series is read off the same cuts. A threshold only changes the phi family.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional

import pandas as pd

from validitykit.exceptions import InvalidInputError
from geometry.datasets import Dataset
from geometry.utils import squared_distance_matrix
from indices.utils import (
    CH_STANDARD, DEFAULT_DISPERSION_POWER, REFERENCE_PCA, REFERENCE_UNIFORM, GapSeries, IndexSeries, ch_series,
    gap_statistic, silhouette_series,
)
from linkage.utils import complete_linkage
from selection.utils import DEFAULT_DELTA_T_CLAMP, PhiSeries, select_k

logger = logging.getLogger(__name__)

MIN_OBSERVATIONS = 4

CSV_COLUMNS = [
    'k', 'delta_T', 'phi', 'phi1', 'gap_unif', 'gap_unif_se', 'gap_pca', 'gap_pca_se', 'ch', 'silhouette',
]


@dataclass(frozen=True)
class ValidityReport:
    source: Optional[str]
    n: int
    p: int
    k_max: int
    threshold: Optional[float]
    seed: int
    B: int
    ch_formula: str
    phi: PhiSeries
    gap_uniform: GapSeries
    gap_pca: GapSeries
    ch: IndexSeries
    silhouette: IndexSeries

    @property
    def selected(self) -> Dict[str, int]:
        return {
            'phi': self.phi.selected_k,
            'gap_unif': self.gap_uniform.selected_k,
            'gap_pca': self.gap_pca.selected_k,
            'ch': self.ch.selected_k,
            'silhouette': self.silhouette.selected_k,
        }

    def to_frame(self) -> pd.DataFrame:
        """One row per k; cells a method does not define at that k are blank."""
        records = []
        for k in range(1, self.k_max + 1):
            records.append({
                'k': k,
                'delta_T': self.phi.delta_T_by_k.get(k),
                'phi': self.phi.phi_by_k.get(k),
                'phi1': self.phi.phi1_by_k.get(k),
                'gap_unif': self.gap_uniform.gap_by_k.get(k),
                'gap_unif_se': self.gap_uniform.se_by_k.get(k),
                'gap_pca': self.gap_pca.gap_by_k.get(k),
                'gap_pca_se': self.gap_pca.se_by_k.get(k),
                'ch': self.ch.value_by_k.get(k),
                'silhouette': self.silhouette.value_by_k.get(k),
            })
        frame = pd.DataFrame.from_records(records, columns=CSV_COLUMNS)
        # infinite CH or GAP values are written as blanks, like undefined cells
        return frame.replace([math.inf, -math.inf], float('nan'))

    def to_csv(self, path_or_buffer=None):
        return self.to_frame().to_csv(path_or_buffer, index=False)


def analyze(data: Dataset, k_max: int = 10, threshold: Optional[float] = None, B: int = 100, seed: int = 0,
            ch_formula: str = CH_STANDARD, clamp: float = DEFAULT_DELTA_T_CLAMP, map_fn=map,
            d_power: int = DEFAULT_DISPERSION_POWER) -> ValidityReport:
    if data.n < MIN_OBSERVATIONS:
        raise InvalidInputError(f"need at least {MIN_OBSERVATIONS} observations, got n={data.n}")
    if k_max > data.n - 1:
        raise InvalidInputError(f"k_max={k_max} exceeds n-1={data.n - 1}")

    dm = squared_distance_matrix(data)
    tree = complete_linkage(dm)
    logger.info(f"Analyzing {data.source or 'dataset'}: n={data.n}, p={data.p}, k_max={k_max}, seed={seed}")

    report = ValidityReport(
        source=data.source,
        n=data.n,
        p=data.p,
        k_max=k_max,
        threshold=threshold,
        seed=seed,
        B=B,
        ch_formula=ch_formula,
        phi=select_k(dm, tree, k_max, threshold=threshold, clamp=clamp),
        gap_uniform=gap_statistic(data, k_max, B, REFERENCE_UNIFORM, seed=seed, tree=tree, map_fn=map_fn,
                                  d_power=d_power),
        gap_pca=gap_statistic(data, k_max, B, REFERENCE_PCA, seed=seed, tree=tree, map_fn=map_fn,
                              d_power=d_power),
        ch=ch_series(data, tree, k_max, ch_formula),
        silhouette=silhouette_series(dm, tree, k_max),
    )
    logger.info(f"Selected k: {report.selected}")
    return report
