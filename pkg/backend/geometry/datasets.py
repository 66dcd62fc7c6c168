"""
Dataset container and CSV ingestion.

CSV contract: comma-delimited, decimal point, one observation per line. A
first non-blank line that is not entirely numeric is taken as a header. Blank
lines are skipped. Parse failures report the 1-based line number.
"""
import logging
import re
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from validitykit.exceptions import CsvParseError, InvalidInputError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Dataset:
    """n x p matrix of observations (rows) over variates (columns)."""
    values: np.ndarray
    columns: Tuple[str, ...] = field(default=())
    source: Optional[str] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise InvalidInputError(f"dataset must be a non-empty n x p matrix, got shape {values.shape}")

        bad = np.argwhere(~np.isfinite(values))
        if len(bad):
            row, col = bad[0]
            raise InvalidInputError(
                f"non-finite value {values[row, col]} at row {row + 1}, column {col + 1}"
            )

        columns = tuple(self.columns or ())
        if columns and len(columns) != values.shape[1]:
            raise InvalidInputError(f"{len(columns)} column names for {values.shape[1]} columns")

        values.setflags(write=False)
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'columns', columns)

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def p(self):
        return self.values.shape[1]

    def with_values(self, values):
        return Dataset(values, columns=self.columns, source=self.source)


def _numeric(cells):
    """Coerce a column of strings; NaN marks cells that are not numbers."""
    coerced = pd.to_numeric(cells.str.strip(), errors='coerce')
    literal_nan = cells.str.strip().str.lower() == 'nan'
    return coerced, coerced.isna() & ~literal_nan


def read_csv_dataset(path_or_buffer, source=None):
    """Read a numeric CSV file (path or file object) into a Dataset."""
    if source is None:
        source = str(getattr(path_or_buffer, 'name', path_or_buffer))

    try:
        frame = pd.read_csv(
            path_or_buffer,
            header=None,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False,
        )
    except pd.errors.EmptyDataError:
        raise CsvParseError("file is empty", line=1)
    except pd.errors.ParserError as e:
        match = re.search(r'line (\d+)', str(e))
        raise CsvParseError(str(e), line=int(match.group(1)) if match else None) from e

    frame = frame.fillna('').astype(str)
    # index i holds file line i + 1
    blank = frame.apply(lambda column: column.str.strip() == '').all(axis=1)
    frame = frame.loc[~blank]
    if frame.empty:
        raise CsvParseError("file is empty", line=1)

    columns = ()
    first = frame.iloc[0]
    _, first_bad = _numeric(first)
    if first_bad.any():
        columns = tuple(cell.strip() for cell in first)
        frame = frame.iloc[1:]
        if frame.empty:
            raise CsvParseError("no data rows after the header", line=int(first.name) + 2)

    numeric = {}
    bad_lines = []
    for position, name in enumerate(frame.columns):
        values, bad = _numeric(frame[name])
        numeric[name] = values
        if bad.any():
            row = bad.idxmax()
            bad_lines.append((row, position, frame.at[row, name]))

    if bad_lines:
        row, position, cell = min(bad_lines)
        raise CsvParseError(f"column {position + 1}: {cell!r} is not a number", line=int(row) + 1)

    values = pd.DataFrame(numeric).to_numpy(dtype=float)
    logger.debug(f"Read {values.shape[0]}x{values.shape[1]} dataset from {source}")
    return Dataset(values, columns=columns, source=source)
