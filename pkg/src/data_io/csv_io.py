"""
CSV ingestion and export of regression datasets
"""
import logging
from pathlib import Path
from typing import List, Union

import numpy as np
import pandas as pd

from src.core.models import Dataset
from src.utils.errors import DataError

logger = logging.getLogger(__name__)

RESPONSE_COLUMN = "y"


def _is_number(token: str) -> bool:
    # float() also takes digit separators, which the format does not allow
    if "_" in token:
        return False
    try:
        float(token)
    except ValueError:
        return False
    return True


def _read_cells(path: Path) -> pd.DataFrame:
    """Raw string cells, one frame row per file line, trailing blank lines dropped"""
    try:
        frame = pd.read_csv(
            path,
            header=None,
            dtype=str,
            keep_default_na=False,
            na_filter=False,
            skip_blank_lines=False,
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError as e:
        raise DataError(f"{path} is empty") from e
    except pd.errors.ParserError as e:
        raise DataError(f"Cannot parse {path}: {e}") from e
    except UnicodeDecodeError as e:
        raise DataError(f"{path} is not valid UTF-8") from e

    frame = frame.apply(lambda col: col.map(lambda v: v.strip() if isinstance(v, str) else ""))
    filled = (frame != "").any(axis=1).to_numpy()
    last = int(np.flatnonzero(filled)[-1]) + 1 if filled.any() else 0
    return frame.iloc[:last]


def read_csv(path: Union[str, Path]) -> Dataset:
    """
    Load a dataset from a comma-separated file

    A first row holding any non-numeric token is a header. With a header the
    response is the column named 'y' (the first column if there is none);
    without one it is the first column. Remaining columns form X in file
    order.

    Args:
        path: CSV file (UTF-8, '.' decimal point, no thousands separators)

    Returns:
        Dataset

    Raises:
        DataError: On unreadable files, unparsable, missing or non-finite
            cells (with 1-based row and column), or fewer than two rows or
            one covariate
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"Input file not found: {path}")

    cells = _read_cells(path)
    if cells.empty:
        raise DataError(f"{path} has no rows")

    first = list(cells.iloc[0])
    has_header = any(not _is_number(token) for token in first)
    header: List[str] = first if has_header else []
    body = cells.iloc[1:] if has_header else cells
    offset = 2 if has_header else 1

    tokens = body.to_numpy(dtype=object)
    numeric = np.vectorize(_is_number, otypes=[bool])(tokens)
    values = np.where(numeric, tokens, "nan").astype(np.float64)
    bad = np.argwhere(~np.isfinite(values))
    if bad.size:
        i, j = (int(k) for k in bad[0])
        token = body.iat[i, j]
        if token == "":
            reason = "Missing value"
        elif _is_number(token):
            reason = f"Non-finite value {token!r}"
        else:
            reason = f"Cannot parse {token!r} as a number"
        raise DataError(reason, row=i + offset, column=j + 1)

    if values.shape[0] < 2:
        raise DataError(f"{path} needs at least 2 data rows, got {values.shape[0]}")
    if values.shape[1] < 2:
        raise DataError(f"{path} needs a response and at least one covariate column")

    response = header.index(RESPONSE_COLUMN) if RESPONSE_COLUMN in header else 0
    covariates = [j for j in range(values.shape[1]) if j != response]
    logger.info(f"Read {path}: n={values.shape[0]}, d={len(covariates)}, header={'yes' if has_header else 'no'}")

    return Dataset(y=values[:, response], X=values[:, covariates])


def write_csv(ds: Dataset, path: Union[str, Path]) -> Path:
    """
    Write a dataset with header y,x1,...,xd

    Floats use the shortest representation that reads back to the same
    64-bit value.
    """
    path = Path(path)
    frame = pd.DataFrame(ds.X, columns=[f"x{j + 1}" for j in range(ds.d)])
    frame.insert(0, RESPONSE_COLUMN, ds.y)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=lambda v: repr(float(v)), lineterminator="\n")
    logger.info(f"Wrote {path}: n={ds.n}, d={ds.d}")
    return path
