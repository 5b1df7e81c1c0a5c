"""
Dataset Service
CSV ingestion and export with strict line/column validation.

Files are UTF-8 with a header row and '.' as the decimal separator. Missing
and non-finite values are hard errors: nothing is imputed.
"""
import csv
import logging
import math
import re
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from core.exceptions import DataValidationError
from families import get_family
from models.data import Dataset, ModelSupport

logger = logging.getLogger(__name__)

NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")

PathLike = Union[str, Path]


def parse_number(text: str, line: int, column: str) -> float:
    text = text.strip()
    if not text:
        raise DataValidationError("missing value", line=line, column=column)
    if not NUMBER.match(text):
        raise DataValidationError(f"not a number: {text!r}", line=line, column=column)
    value = float(text)
    if not math.isfinite(value):
        raise DataValidationError(f"value out of range: {text!r}", line=line, column=column)
    return value


def read_table(path: PathLike) -> Tuple[List[str], np.ndarray, List[int]]:
    """Header, numeric body and the file line of every body row. Blank lines are skipped."""
    path = Path(path)
    if not path.is_file():
        raise DataValidationError(f"no such file: {path}")
    try:
        with path.open(newline="", encoding="utf-8") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if not header:
                raise DataValidationError("empty file or missing header row", line=1)
            header = [h.strip() for h in header]
            if len(set(header)) != len(header) or any(not h for h in header):
                raise DataValidationError("header names must be unique and non-empty", line=1)

            rows, lines = [], []
            for row in reader:
                line = reader.line_num
                if not row:
                    continue
                if len(row) != len(header):
                    raise DataValidationError(f"expected {len(header)} fields, found {len(row)}", line=line)
                rows.append([parse_number(cell, line, name) for cell, name in zip(row, header)])
                lines.append(line)
    except UnicodeDecodeError as e:
        raise DataValidationError(f"file is not UTF-8: {e}") from e

    if not rows:
        raise DataValidationError("no data rows", line=2)
    return header, np.array(rows, dtype=float), lines


def load_dataset(
    path: PathLike,
    response: str,
    family=None,
    columns: Optional[Sequence[str]] = None,
) -> Dataset:
    """
    Load covariates and a response column. Every other column is a covariate
    unless `columns` selects a subset. With a family given the response is
    checked against its support, errors naming the file line.
    """
    header, table, lines = read_table(path)
    if response not in header:
        raise DataValidationError(f"response column {response!r} not found in header", line=1)
    covariates = list(columns) if columns else [h for h in header if h != response]
    missing = [c for c in covariates if c not in header]
    if missing:
        raise DataValidationError(f"unknown covariate columns: {', '.join(missing)}", line=1)
    if not covariates:
        raise DataValidationError("no covariate columns", line=1)

    y = table[:, header.index(response)]
    x = table[:, [header.index(c) for c in covariates]]
    data = Dataset(x, y, tuple(covariates))
    if family is not None:
        data.check_family(get_family(family), lines=lines, column=response)
    logger.info(f"Loaded {path}: n={data.n}, p={data.p}, response {response!r}")
    return data


def save_dataset(path: PathLike, data: Dataset, response: str = "y"):
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow([*data.labels, response])
        for xi, yi in zip(data.x, data.y):
            writer.writerow([repr(float(v)) for v in xi] + [repr(float(yi))])
    logger.info(f"Wrote {data.n} rows to {path}")


def parse_vector(text: str) -> np.ndarray:
    """Comma-separated numbers, or the path of a file holding them."""
    candidate = Path(text)
    if candidate.is_file():
        text = candidate.read_text(encoding="utf-8")
    cells = [c for c in re.split(r"[,\s]+", text.strip()) if c]
    return np.array([parse_number(c, line=1, column=f"#{i}") for i, c in enumerate(cells)])


def parse_support(text: str) -> ModelSupport:
    """'0,3,7' -> ModelSupport; '' or '-' -> the empty support."""
    text = text.strip()
    if text in ("", "-", "{}"):
        return ModelSupport.empty()
    try:
        return ModelSupport.of(int(c) for c in text.strip("{}").split(","))
    except ValueError as e:
        raise DataValidationError(f"bad support {text!r}: {e}") from e
