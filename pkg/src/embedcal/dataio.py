"""CSV input/output for datasets and surrogate training tables."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .likelihood import Dataset


class DataFormatError(ValueError):
    pass


def _read_numeric_table(path) -> tuple[list[str], np.ndarray]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise DataFormatError(f"{path}: missing header row")
    header = [c.strip() for c in rows[0]]
    values, problems = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            problems.append(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
            continue
        try:
            values.append([float(c) for c in row])
        except ValueError:
            problems.append(f"line {lineno}: non-numeric field in {row}")
    if problems:
        raise DataFormatError(f"{path}: malformed rows\n  " + "\n  ".join(problems))
    return header, np.array(values, dtype=float).reshape(-1, len(header))


def load_csv_dataset(path) -> Dataset:
    """Read a dataset with header ``x1,...,xm,y`` (or ``x,y``)."""
    header, table = _read_numeric_table(path)
    if len(header) < 2 or header[-1] != "y":
        raise DataFormatError(f"{path}: header must be x1..xm,y, got {header}")
    if table.shape[0] == 0:
        raise DataFormatError(f"{path}: empty dataset")
    return Dataset(table[:, :-1], table[:, -1])


def write_csv_dataset(data: Dataset, path) -> None:
    m = data.xs.shape[1]
    cols = ["x"] if m == 1 else [f"x{j + 1}" for j in range(m)]
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(cols + ["y"]) + "\n")
        for x, y in zip(data.xs, data.ys):
            fh.write(",".join(repr(float(v)) for v in list(x) + [y]) + "\n")


def load_training_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read surrogate training data.

    Columns named ``lambda*`` are parameter inputs; all remaining columns
    are model outputs, one per design location in data-row order.
    """
    header, table = _read_numeric_table(path)
    lam_cols = [j for j, c in enumerate(header) if c.lower().startswith("lambda")]
    out_cols = [j for j, c in enumerate(header) if j not in lam_cols]
    if not lam_cols or not out_cols:
        raise DataFormatError(f"{path}: need lambda* input columns and output columns")
    if table.shape[0] == 0:
        raise DataFormatError(f"{path}: no training rows")
    return table[:, lam_cols], table[:, out_cols]


def write_training_csv(lams, outputs, path) -> None:
    lams = np.atleast_2d(lams)
    outputs = np.atleast_2d(outputs)
    cols = [f"lambda{j + 1}" for j in range(lams.shape[1])] + [f"f{i + 1}" for i in range(outputs.shape[1])]
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        for a, b in zip(lams, outputs):
            fh.write(",".join(repr(float(v)) for v in np.concatenate([a, b])) + "\n")
