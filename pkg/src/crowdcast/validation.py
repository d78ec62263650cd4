"""Small input-validation helpers shared across the package."""

from __future__ import annotations

import numpy as np


def as_points(arr, n_rows: int | None = None, name: str = "array") -> np.ndarray:
    """Coerce to a float64 (N, 2) position array and validate it.

    Raises ValueError on wrong shape, wrong row count or non-finite entries.
    """
    out = np.asarray(arr, dtype=np.float64)
    if out.ndim != 2 or out.shape[1] != 2:
        raise ValueError(f"{name}: expected shape (N, 2), got {out.shape}")
    if n_rows is not None and out.shape[0] != n_rows:
        raise ValueError(f"{name}: expected {n_rows} rows, got {out.shape[0]}")
    if not np.isfinite(out).all():
        raise ValueError(f"{name}: contains non-finite values")
    return out


def check_positive(value, name: str):
    if value <= 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value


def frozen(arr: np.ndarray) -> np.ndarray:
    """Return ``arr`` marked read-only so shared instances stay immutable."""
    arr.setflags(write=False)
    return arr
