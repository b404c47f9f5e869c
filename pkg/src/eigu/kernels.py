"""Kernel evaluations for the nonlinear classifier variants.

Two families are supported: the plain dot product (``linear``) and the
Gaussian kernel ``exp(-||x - y||^2 / (2 sigma^2))`` (``rbf``).  Squared
distances are computed with the usual norm expansion and clipped at zero,
and a Gram block whose rows and columns index the same points gets an
exact unit diagonal.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = ["GramBlock", "KernelSpec", "default_sigma", "gram", "squared_distances"]

KERNEL_FAMILIES = ("linear", "rbf")


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus its bandwidth (``sigma``, rbf only).

    An rbf spec may leave ``sigma`` unset; trainers resolve it from their
    training rows via :func:`default_sigma` before any Gram evaluation.
    """

    family: str
    sigma: float | None = None

    def __post_init__(self) -> None:
        if self.family not in KERNEL_FAMILIES:
            raise ValueError(
                f"unknown kernel family {self.family!r}, expected one of {KERNEL_FAMILIES}"
            )
        if self.family == "rbf":
            if self.sigma is not None and (not np.isfinite(self.sigma) or self.sigma <= 0):
                raise ValueError(f"rbf kernel requires sigma > 0, got {self.sigma}")
        elif self.sigma is not None:
            raise ValueError("linear kernel takes no sigma")


@dataclass(frozen=True)
class GramBlock:
    """A kernel matrix along with labels for what its axes index."""

    values: np.ndarray = field(repr=False)
    row_source: str = "query"
    col_source: str = "query"


def _as_rows(rows: np.ndarray, name: str) -> np.ndarray:
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2:
        raise ValueError(f"{name} must be a 2-d row matrix, got shape {rows.shape}")
    if not np.all(np.isfinite(rows)):
        raise ValueError(f"{name} contains non-finite entries")
    return rows


def squared_distances(rows_a: np.ndarray, rows_b: np.ndarray) -> np.ndarray:
    """All pairwise squared Euclidean distances, clipped at zero."""
    rows_a = _as_rows(rows_a, "rows_a")
    rows_b = _as_rows(rows_b, "rows_b")
    if rows_a.shape[1] != rows_b.shape[1]:
        raise ValueError(
            f"row dimensions differ: {rows_a.shape[1]} vs {rows_b.shape[1]}"
        )
    sq_a = np.sum(rows_a * rows_a, axis=1)[:, None]
    sq_b = np.sum(rows_b * rows_b, axis=1)[None, :]
    d2 = sq_a + sq_b - 2.0 * (rows_a @ rows_b.T)
    return np.maximum(d2, 0.0)


def gram(
    rows_a: np.ndarray,
    rows_b: np.ndarray,
    spec: KernelSpec,
    row_source: str = "query",
    col_source: str = "query",
) -> GramBlock:
    """Kernel matrix ``K[i, j] = k(rows_a[i], rows_b[j])``.

    When both axes index the same point set (same array object or equal
    contents) the rbf diagonal is set to exactly 1.
    """
    rows_a = _as_rows(rows_a, "rows_a")
    rows_b = _as_rows(rows_b, "rows_b")
    if spec.family == "linear":
        values = rows_a @ rows_b.T
    else:
        if spec.sigma is None:
            raise ValueError("rbf sigma is unresolved; fix it before evaluating a Gram block")
        d2 = squared_distances(rows_a, rows_b)
        values = np.exp(-d2 / (2.0 * spec.sigma**2))
        same = rows_a is rows_b or (
            rows_a.shape == rows_b.shape and np.array_equal(rows_a, rows_b)
        )
        if same:
            np.fill_diagonal(values, 1.0)
    return GramBlock(values=values, row_source=row_source, col_source=col_source)


def default_sigma(rows: np.ndarray) -> float:
    """Data-driven rbf bandwidth: mean of all N^2 pairwise squared distances.

    Self-distances are included in the mean.  A degenerate point set (all
    rows identical, mean distance 0) falls back to 1.0 with a warning.
    """
    rows = _as_rows(rows, "rows")
    if rows.shape[0] == 0:
        raise ValueError("rows must be non-empty")
    mean_d2 = float(squared_distances(rows, rows).mean())
    if mean_d2 == 0.0:
        warnings.warn(
            "all rows identical; falling back to sigma = 1.0", stacklevel=2
        )
        return 1.0
    return mean_d2
