"""Tridiagonal linear solves for the implicit time steps.

Plain Thomas elimination without pivoting: every system assembled by the
steppers is strictly diagonally dominant (asserted during assembly), so a
vanishing pivot indicates a bug and is surfaced as an error rather than
repaired.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["SingularSystemError", "TridiagonalSystem", "solve_tridiagonal"]

#: Pivots at or below this magnitude (zero or denormal) abort the elimination.
_PIVOT_FLOOR = float(np.finfo(float).tiny)


class SingularSystemError(ValueError):
    """Raised when elimination hits a zero or denormal pivot."""

    def __init__(self, row: int, pivot: float):
        self.row = row
        self.pivot = pivot
        super().__init__(f"singular system: pivot {pivot!r} at row {row}")


@dataclass(frozen=True)
class TridiagonalSystem:
    """Coefficients of ``A x = rhs`` with ``A`` tridiagonal of size ``n``.

    ``sub[i]``, ``diag[i]``, ``sup[i]`` are the row-``i`` coefficients;
    ``sub[0]`` and ``sup[n-1]`` are ignored.
    """

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    rhs: np.ndarray

    def __post_init__(self) -> None:
        arrays = {}
        size = None
        for name in ("sub", "diag", "sup", "rhs"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim != 1:
                raise ValueError(f"{name} must be one-dimensional, got {arr.shape}")
            if size is None:
                size = arr.size
            elif arr.size != size:
                raise ValueError(
                    f"{name} has {arr.size} entries, expected {size}"
                )
            arrays[name] = arr
        if size == 0:
            raise ValueError("system must have at least one row")
        for name, arr in arrays.items():
            object.__setattr__(self, name, arr)

    @property
    def size(self) -> int:
        return self.diag.size


def _solve_core(
    sub: list[float], diag: list[float], sup: list[float], rhs: list[float]
) -> list[float]:
    """Thomas elimination on plain lists (fast scalar loop)."""
    n = len(diag)
    scratch_sup = [0.0] * n
    scratch_rhs = [0.0] * n
    pivot = diag[0]
    if abs(pivot) <= _PIVOT_FLOOR:
        raise SingularSystemError(0, pivot)
    scratch_sup[0] = sup[0] / pivot if n > 1 else 0.0
    scratch_rhs[0] = rhs[0] / pivot
    for i in range(1, n):
        pivot = diag[i] - sub[i] * scratch_sup[i - 1]
        if abs(pivot) <= _PIVOT_FLOOR:
            raise SingularSystemError(i, pivot)
        scratch_sup[i] = sup[i] / pivot if i < n - 1 else 0.0
        scratch_rhs[i] = (rhs[i] - sub[i] * scratch_rhs[i - 1]) / pivot
    x = scratch_rhs
    for i in range(n - 2, -1, -1):
        x[i] -= scratch_sup[i] * x[i + 1]
    return x


def solve_tridiagonal(system: TridiagonalSystem) -> np.ndarray:
    """Solve ``A x = rhs`` by forward elimination and back substitution.

    Deterministic (fixed operation order); raises
    :class:`SingularSystemError` naming the pivot row if elimination breaks
    down.
    """
    x = _solve_core(
        system.sub.tolist(),
        system.diag.tolist(),
        system.sup.tolist(),
        system.rhs.tolist(),
    )
    return np.asarray(x)
