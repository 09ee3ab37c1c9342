"""Spatial meshes, grid-function containers, discrete norms, and observed
convergence orders."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "ErrorSummary",
    "GridLayer",
    "SolutionHistory",
    "SpaceGrid",
    "convergence_order",
    "error_norms",
    "l2_norm",
    "max_norm",
]


@dataclass(frozen=True)
class SpaceGrid:
    """Uniform mesh of ``n`` subintervals on ``[0, length]``; node ``i`` sits
    at ``i*h`` with ``h = length/n``."""

    n: int
    length: float
    h: float = field(init=False)

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError(f"need at least 2 subintervals, got {self.n}")
        if not self.length > 0.0:
            raise ValueError(f"domain length must be positive, got {self.length}")
        object.__setattr__(self, "h", self.length / self.n)

    def nodes(self) -> np.ndarray:
        return np.arange(self.n + 1, dtype=float) * self.h

    def midpoints(self) -> np.ndarray:
        """Half-integer nodes ``x_{i-1/2}`` for ``i = 1..n``."""
        return (np.arange(self.n, dtype=float) + 0.5) * self.h


@dataclass(frozen=True)
class GridLayer:
    """One time layer of a grid function (all ``n+1`` nodal values)."""

    values: np.ndarray
    layer_time: float

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise ValueError(f"layer values must be one-dimensional, got {values.shape}")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)


class SolutionHistory:
    """All computed time layers of a run.

    The nonlocal time operator consumes every previous layer each step, so the
    history keeps the full matrix of values.  Layers are immutable; storage
    grows by appending.
    """

    def __init__(self, grid: SpaceGrid, first_layer: GridLayer, reserve: int = 0):
        if first_layer.values.size != grid.n + 1:
            raise ValueError(
                f"layer has {first_layer.values.size} values, grid expects {grid.n + 1}"
            )
        self.grid = grid
        capacity = max(1, reserve + 1)
        self._values = np.empty((capacity, grid.n + 1))
        self._times = np.empty(capacity)
        self._count = 0
        self.append(first_layer)

    def __len__(self) -> int:
        return self._count

    def append(self, layer: GridLayer) -> None:
        if layer.values.size != self.grid.n + 1:
            raise ValueError(
                f"layer has {layer.values.size} values, grid expects {self.grid.n + 1}"
            )
        if self._count == self._values.shape[0]:
            new_capacity = 2 * self._count
            values = np.empty((new_capacity, self.grid.n + 1))
            values[: self._count] = self._values[: self._count]
            times = np.empty(new_capacity)
            times[: self._count] = self._times[: self._count]
            self._values = values
            self._times = times
        self._values[self._count] = layer.values
        self._times[self._count] = layer.layer_time
        self._count += 1

    def layer(self, j: int) -> GridLayer:
        if not 0 <= j < self._count:
            raise IndexError(f"layer {j} out of range (have {self._count})")
        return GridLayer(values=self._values[j], layer_time=float(self._times[j]))

    @property
    def values(self) -> np.ndarray:
        """Read-only ``(layers, nodes)`` view of all stored values."""
        view = self._values[: self._count]
        view.flags.writeable = False
        return view

    @property
    def times(self) -> np.ndarray:
        view = self._times[: self._count]
        view.flags.writeable = False
        return view

    def interior_diffs(self) -> np.ndarray:
        """Backward differences ``y^{s+1} - y^s`` at interior nodes,
        shape ``(layers-1, n-1)``."""
        vals = self._values[: self._count, 1:-1]
        return vals[1:] - vals[:-1]


def l2_norm(layer: GridLayer, grid: SpaceGrid) -> float:
    """Discrete L2 norm ``sqrt(h * sum_{i=1}^{n-1} y_i^2)``; boundary nodes are
    excluded, matching the inner product the energy estimates use."""
    if layer.values.size != grid.n + 1:
        raise ValueError(
            f"layer has {layer.values.size} values, grid expects {grid.n + 1}"
        )
    interior = layer.values[1:-1]
    return float(np.sqrt(grid.h * np.dot(interior, interior)))


def max_norm(history: SolutionHistory) -> float:
    """Maximum of ``|y|`` over every node of every stored layer."""
    if len(history) == 0:
        raise ValueError("history holds no layers")
    return float(np.abs(history.values).max())


@dataclass(frozen=True)
class ErrorSummary:
    """Error norms of a run against an exact solution: the largest per-layer
    L2 norm and the all-layer maximum-norm."""

    l2max: float
    sup: float


def error_norms(
    history: SolutionHistory,
    exact: Callable[[np.ndarray, float], np.ndarray],
) -> ErrorSummary:
    """Measure ``max_n ||y^n - u(., t_n)||_L2`` and ``max |y - u|`` over the
    whole space-time mesh; the exact solution is sampled at the nodes."""
    grid = history.grid
    x = grid.nodes()
    values = history.values
    times = history.times
    exact_values = np.empty_like(values)
    for row, t in enumerate(times):
        exact_values[row] = exact(x, float(t))
    z = values - exact_values
    interior = z[:, 1:-1]
    l2_layers = np.sqrt(grid.h * np.sum(interior * interior, axis=1))
    return ErrorSummary(l2max=float(l2_layers.max()), sup=float(np.abs(z).max()))


def convergence_order(levels: Sequence[tuple[float, float]]) -> list[float]:
    """Observed orders between consecutive refinement levels.

    ``levels`` holds ``(step_size, error)`` pairs with strictly decreasing
    positive step sizes and positive errors; each consecutive pair contributes
    ``log(e1/e2) / log(s1/s2)``.
    """
    if len(levels) < 2:
        raise ValueError(f"need at least two levels, got {len(levels)}")
    orders = []
    for (s1, e1), (s2, e2) in zip(levels, levels[1:]):
        if not (s1 > 0.0 and s2 > 0.0):
            raise ValueError(f"step sizes must be positive, got {s1}, {s2}")
        if s2 >= s1:
            raise ValueError(f"step sizes must strictly decrease, got {s1} -> {s2}")
        if not (e1 > 0.0 and e2 > 0.0):
            raise ValueError(f"errors must be positive, got {e1}, {e2}")
        orders.append(np.log(e1 / e2) / np.log(s1 / s2))
    return [float(order) for order in orders]
