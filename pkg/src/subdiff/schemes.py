"""Implicit finite-difference schemes for the time-fractional diffusion
equation

    D_t^alpha u = (k u_x)_x - q u + f   on (0, l) x (0, T],
    u(0, t) = u(l, t) = 0,              u(x, 0) = u0(x),

where ``D_t^alpha`` is the Caputo derivative of order ``alpha`` in (0, 1).

Two steppers are provided: a second-order scheme (``O(h^2 + tau^2)``) for
space-and-time-dependent coefficients, and a compact fourth-order scheme
(``O(h^4 + tau^2)``) for time-only coefficients.  Both collocate the time
operator at ``t_{j+sigma}`` and apply the spatial operator to the blend
``sigma*y^{j+1} + (1-sigma)*y^j``.

The module also exposes the generic stability machinery: weight providers for
the discrete time operator, the condition checker (weight monotonicity, a
positive floor, and the admissible blend range), energy-inequality probes, and
the a priori solution bound implied by them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Protocol, Sequence

import numpy as np

from .grids import GridLayer, SolutionHistory, SpaceGrid
from .kernels import (
    FractionalOrder,
    _assemble_l21sigma,
    _derivative_scale,
    coeff_a_array,
    coeff_b_array,
)
from .tridiag import _solve_core

__all__ = [
    "EnergyProbe",
    "L1Provider",
    "L21SigmaProvider",
    "ProblemSpec",
    "SchemeCompatibilityError",
    "StabilityReport",
    "WeightProvider",
    "a_priori_bound",
    "check_stability_conditions",
    "energy_inequality_probe",
    "run_compact",
    "run_second_order",
    "step_compact",
    "step_second_order",
]

SpaceTimeFn = Callable[[np.ndarray, float], np.ndarray]
TimeFn = Callable[[float], float]


class SchemeCompatibilityError(ValueError):
    """Raised when a problem lacks what the requested scheme needs."""


@dataclass(frozen=True)
class ProblemSpec:
    """Coefficients and data of one initial-boundary-value problem.

    ``k(x, t) >= c1 > 0`` is the diffusivity, ``q(x, t) >= 0`` the reaction
    coefficient, ``f`` the source, and ``u0`` the initial profile (vanishing at
    both endpoints).  ``c1`` is the declared lower bound of ``k`` used by the
    a priori estimate.  The compact scheme additionally needs the coefficients
    as functions of time only (``k_time``/``q_time``); leave them ``None`` for
    genuinely space-dependent coefficients.
    """

    k: SpaceTimeFn
    q: SpaceTimeFn
    f: SpaceTimeFn
    u0: Callable[[np.ndarray], np.ndarray]
    length: float
    horizon: float
    c1: float
    exact: Optional[SpaceTimeFn] = None
    k_time: Optional[TimeFn] = None
    q_time: Optional[TimeFn] = None

    def __post_init__(self) -> None:
        if not self.length > 0.0:
            raise ValueError(f"domain length must be positive, got {self.length}")
        if not self.horizon > 0.0:
            raise ValueError(f"time horizon must be positive, got {self.horizon}")
        if not self.c1 > 0.0:
            raise ValueError(f"diffusivity floor c1 must be positive, got {self.c1}")

    @property
    def has_time_only_coefficients(self) -> bool:
        return self.k_time is not None and self.q_time is not None


class WeightProvider(Protocol):
    """Supplier of the discrete time operator's weights for each step.

    ``weights_for(j)`` returns ``(g, sigma)`` where ``g[s]`` weights the
    difference ``v^{s+1} - v^s`` for ``s = 0..j`` (so ``g[-1]`` multiplies the
    newest difference) and ``sigma`` is the blend parameter of step ``j -> j+1``.
    """

    def weights_for(self, j: int) -> tuple[np.ndarray, float]: ...


class L21SigmaProvider:
    """Weights of the shifted-collocation operator: ``g[s] = scale * c_{j-s}``
    with the constant blend ``sigma = 1 - alpha/2``."""

    def __init__(self, order: FractionalOrder, tau: float):
        if not tau > 0.0:
            raise ValueError(f"step size must be positive, got {tau}")
        self.order = order
        self.tau = tau
        self.scale = _derivative_scale(order, tau)
        self._a = coeff_a_array(order, 0)
        self._b = coeff_b_array(order, 0)

    def _ensure_tables(self, j: int) -> None:
        have = self._a.size - 1
        if j > have:
            grow = max(j, 2 * have)
            self._a = coeff_a_array(self.order, grow)
            self._b = coeff_b_array(self.order, grow)

    def weights_for(self, j: int) -> tuple[np.ndarray, float]:
        if j < 0:
            raise ValueError(f"target index must be nonnegative, got {j}")
        self._ensure_tables(j)
        c = _assemble_l21sigma(self._a, self._b, j)
        return self.scale * c[::-1], self.order.sigma


class L1Provider:
    """Weights of the piecewise-linear operator (collocation at ``t_{j+1}``,
    fully implicit blend ``sigma = 1``)."""

    def __init__(self, order: FractionalOrder, tau: float):
        if not tau > 0.0:
            raise ValueError(f"step size must be positive, got {tau}")
        self.order = order
        self.tau = tau
        self.scale = _derivative_scale(order, tau)

    def weights_for(self, j: int) -> tuple[np.ndarray, float]:
        if j < 0:
            raise ValueError(f"target index must be nonnegative, got {j}")
        lag = np.arange(j, -1, -1, dtype=float)
        g = self.scale * ((lag + 1.0) ** (1.0 - self.order.alpha) - lag ** (1.0 - self.order.alpha))
        return g, 1.0


@dataclass
class StabilityReport:
    """Outcome of the per-step stability conditions.

    For each target index ``j``: the weights must increase strictly toward the
    newest difference and stay positive (``monotone_ok``), and the blend must
    satisfy ``g_j/(2 g_j - g_{j-1}) <= sigma <= 1`` with ``g_{-1} = 0``
    (``sigma_ok``).  Across all steps the oldest weight must stay above a
    positive floor, witnessed by ``c2``.  ``kappa`` carries the coercivity
    constant ``4*c1/l**2`` when problem context is supplied.
    """

    j_max: int
    monotone_ok: np.ndarray
    sigma_ok: np.ndarray
    floor_ok: bool
    c2: float
    kappa: Optional[float] = None

    @property
    def passed(self) -> bool:
        return bool(self.floor_ok and self.monotone_ok.all() and self.sigma_ok.all())


def check_stability_conditions(
    provider: WeightProvider,
    j_max: int,
    problem: Optional[ProblemSpec] = None,
) -> StabilityReport:
    """Evaluate the stability conditions for every step up to ``j_max``."""
    if j_max < 0:
        raise ValueError(f"j_max must be nonnegative, got {j_max}")
    monotone_ok = np.zeros(j_max + 1, dtype=bool)
    sigma_ok = np.zeros(j_max + 1, dtype=bool)
    c2 = math.inf
    for j in range(j_max + 1):
        g, sigma = provider.weights_for(j)
        g = np.asarray(g, dtype=float)
        monotone_ok[j] = bool(g[0] > 0.0 and (np.diff(g) > 0.0).all())
        c2 = min(c2, float(g[0]))
        newest = float(g[-1])
        previous = float(g[-2]) if j >= 1 else 0.0
        denom = 2.0 * newest - previous
        sigma_ok[j] = bool(denom > 0.0 and newest / denom <= sigma <= 1.0)
    kappa = None
    if problem is not None:
        kappa = 4.0 * problem.c1 / problem.length**2
    return StabilityReport(
        j_max=j_max,
        monotone_ok=monotone_ok,
        sigma_ok=sigma_ok,
        floor_ok=bool(c2 > 0.0),
        c2=c2,
        kappa=kappa,
    )


@dataclass(frozen=True)
class EnergyProbe:
    """Margins (left side minus right side) of the three energy inequalities
    at every target index, plus the magnitude of the terms involved for
    tolerance scaling.

    * ``newest``: pairing the operator with ``v^{j+1}`` against
      ``(1/2) D(v^2) + (D v)^2 / (2 g_j)``.
    * ``previous``: pairing with ``v^j`` against
      ``(1/2) D(v^2) - (D v)^2 / (2 (g_j - g_{j-1}))``.
    * ``blended``: pairing with ``sigma v^{j+1} + (1-sigma) v^j`` against
      ``(1/2) D(v^2)``.
    """

    newest: np.ndarray
    previous: np.ndarray
    blended: np.ndarray
    term_scale: np.ndarray


def energy_inequality_probe(
    provider: WeightProvider, series: Sequence[float]
) -> EnergyProbe:
    """Evaluate the energy-inequality margins on one time series.

    ``series`` holds ``v^0 .. v^{J+1}``; target indices ``0 .. J`` are probed.
    All margins are provably nonnegative whenever the provider satisfies the
    stability conditions, so negative margins beyond rounding indicate a
    broken weight family.
    """
    v = np.asarray(series, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise ValueError(f"series must hold at least two samples, got {v.shape}")
    count = v.size - 1
    newest = np.empty(count)
    previous = np.empty(count)
    blended = np.empty(count)
    term_scale = np.empty(count)
    diffs = np.diff(v)
    diffs_sq = np.diff(v * v)
    for j in range(count):
        g, sigma = provider.weights_for(j)
        dv = float(np.dot(g, diffs[: j + 1]))
        dv_sq = float(np.dot(g, diffs_sq[: j + 1]))
        g_new = float(g[-1])
        gap = g_new - float(g[-2]) if j >= 1 else g_new
        newest[j] = v[j + 1] * dv - 0.5 * dv_sq - dv * dv / (2.0 * g_new)
        previous[j] = v[j] * dv - 0.5 * dv_sq + dv * dv / (2.0 * gap)
        blend_value = sigma * v[j + 1] + (1.0 - sigma) * v[j]
        blended[j] = blend_value * dv - 0.5 * dv_sq
        term_scale[j] = max(
            abs(v[j + 1] * dv), abs(v[j] * dv), abs(dv_sq), dv * dv / (2.0 * g_new)
        )
    return EnergyProbe(
        newest=newest, previous=previous, blended=blended, term_scale=term_scale
    )


def _dominance_guard(margin: float, context: str) -> None:
    if not margin > 0.0:
        raise ArithmeticError(
            f"diagonal dominance lost in {context}: margin {margin!r}"
        )


def _second_order_core(
    h: float,
    sigma: float,
    scale: float,
    c: np.ndarray,
    a_half: np.ndarray,
    d_int: np.ndarray,
    phi_int: np.ndarray,
    y_full: np.ndarray,
    diffs: np.ndarray,
) -> np.ndarray:
    """Assemble and solve one step of the second-order scheme.

    ``a_half[i-1] = k(x_{i-1/2})`` for ``i = 1..n``; ``diffs`` holds the
    interior backward differences of all previous layers (one row per past
    step).  Returns the new interior values.
    """
    j = c.size - 1
    m = scale * c[0]
    y_int = y_full[1:-1]
    h_sq = h * h

    if j >= 1:
        conv = np.dot(c[j:0:-1], diffs[:j])
    else:
        conv = 0.0
    flux = a_half * np.diff(y_full)
    spatial = (flux[1:] - flux[:-1]) / h_sq - d_int * y_int
    rhs = scale * (c[0] * y_int - conv) + (1.0 - sigma) * spatial + phi_int

    diag = m + sigma * (a_half[:-1] + a_half[1:]) / h_sq + sigma * d_int
    sub = -sigma * a_half[:-1] / h_sq
    sup = -sigma * a_half[1:] / h_sq
    _dominance_guard(float(m + sigma * d_int.min()), "second-order step")

    solution = _solve_core(sub.tolist(), diag.tolist(), sup.tolist(), rhs.tolist())
    return np.asarray(solution)


def _mass_average(values: np.ndarray) -> np.ndarray:
    """The compact mass operator at interior nodes:
    ``(v_{i-1} + 10 v_i + v_{i+1}) / 12``."""
    return (values[..., :-2] + 10.0 * values[..., 1:-1] + values[..., 2:]) / 12.0


def _compact_core(
    h: float,
    sigma: float,
    scale: float,
    c: np.ndarray,
    a: float,
    d: float,
    phi_full: np.ndarray,
    y_full: np.ndarray,
    diffs: np.ndarray,
) -> np.ndarray:
    """Assemble and solve one step of the compact scheme (time-only
    coefficients ``a = k(t_eval)``, ``d = q(t_eval)``)."""
    j = c.size - 1
    m = scale * c[0]
    n_interior = y_full.size - 2
    h_sq = h * h

    mass_phi = _mass_average(phi_full)
    mass_y = _mass_average(y_full)
    laplace_y = y_full[:-2] - 2.0 * y_full[1:-1] + y_full[2:]
    if j >= 1:
        conv = np.dot(c[j:0:-1], diffs[:j])
        conv_full = np.zeros(y_full.size)
        conv_full[1:-1] = conv
        mass_conv = _mass_average(conv_full)
    else:
        mass_conv = np.zeros(n_interior)

    spatial_old = a * laplace_y / h_sq - d * mass_y
    rhs = scale * (c[0] * mass_y - mass_conv) + (1.0 - sigma) * spatial_old + mass_phi

    reaction = m + sigma * d
    diag_value = reaction * (10.0 / 12.0) + 2.0 * sigma * a / h_sq
    off_value = reaction / 12.0 - sigma * a / h_sq
    _dominance_guard(
        min(reaction, (2.0 / 3.0) * reaction + 4.0 * sigma * a / h_sq),
        "compact step",
    )

    diag = [diag_value] * n_interior
    off = [off_value] * n_interior
    solution = _solve_core(off, diag, off, rhs.tolist())
    return np.asarray(solution)


def _validate_initial_layer(values: np.ndarray, problem: ProblemSpec) -> np.ndarray:
    tolerance = 1e-12 * max(1.0, float(np.abs(values).max()))
    if abs(values[0]) > tolerance or abs(values[-1]) > tolerance:
        raise ValueError(
            "initial profile must vanish at both endpoints, got "
            f"u0(0)={values[0]!r}, u0(l)={values[-1]!r}"
        )
    pinned = values.copy()
    pinned[0] = 0.0
    pinned[-1] = 0.0
    return pinned


def step_second_order(
    problem: ProblemSpec,
    order: FractionalOrder,
    grid: SpaceGrid,
    tau: float,
    history: SolutionHistory,
) -> GridLayer:
    """Advance the second-order scheme one step.

    The history holds layers ``0..j``; the return value is layer ``j+1``.
    Coefficients and source are evaluated at ``t_{j+sigma} = (j+sigma)*tau``;
    the diffusivity at the half-integer nodes ``x_{i-1/2}``.
    """
    j = len(history) - 1
    t_eval = (j + order.sigma) * tau
    a_table = coeff_a_array(order, max(j, 0))
    b_table = coeff_b_array(order, max(j, 0))
    c = _assemble_l21sigma(a_table, b_table, j)
    x_int = grid.nodes()[1:-1]
    interior = _second_order_core(
        h=grid.h,
        sigma=order.sigma,
        scale=_derivative_scale(order, tau),
        c=c,
        a_half=np.asarray(problem.k(grid.midpoints(), t_eval), dtype=float),
        d_int=np.asarray(problem.q(x_int, t_eval), dtype=float),
        phi_int=np.asarray(problem.f(x_int, t_eval), dtype=float),
        y_full=history.values[-1],
        diffs=history.interior_diffs(),
    )
    values = np.zeros(grid.n + 1)
    values[1:-1] = interior
    return GridLayer(values=values, layer_time=(j + 1) * tau)


def run_second_order(
    problem: ProblemSpec, order: FractionalOrder, nx: int, nt: int
) -> SolutionHistory:
    """Run the second-order scheme on ``nx`` space subintervals and ``nt``
    time steps covering ``[0, horizon]``.  Cost ``O(nt^2 * nx)`` because the
    history convolution is recomputed in full each step."""
    if nt < 1:
        raise ValueError(f"need at least one time step, got {nt}")
    grid = SpaceGrid(n=nx, length=problem.length)
    tau = problem.horizon / nt
    sigma = order.sigma
    scale = _derivative_scale(order, tau)
    a_table = coeff_a_array(order, nt - 1)
    b_table = coeff_b_array(order, nt - 1)

    x = grid.nodes()
    x_int = x[1:-1]
    x_mid = grid.midpoints()
    values = np.zeros((nt + 1, nx + 1))
    values[0] = _validate_initial_layer(
        np.asarray(problem.u0(x), dtype=float), problem
    )
    diffs = np.empty((nt, nx - 1))

    for j in range(nt):
        t_eval = (j + sigma) * tau
        c = _assemble_l21sigma(a_table, b_table, j)
        interior = _second_order_core(
            h=grid.h,
            sigma=sigma,
            scale=scale,
            c=c,
            a_half=np.asarray(problem.k(x_mid, t_eval), dtype=float),
            d_int=np.asarray(problem.q(x_int, t_eval), dtype=float),
            phi_int=np.asarray(problem.f(x_int, t_eval), dtype=float),
            y_full=values[j],
            diffs=diffs,
        )
        values[j + 1, 1:-1] = interior
        diffs[j] = interior - values[j, 1:-1]

    history = SolutionHistory(
        grid, GridLayer(values=values[0], layer_time=0.0), reserve=nt
    )
    for j in range(1, nt + 1):
        history.append(GridLayer(values=values[j], layer_time=j * tau))
    return history


def step_compact(
    problem: ProblemSpec,
    order: FractionalOrder,
    grid: SpaceGrid,
    tau: float,
    history: SolutionHistory,
) -> GridLayer:
    """Advance the compact fourth-order scheme one step.

    Requires time-only coefficients.  The source enters under the mass
    operator, which reads ``f`` at the boundary nodes as well.
    """
    if not problem.has_time_only_coefficients:
        raise SchemeCompatibilityError(
            "compact scheme requires time-only coefficients (k_time and q_time)"
        )
    j = len(history) - 1
    t_eval = (j + order.sigma) * tau
    a_table = coeff_a_array(order, max(j, 0))
    b_table = coeff_b_array(order, max(j, 0))
    c = _assemble_l21sigma(a_table, b_table, j)
    interior = _compact_core(
        h=grid.h,
        sigma=order.sigma,
        scale=_derivative_scale(order, tau),
        c=c,
        a=float(problem.k_time(t_eval)),
        d=float(problem.q_time(t_eval)),
        phi_full=np.asarray(problem.f(grid.nodes(), t_eval), dtype=float),
        y_full=history.values[-1],
        diffs=history.interior_diffs(),
    )
    values = np.zeros(grid.n + 1)
    values[1:-1] = interior
    return GridLayer(values=values, layer_time=(j + 1) * tau)


def run_compact(
    problem: ProblemSpec, order: FractionalOrder, nx: int, nt: int
) -> SolutionHistory:
    """Run the compact scheme on ``nx`` space subintervals and ``nt`` time
    steps covering ``[0, horizon]``."""
    if not problem.has_time_only_coefficients:
        raise SchemeCompatibilityError(
            "compact scheme requires time-only coefficients (k_time and q_time)"
        )
    if nt < 1:
        raise ValueError(f"need at least one time step, got {nt}")
    grid = SpaceGrid(n=nx, length=problem.length)
    tau = problem.horizon / nt
    sigma = order.sigma
    scale = _derivative_scale(order, tau)
    a_table = coeff_a_array(order, nt - 1)
    b_table = coeff_b_array(order, nt - 1)

    x = grid.nodes()
    values = np.zeros((nt + 1, nx + 1))
    values[0] = _validate_initial_layer(
        np.asarray(problem.u0(x), dtype=float), problem
    )
    diffs = np.empty((nt, nx - 1))

    for j in range(nt):
        t_eval = (j + sigma) * tau
        c = _assemble_l21sigma(a_table, b_table, j)
        interior = _compact_core(
            h=grid.h,
            sigma=sigma,
            scale=scale,
            c=c,
            a=float(problem.k_time(t_eval)),
            d=float(problem.q_time(t_eval)),
            phi_full=np.asarray(problem.f(x, t_eval), dtype=float),
            y_full=values[j],
            diffs=diffs,
        )
        values[j + 1, 1:-1] = interior
        diffs[j] = interior - values[j, 1:-1]

    history = SolutionHistory(
        grid, GridLayer(values=values[0], layer_time=0.0), reserve=nt
    )
    for j in range(1, nt + 1):
        history.append(GridLayer(values=values[j], layer_time=j * tau))
    return history


def a_priori_bound(
    problem: ProblemSpec,
    order: FractionalOrder,
    history: SolutionHistory,
    scheme: str = "second",
) -> tuple[float, float]:
    """Evaluate both sides of the a priori stability estimate for a finished
    run.

    Returns ``(lhs, rhs)`` where ``lhs`` is the largest squared solution norm
    over all layers and ``rhs = ||y^0||^2 + const * max_j ||phi^j||^2`` with
    the source sampled at the collocation times.  For the second-order scheme
    the norms are plain interior L2 norms and
    ``const = l^2 T^alpha Gamma(1-alpha) / (4 c1)``; for the compact scheme
    the norms are taken after the mass operator and
    ``const = l^2 T^alpha Gamma(1-alpha) / c1``.  Stability means
    ``lhs <= rhs``.
    """
    if scheme not in ("second", "compact"):
        raise ValueError(f"unknown scheme {scheme!r}")
    grid = history.grid
    steps = len(history) - 1
    if steps < 1:
        raise ValueError("history must contain at least one computed step")
    times = history.times
    tau = float(times[1] - times[0])
    t_final = float(times[-1])
    x = grid.nodes()
    h = grid.h
    alpha, sigma = order.alpha, order.sigma

    values = history.values
    if scheme == "compact":
        transformed = _mass_average(values)
        source_consts = problem.length**2 * t_final**alpha * math.gamma(1.0 - alpha) / problem.c1
    else:
        transformed = values[:, 1:-1]
        source_consts = (
            problem.length**2 * t_final**alpha * math.gamma(1.0 - alpha) / (4.0 * problem.c1)
        )
    layer_norms_sq = h * np.sum(transformed * transformed, axis=1)

    source_norm_sq = 0.0
    for j in range(steps):
        phi = np.asarray(problem.f(x, (j + sigma) * tau), dtype=float)
        phi_t = _mass_average(phi) if scheme == "compact" else phi[1:-1]
        source_norm_sq = max(source_norm_sq, h * float(np.dot(phi_t, phi_t)))

    lhs = float(layer_norms_sq.max())
    rhs = float(layer_norms_sq[0] + source_consts * source_norm_sq)
    return lhs, rhs
