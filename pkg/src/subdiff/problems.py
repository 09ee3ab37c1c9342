"""Built-in test problems with known exact solutions.

Three bundles are registered:

* ``caputo-monomial`` — the scalar function ``u(t) = t**(4+alpha)`` whose
  Caputo derivative of order ``alpha`` at ``t = 1`` equals
  ``gamma(5+alpha)/24 * t**4`` evaluated at 1; exercises the discrete time
  operators alone.
* ``varcoeff-2nd`` — a manufactured diffusion problem with space-and-time
  coefficients ``k = 2 - sin(xt)``, ``q = 1 - cos(xt)`` and exact solution
  ``sin(pi x)(t^3 + 3t^2 + 1)``; target of the second-order scheme.
* ``timecoeff-compact`` — a manufactured problem with time-only coefficients
  ``k = exp(t)``, ``q = 1 - sin(2t)`` and exact solution ``t^2 sin(pi x)``;
  target of the compact fourth-order scheme.

Sources are derived from the exact solutions through the defining identity
``f = D_t^alpha u - (k u_x)_x + q u``; the test suite verifies the residual
numerically, so the expressions here are self-checking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .kernels import FractionalOrder
from .schemes import ProblemSpec

__all__ = [
    "MonomialCase",
    "NamedProblem",
    "PROBLEM_IDS",
    "get_problem",
    "problem_caputo_monomial",
    "problem_timecoeff_compact",
    "problem_varcoeff_2nd",
]

PROBLEM_IDS = ("caputo-monomial", "varcoeff-2nd", "timecoeff-compact")


@dataclass(frozen=True)
class MonomialCase:
    """Scalar test function for the discrete Caputo operators."""

    order: FractionalOrder
    u: Callable[[np.ndarray], np.ndarray]
    u_dt: Callable[[np.ndarray], np.ndarray]
    exact_value: float  # the exact derivative at t = 1


@dataclass(frozen=True)
class NamedProblem:
    """A registered problem: a PDE spec, a scalar kernel case, or both."""

    problem_id: str
    spec: Optional[ProblemSpec]
    case: Optional[MonomialCase]
    notes: str
    exact_dt: Optional[Callable[[np.ndarray, float], np.ndarray]] = None


def problem_caputo_monomial(order: FractionalOrder) -> MonomialCase:
    """``u(t) = t**(4+alpha)``: smooth at 0, exact derivative known in closed
    form (``gamma(5+alpha)/gamma(5) * t**4``)."""
    power = 4.0 + order.alpha

    def u(t):
        return np.asarray(t, dtype=float) ** power

    def u_dt(t):
        return power * np.asarray(t, dtype=float) ** (power - 1.0)

    return MonomialCase(
        order=order, u=u, u_dt=u_dt, exact_value=math.gamma(5.0 + order.alpha) / 24.0
    )


def _varcoeff_exact_factory():
    def exact(x, t):
        return np.sin(np.pi * x) * (t**3 + 3.0 * t**2 + 1.0)

    def exact_dt(x, t):
        return np.sin(np.pi * x) * (3.0 * t**2 + 6.0 * t)

    return exact, exact_dt


def problem_varcoeff_2nd(order: FractionalOrder) -> ProblemSpec:
    """Manufactured problem with genuinely space-and-time coefficients."""
    alpha = order.alpha
    gamma_4a = math.gamma(4.0 - alpha)
    gamma_3a = math.gamma(3.0 - alpha)
    exact, _ = _varcoeff_exact_factory()

    def k(x, t):
        return 2.0 - np.sin(x * t)

    def q(x, t):
        return 1.0 - np.cos(x * t)

    def f(x, t):
        x = np.asarray(x, dtype=float)
        g = t**3 + 3.0 * t**2 + 1.0
        caputo_part = (
            6.0 * t ** (3.0 - alpha) / gamma_4a + 6.0 * t ** (2.0 - alpha) / gamma_3a
        )
        sin_px = np.sin(np.pi * x)
        flux_part = g * (
            t * np.cos(x * t) * np.pi * np.cos(np.pi * x)
            + (2.0 - np.sin(x * t)) * np.pi**2 * sin_px
        )
        reaction_part = (1.0 - np.cos(x * t)) * g * sin_px
        return caputo_part * sin_px + flux_part + reaction_part

    def u0(x):
        return np.sin(np.pi * np.asarray(x, dtype=float))

    return ProblemSpec(
        k=k,
        q=q,
        f=f,
        u0=u0,
        length=1.0,
        horizon=1.0,
        c1=2.0 - math.sin(1.0),
        exact=exact,
    )


def _timecoeff_exact_factory():
    def exact(x, t):
        return t**2 * np.sin(np.pi * x)

    def exact_dt(x, t):
        return 2.0 * t * np.sin(np.pi * x)

    return exact, exact_dt


def problem_timecoeff_compact(order: FractionalOrder) -> ProblemSpec:
    """Manufactured problem with time-only coefficients (compact-capable)."""
    alpha = order.alpha
    gamma_3a = math.gamma(3.0 - alpha)
    exact, _ = _timecoeff_exact_factory()

    def k_time(t: float) -> float:
        return math.exp(t)

    def q_time(t: float) -> float:
        return 1.0 - math.sin(2.0 * t)

    def k(x, t):
        return math.exp(t) * np.ones_like(np.asarray(x, dtype=float))

    def q(x, t):
        return (1.0 - math.sin(2.0 * t)) * np.ones_like(np.asarray(x, dtype=float))

    def f(x, t):
        x = np.asarray(x, dtype=float)
        bracket = (
            np.pi**2 * t**2 * math.exp(t)
            + t**2 * (1.0 - math.sin(2.0 * t))
            + 2.0 * t ** (2.0 - alpha) / gamma_3a
        )
        return bracket * np.sin(np.pi * x)

    def u0(x):
        return np.zeros_like(np.asarray(x, dtype=float))

    return ProblemSpec(
        k=k,
        q=q,
        f=f,
        u0=u0,
        length=1.0,
        horizon=1.0,
        c1=1.0,
        exact=exact,
        k_time=k_time,
        q_time=q_time,
    )


def get_problem(problem_id: str, order: FractionalOrder) -> NamedProblem:
    """Build the named problem for a concrete fractional order."""
    if problem_id == "caputo-monomial":
        return NamedProblem(
            problem_id=problem_id,
            spec=None,
            case=problem_caputo_monomial(order),
            notes="scalar monomial t**(4+alpha) with closed-form derivative",
        )
    if problem_id == "varcoeff-2nd":
        _, exact_dt = _varcoeff_exact_factory()
        return NamedProblem(
            problem_id=problem_id,
            spec=problem_varcoeff_2nd(order),
            case=None,
            notes="space-time coefficients, exact solution sin(pi x)(t^3+3t^2+1)",
            exact_dt=exact_dt,
        )
    if problem_id == "timecoeff-compact":
        _, exact_dt = _timecoeff_exact_factory()
        return NamedProblem(
            problem_id=problem_id,
            spec=problem_timecoeff_compact(order),
            case=None,
            notes="time-only coefficients, exact solution t^2 sin(pi x)",
            exact_dt=exact_dt,
        )
    raise KeyError(
        f"unknown problem id {problem_id!r}; registered ids: {', '.join(PROBLEM_IDS)}"
    )
