"""Exact propagation of the closed loop between launch slots.

Between jumps the density error obeys the linear ODE

    dx/dt = (r - x) / tau

so every quantity along a flow arc has a closed form.  The neuron integrates
``max(0, x)``; the kink at ``x = 0`` is handled by solving for the crossing
time explicitly instead of stepping through it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FlowSetViolation, NegativeDuration
from .params import SystemParams

# relative slack when snapping the timer onto the slot boundary
TIMER_SNAP_RTOL = 1e-12


@dataclass(frozen=True)
class HybridState:
    """Closed-loop state: density error ``x``, membrane potential ``xi``, slot timer."""

    x: float
    xi: float = 0.0
    timer: float = 0.0

    def in_state_space(self, params: SystemParams, tol: float = 0.0) -> bool:
        return (
            self.x <= params.r + tol * params.r
            and self.xi >= 0.0
            and -tol * params.t_c <= self.timer <= params.t_c * (1.0 + tol)
        )


def _check_duration(dt: float) -> None:
    if not dt >= 0:
        raise NegativeDuration(f"flow duration must be >= 0, got {dt!r}")


def _excess_ramp(u: float) -> float:
    """u - (1 - exp(-u)) without cancellation for small u."""
    if u < 1e-2:
        # alternating series u^2/2 - u^3/6 + ...; truncation error < u^8 / 40320
        term = u * u / 2.0
        total = 0.0
        for k in range(3, 9):
            total += term
            term *= -u / k
        return total
    return u + math.expm1(-u)


def flow_x(x0: float, dt: float, params: SystemParams) -> float:
    """Density error after flowing for ``dt`` seconds from ``x0``."""
    _check_duration(dt)
    gap = params.r - x0
    x = x0 - gap * math.expm1(-dt / params.tau)
    return min(x, params.r)


def zero_crossing_time(x0: float, params: SystemParams) -> float | None:
    """Time for a negative error to flow up to zero; ``None`` if ``x0 >= 0``."""
    if x0 >= 0:
        return None
    return params.tau * math.log1p(-x0 / params.r)


def _integral_nonneg(x0: float, dt: float, tau: float, r: float) -> float:
    # integral of x over [0, dt] along the flow, valid for x0 >= 0
    return x0 * dt + (r - x0) * tau * _excess_ramp(dt / tau)


def flow_xi(x0: float, xi0: float, dt: float, params: SystemParams) -> float:
    """Membrane potential after ``dt`` seconds: ``xi0`` plus the integral of max(0, x)."""
    _check_duration(dt)
    if x0 < 0:
        t_star = zero_crossing_time(x0, params)
        if dt <= t_star:
            return xi0
        return xi0 + _integral_nonneg(0.0, dt - t_star, params.tau, params.r)
    return xi0 + _integral_nonneg(x0, dt, params.tau, params.r)


def flow_state(q: HybridState, dt: float, params: SystemParams) -> HybridState:
    """Propagate the full state along the flow map.

    The timer may not pass the slot period; reaching it exactly is allowed
    and the result is snapped onto ``t_c`` to absorb rounding.
    """
    _check_duration(dt)
    timer = q.timer + dt
    slack = TIMER_SNAP_RTOL * params.t_c
    if timer > params.t_c + slack:
        raise FlowSetViolation(
            f"timer would reach {timer:.17g} s, beyond the slot period {params.t_c:.17g} s"
        )
    if abs(timer - params.t_c) <= slack:
        timer = params.t_c
    return HybridState(
        x=flow_x(q.x, dt, params),
        xi=flow_xi(q.x, q.xi, dt, params),
        timer=timer,
    )


def flow_x_many(x0, dt, params: SystemParams) -> np.ndarray:
    """Vectorised :func:`flow_x` over arrays of start errors and durations."""
    x0 = np.asarray(x0, dtype=float)
    dt = np.asarray(dt, dtype=float)
    if np.any(dt < 0):
        raise NegativeDuration("flow durations must be >= 0")
    x = x0 - (params.r - x0) * np.expm1(-dt / params.tau)
    return np.minimum(x, params.r)


def flow_xi_many(x0, xi0, dt, params: SystemParams) -> np.ndarray:
    """Vectorised :func:`flow_xi`."""
    x0, xi0, dt = np.broadcast_arrays(
        np.asarray(x0, dtype=float), np.asarray(xi0, dtype=float), np.asarray(dt, dtype=float)
    )
    if np.any(dt < 0):
        raise NegativeDuration("flow durations must be >= 0")
    tau, r = params.tau, params.r
    neg = x0 < 0
    t_star = np.where(neg, tau * np.log1p(-np.where(neg, x0, 0.0) / r), 0.0)
    active = np.maximum(dt - t_star, 0.0)
    start = np.where(neg, 0.0, x0)
    u = active / tau
    small = u < 1e-2
    us = np.where(small, u, 0.0)
    series = us * us * (0.5 - us / 6.0 + us * us / 24.0 - us**3 / 120.0 + us**4 / 720.0
                        - us**5 / 5040.0)
    ramp = np.where(small, series, u + np.expm1(-np.where(small, 0.0, u)))
    return xi0 + start * active + (r - start) * tau * ramp
