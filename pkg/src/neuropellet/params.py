"""System constants and the admissible design region of the pellet controller.

All quantities are kept in raw SI units (densities around 1e19 m^-3); no
normalisation is applied anywhere in the package.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    ActuatorTooSlow,
    InconsistentAlpha,
    NegativeDelta,
    NonPositiveParam,
    ReferenceTooSmall,
)

# Slack on the T_c <= t_c_max test so that rounded design values such as
# 0.0154151 s are still accepted as lying on the boundary.
TC_BOUNDARY_RTOL = 1e-5
ALPHA_CONSISTENCY_RTOL = 1e-9


@dataclass(frozen=True)
class SystemParams:
    """Plant and controller constants.

    tau     particle confinement time constant [s]
    r       density reference [m^-3]
    alpha   density increase caused by one pellet [m^-3]
    t_c     period between launch slots of the centrifuge [s]
    delta   neuron firing threshold [m^-3 s]; ``math.inf`` disables firing

    ``pellet_particles`` and ``conversion`` are optional; when both are
    given, ``alpha`` must equal their product.
    """

    tau: float
    r: float
    alpha: float
    t_c: float
    delta: float = 0.0
    pellet_particles: float | None = None
    conversion: float | None = None


@dataclass(frozen=True)
class DerivedConstants:
    gamma: float
    tau_d: float
    t_c_max: float
    delta_max: float


def validate(params: SystemParams) -> SystemParams:
    """Check the parameter invariants and return ``params`` unchanged."""
    for name in ("tau", "r", "alpha", "t_c"):
        value = getattr(params, name)
        if not (math.isfinite(value) and value > 0):
            raise NonPositiveParam(f"{name} must be finite and > 0, got {value!r}")
    if not params.delta >= 0:
        raise NegativeDelta(f"delta must be >= 0, got {params.delta!r}")
    if params.r <= params.alpha:
        raise ReferenceTooSmall(
            f"reference r = {params.r:g} must exceed the pellet effect alpha = {params.alpha:g}"
        )
    if params.pellet_particles is not None and params.conversion is not None:
        expected = params.pellet_particles * params.conversion
        if abs(params.alpha - expected) > ALPHA_CONSISTENCY_RTOL * params.alpha:
            raise InconsistentAlpha(
                f"alpha = {params.alpha:g} but conversion * pellet_particles = {expected:g}"
            )
    return params


def _log_ratio(r: float, alpha: float) -> float:
    # ln(r / (r - alpha)), accurate for small alpha / r
    return -math.log1p(-alpha / r)


def tc_upper_bound(params: SystemParams) -> float:
    """Largest slot period for which the practical stability guarantee holds."""
    return params.tau * _log_ratio(params.r, params.alpha)


def tc_upper_bound_ratio_form(params: SystemParams) -> float:
    """Same bound written in terms of the ratio r / alpha."""
    k = params.r / params.alpha
    return params.tau * math.log(k / (k - 1.0))


def _delta_bound_raw(params: SystemParams) -> float:
    tau, r, t_c = params.tau, params.r, params.t_c
    gamma = (r - params.alpha) / r
    return (
        r * tau * _log_ratio(r, params.alpha)
        - r * tau * (1.0 - gamma * math.exp(t_c / tau))
        - r * t_c
    )


def delta_upper_bound(params: SystemParams) -> float:
    """Largest admissible firing threshold for the configured ``t_c``.

    Raises ActuatorTooSlow when ``t_c`` exceeds :func:`tc_upper_bound`.
    """
    t_c_max = tc_upper_bound(params)
    if params.t_c > t_c_max * (1.0 + TC_BOUNDARY_RTOL):
        raise ActuatorTooSlow(params.t_c, t_c_max)
    return max(_delta_bound_raw(params), 0.0)


def gamma(params: SystemParams) -> float:
    return (params.r - params.alpha) / params.r


def derive_constants(params: SystemParams) -> DerivedConstants:
    t_c_max = tc_upper_bound(params)
    return DerivedConstants(
        gamma=gamma(params),
        tau_d=t_c_max,
        t_c_max=t_c_max,
        delta_max=delta_upper_bound(params),
    )


def hypotheses_hold(params: SystemParams) -> bool:
    """True when ``t_c`` and ``delta`` lie in the guaranteed design region."""
    try:
        delta_max = delta_upper_bound(params)
    except ActuatorTooSlow:
        return False
    # relative slack for thresholds read back from rounded decimal values
    return params.delta <= delta_max * (1.0 + 1e-12) + 1e-12 * params.r * params.tau
