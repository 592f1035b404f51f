"""Fixed-step numerical integration of the flow map, used as an independent check.

The oracle shares nothing with the closed-form propagator except the
controller's slot/jump logic.  The max(0, x) kink is integrated as is, so
the potential is only second-order accurate on the step containing the
zero crossing.

With ``dps`` set, arithmetic runs in mpmath at that many decimal digits;
this is what makes the RK4 convergence order observable, since at practical
step sizes its truncation error is below double-precision rounding.
"""
from __future__ import annotations

import enum
import math
from contextlib import nullcontext
from dataclasses import dataclass

import numpy as np

from .controller import JumpKind, TieBreak
from .errors import IncomparableRuns, MisalignedStep
from .flow import HybridState, flow_x_many, flow_xi_many
from .params import SystemParams, validate
from .simulator import Samples, Trajectory, _check_initial, pellet_times, run_hybrid
from .verifier import CheckResult, VerificationReport

ALIGN_RTOL = 1e-9


class Scheme(str, enum.Enum):
    RK4 = "rk4"
    EULER = "euler"


@dataclass(frozen=True)
class OracleConfig:
    h: float
    scheme: Scheme = Scheme.RK4
    dps: int | None = None

    def __post_init__(self):
        if not (math.isfinite(self.h) and self.h > 0):
            raise ValueError(f"step must be > 0, got {self.h!r}")
        object.__setattr__(self, "scheme", Scheme(self.scheme))


def _n_steps(duration: float, h: float) -> int:
    n = round(duration / h)
    if abs(n * h - duration) > ALIGN_RTOL * h:
        raise MisalignedStep(f"duration {duration!r} is not a multiple of the step {h!r}")
    return n


def _rk4_step(x, xi, h, tau, r):
    k1x = (r - x) / tau
    k1i = max(0, x)
    xa = x + h / 2 * k1x
    k2x = (r - xa) / tau
    k2i = max(0, xa)
    xb = x + h / 2 * k2x
    k3x = (r - xb) / tau
    k3i = max(0, xb)
    xc = x + h * k3x
    k4x = (r - xc) / tau
    k4i = max(0, xc)
    return (
        x + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x),
        xi + h / 6 * (k1i + 2 * k2i + 2 * k3i + k4i),
    )


def _euler_step(x, xi, h, tau, r):
    return x + h * (r - x) / tau, xi + h * max(0, x)


def _stepper(scheme: Scheme):
    return _rk4_step if scheme is Scheme.RK4 else _euler_step


def _precision(cfg: OracleConfig):
    if cfg.dps is None:
        return nullcontext(float)
    import mpmath

    class _Ctx:
        def __enter__(self):
            self._w = mpmath.workdps(cfg.dps)
            self._w.__enter__()
            return mpmath.mpf

        def __exit__(self, *exc):
            return self._w.__exit__(*exc)

    return _Ctx()


def integrate_xy(x0, xi0, n_steps: int, h, params: SystemParams, cfg: OracleConfig, record=None):
    """Take ``n_steps`` fixed steps of size ``h`` on ``(x, xi)``.

    Returns raw numbers in the configured precision.  ``record(k, x, xi)``
    is called after each step when given.
    """
    step = _stepper(cfg.scheme)
    with _precision(cfg) as num:
        x, xi = num(x0), num(xi0)
        h_, tau, r = num(h), num(params.tau), num(params.r)
        for k in range(1, n_steps + 1):
            x, xi = step(x, xi, h_, tau, r)
            if record is not None:
                record(k, x, xi)
    return x, xi


def integrate_arc(q0: HybridState, duration: float, params: SystemParams,
                  cfg: OracleConfig) -> HybridState:
    """Integrate the flow map for ``duration`` (a whole number of steps)."""
    n = _n_steps(duration, cfg.h)
    x, xi = integrate_xy(q0.x, q0.xi, n, cfg.h, params, cfg)
    return HybridState(x=float(x), xi=max(float(xi), 0.0), timer=q0.timer + duration)


def simulate_numeric(
    params: SystemParams,
    x0: float,
    horizon: float,
    cfg: OracleConfig,
    t0_timer: float = 0.0,
    xi0: float = 0.0,
    tie_break: TieBreak | str = TieBreak.PELLET,
    record: bool = True,
) -> Trajectory:
    """Closed-loop run with numerically integrated arcs.

    Slot instants coincide with the analytic simulator's, so both engines
    take their decisions at the same times.  With ``record`` every step is
    kept in ``Trajectory.samples``.
    """
    validate(params)
    _check_initial(params, x0, horizon, t0_timer, xi0)
    _n_steps(params.t_c, cfg.h)
    _n_steps(params.t_c - t0_timer, cfg.h)
    q0 = HybridState(x=float(x0), xi=float(xi0), timer=float(t0_timer))
    rows: list[tuple] = []

    def propagate(q, t_start, duration, j):
        n = math.floor(duration / cfg.h + ALIGN_RTOL)
        rest = duration - n * cfg.h

        def rec(k, x, xi):
            rows.append((t_start + k * cfg.h, j, float(x), float(xi), q.timer + k * cfg.h, "flow"))

        x, xi = integrate_xy(q.x, q.xi, n, cfg.h, params, cfg, rec if record else None)
        if rest > ALIGN_RTOL * cfg.h:
            # trailing partial step at the horizon only
            x, xi = integrate_xy(x, xi, 1, rest, params, cfg)
            if record:
                rows.append((t_start + duration, j, float(x), float(xi), q.timer + duration, "flow"))
        timer = q.timer + duration
        if abs(timer - params.t_c) <= 1e-12 * params.t_c:
            timer = params.t_c
        return HybridState(x=float(x), xi=max(float(xi), 0.0), timer=timer)

    arcs, jumps = run_hybrid(params, q0, horizon, propagate, tie_break)
    samples = None
    if record:
        samples = Samples.from_rows(
            [(0.0, 0, q0.x, q0.xi, q0.timer, "flow")] + rows, params.r
        )
    return Trajectory(params, q0, horizon, tuple(arcs), tuple(jumps), TieBreak(tie_break),
                      engine=f"numeric-{cfg.scheme.value}", samples=samples)


@dataclass(frozen=True)
class Comparison:
    """State pairs of two runs at their common comparison instants."""

    t: np.ndarray
    j: np.ndarray
    x_a: np.ndarray
    x_b: np.ndarray
    xi_a: np.ndarray
    xi_b: np.ndarray
    jaccard: float

    @property
    def dx(self) -> np.ndarray:
        return np.abs(self.x_a - self.x_b)

    @property
    def dxi(self) -> np.ndarray:
        return np.abs(self.xi_a - self.xi_b)


def _check_comparable(a: Trajectory, b: Trajectory) -> None:
    if a.params != b.params:
        raise IncomparableRuns("runs use different parameters")
    if a.initial_state != b.initial_state:
        raise IncomparableRuns("runs start from different states")
    if a.horizon != b.horizon:
        raise IncomparableRuns("runs have different horizons")
    if len(a.jumps) != len(b.jumps):
        raise IncomparableRuns("runs have different slot grids")


def _closed_form_at(traj: Trajectory, t: np.ndarray, j: np.ndarray):
    starts = np.array([arc.t_start for arc in traj.arcs])
    x0 = np.array([arc.start.x for arc in traj.arcs])
    xi0 = np.array([arc.start.xi for arc in traj.arcs])
    s = np.maximum(t - starts[j], 0.0)
    return flow_x_many(x0[j], s, traj.params), flow_xi_many(x0[j], xi0[j], s, traj.params)


def _jaccard(a: Trajectory, b: Trajectory) -> float:
    sa = set(pellet_times(a).jump_indices)
    sb = set(pellet_times(b).jump_indices)
    union = sa | sb
    return 1.0 if not union else len(sa & sb) / len(union)


def comparison_table(a: Trajectory, b: Trajectory) -> Comparison:
    """Pair up the states of two runs of the same scenario.

    Jump instants (pre and post states) are always compared.  When one run
    is analytic and the other carries dense samples, the analytic closed
    form is also evaluated at every sample instant.
    """
    _check_comparable(a, b)
    t, j, xa, xb, ia, ib = [], [], [], [], [], []
    for ea, eb in zip(a.jumps, b.jumps):
        for sa, sb, jj in ((ea.state_before, eb.state_before, ea.jump_index),
                           (ea.state_after, eb.state_after, ea.jump_index + 1)):
            t.append(ea.time)
            j.append(jj)
            xa.append(sa.x)
            xb.append(sb.x)
            ia.append(sa.xi)
            ib.append(sb.xi)
    fa, fb = a.final_state, b.final_state
    t.append(a.horizon)
    j.append(a.arcs[-1].j)
    xa.append(fa.x)
    xb.append(fb.x)
    ia.append(fa.xi)
    ib.append(fb.xi)
    cols = [np.asarray(c, dtype=float) for c in (t, xa, xb, ia, ib)]
    t_arr, xa_arr, xb_arr, ia_arr, ib_arr = cols
    j_arr = np.asarray(j, dtype=int)

    dense, exact, swap = None, None, False
    if a.engine == "analytic" and b.samples is not None:
        dense, exact = b.samples, a
    elif b.engine == "analytic" and a.samples is not None:
        dense, exact, swap = a.samples, b, True
    if dense is not None and len(dense):
        cx, cxi = _closed_form_at(exact, dense.t, dense.j)
        ex, exi = (dense.x, dense.xi)
        if swap:
            cx, ex, cxi, exi = ex, cx, exi, cxi
        t_arr = np.concatenate([t_arr, dense.t])
        j_arr = np.concatenate([j_arr, dense.j])
        xa_arr = np.concatenate([xa_arr, cx])
        xb_arr = np.concatenate([xb_arr, ex])
        ia_arr = np.concatenate([ia_arr, cxi])
        ib_arr = np.concatenate([ib_arr, exi])
    return Comparison(t_arr, j_arr, xa_arr, xb_arr, ia_arr, ib_arr, _jaccard(a, b))


def compare(a: Trajectory, b: Trajectory, tol: float, table: Comparison | None = None
            ) -> VerificationReport:
    """Agreement report between two runs.

    Only the density deviation is held to ``tol``.  The potential deviation
    and the pellet-slot Jaccard index are reported without failing, because
    a threshold tie at a slot can legitimately flip a decision.
    """
    table = table or comparison_table(a, b)
    report = VerificationReport()
    dx = table.dx
    k = int(np.argmax(dx))
    report.checks.append(CheckResult(
        "compare.x", bool(dx[k] <= tol), tol - float(dx[k]), float(table.t[k]), int(table.j[k]),
        tol, f"max |dx| = {dx[k]:.6g} over {len(dx)} points",
    ))
    dxi = table.dxi
    k = int(np.argmax(dxi))
    report.checks.append(CheckResult(
        "compare.xi", True, -float(dxi[k]), float(table.t[k]), int(table.j[k]), math.inf,
        f"max |dxi| = {dxi[k]:.6g} (reported only)",
    ))
    same = table.jaccard == 1.0
    report.checks.append(CheckResult(
        "compare.schedule", True, table.jaccard - 1.0, tolerance=1.0,
        detail=f"jaccard = {table.jaccard:.6g}" + ("" if same else " (schedules differ)"),
    ))
    return report
