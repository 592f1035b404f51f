"""Quantitative checks of trajectories against the practical-stability guarantee.

Every check returns a :class:`VerificationReport` whose entries carry the
signed worst-case margin to the bound (positive means inside) and where it
occurs.  A check fails iff its margin is below ``-tolerance``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .controller import JumpKind
from .errors import ActuatorTooSlow, HorizonTooShort, TheoremHypothesisViolated
from .params import (
    SystemParams,
    delta_upper_bound,
    gamma,
    hypotheses_hold,
    tc_upper_bound,
)
from .simulator import Trajectory

NUM_TOL_REL = 1e-9
CONTRACTION_MIN_START_REL = 1e-6
DEFAULT_SETTLE_TOL_REL = 1e-3


class EnvelopeCase(str, enum.Enum):
    POSITIVE_START = "positive_start"
    NON_POSITIVE_START = "non_positive_start"


@dataclass(frozen=True)
class BoundEnvelope:
    """Transient bounds on the density error for a given initial error."""

    params: SystemParams
    x0: float

    @property
    def case(self) -> EnvelopeCase:
        return EnvelopeCase.POSITIVE_START if self.x0 > 0 else EnvelopeCase.NON_POSITIVE_START

    def lower(self, t):
        p = self.params
        t = np.asarray(t, dtype=float)
        if self.case is EnvelopeCase.POSITIVE_START:
            return np.full_like(t, -p.alpha)
        flow = p.r - np.exp(-t / p.tau) * (p.r - self.x0)
        return np.minimum(flow, -p.alpha)

    def upper(self, t):
        p = self.params
        t = np.asarray(t, dtype=float)
        if self.case is EnvelopeCase.NON_POSITIVE_START:
            return np.full_like(t, p.alpha)
        tau_d = tc_upper_bound(p)
        return gamma(p) ** (t / tau_d - 1.0) * self.x0 + p.alpha

    def settle_time(self, settle_tol: float) -> float:
        """Earliest time after which the envelope lies inside ``[-a - tol, a + tol]``."""
        p = self.params
        if self.case is EnvelopeCase.POSITIVE_START:
            if self.x0 <= settle_tol:
                return 0.0
            tau_d = tc_upper_bound(p)
            return max(0.0, tau_d * (1.0 + math.log(settle_tol / self.x0) / math.log(gamma(p))))
        floor = p.alpha + settle_tol
        if self.x0 >= -floor:
            return 0.0
        return p.tau * math.log((p.r - self.x0) / (p.r + floor))


def envelope(params: SystemParams, x0: float, t):
    """``(lower, upper)`` bounds on ``x(t, j)`` for a run started at ``x0`` with ``xi = 0``."""
    if not hypotheses_hold(params):
        raise TheoremHypothesisViolated(
            "t_c or delta lies outside the region where the bounds are guaranteed"
        )
    env = BoundEnvelope(params, x0)
    return env.lower(t), env.upper(t)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    margin: float
    t: float = math.nan
    j: int = -1
    tolerance: float = 0.0
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        loc = f"t={self.t:.9g} j={self.j}" if self.j >= 0 else "t=- j=-"
        text = f"{self.name:<26} {status}  margin={self.margin:.6g}  {loc}"
        return f"{text}  {self.detail}" if self.detail else text


@dataclass
class VerificationReport:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def __iter__(self):
        return iter(self.checks)

    def extend(self, other: VerificationReport) -> VerificationReport:
        self.checks.extend(other.checks)
        return self

    def to_text(self) -> str:
        return "\n".join(c.line() for c in self.checks) + "\n"


def _margin_check(name, margins, ts, js, tol, detail="") -> CheckResult:
    if len(margins) == 0:
        return CheckResult(name, True, math.inf, tolerance=tol, detail=detail or "no points")
    k = int(np.argmin(margins))
    m = float(margins[k])
    return CheckResult(name, m >= -tol, m, float(ts[k]), int(js[k]), tol, detail)


def _points(traj: Trajectory):
    ts, js, xs = [], [], []
    for t, j, q in traj.nodes():
        ts.append(t)
        js.append(j)
        xs.append(q.x)
    if traj.samples is not None and len(traj.samples):
        ts.extend(traj.samples.t)
        js.extend(traj.samples.j)
        xs.extend(traj.samples.x)
    return np.asarray(ts, float), np.asarray(js, int), np.asarray(xs, float)


def check_envelope(traj: Trajectory, params: SystemParams | None = None) -> VerificationReport:
    """Check ``lower(t) < x(t, j) <= upper(t)`` at every arc boundary and sample.

    Along an arc ``x`` increases while both bounds are either constant, move
    with the same flow, or decrease, so the arc boundaries carry the extremes.
    """
    params = params or traj.params
    tol = NUM_TOL_REL * params.r
    report = VerificationReport()
    x0 = traj.initial_state.x
    ok = hypotheses_hold(params) and traj.initial_state.xi == 0.0
    try:
        slack = delta_upper_bound(params) - params.delta
        detail = f"delta_max - delta = {slack:.6g}"
    except ActuatorTooSlow as exc:
        slack = exc.t_c_max - exc.t_c
        detail = f"t_c_max - t_c = {slack:.6g}"
    if traj.initial_state.xi != 0.0:
        detail += "; xi(0,0) != 0"
    report.checks.append(CheckResult("envelope.hypotheses", ok, slack, detail=detail))

    env = BoundEnvelope(params, x0)
    ts, js, xs = _points(traj)
    report.checks.append(
        _margin_check("envelope.upper", env.upper(ts) - xs, ts, js, tol, env.case.value)
    )
    report.checks.append(
        _margin_check("envelope.lower", xs - env.lower(ts), ts, js, tol, env.case.value)
    )
    return report


def _pellet_cycles(traj: Trajectory, min_start: float):
    """Pellet-to-pellet cycles starting with ``xi = 0`` and ``x > min_start``.

    ``x`` only grows during flow and skip jumps leave it unchanged, so a
    positive start keeps the error positive for the whole cycle.
    Yields ``(t_start, j_start, x_start, next_pellet_event)``.
    """
    pellets = [ev for ev in traj.jumps if ev.kind is JumpKind.PELLET]
    starts = []
    if traj.initial_state.xi == 0.0 and pellets:
        starts.append((0.0, 0, traj.initial_state.x, "initial", pellets[0]))
    starts.extend(
        (ev.time, ev.jump_index + 1, ev.state_after.x, "pellet", nxt)
        for ev, nxt in zip(pellets, pellets[1:])
    )
    for cycle in starts:
        if cycle[2] > min_start:
            yield cycle


def check_dwell_and_pellet_gaps(
    traj: Trajectory, params: SystemParams | None = None
) -> VerificationReport:
    params = params or traj.params
    report = VerificationReport()
    tol = NUM_TOL_REL * params.t_c

    times = np.array([0.0] + [ev.time for ev in traj.jumps])
    if len(traj.jumps):
        first = traj.jumps[0].time - (params.t_c - traj.initial_state.timer)
        gaps = np.diff(times[1:])
        devs = np.concatenate([[abs(first)], np.abs(gaps - params.t_c)])
        k = int(np.argmax(devs))
        ev = traj.jumps[k]
        report.checks.append(CheckResult(
            "dwell.slot_period", devs[k] <= tol, tol - float(devs[k]), ev.time, ev.jump_index,
            tol, f"max |gap - t_c| = {devs[k]:.3g} s",
        ))
    else:
        report.checks.append(CheckResult("dwell.slot_period", True, tol, tolerance=tol,
                                         detail="no jumps"))

    tau_d = tc_upper_bound(params)
    bound = math.ceil(tau_d / params.t_c * (1.0 - 1e-12)) * params.t_c
    margins, ts, js = [], [], []
    for t0, j0, _x0, _origin, nxt in _pellet_cycles(traj, 0.0):
        margins.append(bound - (nxt.time - t0))
        ts.append(nxt.time)
        js.append(nxt.jump_index)
    report.checks.append(_margin_check(
        "dwell.pellet_gap", np.asarray(margins), ts, js, tol,
        f"bound {bound:.6g} s over {len(margins)} cycles",
    ))
    return report


def check_contraction(traj: Trajectory, params: SystemParams | None = None) -> VerificationReport:
    """Each positive pellet cycle must shrink the error by at least ``gamma``."""
    params = params or traj.params
    tol = NUM_TOL_REL * params.r
    g = gamma(params)
    margins, ts, js = [], [], []
    for _t0, _j0, x0, origin, nxt in _pellet_cycles(traj, CONTRACTION_MIN_START_REL * params.r):
        if origin != "pellet":
            continue
        margins.append(g * x0 - nxt.state_after.x)
        ts.append(nxt.time)
        js.append(nxt.jump_index + 1)
    report = VerificationReport()
    report.checks.append(_margin_check(
        "contraction", np.asarray(margins), ts, js, tol, f"{len(margins)} cycles",
    ))
    return report


def check_ultimate_bound(
    traj: Trajectory, params: SystemParams | None = None, settle_tol: float | None = None
) -> VerificationReport:
    """Check the run settles into ``|x| <= alpha + settle_tol`` no later than the envelope does."""
    params = params or traj.params
    if settle_tol is None:
        settle_tol = DEFAULT_SETTLE_TOL_REL * params.alpha
    env = BoundEnvelope(params, traj.initial_state.x)
    t_est = env.settle_time(settle_tol)
    if traj.horizon < t_est:
        raise HorizonTooShort(
            f"horizon {traj.horizon:g} s is shorter than the settle estimate {t_est:g} s"
        )
    band = params.alpha + settle_tol

    t_settle, j_settle = 0.0, 0
    for arc in traj.arcs:
        if abs(arc.end.x) > band:
            t_settle, j_settle = arc.t_end, arc.j
        elif abs(arc.start.x) > band:
            # starts below -band and flows up through it inside the arc
            cross = params.tau * math.log((params.r - arc.start.x) / (params.r + band))
            t_settle, j_settle = min(arc.t_start + cross, arc.t_end), arc.j

    report = VerificationReport()
    time_tol = 1e-12 * t_est
    settled = t_settle <= t_est + time_tol and abs(traj.final_state.x) <= band
    report.checks.append(CheckResult(
        "ultimate_bound.settle", settled, t_est - t_settle, t_settle, j_settle, time_tol,
        f"last exit at {t_settle:.6g} s, estimate {t_est:.6g} s",
    ))
    ts, js, xs = _points(traj)
    late = ts >= t_est
    report.checks.append(_margin_check(
        "ultimate_bound.band", band - np.abs(xs[late]), ts[late], js[late], 0.0,
        f"|x| <= {band:.6g} for t >= {t_est:.6g}",
    ))
    return report


def verify_all(traj: Trajectory, settle_tol: float | None = None) -> VerificationReport:
    report = check_envelope(traj)
    report.extend(check_dwell_and_pellet_gaps(traj))
    report.extend(check_contraction(traj))
    report.extend(check_ultimate_bound(traj, settle_tol=settle_tol))
    return report
