"""Event-driven closed-loop simulation on the hybrid time domain.

The timer runs at unit rate, so launch slots occur at the known instants
``(t_c - timer0) + i * t_c``.  The simulator flows exactly to each slot with
the closed-form propagator, asks the controller for a decision and applies
the jump.  There is no event location and no step-size error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .controller import JumpEvent, JumpKind, TieBreak, apply_jump, jump_decision
from .errors import InvalidInitialState
from .flow import HybridState, flow_state, flow_x, flow_xi
from .params import SystemParams, validate

EVENT_FLOW = "flow"


@dataclass(frozen=True)
class Arc:
    """Flow interval ``[t_start, t_end] x {j}`` with its boundary states."""

    t_start: float
    t_end: float
    j: int
    start: HybridState
    end: HybridState


@dataclass(frozen=True)
class Samples:
    t: np.ndarray
    j: np.ndarray
    x: np.ndarray
    xi: np.ndarray
    timer: np.ndarray
    n_e: np.ndarray
    event: np.ndarray

    def __len__(self) -> int:
        return len(self.t)

    def rows(self):
        for k in range(len(self.t)):
            yield (
                float(self.t[k]),
                int(self.j[k]),
                float(self.x[k]),
                float(self.xi[k]),
                float(self.timer[k]),
                float(self.n_e[k]),
                str(self.event[k]),
            )

    @classmethod
    def from_rows(cls, rows, r: float) -> Samples:
        rows = list(rows)
        if not rows:
            empty = np.empty(0)
            return cls(empty, np.empty(0, dtype=int), empty, empty, empty, empty,
                       np.empty(0, dtype=object))
        t, j, x, xi, timer, event = zip(*rows)
        x = np.asarray(x, dtype=float)
        return cls(
            t=np.asarray(t, dtype=float),
            j=np.asarray(j, dtype=int),
            x=x,
            xi=np.asarray(xi, dtype=float),
            timer=np.asarray(timer, dtype=float),
            n_e=r - x,
            event=np.asarray(event, dtype=object),
        )


@dataclass(frozen=True)
class PelletSchedule:
    times: tuple[float, ...]
    jump_indices: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.times)

    def gaps(self) -> np.ndarray:
        return np.diff(np.asarray(self.times, dtype=float))


@dataclass(frozen=True)
class Trajectory:
    """Hybrid solution: flow arcs interleaved with jump events.

    ``arcs[i]`` ends where ``jumps[i]`` happens and ``jumps[i].state_after``
    starts ``arcs[i + 1]``; the last arc is truncated at ``horizon``.
    """

    params: SystemParams
    initial_state: HybridState
    horizon: float
    arcs: tuple[Arc, ...]
    jumps: tuple[JumpEvent, ...]
    tie_break: TieBreak = TieBreak.PELLET
    engine: str = "analytic"
    samples: Samples | None = field(default=None, compare=False)

    @property
    def final_state(self) -> HybridState:
        return self.arcs[-1].end

    def nodes(self):
        """Yield ``(t, j, state)`` at every arc boundary, in hybrid-time order.

        Along an arc ``x`` is monotone, so bounds that are monotone in time can
        be checked exactly on these points alone.
        """
        for arc in self.arcs:
            yield arc.t_start, arc.j, arc.start
            if arc.t_end > arc.t_start:
                yield arc.t_end, arc.j, arc.end


def slot_time(timer0: float, k: int, t_c: float) -> float:
    """Time of the k-th launch slot (k >= 1) for a timer starting at ``timer0``."""
    return k * t_c - timer0


def _check_initial(params: SystemParams, x0: float, horizon: float, t0_timer: float, xi0: float):
    if not math.isfinite(x0) or x0 > params.r:
        raise InvalidInitialState(f"x0 must be finite and <= r, got {x0!r}")
    if not (math.isfinite(horizon) and horizon > 0):
        raise InvalidInitialState(f"horizon must be > 0, got {horizon!r}")
    if not (math.isfinite(xi0) and xi0 >= 0):
        raise InvalidInitialState(f"xi0 must be >= 0, got {xi0!r}")
    if not 0 <= t0_timer <= params.t_c:
        raise InvalidInitialState(f"timer must lie in [0, t_c], got {t0_timer!r}")


def run_hybrid(
    params: SystemParams,
    q0: HybridState,
    horizon: float,
    propagate,
    tie_break: TieBreak | str = TieBreak.PELLET,
) -> tuple[list[Arc], list[JumpEvent]]:
    """Slot/jump loop shared by the analytic and numeric engines.

    ``propagate(q, t_start, duration, j)`` returns the state after flowing.
    """
    tie_break = TieBreak(tie_break)
    end_tol = 1e-12 * max(horizon, params.t_c)
    arcs: list[Arc] = []
    jumps: list[JumpEvent] = []
    q, t, j, i = q0, 0.0, 0, 0
    while True:
        t_slot = slot_time(q0.timer, i + 1, params.t_c)
        if t_slot > horizon + end_tol:
            t_end = max(horizon, t)
            end = propagate(q, t, t_end - t, j)
            arcs.append(Arc(t, t_end, j, q, end))
            break
        before = propagate(q, t, params.t_c - q.timer, j)
        arcs.append(Arc(t, t_slot, j, q, before))
        kind = jump_decision(before, params, tie_break)
        after = apply_jump(before, kind, params)
        jumps.append(JumpEvent(t_slot, j, kind, before, after))
        q, t, j, i = after, t_slot, j + 1, i + 1
    return arcs, jumps


def simulate(
    params: SystemParams,
    x0: float,
    horizon: float,
    t0_timer: float = 0.0,
    xi0: float = 0.0,
    tie_break: TieBreak | str = TieBreak.PELLET,
) -> Trajectory:
    """Simulate the closed loop from ``(x0, xi0, t0_timer)`` up to ``horizon``."""
    validate(params)
    _check_initial(params, x0, horizon, t0_timer, xi0)
    q0 = HybridState(x=float(x0), xi=float(xi0), timer=float(t0_timer))

    def propagate(q, _t, duration, _j):
        return flow_state(q, duration, params)

    arcs, jumps = run_hybrid(params, q0, horizon, propagate, tie_break)
    return Trajectory(params, q0, horizon, tuple(arcs), tuple(jumps), TieBreak(tie_break))


def sample(traj: Trajectory, dt_sample: float) -> Samples:
    """Dense samples evaluated from the arc closed forms.

    Sample instants are the global grid ``k * dt_sample`` plus every arc
    endpoint; a jump contributes a pre-jump row ``(t, j)`` and a post-jump
    row ``(t, j + 1)``, both tagged with the jump kind.
    """
    if not dt_sample > 0:
        raise ValueError(f"dt_sample must be > 0, got {dt_sample!r}")
    params = traj.params
    rows = []
    n_arcs = len(traj.arcs)
    for a, arc in enumerate(traj.arcs):
        start_event = traj.jumps[a - 1].kind.value if a > 0 else EVENT_FLOW
        end_event = traj.jumps[a].kind.value if a < len(traj.jumps) else EVENT_FLOW
        s0 = arc.start
        rows.append((arc.t_start, arc.j, s0.x, s0.xi, s0.timer, start_event))
        if arc.t_end <= arc.t_start:
            if a < n_arcs - 1:
                rows.append((arc.t_end, arc.j, arc.end.x, arc.end.xi, arc.end.timer, end_event))
            continue
        k0 = math.floor(arc.t_start / dt_sample) + 1
        k1 = math.ceil(arc.t_end / dt_sample) - 1
        for k in range(k0, k1 + 1):
            t = k * dt_sample
            if not arc.t_start < t < arc.t_end:
                continue
            s = t - arc.t_start
            rows.append((
                t,
                arc.j,
                flow_x(s0.x, s, params),
                flow_xi(s0.x, s0.xi, s, params),
                s0.timer + s,
                EVENT_FLOW,
            ))
        e = arc.end
        rows.append((arc.t_end, arc.j, e.x, e.xi, e.timer, end_event))
    return Samples.from_rows(rows, params.r)


def pellet_times(traj: Trajectory) -> PelletSchedule:
    fired = [ev for ev in traj.jumps if ev.kind is JumpKind.PELLET]
    return PelletSchedule(
        times=tuple(ev.time for ev in fired),
        jump_indices=tuple(ev.jump_index for ev in fired),
    )
