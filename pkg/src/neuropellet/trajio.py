"""CSV serialisation of trajectories, envelopes, reports and comparisons.

Floats are written with ``repr`` so that reading a file back reproduces the
values bit for bit.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .controller import JumpEvent, JumpKind, TieBreak
from .flow import HybridState
from .params import SystemParams
from .simulator import EVENT_FLOW, Arc, Samples, Trajectory
from .verifier import BoundEnvelope, VerificationReport

TRAJECTORY_COLUMNS = ("t", "j", "x", "xi", "T", "n_e", "event")
ENVELOPE_COLUMNS = ("t", "lower", "upper")
REPORT_COLUMNS = ("name", "passed", "margin", "tolerance", "t", "j", "detail")
COMPARE_COLUMNS = ("t", "j", "x_a", "x_b", "dx", "xi_a", "xi_b", "dxi")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_trajectory_csv(path, samples: Samples) -> None:
    _write(Path(path), TRAJECTORY_COLUMNS, samples.rows())


def read_trajectory_csv(path, r: float | None = None) -> Samples:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != TRAJECTORY_COLUMNS:
            raise ValueError(f"unexpected trajectory columns {header}")
        rows = [
            (float(t), int(j), float(x), float(xi), float(tm), ev)
            for t, j, x, xi, tm, _n_e, ev in reader
        ]
    if r is None:
        # recover r from the first row's n_e
        with open(path, newline="") as fh:
            first = list(csv.reader(fh))[1]
        r = float(first[2]) + float(first[5])
    return Samples.from_rows(rows, r)


def trajectory_from_samples(samples: Samples, params: SystemParams,
                            tie_break: TieBreak | str = TieBreak.PELLET) -> Trajectory:
    """Rebuild arcs and jumps from sampled rows.

    A jump is a pair of rows sharing ``t`` with indices ``j`` and ``j + 1``
    and the same jump kind.  Every other row is a flow sample.
    """
    rows = list(samples.rows())
    if not rows:
        raise ValueError("empty trajectory")

    def state(row):
        return HybridState(x=row[2], xi=row[3], timer=row[4])

    arcs: list[Arc] = []
    jumps: list[JumpEvent] = []
    t0, j0, *_ = rows[0]
    arc_t, arc_j, arc_q = t0, j0, state(rows[0])
    last = rows[0]
    k = 1
    while k < len(rows):
        row = rows[k]
        nxt = rows[k + 1] if k + 1 < len(rows) else None
        is_jump = (
            row[6] in (JumpKind.SKIP.value, JumpKind.PELLET.value)
            and nxt is not None
            and nxt[0] == row[0]
            and nxt[1] == row[1] + 1
            and nxt[6] == row[6]
        )
        if is_jump:
            arcs.append(Arc(arc_t, row[0], arc_j, arc_q, state(row)))
            after = state(nxt)
            jumps.append(JumpEvent(row[0], row[1], JumpKind(row[6]), state(row), after))
            arc_t, arc_j, arc_q = nxt[0], nxt[1], after
            last = nxt
            k += 2
            continue
        last = row
        k += 1
    end = state(last) if last[1] == arc_j and last[0] >= arc_t else arc_q
    arcs.append(Arc(arc_t, max(last[0], arc_t), arc_j, arc_q, end))
    return Trajectory(params, state(rows[0]), float(rows[-1][0]), tuple(arcs), tuple(jumps),
                      TieBreak(tie_break), engine="csv", samples=samples)


def envelope_rows(params: SystemParams, x0: float, times):
    times = np.unique(np.asarray(times, dtype=float))
    env = BoundEnvelope(params, x0)
    return zip(times, env.lower(times), env.upper(times))


def write_envelope_csv(path, params: SystemParams, x0: float, times) -> None:
    _write(Path(path), ENVELOPE_COLUMNS, envelope_rows(params, x0, times))


def write_report_csv(path, report: VerificationReport) -> None:
    _write(Path(path), REPORT_COLUMNS, (
        (c.name, c.passed, c.margin, c.tolerance, c.t, c.j, c.detail) for c in report
    ))


def write_compare_csv(path, table) -> None:
    _write(Path(path), COMPARE_COLUMNS, zip(
        table.t, table.j, table.x_a, table.x_b, table.dx, table.xi_a, table.xi_b, table.dxi,
    ))
