"""Acceptance criteria, one test each.

Run with ``pytest tests/test_acceptance.py -s`` to see the PASS/FAIL lines.
"""
import math
import random
import time
from dataclasses import replace

import mpmath
import numpy as np
import pytest
from hypothesis import HealthCheck, Phase, given, settings
from hypothesis import strategies as st

from neuropellet.config import load_config
from neuropellet.controller import JumpKind
from neuropellet.errors import ParamError
from neuropellet.flow import flow_x, flow_xi, zero_crossing_time
from neuropellet.oracle import OracleConfig, compare, comparison_table, integrate_xy, simulate_numeric
from neuropellet.params import SystemParams, delta_upper_bound, gamma, tc_upper_bound, validate
from neuropellet.simulator import pellet_times, sample, simulate
from neuropellet.verifier import (
    BoundEnvelope,
    check_contraction,
    check_dwell_and_pellet_gaps,
    check_envelope,
    check_ultimate_bound,
)

TAU, R, ALPHA = 0.1, 7e19, 1e19
FAST = SystemParams(tau=TAU, r=R, alpha=ALPHA, t_c=0.01, delta=1.0)
SLOW = replace(FAST, delta=1e16)


def report(number, name, ok, detail):
    print(f"criterion {number} {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    return ok


def test_1_bound_reproduction():
    start = time.perf_counter()
    t_c_max = tc_upper_bound(FAST)
    delta_max = delta_upper_bound(FAST)
    elapsed = time.perf_counter() - start
    ok = (
        abs(t_c_max / 0.0154 - 1) <= 1e-3
        and abs(delta_max / 1.0080e16 - 1) <= 1e-3
        and elapsed < 0.1
    )
    assert report(1, "bounds", ok, f"t_c_max={t_c_max:.6g}, delta_max={delta_max:.5g}, {elapsed * 1e3:.2f} ms")


def fig2_run(name):
    cfg = load_config(name)
    start = time.perf_counter()
    traj = simulate(cfg.params, cfg.x0, cfg.horizon)
    traj = replace(traj, samples=sample(traj, cfg.dt_sample))
    env_ok = check_envelope(traj).passed
    bound_ok = check_ultimate_bound(traj, settle_tol=1e-3 * cfg.params.alpha).passed
    elapsed = time.perf_counter() - start

    # transient: every slot up to the first one reached with x <= alpha
    jumps = traj.jumps
    first_in_band = next(i for i, e in enumerate(jumps) if e.state_before.x <= cfg.params.alpha)
    transient_full = all(e.kind is JumpKind.PELLET for e in jumps[: first_in_band + 1])

    s = traj.samples
    grid = s.event == "flow"
    steady = grid & (s.t >= 1.0)
    mean = float(s.x[steady].mean())
    return env_ok, bound_ok, transient_full, first_in_band + 1, mean, elapsed


def test_2_fig2_properties():
    fast = fig2_run("fig2_fast")
    slow = fig2_run("fig2_slow")
    lines = []
    ok = True
    for name, (env_ok, bound_ok, transient_full, n_transient, mean, elapsed) in (("fast", fast), ("slow", slow)):
        part = env_ok and bound_ok and transient_full and elapsed < 1.0
        ok &= part
        lines.append(
            f"{name}: envelope={env_ok} settle={bound_ok} transient pellets={n_transient} "
            f"mean={mean / ALPHA:.3f}alpha {elapsed:.2f}s"
        )
    ok &= slow[4] > fast[4]
    assert report(2, "fig2", ok, "; ".join(lines))


def random_design(rng):
    r = 10 ** rng.uniform(18, 21)
    tau = rng.uniform(0.01, 1.0)
    base = SystemParams(tau=tau, r=r, alpha=rng.uniform(0.05, 0.5) * r, t_c=1.0)
    t_c_max = tc_upper_bound(base)
    t_c = t_c_max * rng.choice([1.0, 10 ** rng.uniform(-2, 0)])
    p = replace(base, t_c=t_c)
    d_max = delta_upper_bound(p)
    p = replace(p, delta=d_max * rng.choice([0.0, 1.0, rng.random()]))
    x0 = r * rng.choice([1.0, rng.uniform(-0.999, 1.0)])
    return p, x0, rng.uniform(0.0, t_c)


def test_3_randomized_ultimate_bound():
    rng = random.Random(20261017)
    start = time.perf_counter()
    failures = []
    n = 120
    for _ in range(n):
        p, x0, timer0 = random_design(rng)
        env = BoundEnvelope(p, x0)
        horizon = env.settle_time(1e-3 * p.alpha) + 20 * tc_upper_bound(p)
        traj = simulate(p, x0, horizon, t0_timer=timer0)
        rep = check_envelope(traj)
        rep.extend(check_ultimate_bound(traj))
        if not rep.passed:
            failures.append((p, x0, rep.to_text()))
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 30
    assert report(3, "randomized ultimate bound", ok, f"{n - len(failures)}/{n} passed in {elapsed:.1f}s"), failures[:1]


def test_4_contraction():
    traj = simulate(FAST, FAST.r, 2.0)
    rep = check_contraction(traj)
    # independent recount straight from the jump list
    g = gamma(FAST)
    pellets = [e for e in traj.jumps if e.kind is JumpKind.PELLET]
    worst, cycles = math.inf, 0
    for a, b in zip(pellets, pellets[1:]):
        x_start = a.state_after.x
        if x_start <= 1e-6 * FAST.r or b.state_before.x <= 0:
            continue
        cycles += 1
        worst = min(worst, g * x_start + 1e-9 * FAST.r - b.state_after.x)
    ok = rep.passed and cycles > 0 and worst >= 0
    assert report(4, "contraction", ok, f"{cycles} cycles, worst margin {worst:.4g}")


def test_5_dwell():
    ok = True
    details = []
    for p in (FAST, SLOW):
        traj = simulate(p, p.r, 2.0)
        times = np.array([e.time for e in traj.jumps])
        exact = np.array_equal(times, np.arange(1, len(times) + 1) * p.t_c)
        rep = check_dwell_and_pellet_gaps(traj)
        bound = math.ceil(tc_upper_bound(p) / p.t_c) * p.t_c
        gaps = []
        pellets = [e for e in traj.jumps if e.kind is JumpKind.PELLET]
        for a, b in zip(pellets, pellets[1:]):
            if a.state_after.x > 0 and b.state_before.x > 0:
                gaps.append(b.time - a.time)
        worst = max(gaps)
        ok &= exact and rep.passed and worst <= bound * (1 + 1e-12)
        details.append(f"delta={p.delta:g}: {len(times)} slots exact={exact}, max gap {worst:.3g}s <= {bound:.3g}s")
    assert report(5, "dwell", ok, "; ".join(details))


def rk4_order_ratios():
    errors = []
    with mpmath.workdps(40):
        for h in (4e-5, 2e-5, 1e-5):
            n = round(FAST.t_c / h)
            x, _ = integrate_xy(0.0, 0.0, n, h, FAST, OracleConfig(h=h, dps=40))
            exact = FAST.r - mpmath.exp(-n * mpmath.mpf(h) / FAST.tau) * FAST.r
            errors.append(abs(x - exact))
    return [float(errors[0] / errors[1]), float(errors[1] / errors[2])]


def test_6_oracle_equivalence():
    start = time.perf_counter()
    exact = simulate(FAST, FAST.r, 2.0)
    numeric = simulate_numeric(FAST, FAST.r, 2.0, OracleConfig(h=1e-5))
    table = comparison_table(exact, numeric)
    rep = compare(exact, numeric, 1e-8 * FAST.r, table=table)
    same_schedule = pellet_times(exact) == pellet_times(numeric)
    ratios = rk4_order_ratios()
    elapsed = time.perf_counter() - start
    dx = float(table.dx.max())
    ok = (
        rep.passed and same_schedule and dx <= 1e-8 * FAST.r
        and all(12 <= q <= 20 for q in ratios) and elapsed < 10
    )
    assert report(6, "oracle", ok, f"max|dx|={dx:.3g} (tol {1e-8 * FAST.r:.3g}), same schedule={same_schedule}, "
                  f"order ratios={ratios[0]:.2f},{ratios[1]:.2f}, {elapsed:.1f}s")


N_CASES = 1000
XS = st.floats(-R, R)
DT = st.floats(0.0, 0.05)
PROPERTY = settings(max_examples=N_CASES, deadline=None, database=None, phases=[Phase.generate],
                    suppress_health_check=list(HealthCheck))


def run_counted(prop):
    calls = [0]

    def counted(args):
        calls[0] += 1
        prop(*args)

    return counted, calls


def semigroup(x0, a, b):
    assert abs(flow_x(flow_x(x0, a, FAST), b, FAST) - flow_x(x0, a + b, FAST)) <= 1e-12 * R


def monotone(x0, dt):
    assert x0 < flow_x(x0, dt, FAST) < R


def xi_additive(x0, xi0, a, b):
    single = flow_xi(x0, xi0, a + b, FAST)
    assert single >= flow_xi(x0, xi0, a, FAST) >= xi0
    split = flow_xi(flow_x(x0, a, FAST), flow_xi(x0, xi0, a, FAST), b, FAST)
    assert abs(split - single) <= 1e-10 * R * (a + b) + 1e-15 * xi0


def quadrature(x0, dt):
    h = 1e-6
    n = max(1, math.ceil(dt / h))
    s = np.linspace(0.0, dt, n + 1)
    y = np.maximum(R - np.exp(-s / TAU) * (R - x0), 0.0)
    trap = float(np.sum((y[1:] + y[:-1]) * np.diff(s)) / 2)
    closed = flow_xi(x0, 0.0, dt, FAST)
    assert abs(closed - trap) <= 1e-6 * closed + (R / TAU) * h * h


PROPERTIES = {
    "semigroup": (semigroup, (XS, DT, DT)),
    "monotonicity": (monotone, (st.floats(-R, R * (1 - 1e-6)), st.floats(1e-6, 1.0))),
    "xi-additivity": (xi_additive, (XS, st.floats(0.0, 1e20), DT, DT)),
    "quadrature": (quadrature, (XS, st.floats(1e-4, 0.01))),
}


def test_7_flow_properties():
    counts = {}
    errors = {}
    for name, (prop, strategies) in PROPERTIES.items():
        counted, calls = run_counted(prop)
        try:
            PROPERTY(given(st.tuples(*strategies))(counted))()
        except AssertionError as exc:
            errors[name] = exc
        counts[name] = calls[0]
    ok = not errors and all(n >= N_CASES for n in counts.values())
    detail = ", ".join(f"{k}={v}" for k, v in counts.items())
    assert report(7, "flow properties", ok, detail), errors


def test_8_degenerate_cases():
    at_max = replace(FAST, t_c=tc_upper_bound(FAST))
    residual = delta_upper_bound(at_max)
    boundary_ok = abs(residual) <= 1e-9 * R * TAU

    rejected = []
    for r in (ALPHA, 0.5 * ALPHA):
        with pytest.raises(ParamError):
            validate(replace(FAST, r=r))
        rejected.append(r)

    open_loop = simulate(replace(FAST, delta=math.inf), FAST.r, 2.0)
    open_rep = check_ultimate_bound(open_loop)
    open_ok = not open_rep.passed and abs(open_loop.final_state.x - R) <= 1e-9 * R
    ok = boundary_ok and len(rejected) == 2 and open_ok
    assert report(8, "degenerate", ok,
                  f"delta_max at t_c_max={residual:.3g}, r<=alpha rejected, open loop x_end={open_loop.final_state.x:.4g}")
