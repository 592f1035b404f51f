"""Command-line front end.

    neuropellet simulate --config fig2_fast --out runs/fast
    neuropellet verify   --config fig2_fast --trajectory runs/fast/trajectory.csv
    neuropellet compare  --config fig2_fast --out runs/fast_cmp
    neuropellet bounds   --tau 0.1 --r 7e19 --alpha 1e19 --tc 0.01

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import ScenarioConfig, builtin_scenarios, load_config
from .controller import TieBreak
from .errors import ActuatorTooSlow, ConfigParseError, HorizonTooShort, NeuropelletError
from .oracle import compare, comparison_table, simulate_numeric
from .params import SystemParams, derive_constants, tc_upper_bound, validate
from .simulator import sample, simulate
from .trajio import (
    read_trajectory_csv,
    trajectory_from_samples,
    write_compare_csv,
    write_envelope_csv,
    write_report_csv,
    write_trajectory_csv,
)
from .verifier import CheckResult, VerificationReport, verify_all

log = logging.getLogger("neuropellet")

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _scenario(args) -> ScenarioConfig:
    cfg = load_config(args.config)
    return cfg.override(horizon=args.horizon, tie_break=args.tie_break and TieBreak(args.tie_break))


def _verify(traj, cfg: ScenarioConfig) -> VerificationReport:
    try:
        return verify_all(traj, settle_tol=cfg.effective_settle_tol)
    except HorizonTooShort as exc:
        from .verifier import check_contraction, check_dwell_and_pellet_gaps, check_envelope

        report = check_envelope(traj)
        report.extend(check_dwell_and_pellet_gaps(traj))
        report.extend(check_contraction(traj))
        report.checks.append(CheckResult("ultimate_bound.settle", False, float("-inf"),
                                         detail=str(exc)))
        return report


def _finish(report: VerificationReport, out: Path | None, stem: str = "report") -> int:
    text = report.to_text()
    sys.stdout.write(text)
    if out is not None:
        (out / f"{stem}.txt").write_text(text)
        write_report_csv(out / f"{stem}.csv", report)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_simulate(args) -> int:
    cfg = _scenario(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    traj = simulate(cfg.params, cfg.x0, cfg.horizon, cfg.timer0, cfg.xi0, cfg.tie_break)
    samples = sample(traj, cfg.dt_sample)
    write_trajectory_csv(out / "trajectory.csv", samples)
    write_envelope_csv(out / "envelope.csv", cfg.params, cfg.x0, samples.t)
    log.info("%d slots, wrote %d samples to %s", len(traj.jumps), len(samples), out)
    return _finish(_verify(traj, cfg), out)


def cmd_verify(args) -> int:
    cfg = _scenario(args)
    path = Path(args.trajectory) if args.trajectory else Path(args.out) / "trajectory.csv"
    samples = read_trajectory_csv(path, cfg.params.r)
    traj = trajectory_from_samples(samples, cfg.params, cfg.tie_break)
    return _finish(_verify(traj, cfg), Path(args.out) if args.out else None, "verify_report")


def cmd_compare(args) -> int:
    cfg = _scenario(args)
    if not cfg.oracle_enabled:
        raise ConfigParseError("compare needs oracle.enabled = true in the scenario")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    exact = simulate(cfg.params, cfg.x0, cfg.horizon, cfg.timer0, cfg.xi0, cfg.tie_break)
    numeric = simulate_numeric(cfg.params, cfg.x0, cfg.horizon, cfg.oracle, cfg.timer0,
                               cfg.xi0, cfg.tie_break)
    table = comparison_table(exact, numeric)
    write_compare_csv(out / "compare.csv", table)
    return _finish(compare(exact, numeric, cfg.effective_oracle_tol, table), out,
                   "compare_report")


def cmd_bounds(args) -> int:
    t_c = args.tc if args.tc is not None else 1.0
    params = validate(SystemParams(tau=args.tau, r=args.r, alpha=args.alpha, t_c=t_c))
    result = {"t_c_max": tc_upper_bound(params), "min_slot_rate_hz": 1.0 / tc_upper_bound(params)}
    status = EXIT_OK
    if args.tc is not None:
        try:
            d = derive_constants(params)
        except ActuatorTooSlow as exc:
            result["error"] = str(exc)
            status = EXIT_CHECK_FAILED
        else:
            result.update(t_c=t_c, delta_max=d.delta_max, gamma=d.gamma, tau_d=d.tau_d)
    if args.json:
        print(json.dumps(result, indent=2))
    else:
        for key, value in result.items():
            print(f"{key:<17} {value:.6g}" if isinstance(value, float) else f"{key:<17} {value}")
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="neuropellet", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def scenario_args(p, out_required):
        p.add_argument("--config", required=True,
                       help=f"scenario file or bundled name ({', '.join(builtin_scenarios())})")
        p.add_argument("--out", required=out_required, help="output directory")
        p.add_argument("--horizon", type=float, help="override run.horizon [s]")
        p.add_argument("--seed", type=int, help="reserved; the engines are deterministic")
        p.add_argument("--tie-break", choices=[t.value for t in TieBreak])

    p = sub.add_parser("simulate", help="run a scenario and verify it")
    scenario_args(p, True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="re-check an existing trajectory.csv")
    scenario_args(p, False)
    p.add_argument("--trajectory", help="trajectory.csv (default: OUT/trajectory.csv)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("compare", help="analytic engine against the fixed-step oracle")
    scenario_args(p, True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("bounds", help="admissible design region")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--tc", type=float)
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_bounds)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.command == "verify" and not (args.trajectory or args.out):
        parser.error("verify needs --trajectory or --out")
    try:
        return args.func(args)
    except (ConfigParseError, FileNotFoundError, NeuropelletError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
