"""Scenario files: flat ``section.key = value`` text.

Example::

    # fast controller
    params.tau   = 0.1
    params.r     = 7e19
    params.alpha = 1e19
    params.t_c   = 0.01
    params.delta = 1
    initial.x0   = 7e19
    run.horizon  = 2.0

Blank lines and ``#`` comments are ignored.  Numbers accept scientific
notation; ``inf`` is accepted for ``params.delta`` (a neuron that never fires).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

from .controller import TieBreak
from .errors import ConfigParseError, NeuropelletError
from .oracle import OracleConfig, Scheme
from .params import SystemParams, validate

_FLOAT_KEYS = {
    "params.tau", "params.r", "params.alpha", "params.t_c", "params.delta",
    "params.pellet_particles", "params.conversion",
    "initial.x0", "initial.n_e0", "initial.xi0", "initial.timer0",
    "run.horizon", "run.dt_sample", "run.settle_tol",
    "oracle.h", "oracle.tol",
}
_BOOL_KEYS = {"oracle.enabled"}
_CHOICE_KEYS = {"oracle.scheme": Scheme, "variant.tie_break": TieBreak}
_INT_KEYS = {"oracle.dps"}
_REQUIRED = ("params.tau", "params.r", "params.alpha", "params.t_c", "run.horizon")


@dataclass(frozen=True)
class ScenarioConfig:
    params: SystemParams
    x0: float
    xi0: float = 0.0
    timer0: float = 0.0
    horizon: float = 2.0
    dt_sample: float = 1e-3
    settle_tol: float | None = None
    oracle_enabled: bool = False
    oracle_h: float = 1e-5
    oracle_scheme: Scheme = Scheme.RK4
    oracle_tol: float | None = None
    oracle_dps: int | None = None
    tie_break: TieBreak = TieBreak.PELLET

    @property
    def oracle(self) -> OracleConfig:
        return OracleConfig(self.oracle_h, self.oracle_scheme, self.oracle_dps)

    @property
    def effective_settle_tol(self) -> float:
        return self.settle_tol if self.settle_tol is not None else 1e-3 * self.params.alpha

    @property
    def effective_oracle_tol(self) -> float:
        return self.oracle_tol if self.oracle_tol is not None else 1e-8 * self.params.r

    def override(self, **changes) -> ScenarioConfig:
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def _parse_value(key: str, raw: str, line: int):
    if key in _FLOAT_KEYS:
        try:
            value = float(raw)
        except ValueError:
            raise ConfigParseError(f"{key}: not a number: {raw!r}", line) from None
        if math.isnan(value) or (math.isinf(value) and key != "params.delta"):
            raise ConfigParseError(f"{key}: must be finite, got {raw!r}", line)
        return value
    if key in _BOOL_KEYS:
        low = raw.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ConfigParseError(f"{key}: expected true/false, got {raw!r}", line)
    if key in _INT_KEYS:
        try:
            return int(raw)
        except ValueError:
            raise ConfigParseError(f"{key}: not an integer: {raw!r}", line) from None
    if key in _CHOICE_KEYS:
        kind = _CHOICE_KEYS[key]
        try:
            return kind(raw.lower())
        except ValueError:
            allowed = ", ".join(m.value for m in kind)
            raise ConfigParseError(f"{key}: expected one of {allowed}, got {raw!r}", line) from None
    raise ConfigParseError(f"unknown key {key!r}", line)


def parse_config(text: str) -> ScenarioConfig:
    values: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(f"expected 'key = value', got {line!r}", lineno)
        key, raw = (part.strip() for part in line.split("=", 1))
        if not raw:
            raise ConfigParseError(f"{key}: missing value", lineno)
        if key in values:
            raise ConfigParseError(f"duplicate key {key!r}", lineno)
        values[key] = _parse_value(key, raw, lineno)

    missing = [k for k in _REQUIRED if k not in values]
    if missing:
        raise ConfigParseError(f"missing required keys: {', '.join(missing)}")
    has_x0, has_ne = "initial.x0" in values, "initial.n_e0" in values
    if has_x0 == has_ne:
        raise ConfigParseError("give exactly one of initial.x0 and initial.n_e0")

    params = SystemParams(
        tau=values["params.tau"],
        r=values["params.r"],
        alpha=values["params.alpha"],
        t_c=values["params.t_c"],
        delta=values.get("params.delta", 0.0),
        pellet_particles=values.get("params.pellet_particles"),
        conversion=values.get("params.conversion"),
    )
    try:
        validate(params)
    except NeuropelletError as exc:
        raise ConfigParseError(f"invalid parameters: {exc}") from exc
    x0 = values["initial.x0"] if has_x0 else params.r - values["initial.n_e0"]

    cfg = ScenarioConfig(params=params, x0=x0)
    mapping = {
        "initial.xi0": "xi0", "initial.timer0": "timer0",
        "run.horizon": "horizon", "run.dt_sample": "dt_sample", "run.settle_tol": "settle_tol",
        "oracle.enabled": "oracle_enabled", "oracle.h": "oracle_h",
        "oracle.scheme": "oracle_scheme", "oracle.tol": "oracle_tol", "oracle.dps": "oracle_dps",
        "variant.tie_break": "tie_break",
    }
    return replace(cfg, **{attr: values[k] for k, attr in mapping.items() if k in values})


def builtin_scenarios() -> list[str]:
    root = resources.files("neuropellet") / "scenarios"
    return sorted(p.name[: -len(".conf")] for p in root.iterdir() if p.name.endswith(".conf"))


def read_scenario_text(ref: str | Path) -> str:
    """Read a scenario from a path, or from the bundled scenarios by name.

    ``scenarios/fig2_fast.conf``, ``fig2_fast.conf`` and ``fig2_fast`` all
    resolve to the bundled file when no such path exists on disk.
    """
    path = Path(ref)
    if path.is_file():
        return path.read_text()
    name = path.name[: -len(".conf")] if path.name.endswith(".conf") else path.name
    bundled = resources.files("neuropellet") / "scenarios" / f"{name}.conf"
    if bundled.is_file():
        return bundled.read_text()
    raise FileNotFoundError(f"no scenario file or bundled scenario named {str(ref)!r}")


def load_config(ref: str | Path) -> ScenarioConfig:
    return parse_config(read_scenario_text(ref))
