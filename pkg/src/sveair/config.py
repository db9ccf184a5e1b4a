"""Scenario configuration: flat `key = value` files with dotted sections.

Lines are `key = value`, `#` starts a comment, blank lines are ignored,
strings are unquoted. Unknown keys are errors (naming the key and line),
as are values that fail the downstream preconditions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from sveair.errors import ConfigError
from sveair.scenarios import (
    BUILTIN_NAMES,
    D_SWEEP_DEFAULT,
    S0_DEFAULT,
    SEED_BAND_DEFAULT,
    THETA_MAX_DEFAULT,
    V0_DEFAULT,
)

INIT_MODES = ("band", "steady-scaled", "steady")

_PROFILE_OVERRIDES = ("q_csv", "k_csv", "chi_csv", "beta_a_csv", "beta_i_csv")
_SCALAR_OVERRIDES = ("n0", "mu", "p", "epsilon", "zeta", "omega",
                     "q", "xi", "gamma_a", "gamma_i")


@dataclass
class ScenarioConfig:
    """Validated scenario description with defaults filled in."""

    builtin: str = "table2-c2"
    h: float = 0.5
    theta_max: float = THETA_MAX_DEFAULT
    t_max: float = 1500.0
    sample_every: float = 1.0
    snapshot_times: tuple = ()
    oracle_t_max: float = 200.0
    s0: float = S0_DEFAULT
    v0: float = V0_DEFAULT
    d_list: tuple = D_SWEEP_DEFAULT
    band: tuple = SEED_BAND_DEFAULT
    init_mode: str = "band"
    run_oracle: bool = False
    run_lyapunov: bool = False
    r0_only: bool = False
    out_dir: str = "out"
    contact: str | None = None
    scalar_overrides: dict = field(default_factory=dict)
    profile_overrides: dict = field(default_factory=dict)


def _parse_float(key: str, text: str, lineno: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"line {lineno}: key {key!r}: not a number: {text!r}")
    if not math.isfinite(value):
        raise ConfigError(f"line {lineno}: key {key!r}: non-finite value")
    return value


def _parse_bool(key: str, text: str, lineno: int) -> bool:
    lowered = text.lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"line {lineno}: key {key!r}: expected a boolean, got {text!r}")


def _parse_float_list(key: str, text: str, lineno: int) -> tuple:
    items = [piece.strip() for piece in text.split(",") if piece.strip()]
    return tuple(_parse_float(key, piece, lineno) for piece in items)


def load_config(path) -> ScenarioConfig:
    """Parse and validate a scenario config file.

    Raises:
        ConfigError: on parse errors (with line numbers), unknown keys,
            missing referenced files, or invalid values (naming the key).
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc

    cfg = ScenarioConfig()
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value in {raw!r}")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)

        if key == "scenario.builtin":
            if value not in BUILTIN_NAMES:
                raise ConfigError(
                    f"line {lineno}: scenario.builtin must be one of {BUILTIN_NAMES}, got {value!r}"
                )
            cfg.builtin = value
        elif key == "grid.h":
            cfg.h = _parse_float(key, value, lineno)
        elif key == "grid.theta_max":
            cfg.theta_max = _parse_float(key, value, lineno)
        elif key == "run.t_max":
            cfg.t_max = _parse_float(key, value, lineno)
        elif key == "run.sample_every":
            cfg.sample_every = _parse_float(key, value, lineno)
        elif key == "run.snapshot_times":
            cfg.snapshot_times = _parse_float_list(key, value, lineno)
        elif key == "run.oracle_t_max":
            cfg.oracle_t_max = _parse_float(key, value, lineno)
        elif key == "init.s0":
            cfg.s0 = _parse_float(key, value, lineno)
        elif key == "init.v0":
            cfg.v0 = _parse_float(key, value, lineno)
        elif key == "init.d_list":
            cfg.d_list = _parse_float_list(key, value, lineno)
        elif key == "init.band":
            cfg.band = _parse_float_list(key, value, lineno)
        elif key == "init.mode":
            if value not in INIT_MODES:
                raise ConfigError(
                    f"line {lineno}: init.mode must be one of {INIT_MODES}, got {value!r}"
                )
            cfg.init_mode = value
        elif key == "toggles.run_oracle":
            cfg.run_oracle = _parse_bool(key, value, lineno)
        elif key == "toggles.run_lyapunov":
            cfg.run_lyapunov = _parse_bool(key, value, lineno)
        elif key == "toggles.r0_only":
            cfg.r0_only = _parse_bool(key, value, lineno)
        elif key == "output.dir":
            cfg.out_dir = value
        elif key == "params.contact":
            if value not in ("c1", "c2"):
                raise ConfigError(f"line {lineno}: params.contact must be c1 or c2")
            cfg.contact = value
        elif key.startswith("params."):
            name = key[len("params."):]
            if name in _SCALAR_OVERRIDES:
                cfg.scalar_overrides[name] = _parse_float(key, value, lineno)
            elif name in _PROFILE_OVERRIDES:
                cfg.profile_overrides[name] = value
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")

    _validate(cfg, base=path.parent)
    return cfg


def _validate(cfg: ScenarioConfig, base: Path) -> None:
    if not cfg.h > 0:
        raise ConfigError(f"grid.h must be positive, got {cfg.h}")
    if cfg.theta_max < cfg.h:
        raise ConfigError(f"grid.theta_max must be at least grid.h, got {cfg.theta_max}")
    if not cfg.t_max > 0:
        raise ConfigError(f"run.t_max must be positive, got {cfg.t_max}")
    if not cfg.sample_every >= cfg.h:
        raise ConfigError(
            f"run.sample_every must be at least grid.h, got {cfg.sample_every}"
        )
    if not cfg.oracle_t_max > 0:
        raise ConfigError(f"run.oracle_t_max must be positive, got {cfg.oracle_t_max}")
    if cfg.s0 < 0 or cfg.v0 < 0:
        raise ConfigError("init.s0 and init.v0 must be nonnegative")
    if cfg.init_mode != "steady" and not cfg.d_list:
        raise ConfigError("init.d_list must be nonempty when sweeping")
    if any(d < 0 for d in cfg.d_list):
        raise ConfigError("init.d_list values must be nonnegative")
    if len(cfg.band) != 2 or not 0 <= cfg.band[0] < cfg.band[1]:
        raise ConfigError(f"init.band must be 'low,high' with 0 <= low < high, got {cfg.band}")
    for name, value in cfg.scalar_overrides.items():
        if name == "mu" and not value > 0:
            raise ConfigError("params.mu must be strictly positive")
        if name in ("epsilon", "q", "xi") and not 0 <= value <= 1:
            raise ConfigError(f"params.{name} must lie in [0, 1]")
        if name not in ("mu",) and value < 0:
            raise ConfigError(f"params.{name} must be nonnegative")
    resolved = {}
    for name, rel in cfg.profile_overrides.items():
        candidate = Path(rel)
        if not candidate.is_absolute():
            candidate = base / candidate
        if not candidate.is_file():
            raise ConfigError(f"params.{name}: referenced file does not exist: {candidate}")
        resolved[name] = str(candidate)
    cfg.profile_overrides = resolved
