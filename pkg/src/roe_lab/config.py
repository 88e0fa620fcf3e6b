"""Run configuration: a flat ``key = value`` text file with typed fields."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, fields, replace

from .errors import DomainError

ENV_VAR = "ROE_LAB_CONFIG"


@dataclass(frozen=True)
class RunConfig:
    n: int = 3
    model: str = "ball"
    r_max: float = 12.0
    radial_step: float = 0.01
    lattice_points: int = 41
    margin: float = 0.02
    lambda_max: float = 12.0 / math.sqrt(0.3)
    spectral_step: float = 0.025
    pass_tol: float = 1e-3
    counterexample_tol: float = 0.1
    growth_factor: float = 10.0
    hardy_rel_tol: float = 1e-2
    c_inv: float = math.nan
    kappa: float = 0.5
    kappa_shift: float = 1.0
    J: int = 10
    output_dir: str = "roe_lab_out"
    seed: int = 0
    record_timing: bool = False

    def __post_init__(self):
        for name in ("pass_tol", "counterexample_tol", "growth_factor", "hardy_rel_tol",
                     "radial_step", "spectral_step", "r_max", "lambda_max", "margin"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if self.n < 2:
            raise DomainError("n must be >= 2")
        if self.J < 1:
            raise DomainError("J must be >= 1")

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            lines.append(f"{f.name} = {_format(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        return apply_overrides(cls(), _parse_lines(text.splitlines()))

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_lines(lines) -> dict:
    out = {}
    for k, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"line {k}: expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, value: str):
    kind = _TYPES[key]
    if kind == "bool":
        low = value.lower()
        if low not in ("true", "false", "1", "0", "yes", "no"):
            raise DomainError(f"{key}: not a boolean: {value!r}")
        return low in ("true", "1", "yes")
    if kind == "int":
        return int(value)
    if kind == "float":
        return float(value)
    return value


def apply_overrides(config: RunConfig, pairs: dict) -> RunConfig:
    unknown = sorted(set(pairs) - set(_TYPES))
    if unknown:
        raise DomainError(f"unknown config keys: {', '.join(unknown)}")
    try:
        return replace(config, **{k: _coerce(k, v) for k, v in pairs.items()})
    except ValueError as exc:
        raise DomainError(str(exc)) from exc


def parse_set_options(options) -> dict:
    pairs = {}
    for opt in options or []:
        if "=" not in opt:
            raise DomainError(f"--set expects key=value, got {opt!r}")
        k, v = opt.split("=", 1)
        pairs[k.strip()] = v.strip()
    return pairs


def load_config(path: str | None = None, overrides=None) -> RunConfig:
    """Defaults, then the file (``path`` or $ROE_LAB_CONFIG), then ``--set`` pairs."""
    path = path or os.environ.get(ENV_VAR)
    config = RunConfig()
    if path:
        with open(path, encoding="utf-8") as fh:
            config = RunConfig.from_text(fh.read())
    return apply_overrides(config, parse_set_options(overrides))
