"""Flat ``key = value`` run configuration."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from pathlib import Path

from .model import (
    ModelCoeffs,
    ModellingKnobs,
    ParameterError,
    PhysicalParams,
    bbm_bbm_knobs,
    derive_coeffs,
    derive_physical,
)
from .waves import exact_speed


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


IC_FAMILIES = ("solitary", "gaussian", "line", "zero")


@dataclass
class RunConfig:
    gamma: float = 0.5
    delta: float = 0.9
    # coefficient source: explicit a, b, c, d win over knobs; neither means BBM-BBM
    alpha1: float | None = None
    alpha2: float | None = None
    beta: float | None = None
    a: float | None = None
    b: float | None = None
    c: float | None = None
    d: float | None = None
    L: float = 16.0
    N: int = 256
    T: float = 5.0
    dt: float = 2.5e-2
    ic: str = "solitary"
    # solitary wave: speed (number or "exact"), offset, branch
    c_s: str = "exact"
    x0: float = -10.0
    branch: int = 1
    # gaussian pulse
    amplitude: float = 0.1
    sx: float = 5.0
    sy: float = 5.0
    # perturbed line pulse
    eps: float = 0.005
    B: float = 5.0
    dealias: bool = False
    stride: int = 1
    tol: float = 1e-12
    max_iter: int = 100
    snapshots: tuple = ()
    out: str = "out"

    # -- derived objects -----------------------------------------------------

    def physical(self) -> PhysicalParams:
        try:
            return derive_physical(self.gamma, self.delta)
        except ParameterError as exc:
            raise ConfigError("gamma/delta", str(exc)) from None

    def coeffs(self) -> ModelCoeffs:
        p = self.physical()
        explicit = [self.a, self.b, self.c, self.d]
        knobs = [self.alpha1, self.alpha2, self.beta]
        if any(v is not None for v in explicit):
            if any(v is None for v in explicit):
                raise ConfigError("a/b/c/d", "explicit coefficients need all four of a, b, c, d")
            return ModelCoeffs.from_values(*explicit, p)
        if any(v is not None for v in knobs):
            if any(v is None for v in knobs):
                raise ConfigError("alpha1/alpha2/beta", "knobs need all of alpha1, alpha2, beta")
            try:
                return derive_coeffs(ModellingKnobs(*knobs), p)
            except ParameterError as exc:
                raise ConfigError("alpha1/alpha2/beta", str(exc)) from None
        return derive_coeffs(bbm_bbm_knobs(p), p)

    def speed(self) -> float:
        if str(self.c_s).strip().lower() == "exact":
            return exact_speed(self.physical())
        try:
            return float(self.c_s)
        except ValueError:
            raise ConfigError("c_s", f"expected a number or 'exact', got {self.c_s!r}") from None

    def validate(self) -> "RunConfig":
        if self.N < 8 or self.N % 2:
            raise ConfigError("N", f"must be even and >= 8, got {self.N}")
        if not self.L > 0:
            raise ConfigError("L", "must be positive")
        if not self.dt > 0:
            raise ConfigError("dt", "must be positive")
        if self.T < 0:
            raise ConfigError("T", "must be nonnegative")
        m = self.T / self.dt
        if abs(m - round(m)) > 1e-9 * max(1.0, m):
            raise ConfigError("T", f"T={self.T} is not an integer multiple of dt={self.dt}")
        if self.ic not in IC_FAMILIES:
            raise ConfigError("ic", f"expected one of {IC_FAMILIES}, got {self.ic!r}")
        if self.ic == "gaussian" and not (self.sx > 0 and self.sy > 0):
            raise ConfigError("sx/sy", "Gaussian widths must be positive")
        if self.ic == "line":
            if not self.B > 0:
                raise ConfigError("B", "must be positive")
            if self.eps != 0 and abs(self.L / 2 - round(self.L / 2)) > 1e-12:
                raise ConfigError("L", "line perturbation cos(pi y/2) needs 4 | 2L")
        if self.ic == "solitary":
            self.speed()
            if self.branch not in (1, -1):
                raise ConfigError("branch", "must be 1 or -1")
        if self.stride < 1:
            raise ConfigError("stride", "must be >= 1")
        if not self.tol > 0:
            raise ConfigError("tol", "must be positive")
        if self.max_iter < 1:
            raise ConfigError("max_iter", "must be >= 1")
        for ts in self.snapshots:
            k = ts / self.dt
            if ts < 0 or ts > self.T + 1e-12 or abs(k - round(k)) > 1e-9 * max(1.0, k):
                raise ConfigError("snapshots", f"time {ts} is not a step time in [0, T]")
        self.physical()
        self.coeffs()
        return self


_BOOL = {"1": True, "true": True, "yes": True, "on": True,
         "0": False, "false": False, "no": False, "off": False}


def _convert(key: str, raw: str, typ):
    raw = raw.strip()
    try:
        if key == "snapshots":
            return tuple(float(x) for x in raw.split(",") if x.strip())
        if key == "c_s":
            return raw
        if typ is bool:
            return _BOOL[raw.lower()]
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        return raw
    except (ValueError, KeyError):
        raise ConfigError(key, f"cannot parse {raw!r}") from None


_TYPES = {
    f.name: (float if "float" in str(f.type) else int if "int" in str(f.type)
             else bool if "bool" in str(f.type) else str)
    for f in fields(RunConfig)
}


def parse_config(text: str) -> RunConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _TYPES:
            raise ConfigError(key, "unknown key")
        values[key] = _convert(key, raw, _TYPES[key])
    return RunConfig(**values)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("--config", str(exc)) from None
    return parse_config(text)


def dump_config(cfg: RunConfig) -> str:
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if v is None:
            continue
        if f.name == "snapshots":
            v = ",".join(repr(float(t)) for t in v)
        elif isinstance(v, bool):
            v = "true" if v else "false"
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"
