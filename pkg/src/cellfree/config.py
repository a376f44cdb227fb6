"""System parameters and their text-file / override parsing."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

BOLTZMANN = 1.381e-23  # J/K


def thermal_noise_mw(bandwidth_hz=20e6, temperature_k=290.0, noise_figure_db=9.0):
    """Receiver noise power in mW."""
    watts = bandwidth_hz * BOLTZMANN * temperature_k * 10 ** (noise_figure_db / 10)
    return watts * 1e3


@dataclass(frozen=True)
class PathLossParams:
    """Three-slope path loss. Distances in metres, losses in dB."""

    L: float = 140.7
    d0: float = 10.0
    d1: float = 50.0
    sigma_sh: float = 8.0


@dataclass(frozen=True)
class SystemConfig:
    M: int = 100
    N: int = 2
    K: int = 40
    tau: int = 20
    tau_c: int = 200
    D: float = 1000.0
    pbar_p: float = 200.0
    rhobar: float = 200.0
    p_n: float = field(default_factory=thermal_noise_mw)
    w_y: float = 15.0
    w_g: float = 15.0
    w_z: float = 15.0
    alpha1: float = 9
    alpha2: float = 5
    C_bh: float = 14.4e6
    T_c: float = 1e-3
    epsilon: float = 1e-4
    max_iters: int = 50
    pmax: float = 1.0
    pilot_mode: str = "random"
    L: float = 140.7
    d0: float = 10.0
    d1: float = 50.0
    sigma_sh: float = 8.0
    rate_prefactor: bool = False

    def __post_init__(self):
        for name in ("M", "N", "K", "tau"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.tau > self.tau_c or self.tau_c - self.tau <= 0:
            raise ValueError(f"need tau < tau_c, got tau={self.tau}, tau_c={self.tau_c}")
        for name in ("D", "pbar_p", "rhobar", "p_n", "T_c", "pmax"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.pilot_mode not in ("random", "orthogonal"):
            raise ValueError(f"unknown pilot_mode {self.pilot_mode!r}")
        if self.pilot_mode == "orthogonal" and self.tau < self.K:
            raise ValueError("orthogonal pilots need tau >= K")
        if not (self.d0 < self.d1):
            raise ValueError("path loss breakpoints need d0 < d1")

    @property
    def tau_f(self):
        return self.tau_c - self.tau

    @property
    def p_p(self):
        return self.pbar_p / self.p_n

    @property
    def rho(self):
        return self.rhobar / self.p_n

    @property
    def Q1(self):
        return levels(self.alpha1)

    @property
    def Q2(self):
        return levels(self.alpha2)

    @property
    def path_loss(self):
        return PathLossParams(L=self.L, d0=self.d0, d1=self.d1, sigma_sh=self.sigma_sh)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def with_overrides(self, overrides):
        """Return a copy with string-valued ``overrides`` coerced and applied."""
        return self.replace(**coerce_overrides(overrides))


def levels(alpha):
    """Quantizer levels 2**alpha; an infinite bit width means no quantization."""
    if alpha is None or math.isinf(alpha):
        return math.inf
    return 2.0 ** alpha


_FIELDS = {f.name: f for f in dataclasses.fields(SystemConfig)}
_INT_FIELDS = {"M", "N", "K", "tau", "tau_c", "max_iters"}


def _coerce(name, value):
    if not isinstance(value, str):
        return value
    text = value.strip()
    if name in _INT_FIELDS:
        return int(text)
    if name == "pilot_mode":
        return text
    if name == "rate_prefactor":
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"bad boolean for {name}: {value!r}")
    if name in ("alpha1", "alpha2"):
        x = float(text)
        return x if math.isinf(x) or x != int(x) else int(x)
    return float(text)


def coerce_overrides(overrides):
    out = {}
    for key, value in dict(overrides).items():
        if key not in _FIELDS:
            raise KeyError(f"unknown parameter {key!r}")
        out[key] = _coerce(key, value)
    return out


def parse_assignments(items):
    """Parse ``key=value`` strings into a dict (no coercion)."""
    out = {}
    for item in items:
        if "=" not in item:
            raise ValueError(f"expected key=value, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def read_config_file(path):
    """Read a ``key = value`` text file; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out
