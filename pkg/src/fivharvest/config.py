"""Line-oriented ``key = value`` run configuration."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace

from fivharvest.dynamics import State
from fivharvest.model import ParameterError, Params
from fivharvest.response import CASES, SWEEPABLE

# config key -> Params field
PARAM_KEYS = {
    "alpha": "alpha",
    "beta": "beta",
    "gamma": "gamma",
    "theta": "theta",
    "xi_x": "xi_x",
    "xi_q": "xi_q",
    "mu": "mu",
    "xi": "xi",
    "eta": "eta",
    "v0": "V0",
    "f0": "F0",
    "omega0": "Omega0",
}
HB_MODES = ("verbatim", "corrected")
SOURCES = ("RealPart", "ImagPart", "both")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimSpec:
    dt: float = 1e-3
    T_end: float = 400.0
    initial: State = field(default_factory=State)


@dataclass(frozen=True)
class SweepSpec:
    varied: str = "xi_x"
    lo: float = 0.0
    hi: float = 1.0
    steps: int = 20
    cases: tuple[str, ...] = tuple(CASES)


@dataclass(frozen=True)
class AmplitudeSpec:
    omega_min: float = 0.05
    omega_max: float = 5.0
    grid: int = 200
    mode: str = "verbatim"
    source: str = "both"
    A_max: float = 5.0


@dataclass(frozen=True)
class RunConfig:
    params: Params = field(default_factory=Params)
    sim: SimSpec = field(default_factory=SimSpec)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    amplitude: AmplitudeSpec = field(default_factory=AmplitudeSpec)
    out_dir: str = "."

    def validate(self) -> None:
        self.params.validate()
        s = self.sim
        if not (s.dt > 0 and s.T_end > 0 and math.isfinite(s.dt) and math.isfinite(s.T_end)):
            raise ConfigError("dt and t_end must be positive and finite")
        w = self.sweep
        if w.varied not in SWEEPABLE:
            raise ConfigError(f"vary must be one of {', '.join(SWEEPABLE)}")
        if w.steps < 2:
            raise ConfigError("steps must be >= 2")
        if not w.lo <= w.hi:
            raise ConfigError("sweep range must satisfy from <= to")
        for c in w.cases:
            if c not in CASES:
                raise ConfigError(f"unknown case {c!r}")
        a = self.amplitude
        if not 0 < a.omega_min < a.omega_max:
            raise ConfigError("need 0 < omega_min < omega_max")
        if a.grid < 64:
            raise ConfigError("grid must be >= 64")
        if a.mode not in HB_MODES:
            raise ConfigError(f"hb_mode must be one of {', '.join(HB_MODES)}")
        if a.source not in SOURCES:
            raise ConfigError(f"source must be one of {', '.join(SOURCES)}")
        if not a.A_max > 0:
            raise ConfigError("a_max must be > 0")


def _float(v: str) -> float:
    x = float(v)
    if not math.isfinite(x):
        raise ValueError("not finite")
    return x


def _int(v: str) -> int:
    return int(v)


def _cases(v: str) -> tuple[str, ...]:
    return tuple(c.strip() for c in v.split(",") if c.strip())


# key -> (section, attribute, converter)
_OTHER_KEYS = {
    "dt": ("sim", "dt", _float),
    "t_end": ("sim", "T_end", _float),
    "x_init": ("init", "X", _float),
    "v_init": ("init", "V", _float),
    "q_init": ("init", "Q", _float),
    "i_init": ("init", "I", _float),
    "vary": ("sweep", "varied", str),
    "from": ("sweep", "lo", _float),
    "to": ("sweep", "hi", _float),
    "steps": ("sweep", "steps", _int),
    "cases": ("sweep", "cases", _cases),
    "omega_min": ("amplitude", "omega_min", _float),
    "omega_max": ("amplitude", "omega_max", _float),
    "grid": ("amplitude", "grid", _int),
    "hb_mode": ("amplitude", "mode", str),
    "source": ("amplitude", "source", str),
    "a_max": ("amplitude", "A_max", _float),
    "out": ("top", "out_dir", str),
}
KEYS = tuple(PARAM_KEYS) + tuple(_OTHER_KEYS)


def parse_config(text: str) -> RunConfig:
    """Parse ``key = value`` lines; missing keys keep their defaults."""
    values: dict[str, tuple[int, str]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, value = (s.strip() for s in line.partition("="))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if not value:
            raise ConfigError(f"line {lineno}: key {key!r} has no value")
        if key in values:
            raise ConfigError(f"line {lineno}: key {key!r} repeated")
        values[key] = (lineno, value)
    return build_config(values)


def build_config(values: dict[str, tuple[int, str]], base: RunConfig | None = None) -> RunConfig:
    """Apply raw string values (with their line numbers) on top of ``base``."""
    base = base or RunConfig()
    sections = {
        "params": {},
        "sim": {},
        "init": {},
        "sweep": {},
        "amplitude": {},
        "top": {},
    }
    for key, (lineno, value) in values.items():
        where = f"line {lineno}: " if lineno else ""
        try:
            if key in PARAM_KEYS:
                sections["params"][PARAM_KEYS[key]] = _float(value)
            else:
                section, attr, conv = _OTHER_KEYS[key]
                sections[section][attr] = conv(value)
        except ValueError:
            raise ConfigError(f"{where}key {key!r}: cannot parse {value!r}") from None

    try:
        params = replace(base.params, **sections["params"])
    except ParameterError as exc:
        bad = _offending(str(exc), values)
        raise ConfigError(f"{bad}{exc}") from None
    init = replace(base.sim.initial, **sections["init"])
    cfg = RunConfig(
        params=params,
        sim=replace(base.sim, initial=init, **sections["sim"]),
        sweep=replace(base.sweep, **sections["sweep"]),
        amplitude=replace(base.amplitude, **sections["amplitude"]),
        out_dir=sections["top"].get("out_dir", base.out_dir),
    )
    try:
        cfg.validate()
    except (ConfigError, ParameterError) as exc:
        raise ConfigError(f"{_offending(str(exc), values)}{exc}") from None
    return cfg


def _offending(message: str, values: dict[str, tuple[int, str]]) -> str:
    """Prefix naming the line of the first supplied key mentioned in an error."""
    words = set(re.findall(r"\w+", message))
    for key, (lineno, _) in sorted(values.items(), key=lambda kv: kv[1][0]):
        if key in words or PARAM_KEYS.get(key) in words:
            return f"line {lineno}: key {key!r}: " if lineno else f"key {key!r}: "
    return ""
