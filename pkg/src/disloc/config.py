"""Run configuration: validation and INI round-tripping.

Floats are written with ``repr`` so that a config survives a
write/read cycle bit for bit.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import asdict, dataclass, fields, replace

from .dislocation import A_MAX, A_MIN, SMOOTHING
from .forms import CATALOG_NAMES

COMMANDS = ("build", "check", "converge", "torsion", "bravais")
MAX_N = 16
MAX_N_LARGE = 32


class ConfigError(ValueError):
    """Invalid configuration (reported with exit code 2)."""


@dataclass(frozen=True)
class RunConfig:
    cmd: str = "check"
    beta_name: str = "linear_y"
    a: float = 0.5
    r_name: str = "quintic"
    n: int = 1
    n_list: tuple = (1, 2, 4, 8, 16)
    order: int = 8
    max_panel: float = 1.0 / 64
    tol: float = 1e-9
    seed: int = 20240601
    n_tests: int = 5
    out: str = "out"
    h: float = 0.1
    resolution: int = 200
    p_ref: tuple = (1.0 / 3.0, 1.0 / 3.0)
    shrink_segments: bool = True
    allow_large_n: bool = False
    fault: str = ""

    def validate(self) -> "RunConfig":
        if self.cmd not in COMMANDS:
            raise ConfigError(f"unknown command {self.cmd!r}; choose from {', '.join(COMMANDS)}")
        if self.beta_name not in CATALOG_NAMES:
            raise ConfigError(f"unknown beta {self.beta_name!r}; choose from {', '.join(CATALOG_NAMES)}")
        allowed_r = set(SMOOTHING) | ({"corrupted"} if self.fault == "corrupted-r" else set())
        if self.r_name not in allowed_r:
            raise ConfigError(f"unknown smoothing {self.r_name!r}; choose from {', '.join(sorted(SMOOTHING))}")
        if self.fault not in ("", "corrupted-r"):
            raise ConfigError(f"unknown fault {self.fault!r}")
        if not (A_MIN <= self.a <= A_MAX):
            raise ConfigError(f"a={self.a!r} outside the admissible range [{A_MIN}, {A_MAX}]")
        cap = MAX_N_LARGE if self.allow_large_n else MAX_N
        if not self.n_list:
            raise ConfigError("n_list must be nonempty")
        ns = list(self.n_list)
        if any(int(n) != n or n < 1 for n in ns):
            raise ConfigError("n_list entries must be positive integers")
        if ns != sorted(set(ns)):
            raise ConfigError("n_list must be strictly ascending")
        if max(ns) > cap or not (1 <= self.n <= cap):
            raise ConfigError(f"n above {cap} needs allow_large_n" if cap == MAX_N else f"n above {cap} is not supported")
        if self.order < 2:
            raise ConfigError("order must be at least 2")
        if not (self.max_panel > 0 and self.tol > 0 and self.h > 0):
            raise ConfigError("max_panel, tol and h must be positive")
        if self.n_tests < 1:
            raise ConfigError("n_tests must be positive")
        if self.resolution < 8 or self.resolution % 2:
            raise ConfigError("resolution must be an even integer >= 8")
        px, py = self.p_ref
        if not (0.0 < px < 1.0 and 0.0 < py < 1.0):
            raise ConfigError("p_ref must lie in the open unit square")
        return self

    def override(self, **changes) -> "RunConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    def to_record(self) -> dict:
        rec = asdict(self)
        rec["n_list"] = list(self.n_list)
        rec["p_ref"] = list(self.p_ref)
        return rec


# -- INI serialization ---------------------------------------------------------

_SECTIONS = {
    "run": ("cmd", "beta_name", "a", "r_name", "n", "n_list", "out", "shrink_segments", "allow_large_n", "fault"),
    "quadrature": ("order", "max_panel", "tol"),
    "tests": ("seed", "n_tests"),
    "torsion": ("p_ref",),
    "bravais": ("h", "resolution"),
}
_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _encode(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(_encode(v) for v in value)
    return str(value)


def _decode(name: str, text: str):
    kind = _TYPES[name]
    text = text.strip()
    try:
        if kind == "bool":
            low = text.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(text)
            return low in ("true", "1", "yes")
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        if kind == "tuple":
            parts = [p.strip() for p in text.split(",") if p.strip()]
            return tuple(int(p) for p in parts) if name == "n_list" else tuple(float(p) for p in parts)
        return text
    except ValueError:
        raise ConfigError(f"cannot parse {name} = {text!r}") from None


def dumps(cfg: RunConfig) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    for section, keys in _SECTIONS.items():
        cp[section] = {k: _encode(getattr(cfg, k)) for k in keys}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def loads(text: str, base: RunConfig | None = None) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file: {exc}") from None
    values = {}
    for section in cp.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in cp[section].items():
            if key not in _SECTIONS[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            values[key] = _decode(key, raw)
    return replace(base or RunConfig(), **values)


def load(path, base: RunConfig | None = None) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            return loads(fh.read(), base)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
