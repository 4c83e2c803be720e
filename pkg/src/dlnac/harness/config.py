"""Experiment configuration: a flat ``key = value`` text file plus overrides.

Schema (every key optional; unset keys take the problem defaults)::

    problem       = wave1d | manufactured2d | random2d
    scheme        = modified | css_split | sav
    theta         = 2/3 | 0.8944 | dln | ks | midpoint | ...
    epsilon       = <float>
    mesh_n        = <int>        cells per side
    t_final       = <float>
    policy        = constant | random | alternating | adaptive
    k             = <float>      reference step (k0 for adaptive runs)
    ladder        = 0.04, 0.02, 0.01    k (converge-time) or h (converge-space)
    seed          = <int>
    tol, kappa, k_min, k_max, estimator, floor_policy, max_rejections
    fp_tol, fp_max_iter, c0
    steady_tol    = <float>      random2d stop threshold on |u_n - u_{n-1}|/k
    snapshots     = 1, 10, 100   output times for VTK snapshots
    out           = <directory>
"""

from __future__ import annotations

import configparser
import dataclasses
import math
import platform
from dataclasses import dataclass, field, fields
from fractions import Fraction
from pathlib import Path
from typing import Optional

from ..errors import InvalidArgument
from .problems import PROBLEMS
from .runners import SCHEMES

POLICIES = ("constant", "random", "alternating", "adaptive")
COMMANDS = ("converge-time", "converge-space", "adapt", "simulate")

_THETA_NAMES = {"dln": 2.0 / 3.0, "ks": 2.0 / math.sqrt(5.0), "midpoint": 1.0}
_SECTION = "experiment"


def parse_theta(text) -> float:
    """Accepts numbers, fractions ("2/3") and the names dln, ks, midpoint."""
    if isinstance(text, (int, float)):
        return float(text)
    s = str(text).strip().lower().replace(" ", "")
    if s in _THETA_NAMES:
        return _THETA_NAMES[s]
    if s in ("2/sqrt5", "2/sqrt(5)"):
        return _THETA_NAMES["ks"]
    try:
        return float(Fraction(s))
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidArgument(f"cannot parse theta {text!r}") from exc


def _floats(text) -> tuple[float, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(float(v) for v in text)
    return tuple(float(v) for v in str(text).replace(";", ",").split(",") if v.strip())


@dataclass
class ExperimentConfig:
    problem: str = "wave1d"
    scheme: str = "modified"
    theta: float = 2.0 / 3.0
    epsilon: Optional[float] = None
    mesh_n: Optional[int] = None
    t_final: Optional[float] = None
    policy: str = "constant"
    k: Optional[float] = None
    ladder: tuple = ()
    seed: int = 0
    tol: float = 1e-6
    kappa: float = 0.8
    k_min: float = 1e-5
    k_max: float = 0.1
    estimator: str = "absolute"
    floor_policy: str = "abort"
    max_rejections: int = 50
    fp_tol: float = 1e-8
    fp_max_iter: int = 100
    c0: float = 0.0
    steady_tol: Optional[float] = None
    snapshots: tuple = ()
    out: str = "out"
    extra: dict = field(default_factory=dict, repr=False)

    _CONVERTERS = {
        "theta": parse_theta,
        "ladder": _floats,
        "snapshots": _floats,
        "mesh_n": int,
        "seed": int,
        "max_rejections": int,
        "fp_max_iter": int,
    }

    @classmethod
    def from_mapping(cls, values: dict) -> "ExperimentConfig":
        cfg = cls()
        return cfg.updated(values)

    @classmethod
    def from_file(cls, path, overrides: dict | None = None) -> "ExperimentConfig":
        parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
        text = Path(path).read_text()
        parser.read_string(f"[{_SECTION}]\n{text}")
        cfg = cls.from_mapping(dict(parser[_SECTION]))
        return cfg.updated(overrides or {})

    def updated(self, values: dict) -> "ExperimentConfig":
        """Copy with ``values`` (strings or typed) applied; ``None`` values
        are skipped so unset CLI flags do not clobber file settings."""
        known = {f.name: f for f in fields(self) if f.name != "extra"}
        changes = {}
        for key, raw in values.items():
            key = key.replace("-", "_")
            if raw is None:
                continue
            if key not in known:
                raise InvalidArgument(f"unknown configuration key {key!r}")
            changes[key] = self._convert(key, raw, known[key])
        return dataclasses.replace(self, **changes)

    def _convert(self, key, raw, f):
        if key in self._CONVERTERS:
            return self._CONVERTERS[key](raw)
        if isinstance(raw, str):
            if f.type in ("float", "Optional[float]"):
                return float(raw)
            return raw.strip()
        return raw

    # ---------------------------------------------------------------- checks
    def validate(self, command: str) -> "ExperimentConfig":
        if command not in COMMANDS:
            raise InvalidArgument(f"unknown command {command!r}")
        if self.problem not in PROBLEMS:
            raise InvalidArgument(f"unknown problem {self.problem!r}; choose from {tuple(PROBLEMS)}")
        if self.scheme not in SCHEMES:
            raise InvalidArgument(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if self.policy not in POLICIES:
            raise InvalidArgument(f"unknown policy {self.policy!r}; choose from {POLICIES}")
        if not 0.0 <= self.theta <= 1.0:
            raise InvalidArgument(f"theta must lie in [0, 1], got {self.theta}")
        if self.epsilon is not None and self.epsilon <= 0:
            raise InvalidArgument("epsilon must be positive")

        if command in ("converge-time", "converge-space"):
            if self.problem == "random2d":
                raise InvalidArgument("random2d has no exact solution; use 'simulate' or 'adapt'")
            if len(self.ladder) < 2:
                raise InvalidArgument("convergence studies need a ladder of at least two values")
            if self.policy == "adaptive":
                raise InvalidArgument("convergence studies use constant, random or alternating steps")
        if command == "converge-time" and self.problem == "wave1d" and self.mesh_n is not None:
            raise InvalidArgument("wave1d temporal studies tie the mesh to the step (h = k^2); unset mesh_n")
        if command == "converge-space" and self.problem == "wave1d" and self.k is not None:
            raise InvalidArgument("wave1d spatial studies tie the step to the mesh (k = h^2); unset k")
        if command == "converge-space" and self.policy != "constant":
            raise InvalidArgument("spatial studies use constant steps")
        if command == "adapt" and self.policy not in ("adaptive", "constant"):
            raise InvalidArgument("'adapt' runs the adaptive controller; set policy = adaptive")
        if command in ("adapt", "simulate") and self.mesh_n is None:
            raise InvalidArgument(f"'{command}' needs mesh_n")
        if command in ("adapt", "simulate") and self.k is None:
            raise InvalidArgument(f"'{command}' needs k (the initial step for adaptive runs)")
        if command == "converge-time" and self.problem != "wave1d" and self.mesh_n is None:
            raise InvalidArgument(f"{self.problem} temporal studies need mesh_n")
        return self

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("extra")
        return d


def _fmt(value) -> str:
    if isinstance(value, (tuple, list)):
        return ", ".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return "" if value is None else str(value)


def write_manifest(path, cfg: ExperimentConfig, command: str, extra: dict | None = None) -> Path:
    """Resolved configuration in the same ``key = value`` format the loader
    reads, with run metadata appended as comments."""
    import numpy
    import scipy

    from .. import __version__

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# command: {command}"]
    lines += [f"{k} = {_fmt(v)}" for k, v in cfg.as_dict().items() if v is not None]
    meta = {
        "dlnac": __version__,
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }
    meta.update(extra or {})
    lines += [f"# {k}: {v}" for k, v in meta.items()]
    path.write_text("\n".join(lines) + "\n")
    return path


__all__ = ["COMMANDS", "ExperimentConfig", "POLICIES", "parse_theta", "write_manifest"]
