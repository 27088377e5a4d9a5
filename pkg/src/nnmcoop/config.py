"""Flat ``key = value`` experiment configuration.

Lines starting with ``#`` are comments. Lists are comma separated. Command
line overrides use the same keys. ``threads`` and ``out`` do not change
results and are excluded from the configuration hash.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .channel import CooperationScheme, PathLossModel
from .errors import DomainError
from .geometry import BoundaryPolicy, Window
from .process import SeedSpec


class ConfigError(ValueError):
    pass


def _floats(text):
    return tuple(float(t) for t in str(text).split(",") if t.strip())


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    lam: float = 1.0
    width: float = 50.0
    height: float = 50.0
    policy: str = "guard-margin"
    margin: float | None = None
    replications: int = 100
    seed: int = 0
    threads: int = 1
    k: int = 2
    schemes: tuple = ("NC", "OF1")
    beta: float = 4.0
    power: float = 1.0
    R: float = 0.0
    R_grid: tuple = (0.5, 1.0, 2.0, 3.0, 4.0, 5.0)
    n_radii: int = 64
    radii_max: float | None = None
    n_probes: int = 2000
    observers: int = 1
    r_max: float = math.inf
    fading: bool = True
    s_grid: tuple = (0.0, 0.01, 0.1, 1.0, 10.0, 100.0)
    eps: float = 1e-6
    n_max: int | None = None
    mc_samples: int = 20000
    lt_samples: int = 100000
    ks_boot: int = 999
    dump_samples: bool = False
    out: str = "out"
    emit: tuple = ("csv", "json")

    _parsers = {
        "lam": float, "width": float, "height": float, "policy": str,
        "margin": lambda t: None if str(t).lower() in ("", "none", "auto") else float(t),
        "replications": int, "seed": int, "threads": int, "k": int,
        "schemes": lambda t: tuple(s.strip() for s in str(t).split(",") if s.strip()),
        "beta": float, "power": float, "R": float, "R_grid": _floats, "n_radii": int,
        "radii_max": lambda t: None if str(t).lower() in ("", "none", "auto") else float(t),
        "n_probes": int, "observers": int, "r_max": float, "fading": _bool, "s_grid": _floats,
        "eps": float, "n_max": lambda t: None if str(t).lower() in ("", "none", "auto") else int(t),
        "mc_samples": int, "lt_samples": int, "ks_boot": int, "dump_samples": _bool, "out": str,
        "emit": lambda t: tuple(s.strip() for s in str(t).split(",") if s.strip()),
    }
    _aliases = {"lambda": "lam", "master_seed": "seed", "output_dir": "out", "n_replications": "replications"}

    def __post_init__(self):
        try:
            self.window
            self.boundary
            self.pathloss
            self.scheme_objects
            SeedSpec(self.seed)
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc
        if self.replications < 1 or self.threads < 1 or self.observers < 1:
            raise ConfigError("replications, threads and observers must be positive")
        if self.lam < 0:
            raise ConfigError("lambda must be non-negative")
        if self.k not in (2, 3):
            raise ConfigError("k must be 2 or 3")
        if not set(self.emit) <= {"csv", "json"}:
            raise ConfigError("emit must be a subset of {csv, json}")

    @property
    def window(self) -> Window:
        return Window(self.width, self.height)

    @property
    def boundary(self) -> BoundaryPolicy:
        if self.policy == "toroidal":
            return BoundaryPolicy.toroidal()
        return BoundaryPolicy(self.policy, self.margin)

    @property
    def pathloss(self) -> PathLossModel:
        return PathLossModel(self.beta, self.power, self.R)

    @property
    def scheme_objects(self):
        return [CooperationScheme.parse(s) for s in self.schemes]

    @property
    def master_seed(self) -> SeedSpec:
        return SeedSpec(self.seed)

    def radii(self) -> np.ndarray:
        top = self.radii_max if self.radii_max is not None else 2.0 / math.sqrt(self.lam)
        return np.linspace(0.0, top, self.n_radii + 1)[1:]

    @classmethod
    def keys(cls):
        return [f.name for f in fields(cls)]

    def updated(self, mapping) -> "ExperimentConfig":
        """New config with ``mapping`` (string or typed values) applied."""
        changes = {}
        for key, raw in mapping.items():
            key = self._aliases.get(key, key)
            if key not in self._parsers:
                raise ConfigError(f"unknown configuration key {key!r}")
            try:
                changes[key] = self._parsers[key](raw) if isinstance(raw, str) else raw
            except ValueError as exc:
                raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})") from exc
        return replace(self, **changes)

    @classmethod
    def parse_text(cls, text: str) -> dict:
        out = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value'")
            key, value = (t.strip() for t in line.split("=", 1))
            out[key] = value
        return out

    def canonical(self) -> str:
        lines = []
        for f in fields(self):
            if f.name in ("threads", "out"):
                continue
            lines.append(f"{f.name} = {getattr(self, f.name)!r}")
        return "\n".join(lines) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]
