"""Homogeneous Poisson point processes and independent thinning.

Random streams are derived from a ``SeedSpec`` as
``Philox(SeedSequence(master_seed, spawn_key=(stream_id, *path, *sub)))``;
the map from ``(master_seed, stream_id, *path, *sub)`` to a stream is injective, so every
replication owns an independent, reproducible stream regardless of which
worker runs it.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError
from .geometry import Window


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int = 0
    stream_id: int = 0
    path: tuple = ()

    def __post_init__(self):
        if not (0 <= self.master_seed < 2**64):
            raise DomainError("master_seed must be an unsigned 64-bit integer")
        if self.stream_id < 0:
            raise DomainError("stream_id must be non-negative")

    def rng(self, *sub: int) -> np.random.Generator:
        """Generator for this stream, optionally for a labelled sub-stream."""
        key = (self.stream_id, *self.path, *sub)
        ss = np.random.SeedSequence(self.master_seed, spawn_key=key)
        return np.random.Generator(np.random.Philox(ss))

    def stream(self, stream_id: int) -> "SeedSpec":
        return SeedSpec(self.master_seed, stream_id)

    def child(self, *sub: int) -> "SeedSpec":
        """Seed for a labelled sub-task of this stream."""
        return SeedSpec(self.master_seed, self.stream_id, (*self.path, *sub))

    def to_dict(self):
        d = {"master_seed": self.master_seed, "stream_id": self.stream_id}
        if self.path:
            d["path"] = list(self.path)
        return d


@dataclass
class PointPattern:
    """A finite configuration of atoms observed in a window.

    ``source_index`` maps each point back to the pattern it was extracted
    from (``None`` for a freshly sampled pattern).
    """

    points: np.ndarray
    window: Window
    density: float
    seed: SeedSpec | None = None
    source_index: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        if not np.isfinite(self.points).all():
            raise DomainError("coordinates must be finite")
        if len(self.points) and not self.window.contains(self.points).all():
            raise DomainError("every point must lie inside the window")

    def __len__(self):
        return len(self.points)

    @property
    def indices(self) -> np.ndarray:
        if self.source_index is not None:
            return self.source_index
        return np.arange(len(self.points))

    def scaled(self, c: float) -> "PointPattern":
        return PointPattern(self.points * c, self.window.scaled(c), self.density / c**2,
                            self.seed, self.source_index)

    def to_csv(self, path, header_lines=(), meta=None):
        """Write ``index,x,y`` plus a JSON sidecar ``<path>.json``.

        ``meta`` (a dict) is stored verbatim under the sidecar's ``"meta"`` key.
        """
        path = Path(path)
        with open(path, "w", newline="") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["index", "x", "y"])
            for i, (x, y) in zip(self.indices, self.points):
                w.writerow([int(i), repr(float(x)), repr(float(y))])
        meta_doc = {
            "window": {"x0": self.window.x0, "y0": self.window.y0,
                       "width": self.window.width, "height": self.window.height},
            "lambda": self.density,
            "seed": self.seed.to_dict() if self.seed else None,
        }
        if meta:
            meta_doc["meta"] = meta
        Path(str(path) + ".json").write_text(json.dumps(meta_doc, sort_keys=True, indent=2) + "\n")

    @classmethod
    def from_csv(cls, path) -> "PointPattern":
        path = Path(path)
        meta = json.loads(Path(str(path) + ".json").read_text())
        rows = [r for r in csv.reader(line for line in open(path) if not line.startswith("#"))][1:]
        idx = np.array([int(r[0]) for r in rows], dtype=int)
        pts = np.array([[float(r[1]), float(r[2])] for r in rows]).reshape(-1, 2)
        win = meta["window"]
        seed = None
        if meta["seed"]:
            sd = meta["seed"]
            seed = SeedSpec(sd["master_seed"], sd["stream_id"], tuple(sd.get("path", ())))
        src = None if np.array_equal(idx, np.arange(len(idx))) else idx
        return cls(pts, Window(win["width"], win["height"], win["x0"], win["y0"]),
                   meta["lambda"], seed, src)


def uniform_points(rng: np.random.Generator, n: int, window: Window) -> np.ndarray:
    u = rng.random((n, 2))
    return np.column_stack([window.x0 + u[:, 0] * window.width,
                            window.y0 + u[:, 1] * window.height])


def sample_ppp(lam: float, window: Window, seed: SeedSpec) -> PointPattern:
    """Sample a homogeneous PPP of intensity ``lam`` on ``window``.

    The count is drawn with numpy's Poisson sampler (inversion for small
    means, transformed rejection for large ones), then positions are i.i.d.
    uniform. The same ``seed`` always yields the same pattern.
    """
    if not lam >= 0:
        raise DomainError(f"intensity must be non-negative, got {lam}")
    rng = seed.rng()
    n = int(rng.poisson(lam * window.area))
    return PointPattern(uniform_points(rng, n, window), window, lam, seed)


def independent_thin(pattern: PointPattern, keep_prob: float, seed: SeedSpec) -> PointPattern:
    """Keep each atom independently with probability ``keep_prob``."""
    if not 0.0 <= keep_prob <= 1.0:
        raise DomainError(f"keep_prob must lie in [0, 1], got {keep_prob}")
    keep = seed.rng().random(len(pattern)) < keep_prob
    return PointPattern(pattern.points[keep], pattern.window, pattern.density * keep_prob,
                        seed, pattern.indices[keep])
