"""Monte Carlo estimators for the singles and pairs processes.

Every estimator runs ``plan.n_replications`` independent realizations.
Replication ``k`` samples its PPP from stream ``SeedSpec(master_seed, k)``;
auxiliary randomness (probes, independent thinning) comes from labelled
sub-streams of that seed. Grouping always uses every atom of the window,
while typical atoms and probe points are restricted to the interior window
of the boundary policy (minus sampling). Standard errors are computed from
replication-level batches, since atoms of one realization are dependent.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.spatial import cKDTree

from .analytic import p_star
from .errors import DomainError
from .geometry import BoundaryPolicy, Window
from .grouping import group
from .process import SeedSpec, independent_thin, sample_ppp, uniform_points

log = logging.getLogger(__name__)

CLASSES = ("all", "singles", "pairs", "reference-singles", "reference-pairs")

# sub-stream labels inside one replication
_PROBES, _THIN, _FPROBES = 1, 2, 3


@dataclass(frozen=True)
class ReplicationPlan:
    n_replications: int
    lam: float
    window: Window
    policy: BoundaryPolicy = BoundaryPolicy()
    seed: SeedSpec = SeedSpec()
    threads: int = 1

    def __post_init__(self):
        if self.n_replications < 1:
            raise DomainError("need at least one replication")
        if not self.lam > 0:
            raise DomainError("lambda must be positive")

    @property
    def interior(self) -> Window:
        return self.policy.interior(self.window, self.lam)

    def replication_seed(self, k: int) -> SeedSpec:
        return SeedSpec(self.seed.master_seed, k)

    def default_radii(self, n: int = 64) -> np.ndarray:
        # r = 0 is excluded: G = F = 0 there and J is identically 1
        return np.linspace(0.0, 2.0 / math.sqrt(self.lam), n + 1)[1:]

    def run(self, fn):
        """``[fn(k) for k in range(n)]``, optionally on a thread pool."""
        reps = range(self.n_replications)
        if self.threads > 1:
            with ThreadPoolExecutor(self.threads) as ex:
                return list(ex.map(fn, reps))
        return [fn(k) for k in reps]


@dataclass
class EmpiricalCurve:
    radii: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    n_samples: int

    def __post_init__(self):
        self.radii = np.asarray(self.radii, dtype=float)
        if np.any(np.diff(self.radii) <= 0):
            raise DomainError("radii must be strictly increasing")

    def sup_distance(self, other) -> float:
        """Sup-norm distance to a callable or to a curve on the same grid."""
        ref = other(self.radii) if callable(other) else np.asarray(other.values)
        return float(np.max(np.abs(self.values - ref)))

    def to_csv(self, path, header_lines=(), extra=None):
        """Write ``r,value,stderr`` (plus named ``extra`` columns)."""
        extra = extra or {}
        with open(path, "w", newline="") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["r", "value", "stderr", *extra])
            for i, r in enumerate(self.radii):
                w.writerow([repr(float(r)), repr(float(self.values[i])), repr(float(self.stderr[i])),
                            *(repr(float(v[i])) for v in extra.values())])


def _ratio_stats(num, den):
    """Pooled ratio ``sum(num)/sum(den)`` with a batch (linearized) stderr."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    tot = den.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(tot > 0, num.sum(axis=0) / np.where(tot > 0, tot, 1), np.nan)
    k = num.shape[0]
    if k < 2:
        return ratio, np.zeros_like(ratio)
    resid = num - ratio * (den if den.ndim == num.ndim else den[:, None])
    mean_den = tot / k
    se = np.sqrt((resid ** 2).sum(axis=0) / (k * (k - 1))) / mean_den
    return ratio, se


def _tree(points, window: Window, policy: BoundaryPolicy):
    if policy.is_toroidal:
        sides = np.array([window.width, window.height])
        return cKDTree(np.mod(points - [window.x0, window.y0], sides), boxsize=sides)
    return cKDTree(points)


def _local(points, window: Window, policy: BoundaryPolicy):
    if policy.is_toroidal:
        sides = np.array([window.width, window.height])
        return np.mod(points - [window.x0, window.y0], sides)
    return points


def _class_points(plan: ReplicationPlan, k: int, which: str):
    """Atoms of the selected subprocess in replication ``k``."""
    if which not in CLASSES:
        raise DomainError(f"unknown class {which!r}; expected one of {CLASSES}")
    sd = plan.replication_seed(k)
    pat = sample_ppp(plan.lam, plan.window, sd)
    if which == "all":
        return pat.points
    if which.startswith("reference"):
        keep = p_star() if which == "reference-pairs" else 1.0 - p_star()
        return independent_thin(pat, keep, sd.child(_THIN)).points
    g = group(pat, plan.policy)
    sel = g.singles if which == "singles" else g.pair_members
    return pat.points[sel]


@dataclass
class ClassFractions:
    frac_single: float
    frac_single_stderr: float
    frac_paired: float
    frac_paired_stderr: float
    n_atoms: int
    n_singles: int
    n_paired: int
    interior_area: float

    @property
    def density_singles(self) -> float:
        return self.n_singles / self.interior_area

    @property
    def density_pairs(self) -> float:
        return self.n_paired / self.interior_area

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def estimate_class_fractions(plan: ReplicationPlan) -> ClassFractions:
    """Fractions of interior atoms that are single or paired."""
    interior = plan.interior

    def one(k):
        pat = sample_ppp(plan.lam, plan.window, plan.replication_seed(k))
        g = group(pat, plan.policy)
        inside = interior.contains(pat.points) if len(pat) else np.zeros(0, bool)
        lab = g.labels()
        n = int(inside.sum())
        s = int((inside & (lab == 0)).sum())
        return n, s, n - s

    res = np.array(plan.run(one), dtype=float).reshape(-1, 3)
    fs, fs_se = _ratio_stats(res[:, 1], res[:, 0])
    fp, fp_se = _ratio_stats(res[:, 2], res[:, 0])
    return ClassFractions(float(fs), float(fs_se), float(fp), float(fp_se),
                          int(res[:, 0].sum()), int(res[:, 1].sum()), int(res[:, 2].sum()),
                          interior.area * plan.n_replications)


@dataclass
class VoronoiShares:
    share_singles: float
    share_pairs: float
    stderr: float
    n_probes: int


def estimate_voronoi_shares(plan: ReplicationPlan, n_probes: int) -> VoronoiShares:
    """Share of the plane served by singles vs pairs, by nearest-atom probes.

    ``n_probes`` uniform probes per replication are thrown into the interior
    window; a probe belongs to the Voronoi cell of its nearest atom.
    """
    if n_probes < 1:
        raise DomainError("need at least one probe")
    interior = plan.interior

    def one(k):
        sd = plan.replication_seed(k)
        pat = sample_ppp(plan.lam, plan.window, sd)
        if len(pat) == 0:
            return 0, 0
        g = group(pat, plan.policy)
        probes = uniform_points(sd.rng(_PROBES), n_probes, interior)
        _, idx = _tree(pat.points, plan.window, plan.policy).query(
            _local(probes, plan.window, plan.policy))
        return n_probes, int((g.labels()[idx] == 0).sum())

    res = np.array(plan.run(one), dtype=float).reshape(-1, 2)
    share, se = _ratio_stats(res[:, 1], res[:, 0])
    return VoronoiShares(float(share), 1.0 - float(share), float(se), int(res[:, 0].sum()))


def _cdf_counts(d, radii):
    d = np.sort(d)
    return np.searchsorted(d, radii, side="right")


def estimate_nn_function(plan: ReplicationPlan, which: str, radii=None) -> EmpiricalCurve:
    """Nearest-neighbour distance cdf ``G`` of a subprocess.

    For every interior atom of the subprocess, the distance to the nearest
    other atom of the same subprocess (searched over the whole window).
    """
    radii = plan.default_radii() if radii is None else np.asarray(radii, dtype=float)
    interior = plan.interior

    def one(k):
        pts = _class_points(plan, k, which)
        if len(pts) < 2:
            log.info("replication %d: fewer than two %s atoms, skipped", k, which)
            return np.zeros(len(radii)), 0
        inside = interior.contains(pts)
        d, _ = _tree(pts, plan.window, plan.policy).query(
            _local(pts[inside], plan.window, plan.policy), k=2)
        return _cdf_counts(d[:, 1], radii), int(inside.sum())

    res = plan.run(one)
    num = np.array([r[0] for r in res], dtype=float)
    den = np.array([r[1] for r in res], dtype=float)
    val, se = _ratio_stats(num, den)
    return EmpiricalCurve(radii, val, se, int(den.sum()))


def estimate_empty_space(plan: ReplicationPlan, which: str, radii=None, n_probes: int = 1000) -> EmpiricalCurve:
    """Empty-space cdf ``F``: distance from a uniform interior probe to the subprocess."""
    radii = plan.default_radii() if radii is None else np.asarray(radii, dtype=float)
    interior = plan.interior

    def one(k):
        pts = _class_points(plan, k, which)
        if len(pts) == 0:
            log.info("replication %d: no %s atoms, skipped", k, which)
            return np.zeros(len(radii)), 0
        probes = uniform_points(plan.replication_seed(k).rng(_FPROBES), n_probes, interior)
        d, _ = _tree(pts, plan.window, plan.policy).query(_local(probes, plan.window, plan.policy))
        return _cdf_counts(d, radii), n_probes

    res = plan.run(one)
    num = np.array([r[0] for r in res], dtype=float)
    den = np.array([r[1] for r in res], dtype=float)
    val, se = _ratio_stats(num, den)
    return EmpiricalCurve(radii, val, se, int(den.sum()))


def j_function(G: EmpiricalCurve, F: EmpiricalCurve, floor: float = 1e-3) -> EmpiricalCurve:
    """``J = (1 - G) / (1 - F)``, truncated where ``1 - F < floor``."""
    if len(G.radii) != len(F.radii) or not np.allclose(G.radii, F.radii, rtol=0, atol=0):
        raise DomainError("G and F must share the same radii grid")
    sf = 1.0 - F.values
    keep = sf >= floor
    sg = 1.0 - G.values[keep]
    sf = sf[keep]
    val = sg / sf
    se = np.sqrt((G.stderr[keep] / sf) ** 2 + (sg * F.stderr[keep] / sf ** 2) ** 2)
    return EmpiricalCurve(G.radii[keep], val, se, min(G.n_samples, F.n_samples))


@dataclass
class KSResult:
    statistic: float
    p_value: float
    n: int
    mean: float

    def to_json(self) -> str:
        return json.dumps({"statistic": self.statistic, "p_value": self.p_value, "n": self.n},
                          sort_keys=True)


def _ks_poisson_stat(counts):
    counts = np.asarray(counts)
    m = counts.mean()
    ks = np.arange(0, counts.max() + 1)
    emp = np.searchsorted(np.sort(counts), ks, side="right") / counts.size
    return float(np.max(np.abs(emp - stats.poisson.cdf(ks, m)))) if m > 0 else float(np.max(np.abs(emp - 1)))


def ks_poisson_test(counts, n_boot: int = 999, seed: SeedSpec = SeedSpec()) -> KSResult:
    """Kolmogorov-Smirnov test of counts against a Poisson law with fitted mean.

    Both distribution functions jump only at integers, so the statistic is
    the maximum over the integer support. Since the law is discrete and its
    mean is estimated, the p-value comes from a parametric bootstrap
    (Poisson samples of the same size, mean refitted each time).
    """
    counts = np.asarray(counts, dtype=int)
    if counts.size < 2:
        raise DomainError("need at least two counts")
    d = _ks_poisson_stat(counts)
    rng = seed.rng(7)
    m = counts.mean()
    boot = np.array([_ks_poisson_stat(rng.poisson(m, counts.size)) for _ in range(n_boot)])
    p = (1 + np.count_nonzero(boot >= d - 1e-12)) / (n_boot + 1)
    return KSResult(d, float(p), int(counts.size), float(m))


def subprocess_counts(plan: ReplicationPlan, which: str) -> np.ndarray:
    """Number of interior atoms of the subprocess in each replication."""
    interior = plan.interior

    def one(k):
        pts = _class_points(plan, k, which)
        return int(interior.contains(pts).sum()) if len(pts) else 0

    return np.array(plan.run(one), dtype=int)


def ks_poisson_count_test(plan: ReplicationPlan, which: str, n_boot: int = 999) -> KSResult:
    if plan.n_replications < 100:
        raise DomainError("the count test needs at least 100 replications")
    return ks_poisson_test(subprocess_counts(plan, which), n_boot, plan.seed)
