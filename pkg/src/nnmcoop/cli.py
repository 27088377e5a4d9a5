"""Command line driver: ``nnmcoop {sample,stats,interference,laplace,reproduce}``.

Exit status: 0 success, 1 I/O failure, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import (
    QuadratureSpec,
    expected_interference_pairs,
    expected_interference_singles,
    intensity_density,
    nn_cdf_pairs,
    nn_cdf_reference,
    p_star,
)
from .config import ConfigError, ExperimentConfig
from .errors import DomainError, NumericalError
from .grouping import group
from .interference import empirical_laplace, simulate_interference, simulate_window_interference
from .laplace import LaplaceSeriesSpec, laplace_transform_pairs, laplace_transform_singles
from .process import SeedSpec, sample_ppp
from .statistics import (
    ReplicationPlan,
    estimate_class_fractions,
    estimate_empty_space,
    estimate_nn_function,
    estimate_voronoi_shares,
    j_function,
    ks_poisson_count_test,
)

log = logging.getLogger("nnmcoop")

# per-command defaults, applied before the config file and flags
DEFAULTS = {
    "sample": {"replications": 3, "lam": 1.0, "width": 20.0, "height": 20.0},
    "stats": {"lam": 1.0, "width": 50.0, "height": 50.0, "margin": 5.0, "replications": 625,
              "n_probes": 2000},
    "interference": {"lam": 0.1, "width": 100.0, "height": 100.0, "policy": "toroidal",
                     "observers": 50, "r_max": 50.0, "replications": 2000,
                     "R_grid": (0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0)},
    "laplace": {"lam": 0.1, "width": math.sqrt(20.0), "height": math.sqrt(20.0),
                "schemes": ("NC",), "lt_samples": 100000},
}

FIGURES = {
    "fig3": ("stats-areas", {"lam": 1.0, "width": 5.0, "height": 5.0, "margin": 0.0, "replications": 1}),
    "fig4a": ("curve", {"lam": 1.0, "width": 50.0, "height": 50.0, "margin": 5.0, "replications": 200},
              "G", "singles"),
    "fig4b": ("curve", {"lam": 1.0, "width": 50.0, "height": 50.0, "margin": 5.0, "replications": 200},
              "F", "singles"),
    "fig4c": ("curve", {"lam": 1.0, "width": 50.0, "height": 50.0, "margin": 5.0, "replications": 200},
              "J", "singles"),
    "fig4d": ("curve", {"lam": 1.0, "width": 50.0, "height": 50.0, "margin": 5.0, "replications": 200},
              "G", "pairs"),
    "fig4e": ("curve", {"lam": 1.0, "width": 50.0, "height": 50.0, "margin": 5.0, "replications": 200},
              "F", "pairs"),
    "fig4f": ("curve", {"lam": 1.0, "width": 50.0, "height": 50.0, "margin": 5.0, "replications": 200},
              "J", "pairs"),
    "fig6": ("interference", {"lam": 0.1, "width": 100.0, "height": 100.0, "fading": False,
                              "schemes": ("NC",), "beta_list": (2.5, 4.0)}),
    "fig7": ("interference", {"lam": 0.1, "width": 100.0, "height": 100.0, "fading": False,
                              "schemes": ("NC", "OF1"), "beta_list": (2.5, 4.0)}),
}


class Output:
    """Writes deterministic files stamped with the version and config hash."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.dir = Path(cfg.out)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.written = []

    @property
    def header(self):
        return [f"nnmcoop {__version__} config_hash={self.cfg.config_hash()}"]

    def path(self, name):
        p = self.dir / name
        self.written.append(p)
        return p

    def table(self, name, columns, rows):
        if "csv" not in self.cfg.emit:
            return
        with open(self.path(name), "w", newline="") as fh:
            for line in self.header:
                fh.write(f"# {line}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for row in rows:
                w.writerow([_fmt(v) for v in row])

    def json(self, name, payload):
        if "json" not in self.cfg.emit:
            return
        doc = {"meta": {"version": __version__, "config_hash": self.cfg.config_hash()}, **payload}
        self.path(name).write_text(json.dumps(_plain(doc), sort_keys=True, indent=2) + "\n")


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def _plan(cfg: ExperimentConfig, replications=None, seed_offset=0) -> ReplicationPlan:
    return ReplicationPlan(replications or cfg.replications, cfg.lam, cfg.window, cfg.boundary,
                           SeedSpec(cfg.seed + seed_offset), cfg.threads)


def cmd_sample(cfg: ExperimentConfig):
    out = Output(cfg)
    for k in range(cfg.replications):
        sd = SeedSpec(cfg.seed, k)
        pat = sample_ppp(cfg.lam, cfg.window, sd)
        g = group(pat, cfg.boundary, cfg.k)
        p = out.path(f"pattern_{k:04d}.csv")
        pat.to_csv(p, out.header, {"version": __version__, "config_hash": cfg.config_hash()})
        out.written.append(Path(str(p) + ".json"))
        g.to_csv(out.path(f"grouping_{k:04d}.csv"), out.header)
    return out


def _curve_rows(curve, *extra):
    return zip(curve.radii, curve.values, curve.stderr, *extra)


def _stats_curves(cfg, out, plan, radii, which_list=("singles", "pairs", "reference-singles", "reference-pairs")):
    lam = cfg.lam
    analytic = {
        "pairs": lambda r: nn_cdf_pairs(r, lam),
        "reference-singles": lambda r: nn_cdf_reference(r, (1 - p_star()) * lam),
        "reference-pairs": lambda r: nn_cdf_reference(r, p_star() * lam),
    }
    res = {}
    for which in which_list:
        G = estimate_nn_function(plan, which, radii)
        F = estimate_empty_space(plan, which, radii, cfg.n_probes)
        J = j_function(G, F)
        tag = which.replace("-", "_")
        cols = ["r", "value", "stderr"]
        if which in analytic:
            out.table(f"G_{tag}.csv", cols + ["analytic"], _curve_rows(G, analytic[which](G.radii)))
        else:
            out.table(f"G_{tag}.csv", cols, _curve_rows(G))
        if which.startswith("reference"):
            out.table(f"F_{tag}.csv", cols + ["analytic"], _curve_rows(F, analytic[which](F.radii)))
        else:
            out.table(f"F_{tag}.csv", cols, _curve_rows(F))
        out.table(f"J_{tag}.csv", cols, _curve_rows(J))
        res[which] = (G, F, J)
    return res


def cmd_stats(cfg: ExperimentConfig):
    out = Output(cfg)
    plan = _plan(cfg)
    fr = estimate_class_fractions(plan)
    vs = estimate_voronoi_shares(plan, cfg.n_probes)
    _stats_curves(cfg, out, plan, cfg.radii())
    summary = {
        "class_fractions": fr.to_dict(),
        "analytic": {"p_star": p_star(), "density_singles": intensity_density(cfg.lam, "singles"),
                     "density_pairs": intensity_density(cfg.lam, "pairs")},
        "voronoi_shares": {"share_singles": vs.share_singles, "share_pairs": vs.share_pairs,
                           "stderr": vs.stderr, "n_probes": vs.n_probes},
    }
    if cfg.replications >= 100:
        for which in ("singles", "pairs"):
            ks = ks_poisson_count_test(plan, which, cfg.ks_boot)
            out.json(f"ks_{which}.json", {"statistic": ks.statistic, "p_value": ks.p_value, "n": ks.n})
    out.json("summary.json", summary)
    return out


def _interference_rows(cfg, beta):
    pl = cfg.pathloss.__class__(beta, cfg.power, 0.0)
    schemes = cfg.scheme_objects
    study = simulate_interference(cfg.lam, cfg.window, pl, cfg.R_grid, schemes, cfg.replications,
                                  cfg.master_seed, cfg.boundary, cfg.observers, cfg.r_max,
                                  cfg.fading, cfg.threads)
    quad = QuadratureSpec(rel_tol=1e-8)
    cols = ["beta", "R", "i1_mc", "i1_mc_stderr", "i1_quad", "i1_quad_plane"]
    for s in schemes:
        cols += [f"i2_{s}_mc", f"i2_{s}_mc_stderr", f"i2_{s}_quad", f"i2_{s}_quad_plane"]
    rows = []
    for j, R in enumerate(study.R):
        plR = pl.with_R(R)
        row = [beta, R, study.i1_mean[j], study.i1_stderr[j],
               expected_interference_singles(cfg.lam, plR, quad, cfg.r_max),
               expected_interference_singles(cfg.lam, plR, quad)]
        for s in schemes:
            row += [study.i2_mean[s][j], study.i2_stderr[s][j],
                    expected_interference_pairs(cfg.lam, plR, s, quad, cfg.r_max, cfg.fading),
                    expected_interference_pairs(cfg.lam, plR, s, quad, math.inf, cfg.fading)]
        rows.append(row)
    return cols, rows


def cmd_interference(cfg: ExperimentConfig, betas=None):
    out = Output(cfg)
    betas = betas or (cfg.beta,)
    all_rows, cols = [], None
    for beta in betas:
        cols, rows = _interference_rows(cfg, beta)
        all_rows += rows
    out.table("interference.csv", cols, all_rows)
    out.json("interference.json", {"columns": cols, "rows": all_rows})
    return out


def cmd_laplace(cfg: ExperimentConfig):
    out = Output(cfg)
    spec = LaplaceSeriesSpec(s_grid=tuple(cfg.s_grid), n_max=cfg.n_max, eps=cfg.eps,
                             mc_samples_per_term=cfg.mc_samples, seed=SeedSpec(cfg.seed, 1))
    pl = cfg.pathloss
    scheme = cfg.scheme_objects[0]
    ser1 = laplace_transform_singles(cfg.lam, cfg.window, pl, spec, fading=cfg.fading)
    ser2 = laplace_transform_pairs(cfg.lam, cfg.window, pl, scheme, spec, fading=cfg.fading)
    i1, i2 = simulate_window_interference(cfg.lam, cfg.window, pl, scheme, cfg.lt_samples,
                                          SeedSpec(cfg.seed, 2), fading=cfg.fading)
    e1 = empirical_laplace(i1, cfg.s_grid)
    e2 = empirical_laplace(i2, cfg.s_grid)
    cols = ["s", "series", "series_stderr", "empirical", "empirical_stderr"]
    out.table("laplace_singles.csv", cols, np.column_stack([ser1.rows, e1[:, 1:]]))
    out.table(f"laplace_pairs_{scheme}.csv", cols, np.column_stack([ser2.rows, e2[:, 1:]]))
    if cfg.dump_samples:
        out.table(f"samples_{scheme}.csv", ["rep", "i1", "i2", "total"],
                  ((k, a, b, a + b) for k, (a, b) in enumerate(zip(i1, i2))))
    out.json("laplace_diagnostics.json", {
        "lambda_area": ser1.mu, "n_max": ser1.n_max, "poisson_tail": ser1.tail_bound, "eps": cfg.eps,
        "scheme": str(scheme), "mc_samples_per_term": cfg.mc_samples, "empirical_samples": cfg.lt_samples,
    })
    return out


def cmd_reproduce(cfg: ExperimentConfig, figure_id: str):
    if figure_id not in FIGURES:
        raise ConfigError(f"unknown figure id {figure_id!r}; valid ids: {', '.join(sorted(FIGURES))}")
    entry = FIGURES[figure_id]
    kind, preset = entry[0], dict(entry[1])
    betas = preset.pop("beta_list", None)
    if kind == "interference":
        preset = {**DEFAULTS["interference"], **preset}
    cfg = cfg.updated({k: v for k, v in preset.items()})
    if kind == "stats-areas":
        out = Output(cfg)
        pat = sample_ppp(cfg.lam, cfg.window, SeedSpec(cfg.seed, 0))
        g = group(pat, cfg.boundary)
        lab = g.labels()
        out.table("fig3_atoms.csv", ["index", "x", "y", "class"],
                  [(i, x, y, "S" if c == 0 else "P") for i, ((x, y), c) in enumerate(zip(pat.points, lab))])
        return out
    if kind == "curve":
        out = Output(cfg)
        fn, which = entry[2], entry[3]
        res = _stats_curves(cfg, _Null(), _plan(cfg), cfg.radii(), (which, f"reference-{which}"))
        G, F, J = res[which]
        Gr, Fr, Jr = res[f"reference-{which}"]
        lam_i = (p_star() if which == "pairs" else 1 - p_star()) * cfg.lam
        if fn == "J":
            out.table(f"{figure_id}_J_{which}.csv", ["r", "J", "stderr"], _curve_rows(J))
        else:
            cur, ref = (G, Gr) if fn == "G" else (F, Fr)
            extra = [ref.values, nn_cdf_reference(cur.radii, lam_i)]
            cols = ["r", fn, "stderr", f"{fn}_reference_mc", f"{fn}_reference_analytic"]
            if fn == "G" and which == "pairs":
                extra.append(nn_cdf_pairs(cur.radii, cfg.lam))
                cols.append("G_pairs_analytic")
            out.table(f"{figure_id}_{fn}_{which}.csv", cols, _curve_rows(cur, *extra))
        return out
    return cmd_interference(cfg, betas)


class _Null:
    """Output sink used when intermediate curves are not emitted."""

    def table(self, *args, **kwargs):
        pass


COMMANDS = {"sample": cmd_sample, "stats": cmd_stats, "interference": cmd_interference,
            "laplace": cmd_laplace}


def build_parser():
    p = argparse.ArgumentParser(prog="nnmcoop", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("sample", "stats", "interference", "laplace", "reproduce"):
        sp = sub.add_parser(name)
        if name == "reproduce":
            sp.add_argument("figure_id")
        sp.add_argument("--config", help="flat key = value configuration file")
        sp.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
        sp.add_argument("--threads", type=int, help="worker threads; results do not depend on it")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override any configuration key")
        sp.add_argument("-v", "--verbose", action="store_true")
    return p


def load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig().updated(DEFAULTS.get(args.command, {}))
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}") from exc
        cfg = cfg.updated(ExperimentConfig.parse_text(text))
    overrides = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        overrides[k.strip()] = v.strip()
    for key in ("seed", "threads", "out"):
        if getattr(args, key) is not None:
            overrides[key] = str(getattr(args, key))
    return cfg.updated(overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
        if args.command == "reproduce":
            out = cmd_reproduce(cfg, args.figure_id)
        else:
            out = COMMANDS[args.command](cfg)
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"I/O error: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return 1
    for p in out.written:
        log.info("wrote %s", p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
