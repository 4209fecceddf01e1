"""Experiment harness and command line interface.

Subcommands: simulate, sweep, bounds, ode, figures, verify.  All outputs are
deterministic functions of the resolved configuration: replication i uses
seed base+i, rows are emitted in seed order, and the wall-time column stays
empty unless timing is explicitly requested.  CSV files get a sidecar
<out>.meta.json carrying the resolved config and artifact version.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from typing import Iterable, Optional

import numpy as np

from . import __version__
from . import bounds as bounds_mod
from .engine import import_edge_log, new_process, run
from .metrics import ALL_METRICS, compute_metrics
from .ode import DEFAULT_STEP, integrate_phases
from .strategies import PartitionCertificate, make_strategy, offline_circles

SCHEMA_VERSION = 1

RESULT_COLUMNS = (
    "seed", "n", "t", "strategy", "clique_order", "completion_round",
    "max_squares", "degeneracy", "colors", "caro_wei", "rare_pair_max",
    "failed_parts", "wall_ms",
)


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    n: int
    t: Optional[int] = None
    gamma: Optional[float] = None
    beta: Optional[float] = None
    omega: Optional[float] = None
    strategy: str = "alg1"
    params: dict = field(default_factory=dict)
    seed: int = 0
    reps: int = 1
    metrics: tuple = ("clique", "max_squares")
    out: Optional[str] = None
    workers: int = 1
    timing: bool = False
    fast: bool = True

    def __post_init__(self):
        given = [x for x in (self.t, self.gamma, self.beta, self.omega)
                 if x is not None]
        if len(given) != 1:
            raise ConfigError(
                "exactly one of t, gamma, beta, omega must be given"
            )
        if self.n < 1:
            raise ConfigError(f"n must be positive, got {self.n}")
        if self.reps < 1:
            raise ConfigError(f"reps must be positive, got {self.reps}")
        bad = set(self.metrics) - set(ALL_METRICS)
        if bad:
            raise ConfigError(f"unknown metrics {sorted(bad)}")
        self.metrics = tuple(self.metrics)

    def resolved_t(self) -> int:
        if self.t is not None:
            t = int(self.t)
        else:
            nlogn = self.n * math.log(self.n)
            if self.gamma is not None:
                t = int(round(self.gamma * nlogn))
            elif self.beta is not None:
                t = int(round(nlogn / self.beta))
            else:
                t = int(round(self.omega * nlogn))
        if t < 1:
            raise ConfigError(f"derived round count t={t} must be positive")
        return t

    def as_dict(self) -> dict:
        d = asdict(self)
        d["resolved_t"] = self.resolved_t()
        return d


def load_config(path: str, overrides: Optional[dict] = None) -> ExperimentConfig:
    """Read a JSON object or flat key=value file, then apply overrides."""
    with open(path) as fh:
        text = fh.read()
    raw: dict = {}
    if text.lstrip().startswith("{"):
        raw = json.loads(text)
    else:
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key.startswith("params."):
                raw.setdefault("params", {})[key[7:]] = _auto_type(value)
            elif key == "metrics":
                raw[key] = tuple(v for v in value.split(",") if v)
            else:
                raw[key] = _auto_type(value)
    if overrides:
        raw.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**raw)


def _auto_type(value: str):
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    if value in ("true", "false"):
        return value == "true"
    return value


def _resolve_strategy_params(cfg: ExperimentConfig, t: int) -> dict:
    """Fill in derivable parameters (partition k, obs2 k) before the run."""
    params = dict(cfg.params)
    if cfg.strategy in ("partition", "partition-first") and "k" not in params:
        params["k"] = int(bounds_mod.alpha_bounds(cfg.n, t).k)
    if cfg.strategy == "obs2" and "k" not in params:
        k = int(bounds_mod.very_large_t_bounds(cfg.n, t).k)
        k = min(k, cfg.n)
        if k % 2 == 0:
            k -= 1
        params["k"] = max(k, 1)
    return params


@dataclass
class ResultRow:
    seed: int
    n: int
    t: int
    strategy: str
    clique_order: Optional[int] = None
    completion_round: Optional[int] = None
    max_squares: Optional[int] = None
    degeneracy: Optional[int] = None
    colors: Optional[int] = None
    caro_wei: Optional[float] = None
    rare_pair_max: Optional[int] = None
    failed_parts: Optional[int] = None
    wall_ms: Optional[float] = None

    def values(self) -> list:
        return [getattr(self, c) for c in RESULT_COLUMNS]


def _simulate_one(cfg: ExperimentConfig, seed: int) -> tuple:
    """One replication; returns (ResultRow, state-conservation triple)."""
    t = cfg.resolved_t()
    t0 = time.perf_counter()
    certificate = None
    state = new_process(cfg.n, seed)
    if cfg.strategy == "offline":
        squares = state.draw_squares(t)
        counts = np.bincount(squares, minlength=cfg.n)
        circles = offline_circles(counts, t)
        state.bulk_apply(squares, circles)
    else:
        params = _resolve_strategy_params(cfg, t)
        strat = make_strategy(cfg.strategy, cfg.n, params)
        if cfg.fast and hasattr(strat, "decide_batch"):
            squares = state.draw_squares(t)
            circles = strat.decide_batch(squares, 1)
            state.bulk_apply(squares, circles)
            certificate = strat.report()
        else:
            certificate = run(state, strat, t).certificate
    clique = None
    if certificate is not None and getattr(certificate, "vertices", None):
        clique = certificate.vertices
    rep = compute_metrics(state, enable=cfg.metrics, clique=clique)
    row = ResultRow(seed=seed, n=cfg.n, t=t, strategy=cfg.strategy)
    if clique is not None and rep.clique_verified:
        row.clique_order = len(clique)
    row.completion_round = getattr(certificate, "completed_round", None)
    if isinstance(certificate, PartitionCertificate):
        row.failed_parts = certificate.failed_parts
        if certificate.first_complete is not None:
            row.completion_round = certificate.first_complete[0]
            row.clique_order = certificate.part_size
        elif not certificate.failed_parts and certificate.done_rounds:
            row.completion_round = max(certificate.done_rounds.values())
    row.max_squares = rep.max_squares
    row.degeneracy = rep.degeneracy
    row.colors = rep.num_colors
    row.caro_wei = rep.caro_wei
    if rep.rare_pairs is not None:
        row.rare_pair_max = rep.rare_pairs.max_landing
    if cfg.timing:
        row.wall_ms = (time.perf_counter() - t0) * 1e3
    state.check_conservation()
    return row


def _simulate_one_dict(args) -> ResultRow:
    cfg_dict, seed = args
    cfg_dict = dict(cfg_dict)
    cfg_dict.pop("resolved_t", None)
    cfg = ExperimentConfig(**cfg_dict)
    return _simulate_one(cfg, seed)


def simulate(cfg: ExperimentConfig) -> list:
    """Run reps replications with seeds base..base+reps-1, in seed order."""
    seeds = [cfg.seed + i for i in range(cfg.reps)]
    if cfg.strategy != "offline":
        # fail fast on bad strategy names or underivable parameters
        make_strategy(cfg.strategy, cfg.n,
                      _resolve_strategy_params(cfg, cfg.resolved_t()))
    if cfg.workers > 1:
        payload = cfg.as_dict()
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_simulate_one_dict,
                                 [(payload, s) for s in seeds]))
    else:
        rows = [_simulate_one(cfg, s) for s in seeds]
    rows.sort(key=lambda r: r.seed)
    return rows


# -- sweep ---------------------------------------------------------------------

def sweep(cfg: ExperimentConfig, vary: dict) -> list:
    """Cross-product of vary values; per grid point aggregate the rows."""
    if not vary or any(len(v) == 0 for v in vary.values()):
        raise ConfigError("sweep needs a nonempty parameter grid")
    names = list(vary)
    grids: list = [[]]
    for name in names:
        grids = [g + [v] for g in grids for v in vary[name]]
    out = []
    for point in grids:
        d = cfg.as_dict()
        d.pop("resolved_t", None)
        for name, value in zip(names, point):
            if name in ("ell", "k", "target_k"):
                d.setdefault("params", {})[name] = value
            else:
                d[name] = value
        rows = simulate(ExperimentConfig(**d))
        out.append(_aggregate(names, point, rows, d))
    return out


def _aggregate(names, point, rows, cfg_dict) -> dict:
    target_k = (cfg_dict.get("params") or {}).get("target_k")
    succ = []
    for r in rows:
        if target_k is not None:
            succ.append(1.0 if (r.clique_order or 0) >= target_k else 0.0)
        else:
            succ.append(1.0 if r.completion_round is not None else 0.0)
    orders = [r.clique_order for r in rows if r.clique_order is not None]
    maxsq = [r.max_squares for r in rows if r.max_squares is not None]
    agg = {name: value for name, value in zip(names, point)}
    agg.update(
        reps=len(rows),
        success_rate=sum(succ) / len(rows),
        clique_mean=(sum(orders) / len(orders)) if orders else None,
        clique_min=min(orders) if orders else None,
        clique_max=max(orders) if orders else None,
        max_squares_mean=(sum(maxsq) / len(maxsq)) if maxsq else None,
    )
    return agg


# -- figures ---------------------------------------------------------------------

FIGURE_COLUMNS = ("gamma", "xi", "k_lower_coeff", "k_upper_coeff", "ratio",
                  "chi_lower_coeff", "chi_upper_coeff")


def figures(gammas: Iterable[float]) -> list:
    """Clique and chromatic bound coefficients over a gamma grid."""
    return [bounds_mod.clique_coefficients(float(g)) for g in gammas]


# -- output helpers ----------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def rows_to_csv(rows, columns) -> str:
    lines = [",".join(columns)]
    for row in rows:
        vals = row.values() if hasattr(row, "values") and not isinstance(row, dict) \
            else [row[c] for c in columns]
        lines.append(",".join(_fmt(v) for v in vals))
    return "\n".join(lines) + "\n"


def write_output(text: str, out: Optional[str], meta: Optional[dict] = None):
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
        if meta is not None:
            with open(out + ".meta.json", "w", newline="\n") as fh:
                json.dump(meta, fh, indent=2, sort_keys=True)
                fh.write("\n")
    else:
        sys.stdout.write(text)


def _meta(config_dict: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "artifact_version": __version__,
        "config": config_dict,
    }


# -- command implementations ---------------------------------------------------------

def cmd_simulate(args) -> int:
    cfg = _config_from_args(args)
    rows = simulate(cfg)
    if args.json:
        payload = _meta(cfg.as_dict())
        payload["rows"] = [
            {c: v for c, v in zip(RESULT_COLUMNS, r.values())} for r in rows
        ]
        write_output(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                     cfg.out)
    else:
        write_output(rows_to_csv(rows, RESULT_COLUMNS), cfg.out,
                     meta=_meta(cfg.as_dict()))
    return 0


def cmd_sweep(args) -> int:
    cfg = _config_from_args(args)
    vary = {}
    for spec in args.vary or []:
        name, _, values = spec.partition("=")
        if not values:
            raise ConfigError(f"bad --vary spec {spec!r}; want name=v1,v2,...")
        vary[name] = [_auto_type(v) for v in values.split(",")]
    rows = sweep(cfg, vary)
    columns = list(vary) + ["reps", "success_rate", "clique_mean",
                            "clique_min", "clique_max", "max_squares_mean"]
    if args.json:
        payload = _meta(cfg.as_dict())
        payload["vary"] = vary
        payload["rows"] = rows
        write_output(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                     cfg.out)
    else:
        meta = _meta(cfg.as_dict())
        meta["vary"] = vary
        write_output(rows_to_csv(rows, columns), cfg.out, meta=meta)
    return 0


def cmd_bounds(args) -> int:
    n = args.n
    t = args.t
    gamma = args.gamma
    if t is None:
        if gamma is None:
            raise ConfigError("bounds needs --t or --gamma")
        t = int(round(gamma * n * math.log(n)))
    if gamma is None:
        gamma = t / (n * math.log(n))
    regime = args.regime
    if regime == "auto":
        regime = bounds_mod.regime_auto(n, t)
    if regime == "small":
        rb = bounds_mod.small_t_bounds(n, t)
    elif regime == "log":
        rb = bounds_mod.large_t_bounds(n, gamma)
    elif regime == "vlarge":
        rb = bounds_mod.very_large_t_bounds(n, t)
    else:
        raise ConfigError(f"unknown regime {regime!r}")
    d = rb.as_dict()
    if args.alpha:
        d.update({f"alpha_{k}" if not k.startswith("alpha") else k: v
                  for k, v in bounds_mod.alpha_bounds(n, t).as_dict().items()
                  if k in ("ell", "k", "alpha_upper", "alpha_lower")})
    if args.json:
        payload = _meta({"n": n, "t": t, "regime": regime})
        payload["bounds"] = d
        write_output(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                     args.out)
    else:
        text = "".join(f"{k}={_fmt(v)}\n" for k, v in d.items())
        write_output(text, args.out)
    return 0


def cmd_ode(args) -> int:
    sol = integrate_phases(args.lam, step=args.step)
    lines = [f"# boundaries: {','.join(_fmt(b) for b in sol.boundaries)}",
             f"# active_phase: {sol.active_phase}",
             f"# lower_bound_coeff: {_fmt(sol.lower_bound_coeff)}",
             "k,w"]
    for k in sorted(sol.w):
        lines.append(f"{k},{_fmt(sol.w[k])}")
    write_output("\n".join(lines) + "\n", args.out)
    return 0


def cmd_figures(args) -> int:
    grid = np.geomspace(args.gamma_min, args.gamma_max, args.points)
    rows = figures(grid)
    write_output(rows_to_csv(rows, FIGURE_COLUMNS), args.out,
                 meta=_meta({"gamma_min": args.gamma_min,
                             "gamma_max": args.gamma_max,
                             "points": args.points}))
    return 0


def cmd_verify(args) -> int:
    state = import_edge_log(args.edges, n=args.n)
    clique = None
    if args.clique:
        clique = [int(v) for v in args.clique.split(",")]
    rep = compute_metrics(
        state,
        enable=("clique", "max_squares", "degeneracy", "caro_wei",
                "rare_pairs")
        + (("exact",) if state.n <= args.exact_limit else ()),
        clique=clique,
        exact_limit=args.exact_limit,
    )
    payload = _meta({"edges": args.edges, "n": state.n, "clique": clique})
    payload["report"] = {
        "n": rep.n,
        "rounds": rep.rounds,
        "clique_vertices": rep.clique_vertices,
        "clique_verified": rep.clique_verified,
        "max_squares": rep.max_squares,
        "degeneracy": rep.degeneracy,
        "num_colors": rep.num_colors,
        "caro_wei": rep.caro_wei,
        "rare_pair_total": rep.rare_pairs.total,
        "rare_pair_max": rep.rare_pairs.max_landing,
        "exact_alpha": rep.exact_alpha,
        "exact_omega": rep.exact_omega,
    }
    write_output(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    return 0


# -- argument plumbing -----------------------------------------------------------------

def _config_from_args(args) -> ExperimentConfig:
    overrides = {
        "n": args.n, "t": args.t, "gamma": args.gamma, "beta": args.beta,
        "omega": args.omega, "strategy": args.strategy, "seed": args.seed,
        "reps": args.reps, "out": args.out, "workers": args.workers,
    }
    params = {}
    if args.ell is not None:
        params["ell"] = args.ell
    if args.k is not None:
        params["k"] = args.k
    if args.target_k is not None:
        params["target_k"] = args.target_k
    if args.config:
        if params:
            overrides["params"] = params
        if args.metrics:
            overrides["metrics"] = tuple(args.metrics.split(","))
        if args.timing:
            overrides["timing"] = True
        if args.no_fast:
            overrides["fast"] = False
        return load_config(args.config, overrides)
    kwargs = {k: v for k, v in overrides.items() if v is not None}
    if "n" not in kwargs:
        raise ConfigError("--n is required without --config")
    kwargs["params"] = params
    if args.metrics:
        kwargs["metrics"] = tuple(args.metrics.split(","))
    kwargs["timing"] = bool(args.timing)
    kwargs["fast"] = not args.no_fast
    return ExperimentConfig(**kwargs)


def _add_common(p) -> None:
    p.add_argument("--config", help="JSON or key=value config file")
    p.add_argument("--n", type=int)
    p.add_argument("--t", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--omega", type=float)
    p.add_argument("--strategy")
    p.add_argument("--ell", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--target-k", dest="target_k", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--reps", type=int)
    p.add_argument("--metrics", help="comma list from " + ",".join(ALL_METRICS))
    p.add_argument("--workers", type=int)
    p.add_argument("--timing", action="store_true",
                   help="fill the wall_ms column (breaks byte reproducibility)")
    p.add_argument("--no-fast", action="store_true",
                   help="force the sequential engine even for batched strategies")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--json", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="semirandom",
        description="semi-random graph process: simulation, bounds, figures",
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="seeded replications of one config")
    _add_common(p)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("sweep", help="grid of configs with aggregation")
    _add_common(p)
    p.add_argument("--vary", action="append",
                   help="name=v1,v2,... (repeatable)")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("bounds", help="bound constants for (n, t)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--regime", default="auto",
                   choices=("auto", "small", "log", "vlarge"))
    p.add_argument("--alpha", action="store_true",
                   help="include independence-number bounds")
    p.add_argument("--out")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_bounds)

    p = sub.add_parser("ode", help="min-degree fluid limit profile")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--step", type=float, default=DEFAULT_STEP)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_ode)

    p = sub.add_parser("figures", help="bound-coefficient curves over gamma")
    p.add_argument("--gamma-min", type=float, default=1e-4)
    p.add_argument("--gamma-max", type=float, default=1e2)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_figures)

    p = sub.add_parser("verify", help="metrics report over an edge-log file")
    p.add_argument("--edges", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--clique", help="comma-separated vertex list")
    p.add_argument("--exact-limit", dest="exact_limit", type=int, default=40,
                   help="largest n for the exact alpha/omega solvers")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
