"""Batch experiment runner.

Usage:
    cat0lab run <config.json> [--outdir DIR] [--allow-uncertified] [--threads N]
    cat0lab sweep <glob> [--outdir DIR] [--allow-uncertified] [--threads N]
    cat0lab oracle tree-drift --n N
    cat0lab oracle busemann-limit --model M --xi JSON --x JSON --z JSON --t T

Each run writes <outdir>/<experiment>-<seed>/report.json (and series.csv when
the experiment produces a series).  Reports embed the config echo and the
hypotheses audit; the timing block is the only non-reproducible field.
"""

from __future__ import annotations

import argparse
import csv
import glob as globmod
import json
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .errors import DistributionError, DomainError, UncertifiedError, UsageError
from .geometry import model_basepoint
from .isometry import (
    apply_boundary,
    axis_endpoints,
    north_south_constant,
    power,
)
from .boundary import (
    angle_at_infinity,
    boundary_metric,
    sample_boundary,
    tits_ball_is_trivial,
    tits_distance,
)
from .sampling import random_isometry, random_point
from .models import (
    Model,
    boundary_from_json,
    boundary_to_json,
    isometry_from_json,
    point_from_json,
    set_tolerance,
)
from .oracles import tree_drift_expected
from .stats import (
    BinScheme,
    convergence_profile,
    default_checkpoints,
    dirac_concentration,
    drift_estimate,
    hitting_measure,
    horofunction_gap,
    pi_convergence_check,
    rankone_audit,
    stationarity_defect,
    cocycle_residual,
    theil_sen,
    tracking_error,
)
from .walk import StepDistribution, sample_walk, validate_distribution

CONFIG_SCHEMA = "cat0lab/config/v1"
REPORT_SCHEMA = "cat0lab/report/v1"

EXPERIMENTS = (
    "drift", "converge", "hitting", "stationarity", "dirac", "gap", "cocycle",
    "track", "northsouth", "pi-convergence", "tits-table", "rankone-audit",
)
# experiments whose statements assume a certified admissible, non-elementary,
# rank-one-containing support
_GATED = {"drift", "converge", "hitting", "stationarity", "dirac", "gap", "track"}

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_UNCERTIFIED = 3


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str
    model: Model
    distribution: StepDistribution | None
    basepoint: object
    n: int
    m_samples: int
    seed: int
    checkpoints: list[int] | None
    params: dict
    tolerance: float | None
    raw: dict


def load_config(path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    try:
        schema = raw.get("schema")
        if schema is not None and schema != CONFIG_SCHEMA:
            raise ConfigError(f"unsupported config schema {schema!r}")
        experiment = raw["experiment"]
        if experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {experiment!r}; pick from {EXPERIMENTS}")
        model = Model(raw["model"])
        dist = None
        if "distribution" in raw:
            dist = StepDistribution.from_json(raw["distribution"])
            if dist.model is not model:
                raise ConfigError("distribution model does not match config model")
        base = point_from_json(raw["basepoint"]) if "basepoint" in raw else model_basepoint(model)
        n = int(raw.get("n", 1000))
        m = int(raw.get("m_samples", 100))
        if n < 0 or m < 1:
            raise ConfigError("n must be nonnegative and m_samples positive")
        seed = int(raw.get("seed", 0))
        checkpoints = [int(k) for k in raw["checkpoints"]] if "checkpoints" in raw else None
        params = dict(raw.get("params", {}))
        tol = raw.get("tolerance")
        return ExperimentConfig(experiment, model, dist, base, n, m, seed,
                                checkpoints, params, tol, raw)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError, DistributionError, UsageError) as exc:
        raise ConfigError(f"invalid config: {exc}") from exc


def _hypotheses_block(cfg: ExperimentConfig, depth: int = 4) -> dict:
    if cfg.distribution is None:
        return {"admissibility": None, "rankone_audit": None}
    adm = validate_distribution(cfg.distribution, depth)
    audit = rankone_audit(cfg.distribution)
    return {
        "admissibility": {
            "depth": adm.depth,
            "elements_reached": adm.elements_reached,
            "symmetric_closure_hit": adm.symmetric_closure_hit,
            "certified": adm.certified,
        },
        "rankone_audit": audit.to_json(),
    }


def _check_gate(cfg: ExperimentConfig, hypotheses: dict, allow: bool) -> None:
    if cfg.experiment not in _GATED or allow:
        return
    adm = hypotheses["admissibility"]
    audit = hypotheses["rankone_audit"]
    problems = []
    if adm is None:
        problems.append("no distribution given")
    else:
        if not adm["certified"]:
            problems.append("support not certified admissible")
        if audit["verdict"] != "certified-non-elementary":
            problems.append(f"rank-one audit verdict: {audit['verdict']}")
    if problems:
        raise UncertifiedError(
            "; ".join(problems) + " (rerun with --allow-uncertified to force)"
        )


def _series_rows(experiment: str, results: dict):
    if experiment == "drift":
        return ["sample", "terminal_over_n"], list(enumerate(results["per_sample_terminal"]))
    if experiment == "converge":
        rows = []
        for path in results["paths"]:
            for k, tail in zip(path["checkpoints"], path["cauchy_tail"]):
                rows.append((path["path"], k, tail))
        return ["path", "checkpoint", "cauchy_tail"], rows
    if experiment == "hitting":
        return ["bin", "mass"], list(enumerate(results["histogram"]["masses"]))
    if experiment == "stationarity":
        return ["bin", "mass"], list(enumerate(results["histogram"]["masses"]))
    if experiment == "dirac":
        rows = []
        for i, k in enumerate(results["checkpoints"]):
            cross = results["cross_spread"][i] if results["cross_spread"] else ""
            second = results["spread_second"][i] if results["spread_second"] else ""
            rows.append((k, results["spread"][i], second, cross))
        return ["checkpoint", "spread", "spread_second", "cross_spread"], rows
    if experiment == "gap":
        return ["step", "gap"], list(zip(results["steps"], results["gap_series"]))
    if experiment == "cocycle":
        return ["case", "residual"], list(enumerate(results["residuals"]))
    if experiment == "track":
        return ["step", "error"], list(zip(results["steps"], results["errors"]))
    if experiment == "northsouth":
        return ["power", "max_gap_to_attracting"], list(
            zip(results["powers"], results["max_gaps"])
        )
    if experiment == "pi-convergence":
        return ["index", "max_gap_to_limit"], list(enumerate(results["max_gaps"]))
    if experiment == "tits-table":
        return (["i", "j", "tits", "angle_at_basepoint"],
                [(r["i"], r["j"], r["tits"], r["angle"]) for r in results["table"]])
    return None, None


def _run_drift(cfg, allow, threads):
    xi = None
    if "horofunction_xi" in cfg.params:
        xi = boundary_from_json(cfg.params["horofunction_xi"])
    rep = drift_estimate(cfg.distribution, cfg.basepoint, cfg.n, cfg.m_samples,
                         cfg.seed, horofunction_xi=xi, allow_uncertified=True,
                         threads=threads)
    return rep.to_json()


def _run_converge(cfg, allow, threads):
    checkpoints = cfg.checkpoints or default_checkpoints(cfg.n)
    thin = math.gcd(*checkpoints) if len(checkpoints) > 1 else checkpoints[0]
    paths = []
    tails = []
    for i in range(cfg.m_samples):
        tr = sample_walk(cfg.distribution, cfg.basepoint, cfg.n, cfg.seed,
                         path_index=i, thin=thin)
        prof = convergence_profile(tr, [k for k in checkpoints if k in set(map(int, tr.steps))])
        paths.append({"path": i, "checkpoints": list(prof.checkpoints),
                      "cauchy_tail": list(prof.cauchy_tail)})
        tails.append(prof.cauchy_tail[0] if prof.cauchy_tail else float("nan"))
    return {"paths": paths, "first_tail_per_path": tails}


def _run_hitting(cfg, allow, threads):
    bins = _bins_from_params(cfg)
    hist = hitting_measure(cfg.distribution, cfg.basepoint, cfg.n, cfg.m_samples,
                           bins, cfg.seed, allow_uncertified=True, threads=threads)
    return {"histogram": hist.to_json()}


def _run_stationarity(cfg, allow, threads):
    bins = _bins_from_params(cfg)
    hist = hitting_measure(cfg.distribution, cfg.basepoint, cfg.n, cfg.m_samples,
                           bins, cfg.seed, allow_uncertified=True, threads=threads)
    refinement = int(cfg.params.get("refinement_samples", 32))
    defect = stationarity_defect(cfg.distribution, hist, refinement, seed=cfg.seed)
    return {"histogram": hist.to_json(), "defect": defect,
            "refinement_samples": refinement}


def _bins_from_params(cfg):
    res = int(cfg.params.get("bins", 0))
    return BinScheme.default(cfg.model, res)


def _run_dirac(cfg, allow, threads):
    if "atoms0" in cfg.params:
        atoms0 = [boundary_from_json(b) for b in cfg.params["atoms0"]]
    else:
        atoms0 = sample_boundary(cfg.model, int(cfg.params.get("atom_count", 10)),
                                 cfg.seed + 1)
    atoms1 = None
    if "atoms1" in cfg.params:
        atoms1 = [boundary_from_json(b) for b in cfg.params["atoms1"]]
    elif cfg.params.get("second_set", True):
        atoms1 = sample_boundary(cfg.model, int(cfg.params.get("atom_count", 10)),
                                 cfg.seed + 2)
    checkpoints = cfg.checkpoints or default_checkpoints(cfg.n, 10)
    rep = dirac_concentration(cfg.distribution, atoms0, cfg.n, cfg.seed,
                              checkpoints, atoms1=atoms1, basepoint=cfg.basepoint)
    return rep.to_json()


def _run_gap(cfg, allow, threads):
    if "xi" not in cfg.params:
        raise ConfigError("gap experiment needs params.xi (a boundary point)")
    xi = boundary_from_json(cfg.params["xi"])
    thin = int(cfg.params.get("thin", 1))
    tr = sample_walk(cfg.distribution, cfg.basepoint, cfg.n, cfg.seed, thin=thin)
    sup_gap, series = horofunction_gap(tr, xi)
    slope = theil_sen(tr.steps, series) if len(series) > 2 else 0.0
    return {"sup_gap": sup_gap, "steps": [int(k) for k in tr.steps],
            "gap_series": [float(v) for v in series], "theil_sen_slope": slope}


def _run_cocycle(cfg, allow, threads):
    import numpy as np

    count = int(cfg.params.get("count", 100))
    rng = np.random.default_rng(cfg.seed)
    residuals = []
    for _ in range(count):
        g1 = random_isometry(cfg.model, rng)
        g2 = random_isometry(cfg.model, rng)
        xi = sample_boundary(cfg.model, 1, rng)[0]
        x = random_point(cfg.model, rng)
        residuals.append(cocycle_residual(g1, g2, xi, x))
    return {"residuals": residuals, "max_residual": max(residuals)}


def _run_track(cfg, allow, threads):
    lam = cfg.params.get("lambda", "auto")
    if lam == "auto":
        rep = drift_estimate(cfg.distribution, cfg.basepoint, cfg.n,
                             min(cfg.m_samples, 50), cfg.seed + 1,
                             allow_uncertified=True, threads=threads)
        lam = rep.lambda_hat
    lam = float(lam)
    checkpoints = cfg.checkpoints or default_checkpoints(cfg.n, 10)
    thin = math.gcd(*checkpoints) if len(checkpoints) > 1 else checkpoints[0]
    tr = sample_walk(cfg.distribution, cfg.basepoint, cfg.n, cfg.seed, thin=thin)
    ks, errs = tracking_error(tr, lam)
    return {"lambda": lam, "steps": [int(k) for k in ks],
            "errors": [float(e) for e in errs]}


def _run_northsouth(cfg, allow, threads):
    if "g" not in cfg.params:
        raise ConfigError("northsouth experiment needs params.g (an isometry)")
    g = isometry_from_json(cfg.params["g"])
    eps_plus = float(cfg.params.get("eps_plus", 0.01))
    eps_minus = float(cfg.params.get("eps_minus", 0.1))
    samples = int(cfg.params.get("samples", 200))
    cap = int(cfg.params.get("cap", 10 ** 6))
    res = north_south_constant(g, eps_plus, eps_minus, samples, cfg.seed, cap=cap)
    res2 = north_south_constant(power(g, 2), eps_plus, eps_minus, samples,
                                cfg.seed, cap=cap)
    gm, gp = axis_endpoints(g)
    x = cfg.basepoint
    pts = [b for b in sample_boundary(cfg.model, 4 * samples, cfg.seed)
           if boundary_metric(x, b, gm) >= eps_minus][:samples]
    powers, max_gaps = [], []
    current = pts
    for k in range(1, res.k0 + 1):
        current = [apply_boundary(g, b) for b in current]
        powers.append(k)
        max_gaps.append(max(boundary_metric(x, b, gp) for b in current))
    return {"k0": res.k0, "attained": res.attained, "cap": res.cap,
            "samples": res.samples, "k0_squared_power": res2.k0,
            "powers": powers, "max_gaps": max_gaps}


def _run_pi_convergence(cfg, allow, threads):
    if "g" not in cfg.params:
        raise ConfigError("pi-convergence experiment needs params.g")
    g = isometry_from_json(cfg.params["g"])
    count = int(cfg.params.get("powers", 30))
    gs = [power(g, k) for k in range(1, count + 1)]
    u_eps = float(cfg.params.get("u_eps", 0.05))
    k_count = int(cfg.params.get("k_count", 50))
    exclusion = float(cfg.params.get("exclusion", 0.1))
    x = cfg.basepoint
    try:
        eta, _ = axis_endpoints(g)
    except DomainError:
        eta = None
    pool = sample_boundary(cfg.model, 8 * k_count, cfg.seed)
    if eta is not None:
        pool = [b for b in pool if boundary_metric(x, b, eta) >= exclusion]
    compact = pool[:k_count]
    res = pi_convergence_check(gs, x, compact, u_eps)
    gaps = [max(boundary_metric(x, apply_boundary(gg, b), res.xi) for b in compact)
            for gg in gs]
    return {"holds": res.holds, "n0": res.n0,
            "xi": boundary_to_json(res.xi), "eta": boundary_to_json(res.eta),
            "max_gaps": gaps}


def _run_tits_table(cfg, allow, threads):
    count = int(cfg.params.get("count", 8))
    pts = sample_boundary(cfg.model, count, cfg.seed)
    x = cfg.basepoint
    table = []
    for i in range(count):
        for j in range(i + 1, count):
            dt = tits_distance(pts[i], pts[j])
            ang = angle_at_infinity(x, pts[i], pts[j]).value
            table.append({"i": i, "j": j,
                          "xi": boundary_to_json(pts[i]),
                          "eta": boundary_to_json(pts[j]),
                          "tits": None if math.isinf(dt) else dt,
                          "tits_infinite": math.isinf(dt),
                          "angle": ang})
    return {"table": table,
            "pi_ball_trivial": tits_ball_is_trivial(pts[0])}


def _run_rankone_audit(cfg, allow, threads):
    if cfg.distribution is None:
        raise ConfigError("rankone-audit needs a distribution")
    return rankone_audit(cfg.distribution).to_json()


_RUNNERS = {
    "drift": _run_drift,
    "converge": _run_converge,
    "hitting": _run_hitting,
    "stationarity": _run_stationarity,
    "dirac": _run_dirac,
    "gap": _run_gap,
    "cocycle": _run_cocycle,
    "track": _run_track,
    "northsouth": _run_northsouth,
    "pi-convergence": _run_pi_convergence,
    "tits-table": _run_tits_table,
    "rankone-audit": _run_rankone_audit,
}


def run(cfg: ExperimentConfig, outdir, allow_uncertified: bool = False,
        threads: int = 1) -> Path:
    """Execute one experiment config and write its report directory."""
    if cfg.tolerance is not None:
        set_tolerance(cfg.tolerance)
    needs_dist = cfg.experiment not in ("cocycle", "tits-table", "northsouth",
                                        "pi-convergence")
    if needs_dist and cfg.distribution is None:
        raise ConfigError(f"experiment {cfg.experiment!r} needs a distribution")
    hypotheses = _hypotheses_block(cfg)
    _check_gate(cfg, hypotheses, allow_uncertified)
    t0 = time.perf_counter()
    results = _RUNNERS[cfg.experiment](cfg, allow_uncertified, threads)
    wall = time.perf_counter() - t0
    report = {
        "schema": REPORT_SCHEMA,
        "library_version": __version__,
        "config": cfg.raw,
        "hypotheses": hypotheses,
        "results": results,
        "timing": {"wall_clock_s": wall, "timestamp": time.time()},
    }
    target = Path(outdir) / f"{cfg.experiment}-{cfg.seed}"
    target.mkdir(parents=True, exist_ok=True)
    (target / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True))
    header, rows = _series_rows(cfg.experiment, results)
    if rows:
        with open(target / "series.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
    return target


def _oracle_main(args) -> int:
    if args.oracle == "tree-drift":
        value = tree_drift_expected(args.n)
        print(json.dumps({"oracle": "tree-drift", "n": args.n,
                          "expected_distance_over_n": value}))
        return EXIT_OK
    if args.oracle == "busemann-limit":
        from .boundary import horofunction, horofunction_limit_oracle

        xi = boundary_from_json(json.loads(args.xi))
        x = point_from_json(json.loads(args.x))
        z = point_from_json(json.loads(args.z))
        limit = horofunction_limit_oracle(xi, x, z, args.t)
        closed = horofunction(xi, x, z)
        print(json.dumps({"oracle": "busemann-limit", "t": args.t,
                          "limit_value": limit, "closed_form": closed,
                          "abs_difference": abs(limit - closed)}))
        return EXIT_OK
    raise ConfigError(f"unknown oracle {args.oracle!r}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cat0lab",
                                     description="CAT(0) model-space random walk laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--outdir", default="out")
    p_run.add_argument("--allow-uncertified", action="store_true")
    p_run.add_argument("--threads", type=int, default=1)

    p_sweep = sub.add_parser("sweep", help="run every config matching a glob")
    p_sweep.add_argument("pattern")
    p_sweep.add_argument("--outdir", default="out")
    p_sweep.add_argument("--allow-uncertified", action="store_true")
    p_sweep.add_argument("--threads", type=int, default=1)

    p_oracle = sub.add_parser("oracle", help="print independent oracle values")
    o_sub = p_oracle.add_subparsers(dest="oracle", required=True)
    o_drift = o_sub.add_parser("tree-drift")
    o_drift.add_argument("--n", type=int, default=2000)
    o_bus = o_sub.add_parser("busemann-limit")
    o_bus.add_argument("--model", required=False)
    o_bus.add_argument("--xi", required=True)
    o_bus.add_argument("--x", required=True)
    o_bus.add_argument("--z", required=True)
    o_bus.add_argument("--t", type=float, default=1e4)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "oracle":
            return _oracle_main(args)
        if args.command == "run":
            cfg = load_config(args.config)
            target = run(cfg, args.outdir, allow_uncertified=args.allow_uncertified,
                         threads=args.threads)
            print(f"wrote {target / 'report.json'}")
            return EXIT_OK
        if args.command == "sweep":
            paths = sorted(globmod.glob(args.pattern))
            if not paths:
                raise ConfigError(f"no configs match {args.pattern!r}")
            failures = 0
            for path in paths:
                try:
                    cfg = load_config(path)
                    target = run(cfg, args.outdir,
                                 allow_uncertified=args.allow_uncertified,
                                 threads=args.threads)
                    print(f"{path}: wrote {target / 'report.json'}")
                except (ConfigError, UncertifiedError, UsageError, DomainError) as exc:
                    failures += 1
                    print(f"{path}: FAILED ({exc})", file=sys.stderr)
            return EXIT_OK if failures == 0 else EXIT_FAILURE
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(json.dumps({"error": "config", "detail": str(exc)}), file=sys.stderr)
        return EXIT_CONFIG
    except UncertifiedError as exc:
        print(json.dumps({"error": "uncertified", "detail": str(exc)}), file=sys.stderr)
        return EXIT_UNCERTIFIED
    except (UsageError, DomainError, DistributionError) as exc:
        print(json.dumps({"error": "domain", "detail": str(exc)}), file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
