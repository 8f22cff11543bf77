"""Command-line driver: ``augarch run --config PATH`` and ``augarch describe FAMILY``.

Exit status is 0 on success, 2 when a moment or stationarity gate refuses
the experiment and 1 on any other error.  Outputs of a failed run are
removed.
"""

from __future__ import annotations

import argparse
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from augarch import __version__
from augarch import asymptotics as asy
from augarch import conditions as cond
from augarch import dependence as dep
from augarch.config import ExperimentConfig, build_model, build_transform, load_config
from augarch.exceptions import AugGarchError, ModelError, PreconditionError
from augarch.io import sha256_file, write_csv, write_json
from augarch.model import describe_family
from augarch.seeding import SeedSpec, resolve_workers
from augarch.simulate import default_depth, simulate_coupled, simulate_path

__all__ = ["main", "run_experiment"]


# ---------------------------------------------------------------------------
# Experiments: each returns ({name: (header, rows)}, report)
# ---------------------------------------------------------------------------


def _simulate(model, f, e, seed, workers):
    path = simulate_path(model, e.n, e.depth, seed)
    rows = zip(range(1, e.n + 1), path.eps_obs, path.lambda_sigma2, path.sigma2, path.y)
    report = {"depth": path.depth, "overflow": path.overflow, "n": e.n}
    return {"path": (["k", "eps", "lambda_sigma2", "sigma2", "y"], list(rows))}, report


def _couple(model, f, e, seed, workers):
    rows, devs = [], {}
    for m in e.m:
        cp = simulate_coupled(model, e.n, m, e.depth, seed)
        prod, lag = cp.identity_terms()
        devs[str(m)] = cp.identity_deviation()
        rows += [(k + 1, m, cp.base.y[k], cp.y_m[k], cp.residual[k], prod[k] * lag[k]) for k in range(e.n)]
    header = ["k", "m", "y", "y_m", "residual", "identity"]
    return {"coupling": (header, rows)}, {"max_identity_deviation": devs, "depth": cp.base.depth}


def _conditions(model, f, e, seed, workers):
    reports = [cond.check_stationarity(model, budget=e.budget, seed=seed.master_seed)]
    reports.append(cond.check_lyapunov_bounds(model, budget=e.budget, seed=seed.master_seed))
    if model.link.kind == "polynomial":
        reports.append(cond.check_nonnegativity(model, budget=e.budget, seed=seed.master_seed))
        for nu in e.nu:
            r = cond.check_power_moment(model, nu, budget=e.budget, seed=seed.master_seed)
            r.condition = f"EQ10(nu={nu:g})"
            reports.append(r)
    else:
        for mu in e.mu:
            r = cond.check_exp_moment(model, mu, budget=e.budget, seed=seed.master_seed)
            r.condition = f"EQ11(mu={mu:g})"
            reports.append(r)
    for mu in e.mu:
        r = cond.check_lambda_moment(model, mu, budget=e.budget, seed=seed.master_seed)
        r.condition = f"{r.condition}(mu={mu:g})"
        reports.append(r)
        for name, r in cond.check_log_moments(model, mu, budget=e.budget, seed=seed.master_seed).items():
            r.condition = f"{name}(mu={mu:g})"
            reports.append(r)
    theta = model.innovation.lipschitz_order or 1.0
    reports.append(cond.check_sigma_inverse_moment(model, theta, seed=seed.master_seed))
    rows = [(r.condition, r.verdict, "" if r.parameter is None else r.parameter) for r in reports]
    report = {"verdicts": {r.condition: r.verdict for r in reports}, "reports": [r.to_dict() for r in reports]}
    return {"conditions": (["condition", "verdict", "parameter"], rows)}, report


def _l2decay(model, f, e, seed, workers):
    fit = dep.l2_coupling_error(model, f, e.m, e.reps, seed, e.depth, workers)
    se = fit.stderr if fit.stderr is not None else np.zeros(len(e.m))
    rows = list(zip(fit.m_values.astype(int), fit.errors, se, fit.used.astype(int)))
    return {"l2decay": (["m", "error", "se", "used"], rows)}, fit.to_dict()


def _tails(model, f, e, seed, workers):
    r = dep.coupling_tail(model, e.m, e.reps, seed, e.alpha, f, e.depth, workers)
    rows = list(zip(
        r.m_values, r.lambda_counts.astype(int), r.lambda_p, r.lambda_low, r.lambda_high,
        r.eta_counts.astype(int), r.eta_p, r.eta_low, r.eta_high, r.t_mean, r.t_var,
    ))
    header = ["m", "lambda_count", "lambda_p", "lambda_lo", "lambda_hi", "eta_count", "eta_p", "eta_lo", "eta_hi", "t_mean", "t_var"]
    return {"tails": (header, rows)}, r.to_dict()


def _acov(model, f, e, seed, workers):
    t = dep.autocovariance(model, f, e.max_lag, e.budget, seed, e.batches, e.depth)
    report = {"n": t.n, "mean": t.mean, "second_moment": t.second_moment}
    return {"acov": (["k", "gamma", "se"], t.rows())}, report


def _lrv(model, f, e, seed, workers):
    r = asy.long_run_variance(model, f, e.L, e.budget, seed, e.method, variant=e.variant)
    rows = list(zip(range(r.L + 1), r.gamma))
    return {"lrv": (["k", "gamma"], rows)}, r.to_dict()


def _clt(model, f, e, seed, workers):
    check = asy.fclt_marginal_check if e.kind == "clt" else asy.fclt_sup_check
    r = check(model, f, e.n, e.reps, seed=seed, workers=workers, level=e.level, slack=e.slack,
              variant=e.variant, calibration_size=e.calibration_size, depth=e.depth)
    return {}, r.to_dict()


def _berry(model, f, e, seed, workers):
    r = asy.berry_esseen_curve(model, f, e.n_grid, e.reps, seed, workers=workers,
                               calibration_size=e.calibration_size, depth=e.depth)
    return {"berry": (["n", "Delta_n", "lo", "hi"], r.rows())}, r.to_dict()


def _empproc(model, f, e, seed, workers):
    M = default_depth(model) if e.depth is None else e.depth
    F = asy.estimate_cdf(model, e.cdf_size, seed, M)
    path = simulate_path(model, e.n, M, seed.child("empproc"))
    surf = asy.empirical_process_surface(path, F, e.s_grid, e.t_grid)
    report = {"n": e.n, "cdf_size": e.cdf_size, "symmetrized": F.symmetrized}
    if e.reps > 0:
        test = asy.empirical_clt_check(model, e.s, e.n, e.reps, F=F, seed=seed, workers=workers, level=e.level,
                                       slack=e.slack, gamma_budget=e.budget, K=e.K, depth=M)
        report["empirical_clt"] = test.to_dict()
    return {"surface": (["s", "t", "R"], surf.rows())}, report


def _gamma(model, f, e, seed, workers):
    F = asy.exact_cdf(model) if e.exact_cdf else None
    k = asy.gamma_kernel(model, e.s_grid, e.K, e.budget, seed, F, depth=e.depth, cdf_size=e.cdf_size)
    rows = [(a, b, g, k.se[i, j]) for (i, a) in enumerate(k.s) for (j, b) in enumerate(k.s) for g in [k.gamma[i, j]]]
    return {"gamma": (["s", "s_prime", "gamma", "se"], rows)}, {"K": k.K, "n": k.n}


def _changepoint(model, f, e, seed, workers, block=None):
    changed = build_model(block, params=e.changed_params)
    r = asy.change_point_power(model, changed, e.n, e.reps, seed, e.s_grid, e.change_index,
                               workers=workers, cdf_size=e.cdf_size, depth=e.depth)
    rows = list(zip(range(1, e.reps + 1), r.null, r.alternative))
    return {"changepoint": (["rep", "null", "alternative"], rows)}, r.to_dict()


_RUNNERS = {
    "simulate": _simulate,
    "couple": _couple,
    "conditions": _conditions,
    "l2decay": _l2decay,
    "tails": _tails,
    "acov": _acov,
    "lrv": _lrv,
    "clt": _clt,
    "supclt": _clt,
    "berry": _berry,
    "empproc": _empproc,
    "gamma": _gamma,
    "changepoint": _changepoint,
}


def run_experiment(cfg: ExperimentConfig, workers: int | None = None):
    """Run the configured experiment and return ``(tables, report)``."""
    model = build_model(cfg.model)
    f = build_transform(cfg.transform)
    seed = SeedSpec(cfg.seed, 0, cfg.experiment.kind)
    runner = _RUNNERS[cfg.experiment.kind]
    if cfg.experiment.kind == "changepoint":
        return runner(model, f, cfg.experiment, seed, workers, block=cfg.model)
    return runner(model, f, cfg.experiment, seed, workers)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _versions() -> dict:
    import numba
    import pydantic

    return {
        "augarch": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
        "pydantic": pydantic.__version__,
    }


def _cmd_run(args) -> int:
    written: list[Path] = []
    try:
        cfg = load_config(args.config)
        updates = {}
        if args.seed is not None:
            updates["seed"] = args.seed
        if args.out is not None:
            updates["output"] = args.out
        if updates:
            cfg = type(cfg).model_validate({**cfg.effective(), **updates})
        workers = resolve_workers(args.workers)
        out = Path(cfg.output)
        out.mkdir(parents=True, exist_ok=True)
        echo = cfg.effective()
        written.append(write_json(out / "config.json", echo))
        start = time.perf_counter()
        tables, report = run_experiment(cfg, workers)
        wall = time.perf_counter() - start
        for name, (header, rows) in tables.items():
            written.append(write_csv(out / f"{name}.csv", header, rows))
        written.append(write_json(out / "report.json", {"experiment": cfg.experiment.kind, "result": report}))
        manifest = {
            "config": echo,
            "versions": _versions(),
            "wall_time_seconds": wall,
            "workers": workers,
            "checksums": {p.name: sha256_file(p) for p in written},
        }
        write_json(out / "manifest.json", manifest)
    except PreconditionError as exc:
        _cleanup(written)
        print(f"refused: {exc}", file=sys.stderr)
        for r in exc.reports:
            print(f"  {r.condition}: {r.verdict}", file=sys.stderr)
        return 2
    except (AugGarchError, ValueError, OSError) as exc:
        _cleanup(written)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {len(written) + 1} files to {out}")
    return 0


def _cleanup(paths):
    for p in paths:
        try:
            p.unlink()
        except OSError:
            pass


def _cmd_describe(args) -> int:
    try:
        print(describe_family(args.family))
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="augarch", description="Augmented GARCH(1,1) simulation and Monte Carlo checks")
    p.add_argument("--version", action="version", version=f"augarch {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the experiment described by a JSON config")
    r.add_argument("--config", required=True, help="path of the JSON config")
    r.add_argument("--seed", type=_u64, help="override the 64-bit master seed")
    r.add_argument("--workers", type=int, help="worker processes (default from AUGARCH_WORKERS or 1)")
    r.add_argument("--out", help="override the output directory")
    r.set_defaults(func=_cmd_run)
    d = sub.add_parser("describe", help="show the (c, g, Lambda) mapping of a family")
    d.add_argument("family")
    d.set_defaults(func=_cmd_describe)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
