"""Exit criteria: one test per criterion, each printing a single verdict line.

All Monte Carlo runs use the fixed master seed ``SEED``.
"""

import json
import math
import time

import numpy as np
import pytest

from augarch import asymptotics as asy
from augarch.cli import main
from augarch.conditions import check_power_moment, check_stationarity, check_transform_moment, moment_abs
from augarch.dependence import autocovariance, coupling_tail, l2_coupling_error
from augarch.model import Transform, make_builtin
from augarch.seeding import SeedSpec
from augarch.simulate import simulate_coupled, simulate_path
from augarch.stats import ks_critical, ks_statistic, normal_cdf

from test_stats import brute_ks, phi_series

pytestmark = pytest.mark.acceptance

SEED = 2024
IDENT = Transform("signed-power", 1.0)
ABS = Transform("power-abs", 1.0)
GARCH = {"omega": 0.1, "alpha": 0.1, "beta": 0.8}
GARCH_BE = {"omega": 0.1, "alpha": 0.05, "beta": 0.8}
KS_THRESHOLD = ks_critical(4000, 0.01) + asy.KS_SLACK


def seed(purpose: str) -> SeedSpec:
    return SeedSpec(SEED, 0, f"acceptance/{purpose}")


def verdict(capsys, label: str, ok: bool, detail: str):
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
    assert ok, detail


def _random_models(rng, count):
    innovations = [{"kind": "normal"}, {"kind": "student-t", "df": 6.0}, {"kind": "uniform"}, {"kind": "two-point"}]
    out = []
    for _ in range(count):
        fam = rng.choice(["garch", "igarch", "gjr", "power-garch", "egarch", "iid", "constant", "exp-c"])
        innov = innovations[rng.integers(len(innovations))]
        a, b = rng.uniform(0.02, 0.2), rng.uniform(0.5, 0.75)
        if fam == "garch":
            p = {"omega": rng.uniform(0.05, 0.5), "alpha": a, "beta": b}
        elif fam == "igarch":
            p = {"omega": rng.uniform(0.05, 0.5), "alpha": a}
        elif fam == "gjr":
            p = {"omega": rng.uniform(0.05, 0.5), "alpha": a, "alpha_neg": rng.uniform(0.0, 0.1), "beta": b}
        elif fam == "power-garch":
            p = {"omega": rng.uniform(0.05, 0.5), "alpha": a, "beta": b, "delta": rng.choice([0.5, 0.75, 1.0, 1.5])}
        elif fam == "egarch":
            p = {"omega": rng.uniform(-0.3, 0.1), "beta": rng.uniform(0.5, 0.95), "alpha": a, "gamma": rng.uniform(-0.1, 0.1)}
        elif fam == "iid":
            p = {}
        elif fam == "constant":
            p = {"c": rng.uniform(0.0, 0.9), "g": rng.uniform(0.1, 2.0), "delta": 1.0}
        else:
            p, innov = {"slope": 0.5, "shift": 1.0, "omega": 0.1}, {"kind": "student-t", "df": 5.0}
        out.append(make_builtin(str(fam), p, innov))
    return out


def test_c01_coupling_identity(capsys):
    start = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst, names = 0.0, []
    for i, model in enumerate(_random_models(rng, 20)):
        names.append(model.family)
        for m in (1, 5, 20):
            cp = simulate_coupled(model, 10_000, m, seed=SeedSpec(SEED, i, "acceptance/identity"))
            worst = max(worst, cp.identity_deviation())
    wall = time.perf_counter() - start
    ok = worst <= 1e-10 and wall < 10
    verdict(capsys, "C1 coupling identity", ok, f"max relative deviation {worst:.3g} over {len(names)} models, {wall:.1f}s")


def test_c02_l2_decay_polynomial_link(capsys):
    start = time.perf_counter()
    model = make_builtin("garch", GARCH)
    fit = l2_coupling_error(model, ABS, np.arange(1, 25), reps=100_000, seed=seed("l2-garch"))
    wall = time.perf_counter() - start
    target = math.sqrt(0.9)
    ok = fit.rate_band[0] <= target and fit.r_squared >= 0.95 and wall < 120
    verdict(
        capsys, "C2 L2 decay (garch)", ok,
        f"rate {fit.rate:.4f} band [{fit.rate_band[0]:.4f}, {fit.rate_band[1]:.4f}] vs {target:.4f}, "
        f"r2 {fit.r_squared:.4f}, {wall:.1f}s",
    )


def test_c03_l2_decay_exponential_link(capsys):
    start = time.perf_counter()
    model = make_builtin("egarch", {"omega": -0.1, "beta": 0.9, "alpha": 0.2, "gamma": -0.1})
    certified = [r.verdict for r in check_transform_moment(model, ABS, 2.0)] == ["holds"]
    # small m are dominated by the transient of the exponential link; the geometric regime starts later
    fit = l2_coupling_error(model, ABS, np.arange(30, 91, 5), reps=100_000, seed=seed("l2-egarch"))
    wall = time.perf_counter() - start
    ok = certified and fit.rate_band[0] <= 0.9 and wall < 120
    verdict(
        capsys, "C3 L2 decay (egarch)", ok,
        f"moment certified {certified}, rate {fit.rate:.4f} band [{fit.rate_band[0]:.4f}, {fit.rate_band[1]:.4f}] "
        f"vs 0.9, {wall:.1f}s",
    )


def test_c04_regime_discrimination(capsys):
    start = time.perf_counter()
    m_values = [1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64]
    exp_model = make_builtin("garch", GARCH)
    log_model = make_builtin("exp-c", {"slope": 0.5, "shift": 1.0, "omega": 0.1})
    a = coupling_tail(exp_model, m_values, reps=100_000, seed=seed("tails-exp"))
    b = coupling_tail(log_model, m_values, reps=100_000, seed=seed("tails-log"))
    wall = time.perf_counter() - start
    ok = a.regime == "exponential" and b.regime == "polynomial" and wall < 300
    verdict(
        capsys, "C4 regime discrimination", ok,
        f"garch {a.regime} (r2 exp {a.r2_exponential:.3f}, poly {a.r2_polynomial:.3f}); "
        f"exp-c {b.regime} (r2 exp {b.r2_exponential:.3f}, poly {b.r2_polynomial:.3f}, "
        f"nonzero tail counts {int(np.sum(b.lambda_counts > 0))}/{len(m_values)}), {wall:.1f}s",
    )


def test_c05_covariance_bound(capsys):
    start = time.perf_counter()
    model = make_builtin("garch", GARCH)
    table = autocovariance(model, ABS, max_lag=20, budget=10_000_000, seed=seed("acov"))
    fit = l2_coupling_error(model, ABS, np.arange(0, 20), reps=100_000, seed=seed("acov-l2"))
    worst = -math.inf
    for k in range(1, 21):
        bound = 4 * fit.norm2 * fit.errors[k - 1]
        bound_se = 4 * math.hypot(fit.norm2 * fit.stderr[k - 1], fit.norm2_se * fit.errors[k - 1])
        se = math.hypot(table.se[k], bound_se)
        worst = max(worst, (abs(table.gamma[k]) - bound) / se)
    wall = time.perf_counter() - start
    ok = worst <= 5 and wall < 120
    verdict(capsys, "C5 covariance bound", ok, f"max (|gamma(k)| - bound) / SE = {worst:.2f} (limit 5), {wall:.1f}s")


def test_c06_functional_clt(capsys, tmp_path):
    start = time.perf_counter()
    model = make_builtin("garch", GARCH)
    parts, ok = [], True
    for name, f in (("id", IDENT), ("|x|", ABS)):
        certified = [r.verdict for r in check_transform_moment(model, f, 2.0)] == ["holds"]
        cal = asy.calibrate(model, f, asy.CALIBRATION_SIZE, seed(f"clt-{name}"))
        m = asy.fclt_marginal_check(model, f, 4000, 4000, seed=seed(f"clt-{name}"), calibration=cal)
        s = asy.fclt_sup_check(model, f, 4000, 4000, seed=seed(f"clt-{name}"), calibration=cal)
        ok &= certified and m.statistic < KS_THRESHOLD and s.statistic < KS_THRESHOLD
        parts.append(f"f={name} KS {m.statistic:.4f} sup {s.statistic:.4f}")
    doc = {
        "model": {"family": "igarch", "params": {"omega": 0.1, "alpha": 0.1}},
        "transform": {"kind": "signed-power", "nu": 1.0},
        "experiment": {"kind": "clt"},
        "output": str(tmp_path / "igarch"),
    }
    cfg = tmp_path / "igarch.json"
    cfg.write_text(json.dumps(doc))
    code = main(["run", "--config", str(cfg)])
    wall = time.perf_counter() - start
    ok &= code == 2 and wall < 300
    verdict(capsys, "C6 functional CLT", ok, f"{'; '.join(parts)}; threshold {KS_THRESHOLD:.4f}; igarch exit {code}; {wall:.1f}s")


def test_c07_berry_esseen(capsys):
    start = time.perf_counter()
    model = make_builtin("garch", GARCH_BE)
    gate_ok = [r.verdict for r in check_transform_moment(model, ABS, 3.0)] == ["holds"]
    curve = asy.berry_esseen_curve(model, ABS, [500, 2000, 8000], 100_000, seed("berry"), calibration_size=100_000_000)
    skewed = make_builtin("iid", {}, {"kind": "centered-exponential"})
    base = asy.berry_esseen_curve(skewed, IDENT, [500, 2000, 8000], 1_000_000, seed("berry-iid"))
    wall = time.perf_counter() - start
    ok = (
        gate_ok and curve.strictly_decreasing and curve.normalized_trend <= 0
        and -0.65 <= base.slope <= -0.35 and wall < 900
    )
    verdict(
        capsys, "C7 Berry-Esseen envelope", ok,
        f"garch Delta {np.round(curve.delta, 5).tolist()} (band +-{curve.high[0] - curve.delta[0]:.4f}), "
        f"normalized rho {curve.normalized_trend:.2f}; iid slope {base.slope:.3f}; {wall:.1f}s",
    )


def test_c08_beta_n_consistency(capsys):
    start = time.perf_counter()
    model = make_builtin("garch", GARCH)
    chk = asy.beta_n_check(model, ABS, 2000, 10_000, seed=seed("beta"), n_grid=[100_000, 1_000_000])
    near = chk.curve.within_limit_band(5.0)[-2:]
    wall = time.perf_counter() - start
    ok = abs(chk.z) <= 5 and bool(np.all(near)) and wall < 180
    verdict(
        capsys, "C8 beta_n^2 consistency", ok,
        f"beta^2 {chk.beta_n2:.5f} vs MC {chk.mc_var:.5f} (z {chk.z:.2f}); "
        f"tau^2 {chk.curve.limit:.5f}, large-n within band {near.tolist()}; {wall:.1f}s",
    )


def test_c09_empirical_process(capsys):
    start = time.perf_counter()
    iid = make_builtin("iid", {})
    s = [0.1, 0.3, 0.5, 0.7, 0.9]
    k = asy.gamma_kernel(iid, s, budget=asy.CALIBRATION_SIZE, seed=seed("gamma-iid"), F=asy.exact_cdf(iid))
    target = np.minimum.outer(s, s) - np.outer(s, s)
    z_max = float(np.max(np.abs(k.gamma - target) / k.se))
    model = make_builtin("garch", GARCH)
    F = asy.estimate_cdf(model, asy.CDF_SIZE, seed("empproc"))
    g = asy.gamma_kernel(model, [0.5], seed=seed("empproc"), F=F)
    test = asy.empirical_clt_check(model, 0.5, 4000, 4000, Gamma=float(g.gamma[0, 0]), F=F, seed=seed("empproc"))
    path = simulate_path(model, 4000, seed=seed("empproc-path"))
    surf = asy.empirical_process_surface(path, F, [1.0], None)
    wall = time.perf_counter() - start
    ok = z_max <= 4 and test.statistic < KS_THRESHOLD and bool(np.all(surf.values == 0)) and wall < 600
    verdict(
        capsys, "C9 empirical process", ok,
        f"iid kernel max |dev|/SE {z_max:.2f}; garch KS {test.statistic:.4f} (threshold {KS_THRESHOLD:.4f}, "
        f"Gamma {g.gamma[0, 0]:.4f}, {test.label}); R(1, t) == 0: {bool(np.all(surf.values == 0))}; {wall:.1f}s",
    )


def test_c10_change_point_power(capsys):
    start = time.perf_counter()
    model = make_builtin("garch", GARCH)
    changed = make_builtin("garch", {**GARCH, "omega": 2 * GARCH["omega"]})
    r = asy.change_point_power(model, changed, 4000, 2000, seed("changepoint"))
    wall = time.perf_counter() - start
    ok = r.detected and wall < 600
    verdict(
        capsys, "C10 change-point power", ok,
        f"alternative median {r.alt_median:.3f} vs null 99% {r.null_q99:.3f} (power {r.power:.3f}); {wall:.1f}s",
    )


def test_c11_condition_checker(capsys):
    start = time.perf_counter()
    a, b = GARCH["alpha"], GARCH["beta"]
    model = make_builtin("garch", GARCH)
    zs = []
    for mu, exact in ((1.0, a + b), (2.0, b * b + 2 * a * b + 3 * a * a)):
        mc = moment_abs(model.c, mu, model.innovation, name="c", method="monte-carlo", budget=1_000_000, seed=seed(f"ec{mu}"))
        se = (mc.ci_high - mc.ci_low) / (2 * 1.959963984540054)
        zs.append(abs(mc.point - exact) / se)
    igarch = make_builtin("igarch", {"omega": 0.1, "alpha": 0.1})
    stat = check_stationarity(igarch).verdict
    eq10 = check_power_moment(igarch, 1.0).verdict
    rng = np.random.default_rng(SEED)
    ks_dev = 0.0
    for _ in range(100):
        x = rng.standard_normal(rng.integers(1, 200))
        ks_dev = max(ks_dev, abs(ks_statistic(x, normal_cdf) - brute_ks(x, normal_cdf)))
    phi_dev = max(abs(normal_cdf(x) - phi_series(x)) for x in np.linspace(-8, 8, 161))
    wall = time.perf_counter() - start
    ok = max(zs) <= 4 and stat == "holds" and eq10 == "fails" and ks_dev <= 1e-14 and phi_dev <= 1e-7 and wall < 120
    verdict(
        capsys, "C11 condition checker", ok,
        f"E c, E c^2 z-scores {zs[0]:.2f}, {zs[1]:.2f}; igarch EQ5 {stat}, EQ10(nu=1) {eq10}; "
        f"KS vs brute force {ks_dev:.1e}; Phi error {phi_dev:.1e}; {wall:.1f}s",
    )


def test_c12_determinism(capsys, tmp_path):
    start = time.perf_counter()
    runs = {
        "l2decay": ({"family": "garch", "params": GARCH}, {"kind": "l2decay"}),
        "tails": ({"family": "exp-c", "params": {"slope": 0.5, "shift": 1.0, "omega": 0.1}}, {"kind": "tails"}),
        "acov": ({"family": "garch", "params": GARCH}, {"kind": "acov", "budget": 1_000_000}),
        "changepoint": (
            {"family": "garch", "params": GARCH},
            {"kind": "changepoint", "n": 4000, "reps": 250, "changed_params": {"omega": 0.2}, "cdf_size": 100_000},
        ),
    }
    same, compared = True, 0
    for name, (model, exp) in runs.items():
        cfg = tmp_path / f"{name}.json"
        cfg.write_text(json.dumps({"model": model, "experiment": exp, "seed": SEED}))
        for w in (1, 3):
            assert main(["run", "--config", str(cfg), "--workers", str(w), "--out", str(tmp_path / f"{name}-{w}")]) == 0
        for f in sorted((tmp_path / f"{name}-1").glob("*.csv")):
            same &= f.read_bytes() == (tmp_path / f"{name}-3" / f.name).read_bytes()
            compared += 1
    wall = time.perf_counter() - start
    verdict(capsys, "C12 determinism", same and compared == len(runs), f"{compared} CSVs identical across 1 and 3 workers: {same}; {wall:.1f}s")
