"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The Monte Carlo criteria (6-8) run 13 simulations at n=7500, L=200 and are
cached in a session fixture; expect roughly ten minutes for the whole module.
Run with ``pytest tests/test_acceptance.py -v -s`` to see the criterion lines.
"""

import math
import time

import numpy as np
import pytest

import tailscore as ts
from tailscore.cli import main as cli_main
from tailscore.gpdfit import gpd_log_likelihood

N = 7500
P0 = 1 - 1 / 15000
SEEDS = (101, 202, 303)

MODELS = {
    "i_a": "gpd(10,1,-0.5)",
    "i_b": "gpd(10,1,0)",
    "i_c": "gpd(10,1,0.5)",
    "ii_a": "mix(0.5*unif(0,10) + 0.5*gpd(10,1,0.5))",
    "ii_b": "mix(0.99*unif(0,10) + 0.01*gpd(10,1,0.5))",
    "iii": "mix(0.5*gpd(10,1,0.1) + 0.5*gpd(10,1,0.5))",
    "iv": "gamma(1,1,0.1)",
}


def _report(cid, ok, detail):
    print(f"\nACCEPTANCE {cid}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"{cid}: {detail}"


@pytest.fixture(scope="module")
def sims():
    """All simulation runs needed by criteria 6-8, keyed (model, set, seed)."""
    runs = {}

    def run(model_key, pset, seed):
        cfg = ts.SimulationConfig(
            model=ts.parse_model(MODELS[model_key]),
            n=N,
            replicates=200,
            predictor_set=pset,
            master_seed=seed,
        )
        t0 = time.time()
        runs[(model_key, pset, seed)] = ts.run_simulation(cfg)
        print(f"  [sims] {model_key}/{pset}/seed={seed} in {time.time() - t0:.0f}s")

    for seed in SEEDS:
        run("i_c", "ab", seed)
        run("i_b", "ab", seed)
        run("ii_b", "ab", seed)
        run("ii_b", "zero-ab", seed)
    run("ii_a", "ab", SEEDS[0])
    return runs


def test_criterion_1_parameter_algebra():
    t0 = time.time()
    ok = True
    for alpha, k in ((1, 3), (2, 5), (4, 9), (8, 17)):
        plan = ts.derive_cv_params(N, P0, alpha, "scv1")
        ok &= plan.k == k and plan.p_c == P0 - alpha / N
    for alpha, k in ((1 / 4, 3), (1 / 8, 5), (1 / 16, 9), (1 / 32, 17)):
        plan = ts.derive_cv_params(N, P0, alpha, "scv2")
        ok &= plan.k == k and plan.p_c == P0 - alpha / N

    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(10, 100_000))
        p0 = rng.uniform(0.5, 1 - 1e-6)
        ee = n * (1 - p0)
        alpha = rng.uniform(1e-3, 3.0) * ee
        n_c = n / (1 + alpha / ee)
        n_valid = alpha * n / (ee + alpha)
        one_minus_pc = (1 - p0) + alpha / n
        worst = max(
            worst,
            abs(n_c * one_minus_pc - ee) / ee,
            abs(n_valid * one_minus_pc - alpha) / alpha,
        )
    ok &= worst <= 1e-12
    _report(
        1,
        ok,
        f"fold counts (3,5,9,17) exact for both methods; continuous identities "
        f"worst rel err {worst:.2e} (<=1e-12); {time.time() - t0:.2f}s",
    )


def test_criterion_2_score_identities():
    t0 = time.time()
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 60))
        xs = rng.normal(0, 50, n)
        p = rng.uniform(0.001, 0.999)
        pred = xs.max() + rng.uniform(0.01, 200)
        expected = (1 - p) * (pred - xs.mean())
        got = ts.average_score(pred, p, xs)
        worst = max(worst, abs(got - expected) / abs(expected))
    ok = worst <= 1e-12

    a = rng.normal(0, 100, 100_000)
    b = rng.normal(0, 100, 100_000)
    p = rng.uniform(1e-6, 1 - 1e-6, 100_000)
    losses = (a - b) * (p - (a < b))
    ok &= bool(np.all(losses >= 0.0)) and bool(np.all((losses == 0.0) == (a == b)))
    ok &= ts.check_loss(5.0, 5.0, 0.3) == 0.0
    _report(
        2,
        ok,
        f"degenerate identity worst rel err {worst:.2e} (<=1e-12) on 1000 cases; "
        f"check-loss nonnegative, zero iff coincident on 1e5 triples; {time.time() - t0:.2f}s",
    )


def test_criterion_3_distribution_correctness():
    t0 = time.time()
    ps = (0.01, 0.1, 0.5, 0.9, 0.99, 0.999, 1 - 1 / 15000)
    rng = np.random.default_rng(3)
    worst_rt = 0.0
    families = [
        lambda: ts.Gpd(rng.normal(0, 10), rng.uniform(0.1, 5), rng.uniform(-0.9, 2)),
        lambda: ts.Gev(rng.normal(0, 10), rng.uniform(0.1, 5), rng.uniform(-0.9, 2)),
        lambda: ts.Gamma(rng.uniform(0.1, 3), rng.uniform(0.1, 3), rng.uniform(0.05, 5)),
        lambda: ts.Uniform(0.0, rng.uniform(0.1, 20)),
    ]
    for make in families:
        for _ in range(25):
            m = ts.DataModel.of(make())
            for p in ps:
                worst_rt = max(worst_rt, abs(m.cdf(m.quantile(p)) - p))
    ok = worst_rt <= 1e-9

    n = 100_000
    worst_ks = 0.0
    band = 1.95 / math.sqrt(n)
    for key, text in MODELS.items():
        m = ts.parse_model(text)
        x = np.sort(m.sample(n, 2024))
        f = m.cdf(x)
        grid = np.arange(1, n + 1)
        d = max(np.max(grid / n - f), np.max(f - (grid - 1) / n))
        worst_ks = max(worst_ks, d)
    ok &= worst_ks < band
    _report(
        3,
        ok,
        f"roundtrip worst err {worst_rt:.2e} (<=1e-9); KS worst {worst_ks:.5f} "
        f"< {band:.5f} over models (i)-(iv) at n=1e5; {time.time() - t0:.1f}s",
    )


def test_criterion_4_mle_recovery():
    t0 = time.time()
    hits = 0
    worst_grad = 0.0
    for seed in range(20):
        x = ts.Gpd(0, 1, 0.5).quantile(np.random.default_rng(seed).random(10_000))
        fit = ts.fit_gpd_mle(x)
        if abs(fit.shape - 0.5) <= 0.1 and abs(fit.scale - 1.0) <= 0.1:
            hits += 1
        if fit.converged:
            ls = math.log(fit.scale)
            h1 = 1e-5 * max(1.0, abs(ls))
            h2 = 1e-5 * max(1.0, abs(fit.shape))
            g1 = (
                gpd_log_likelihood(math.exp(ls + h1), fit.shape, x, mean=True)
                - gpd_log_likelihood(math.exp(ls - h1), fit.shape, x, mean=True)
            ) / (2 * h1)
            g2 = (
                gpd_log_likelihood(fit.scale, fit.shape + h2, x, mean=True)
                - gpd_log_likelihood(fit.scale, fit.shape - h2, x, mean=True)
            ) / (2 * h2)
            worst_grad = max(worst_grad, math.hypot(g1, g2))
    ok = hits >= 19 and worst_grad <= 1e-3
    _report(
        4,
        ok,
        f"{hits}/20 fits inside (0.5+-0.1, 1+-0.1); worst gradient norm "
        f"{worst_grad:.2e} (<=1e-3); {time.time() - t0:.1f}s",
    )


def test_criterion_5_brute_force_equivalence():
    t0 = time.time()
    n = 40
    p0 = 1 - 1 / (2 * n)
    alpha = n * (1 - p0)
    y = ts.DataModel(((0.7, ts.Uniform(0, 10)), (0.3, ts.Gpd(10, 1, 0.5)))).sample(n, 77)
    specs = [ts.empirical_spec(), ts.PredictorSpec(kind="gpd_count", index=5, m=5)]
    seed = 13
    worst = 0.0
    for runner, train_is_fold in ((ts.scv1, True), (ts.scv2, False)):
        rep = runner(specs, p0, (alpha,), y, seed)
        plan = rep.plans[0]
        fa = ts.partition_folds(n, plan.k, ts.fold_seed(seed, 0))
        for s, spec in enumerate(specs):
            fold_scores = []
            for j in range(plan.k):
                mask = fa.fold_of == j
                train = y[mask] if train_is_fold else y[~mask]
                valid = y[~mask] if train_is_fold else y[mask]
                pred = ts.predict(spec, train, plan.p_c).value
                total = 0.0
                for x in valid:
                    total += (x - pred) * (plan.p_c - (x < pred))
                fold_scores.append(total / len(valid))
            hand = sum(fold_scores) / plan.k
            worst = max(worst, abs(rep.combined_scores[s] - hand))
    ok = worst <= 1e-12
    _report(
        5,
        ok,
        f"scv1/scv2 vs naive double loop, n=40, k=2: worst abs diff {worst:.2e} "
        f"(<=1e-12); {time.time() - t0:.2f}s",
    )


def test_criterion_6_rmse_orderings(sims):
    def rmse(model_key, seed, method, pset="ab"):
        return sims[(model_key, pset, seed)].rmse[method]

    seeds_6a = [s for s in SEEDS if rmse("i_c", s, "scv1") < rmse("i_c", s, "scv2") < rmse("i_c", s, "qs")]
    seeds_6b = [s for s in SEEDS if rmse("i_b", s, "scv1") < rmse("i_b", s, "qs")]
    seeds_6c1 = [s for s in SEEDS if rmse("ii_b", s, "scv2") < rmse("ii_b", s, "scv1")]
    seeds_6c2 = [s for s in SEEDS if rmse("ii_b", s, "qs") < rmse("ii_b", s, "scv1")]

    detail_a = {s: tuple(round(rmse("i_c", s, m), 1) for m in ("scv1", "scv2", "qs")) for s in SEEDS}
    ok_a = len(seeds_6a) >= 2
    ok_b = len(seeds_6b) >= 2
    ok_c = len(seeds_6c1) >= 2 and len(seeds_6c2) >= 2
    _report(
        "6a",
        ok_a,
        f"model (i):(c) scv1<scv2<qs in seeds {seeds_6a} (need >=2 of 3); "
        f"rmse(scv1,scv2,qs)={detail_a}",
    )
    _report("6b", ok_b, f"model (i):(b) scv1<qs in seeds {seeds_6b} (need >=2 of 3)")
    _report(
        "6c",
        ok_c,
        f"model (ii):(b) scv2<scv1 in {seeds_6c1}, qs<scv1 in {seeds_6c2} (each >=2 of 3)",
    )


def test_criterion_7_selection_frequencies(sims):
    res = sims[("ii_a", "ab", SEEDS[0])]
    L = res.config.replicates
    scv1_hist = res.selection_counts["scv1"]
    modal = max(scv1_hist, key=scv1_hist.get)
    qs_hist = res.selection_counts["qs"]
    qs_max_share = max(qs_hist.values()) / L
    ok = modal in (1, 2, 3) and qs_max_share <= 0.25
    _report(
        7,
        ok,
        f"model (ii):(a): scv1 modal predictor index {modal} (want 1-3); "
        f"qs max selection share {qs_max_share:.0%} (<=25%)",
    )


def test_criterion_8_baseline_ordering(sims):
    good = [
        s
        for s in SEEDS
        if sims[("ii_b", "zero-ab", s)].rmse["random"] > sims[("ii_b", "zero-ab", s)].rmse["median"]
    ]
    _report(8, len(good) >= 2, f"model (ii):(b) random > median baseline RMSE in seeds {good}")


def test_criterion_9_byte_identical_reruns(tmp_path_factory):
    t0 = time.time()
    args = [
        "simulate",
        "--model", MODELS["i_c"],
        "--n", str(N),
        "--replicates", "200",
        "--set", "ab",
        "--seed", str(SEEDS[0]),
    ]
    out_a = tmp_path_factory.mktemp("rerun_a")
    out_b = tmp_path_factory.mktemp("rerun_b")
    assert cli_main(args + ["--out", str(out_a)]) == 0
    assert cli_main(args + ["--out", str(out_b)]) == 0
    same = (out_a / "rmse_table.csv").read_bytes() == (out_b / "rmse_table.csv").read_bytes()
    _report(9, same, f"two CLI reruns of the (i):(c) benchmark byte-identical; {time.time() - t0:.0f}s")
