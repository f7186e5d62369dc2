"""Acceptance suite: one test per shipping criterion, each at its stated
tolerance, with a PASS/FAIL line per criterion in the terminal summary.

All replication counts, seeds and tolerances are pinned here; nothing is
calibrated at run time.  Seeds were chosen once and are documented in the
project notes together with high-replication measurements of the underlying
quantities.
"""

import time

import numpy as np
import pytest

from conftest import (PI_X, PI_W, PI_Z1, WM1_LEVELS, WM2_LEVELS, Z1_LEVELS,
                      XT_LEVELS, WT_LEVELS, InjectedStream)
from sobolkit.bootstrap import BootstrapConfig, bootstrap_ci
from sobolkit.campaign import AutoPolicy, auto_policy_run
from sobolkit.designs import (JitterArray, Permutation, RlhdFamily,
                              SimulationBatch, latin_property_holds,
                              make_rlhd_pair)
from sobolkit.estimators import (oracle2, oracle2_value, triple_oracle1)
from sobolkit.experiments import boxplot_study, crossover_study, rmse_study
from sobolkit.models import analytic_indices, get_model
from sobolkit.rng import substream
from sobolkit.runner import ProblemSpec

RESULTS: list[tuple[str, bool, str]] = []


def check(name: str, ok: bool, detail: str = ""):
    RESULTS.append((name, bool(ok), detail))
    assert ok, f"{name}: {detail}"


# ---------------------------------------------------------------------------
# 1. golden worked example (< 1 s)
# ---------------------------------------------------------------------------

def test_golden_worked_example():
    start = time.monotonic()
    jitter = JitterArray.sample(8, 2, seed=7)
    fam = RlhdFamily.from_permutations(jitter, {
        "X": [Permutation(np.array(p)) for p in PI_X],
        "W": [Permutation(np.array(p)) for p in PI_W]})
    fam.make_z(1, stream=InjectedStream(PI_Z1))
    expected = {
        "X": PI_X, "W": PI_W,
        "W-1": WM1_LEVELS, "W-2": WM2_LEVELS,
        "Z1": Z1_LEVELS, "Xt": XT_LEVELS, "Wt": WT_LEVELS,
    }
    produced = {
        "X": fam.x, "W": fam.w,
        "W-1": fam.wmi(1), "W-2": fam.wmi(2),
        "Z1": fam.z(1), "Xt": fam.x_tilde(1), "Wt": fam.w_tilde(1),
    }
    ok = True
    for name, design in produced.items():
        levels_ok = design.levels.T.tolist() == [list(c) for c in expected[name]]
        # jitter labels: the value at each cell is (level - 0.5 + U[level])/N
        rebuilt = (design.levels - 0.5
                   + jitter.values[design.levels - 1, np.arange(2)]) / 8
        ok = ok and levels_ok and np.array_equal(rebuilt, design.points)
    elapsed = time.monotonic() - start
    check("golden-worked-example", ok and elapsed < 1.0,
          f"exact symbolic match of 7 matrices in {elapsed:.2f}s")


# ---------------------------------------------------------------------------
# 2. analytic regression (< 1 s); the g-Sobol total-order sub-case is an
#    expected failure: the printed 0.8210 equals 1 - 9*S1 (additive-model
#    shortcut), while the product-form value, confirmed by pick-freeze MC at
#    n = 2e6, is 0.2649.
# ---------------------------------------------------------------------------

def test_analytic_regression_printed_sets():
    idx_a = analytic_indices(get_model("mod-g-19-9-4"))
    idx_b = analytic_indices(get_model("mod-g-lin-eps0.10"))
    idx_c = analytic_indices(get_model("mod-g-10-10-4"))
    idx_d = analytic_indices(get_model("g-sobol-d10-a0"))
    ok = (
        np.round(idx_a.first_order, 4).tolist() == [0.0476, 0.1904, 0.7616]
        and np.round(idx_b.first_order[:3], 4).tolist() == [0.0474, 0.1896, 0.7585]
        and np.all(np.round(idx_b.first_order[3:], 5) == 5.9e-4)
        and np.round(idx_c.first_order[:3], 4).tolist() == [0.1456, 0.1456, 0.7046]
        and np.all(np.round(idx_c.first_order[3:], 5) == 5.4e-4)
        and np.all(np.round(idx_d.first_order, 5) == 0.01989)
    )
    check("analytic-regression (first-order sets)", ok,
          "all printed first-order value sets reproduced at printed precision")


@pytest.mark.xfail(strict=True,
                   reason="printed total-order reference 0.8210 equals the "
                          "additive shortcut 1 - 9*S1; the product-form value "
                          "(0.2649) is confirmed by independent MC")
def test_analytic_regression_g_sobol_total_printed():
    idx = analytic_indices(get_model("g-sobol-d10-a0"))
    ok = np.all(np.round(idx.total_order, 4) == 0.8210)
    check("analytic-regression (g-Sobol total = 0.8210)", ok,
          f"computed product-form value {idx.total_order[0]:.4f}")


# ---------------------------------------------------------------------------
# 3. estimator convergence (< 30 s)
# ---------------------------------------------------------------------------

def test_estimator_convergence_mod_g():
    start = time.monotonic()
    model = get_model("mod-g-19-9-4")
    truth = analytic_indices(model).first_order
    worst = 0.0
    for seed in range(10):
        fam = make_rlhd_pair(10000, 3, seed=seed)
        bat = {n: SimulationBatch(d.id, model(d.points))
               for n, d in fam.members.items()}
        for i in (1, 2, 3):
            z = fam.make_z(i)
            bat[f"Z{i}"] = SimulationBatch(z.id, model(z.points))
        for i in (1, 2, 3):
            wmi = fam.outputs_for(fam.wmi(i), bat)
            worst = max(worst,
                        abs(oracle2(bat["X"], wmi).value - truth[i - 1]),
                        abs(triple_oracle1(fam, i, bat).value - truth[i - 1]))
    elapsed = time.monotonic() - start
    check("estimator-convergence", worst < 0.02 and elapsed < 30.0,
          f"worst |error| {worst:.4f} over 10 seeds x 3 indices x 2 estimators "
          f"in {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 4. RMSE-ordering battery at desk scale (< 5 min)
# ---------------------------------------------------------------------------

def test_rmse_family_ordering():
    start = time.monotonic()
    grid = (600, 1200, 2400)
    table = rmse_study("mod-g-19-9-4",
                       ("oracle2", "oracle1", "oracle1_triple", "oracle2_triple"),
                       grid, n_reps=200, seed=5)
    r = {(row["kind"], row["input"], row["n_runs"]): row["rmse"]
         for row in table.rows}
    ok = all(r[("oracle1_triple", 1, g)] < r[("oracle2", 1, g)] for g in grid)
    ok = ok and all(r[("oracle2_triple", 3, g)] < r[("oracle1", 3, g)] for g in grid)
    ok = ok and all(r[("oracle1_triple", 2, g)] <= r[("oracle1", 2, g)] for g in grid)
    elapsed = time.monotonic() - start
    check("rmse-ordering", ok and elapsed < 300.0,
          f"triple-O1 beats O2 on S1, triple-O2 beats O1 on S3, "
          f"triple-O1 <= O1 on S2, every grid point; {elapsed:.0f}s")


# ---------------------------------------------------------------------------
# 5. flagged-fraction battery (< 10 min)
# ---------------------------------------------------------------------------

def test_flagged_fraction_one_shot_and_adaptive():
    start = time.monotonic()
    one = boxplot_study("mod-g-lin-eps0.10", "one_shot", n=200, n_reps=1000,
                        seed=3)
    ada = boxplot_study("mod-g-lin-eps0.10", "adaptive", n=200, n_reps=1000,
                        steps=9, seed=3)
    elapsed = time.monotonic() - start
    ok = 0.35 <= one.flagged_fraction <= 0.45 and ada.flagged_fraction < 0.01
    check("flagged-fraction", ok and elapsed < 600.0,
          f"one-shot {one.flagged_fraction:.3f} in [0.35, 0.45]; "
          f"adaptive {ada.flagged_fraction:.4f} < 0.01; {elapsed:.0f}s")


# ---------------------------------------------------------------------------
# 6. budget law (< 1 min)
# ---------------------------------------------------------------------------

def test_budget_law():
    start = time.monotonic()
    ok = True
    for n, steps, model in ((200, 9, "mod-g-lin-eps0.10"),
                            (60, 4, "g-sobol-d10-a0"),
                            (40, 1, "mod-g-19-9-4")):
        state = auto_policy_run(ProblemSpec.for_builtin(model, n, 71),
                                AutoPolicy(max_steps=steps), bootstrap=None)
        ok = ok and state.step_count == steps
        ok = ok and state.ledger.total == n * (steps + 2)
        if n == 200:
            ok = ok and state.ledger.total == 2200
    elapsed = time.monotonic() - start
    check("budget-law", ok and elapsed < 60.0,
          f"ledger total = N(m+2) exactly for all tested (N, m); "
          f"N=200, m=9 gives 2200; {elapsed:.0f}s")


# ---------------------------------------------------------------------------
# 7. variance crossover (< 5 min)
# ---------------------------------------------------------------------------

def test_variance_crossover():
    start = time.monotonic()
    table = crossover_study((0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75,
                             0.85, 0.95), n=500, n_reps=2000, seed=9)
    rows = {r["target"]: r for r in table.rows}
    cross = table.config["crossover"]
    ok = (rows[0.05]["var_oracle1"] < rows[0.05]["var_oracle2"]
          and rows[0.95]["var_oracle2"] < rows[0.95]["var_oracle1"]
          and cross is not None and 0.4 <= cross <= 0.6)
    elapsed = time.monotonic() - start
    check("variance-crossover", ok and elapsed < 300.0,
          f"crossover at {cross:.3f} in [0.4, 0.6]; orderings hold at "
          f"0.05 and 0.95; {elapsed:.0f}s")


# ---------------------------------------------------------------------------
# 8. reordering-trick exactness (< 1 min)
# ---------------------------------------------------------------------------

def test_reordering_trick_exactness():
    start = time.monotonic()
    model = get_model("mod-g-19-9-4")
    ok = True
    for rep in range(100):
        seed = int(substream(88, "acc-reorder", rep).integers(0, 2**62))
        stream = substream(seed, "shape")
        n = int(stream.integers(8, 64))
        fam = make_rlhd_pair(n, 3, seed)
        i = int(stream.integers(1, 4))
        bat = {name: SimulationBatch(d.id, model(d.points))
               for name, d in fam.members.items()}
        view = fam.wmi(i)
        reordered = fam.outputs_for(view, bat)
        explicit = SimulationBatch(view.id, model(view.points))
        ok = ok and np.array_equal(reordered.outputs, explicit.outputs)
        ok = ok and (oracle2_value(bat["X"].outputs, reordered.outputs)
                     == oracle2_value(bat["X"].outputs, explicit.outputs))
        ok = ok and sorted(reordered.outputs) == sorted(bat["W"].outputs.tolist())
        ok = ok and latin_property_holds(fam.x) and latin_property_holds(fam.w)
    elapsed = time.monotonic() - start
    check("reordering-exactness", ok and elapsed < 60.0,
          f"100 random families: bit-exact estimates, conserved multisets, "
          f"Latin columns; {elapsed:.0f}s")


# ---------------------------------------------------------------------------
# 9. bootstrap coverage (< 10 min)
# ---------------------------------------------------------------------------

def test_bootstrap_coverage():
    start = time.monotonic()
    model = get_model("mod-g-19-9-4")
    truth = analytic_indices(model).first_order[0]
    hits = 0
    n_outer = 500
    for rep in range(n_outer):
        seed = int(substream(404, "coverage", rep).integers(0, 2**62))
        fam = make_rlhd_pair(200, 3, seed)
        bx = model(fam.x.points)
        bw = model(fam.w.points)
        bwmi = bw[fam.wmi(1).row_perm.map - 1]
        cfg = BootstrapConfig(replicates=1000, level=0.95, seed=seed,
                              labels=("cov",))
        lo, hi = bootstrap_ci(lambda a: oracle2_value(a[0], a[1]), [bx, bwmi], cfg)
        hits += lo <= truth <= hi
    coverage = hits / n_outer
    elapsed = time.monotonic() - start
    check("bootstrap-coverage", 0.91 <= coverage <= 0.99 and elapsed < 600.0,
          f"95% intervals cover the true 0.0476 in {coverage:.1%} of 500 "
          f"replications; {elapsed:.0f}s")


# ---------------------------------------------------------------------------
# 10. one-shot vs adaptive parity (< 10 min)
# ---------------------------------------------------------------------------

def test_one_shot_vs_adaptive_parity():
    start = time.monotonic()
    truth = analytic_indices(get_model("g-sobol-d10-a0")).first_order
    one = boxplot_study("g-sobol-d10-a0", "one_shot", n=600, n_reps=200, seed=5)
    ada = boxplot_study("g-sobol-d10-a0", "adaptive", n=200, n_reps=200,
                        steps=4, seed=5)
    rmse_one = np.sqrt(((one.samples - truth) ** 2).mean(axis=0))
    rmse_ada = np.sqrt(((ada.samples - truth) ** 2).mean(axis=0))
    ratio = np.maximum(rmse_one / rmse_ada, rmse_ada / rmse_one)
    within = int((ratio <= 1.3).sum())
    elapsed = time.monotonic() - start
    check("strategy-parity", within >= 8 and elapsed < 600.0,
          f"{within}/10 per-index RMSE pairs within 30% "
          f"(one-shot mean {rmse_one.mean():.3f}, adaptive mean "
          f"{rmse_ada.mean():.3f}); {elapsed:.0f}s")
