"""Acceptance suite: one test per release criterion, each at its pinned
tolerance. A summary line per criterion is printed at the end of the run
(see conftest).

Criterion 2 pins the large-mean plateau ratio at means 50 and 100 with a
1% band. The exact optimum sits 3.6% (mean 50) and 1.9% (mean
100) below the plateau ratio, approaching it like ~1.9/nbar, so the band is
first met near mean 190. The check is asserted as stated and is expected to
fail; the measured numbers are in its failure message.
"""

import math
import time

import numpy as np

from photondemon import (
    DemonParams,
    anticorrelated,
    make_thermal,
    outcome_reports,
    product_thermal,
    split_thermal,
    thermal_marginal_anticorrelated,
    tmss_diagonal,
)
from photondemon import closedform as cf
from photondemon.channel import OUTCOMES
from photondemon.merit import (
    FLIP_10,
    all_strategies,
    best_strategy,
    delta_n,
    demon_contribution,
)
from photondemon.optimize import (
    OptimizerConfig,
    optimize,
    optimize_product,
)

PLATEAU = cf.PLATEAU_RATIO


def thermal_pmfs(nbar_a, nbar_b, eps=1e-12):
    return make_thermal(nbar_a, eps / 2), make_thermal(nbar_b, eps / 2)


def test_criterion_1_uncorrelated_unit_mean(criterion):
    start = time.perf_counter()
    result = optimize_product(*thermal_pmfs(1.0, 1.0))
    elapsed = time.perf_counter() - start
    r, eta_a, eta_b = result.param_vector()
    eta_hi, eta_lo = max(eta_a, eta_b), min(eta_a, eta_b)
    detail = (
        f"value={result.value:.6f} (0.255±0.002), r={r:.4f} (0.344±0.01), "
        f"eta=({eta_hi:.4f}, {eta_lo:.4f}) (1, 0.427±0.01), {elapsed:.1f}s (<10s)"
    )
    passed = (
        abs(result.value - 0.255) <= 2e-3
        and abs(r - 0.344) <= 0.01
        and eta_hi >= 0.999
        and abs(eta_lo - 0.427) <= 0.01
        and elapsed < 10.0
    )
    criterion(1, "uncorrelated thermal pair at unit mean", passed, detail)


def test_criterion_2_plateau(criterion):
    start = time.perf_counter()
    checks = []
    for nbar in (50.0, 100.0):
        result = optimize_product(*thermal_pmfs(nbar, nbar))
        ratio = result.value / nbar
        r, eta_a, eta_b = result.param_vector()
        eta_lo = min(eta_a, eta_b)
        checks.append(
            (
                nbar,
                ratio,
                abs(ratio - PLATEAU) <= 0.01 * PLATEAU,
                r,
                abs(r - 2.0 / nbar) <= 0.1 * (2.0 / nbar),
                eta_lo,
                abs(eta_lo - 0.25) <= 0.1 * 0.25,
            )
        )
    elapsed = time.perf_counter() - start
    detail = "; ".join(
        f"nbar={n:g}: ratio={ratio:.6f} vs {PLATEAU:.6f} ({'ok' if rok else 'off'}), "
        f"r={r:.5f} vs {2.0 / n:.5f} ({'ok' if rrok else 'off'}), "
        f"eta_lo={e:.4f} vs 0.25 ({'ok' if eok else 'off'})"
        for n, ratio, rok, r, rrok, e, eok in checks
    ) + f"; {elapsed:.0f}s (<120s)"
    passed = elapsed < 120.0 and all(rok and rrok and eok for _, _, rok, _, rrok, _, eok in checks)
    criterion(2, "large-mean plateau at 16/27", passed, detail)


def test_criterion_3_different_temperatures(criterion):
    nbar_a, nbar_b = 100.0, 150.0
    result = optimize_product(*thermal_pmfs(nbar_a, nbar_b))
    contribution_term = PLATEAU * nbar_a**2 / nbar_b
    asymptotic_total = nbar_b - nbar_a + contribution_term
    measured_contribution = result.value - (1.0 - result.params.r) * (nbar_b - nbar_a)
    err = abs(measured_contribution - contribution_term)
    detail = (
        f"value={result.value:.4f} (asymptotic {asymptotic_total:.4f}); demon part "
        f"{measured_contribution:.4f} vs {contribution_term:.4f}, off by {err / contribution_term:.3%} (<=2%)"
    )
    criterion(3, "different temperatures vs asymptotic optimum", err <= 0.02 * contribution_term, detail)


def test_criterion_4_split_thermal_no_help(criterion):
    worst = 0.0
    for nbar_in, theta in ((2.0, math.pi / 4), (3.0, math.pi / 3)):
        state = split_thermal(nbar_in, theta)
        for r in np.linspace(0.0, 1.0, 10):
            for eta_a in np.linspace(0.0, 1.0, 10):
                for eta_b in np.linspace(0.0, 1.0, 10):
                    c = demon_contribution(state, DemonParams.common(r, eta_a, eta_b))
                    worst = max(worst, abs(c))
    detail = f"max |contribution| over 2x10^3 grid points = {worst:.2e} (<=1e-9)"
    criterion(4, "split thermal state gives the demon nothing", worst <= 1e-9, detail)


def test_criterion_5_number_correlated(criterion):
    unit = optimize(tmss_diagonal(1.0))
    r, eta_a, eta_b = unit.param_vector()
    eta_hi, eta_lo = max(eta_a, eta_b), min(eta_a, eta_b)
    large = optimize(tmss_diagonal(100.0))
    detail = (
        f"unit: value={unit.value:.6f} (0.272±0.002), r={r:.4f} (~0.373), "
        f"eta=({eta_lo:.4f}, {eta_hi:.4f}) (~0.415, 1); large: {large.value:.4f} in [0.65, 0.72]"
    )
    passed = (
        abs(unit.value - 0.272) <= 2e-3
        and abs(r - 0.373) <= 0.01
        and abs(eta_lo - 0.415) <= 0.01
        and eta_hi >= 0.999
        and 0.65 <= large.value <= 0.72
    )
    criterion(5, "number-correlated state", passed, detail)


def test_criterion_6_anticorrelated_thermal_marginals(criterion):
    result = optimize(thermal_marginal_anticorrelated(1.0))
    r_opt, dn_max = cf.anticorr_thermal_optimum()
    closed_at_root = cf.anticorr_thermal_delta_n(r_opt, 1.0)
    r, eta_a, eta_b = result.param_vector()
    eta_hi = max(eta_a, eta_b)
    detail = (
        f"value={result.value:.6f} (0.589±0.002), r={r:.5f} (0.379±0.003), eta_hi={eta_hi:.4f} (=1); "
        f"cubic roots r={r_opt:.9f}, value={dn_max:.9f}, cross-check off by {abs(closed_at_root - dn_max):.1e} (<=1e-9)"
    )
    passed = (
        abs(result.value - 0.589) <= 2e-3
        and abs(r - 0.379) <= 3e-3
        and eta_hi >= 0.999
        and abs(closed_at_root - dn_max) <= 1e-9
        and abs(result.value - dn_max) <= 2e-3
    )
    criterion(6, "anticorrelated state with thermal marginals", passed, detail)


def test_criterion_7_fixed_count_family(criterion):
    errs = {}
    for m in (2, 3, 5, 10, 50):
        result = optimize(anticorrelated([0.0] * m + [1.0]))
        expected, _ = cf.fixed_m_max(m)
        errs[m] = abs(result.value - expected)
    detail = ", ".join(f"m={m}: off by {e:.1e}" for m, e in errs.items()) + " (<=1e-6)"
    m2 = optimize(anticorrelated([0.0, 0.0, 1.0]))
    passed = all(e <= 1e-6 for e in errs.values()) and abs(m2.value - 0.5) <= 1e-6
    criterion(7, "fixed-count anticorrelated mixtures", passed, detail)


def test_criterion_8_backflow(criterion):
    nbar_a, nbar_b = 1e4, 0.95e4
    config = OptimizerConfig(
        seed=0, n_starts=6, grid_points=5, max_evals_per_start=2000, fixed_strategy=FLIP_10
    )
    result = optimize_product(*thermal_pmfs(nbar_a, nbar_b, eps=1e-6), config=config)
    baseline = (1.0 - result.params.r) * (nbar_b - nbar_a)
    detail = f"value={result.value:.2f} (>0) while demon-free baseline={baseline:.2f} (<0)"
    criterion(8, "backflow against an unfavorable bias", result.value > 0.0 > baseline, detail)


def test_criterion_9_oracle_equivalence(criterion):
    rng = np.random.default_rng(2024)
    tol = 1e-8
    worst = {}

    def compare(name, closed_reports, brute_reports):
        w = worst.get(name, 0.0)
        for c, b in zip(closed_reports, brute_reports):
            w = max(w, abs(c.prob - b.prob) / (1.0 + abs(b.prob)))
            if b.prob > 1e-12:
                w = max(w, abs(c.delta - b.delta) / (1.0 + abs(b.delta)))
        worst[name] = w

    st_unc = product_thermal(1.0, 2.0)
    st_split = split_thermal(3.0, math.pi / 3)
    split_means = st_split.marginal_means()
    st_tmss = tmss_diagonal(1.0)
    st_m = anticorrelated([0.0] * 10 + [1.0])
    st_ac = thermal_marginal_anticorrelated(1.0)
    for _ in range(20):
        params = DemonParams.common(*rng.uniform(0.02, 0.98, 3))
        compare("uncorrelated", cf.uncorrelated_reports(1.0, 2.0, params), outcome_reports(st_unc, params))
        compare("split", cf.split_reports(*split_means, params), outcome_reports(st_split, params))
        compare("tmss", cf.tmss_reports(1.0, params), outcome_reports(st_tmss, params))
        worst["fixed-m"] = max(
            worst.get("fixed-m", 0.0),
            abs(cf.fixed_m_delta_n(10, params) - delta_n(outcome_reports(st_m, params), FLIP_10)),
        )
        worst["anticorr-thermal"] = max(
            worst.get("anticorr-thermal", 0.0),
            abs(cf.anticorr_thermal_delta_n(params.r, params.eta_a)
                - delta_n(outcome_reports(st_ac, params), FLIP_10)),
        )
    detail = ", ".join(f"{k}: {v:.1e}" for k, v in worst.items()) + f" (<= {tol:g})"
    criterion(9, "closed forms agree with the lattice engine", max(worst.values()) <= tol, detail)


def test_criterion_10_photon_subtraction(criterion):
    from photondemon import photon_subtracted_mean
    from scipy.stats import poisson

    errs = []
    for nbar in (0.5, 1.0, 10.0):
        errs.append(abs(photon_subtracted_mean(make_thermal(nbar)) - 2.0 * nbar))
    fock = np.zeros(8)
    fock[5] = 1.0
    fock_err = abs(photon_subtracted_mean(fock) - 4.0)
    mu = 3.7
    poisson_err = abs(photon_subtracted_mean(poisson.pmf(np.arange(120), mu)) - mu)
    detail = (
        f"thermal errs {max(errs):.1e} (<=1e-6), single-count err {fock_err:.1e}, "
        f"poissonian err {poisson_err:.1e} (<=1e-9)"
    )
    passed = max(errs) <= 1e-6 and fock_err <= 1e-12 and poisson_err <= 1e-9
    criterion(10, "photon-subtraction mean identity", passed, detail)


def test_criterion_11_independent_reflectances(criterion):
    # The two corners (1, 0) and (0, 1) are the same optimum under the mode
    # exchange symmetry of the equal-mean state; the lexicographic tie-break
    # lands on the latter.
    result = optimize_product(*thermal_pmfs(1.0, 1.0), common_r=False)
    r_a, r_b = result.params.r_a, result.params.r_b
    r_hi, r_lo = max(r_a, r_b), min(r_a, r_b)
    detail = (
        f"reflectances=({r_a:.4f}, {r_b:.4f}): one >=0.99, other <=0.01 "
        f"(mirror-equivalent corners), value={result.value:.6f}"
    )
    criterion(11, "independent reflectances collapse to full bias", r_hi >= 0.99 and r_lo <= 0.01, detail)


def test_criterion_12_property_suite(criterion):
    rng = np.random.default_rng(99)
    states = {
        "uncorrelated": product_thermal(0.7, 1.3),
        "split": split_thermal(2.0, math.pi / 5),
        "tmss": tmss_diagonal(0.8),
        "noon": anticorrelated([0.0, 0.0, 0.0, 1.0]),
        "anticorr-thermal": thermal_marginal_anticorrelated(0.9),
    }
    failures = []
    for _ in range(25):
        params = DemonParams.common(*rng.uniform(0.0, 1.0, 3))
        for name, state in states.items():
            reports = outcome_reports(state, params)
            total = sum(rep.prob for rep in reports)
            if abs(total + state.tail_mass - 1.0) > 1e-10 + 1e-12:
                failures.append(f"{name}: completeness off by {abs(total + state.tail_mass - 1.0):.1e}")
            nbar_a, nbar_b = state.marginal_means()
            kept = sum(rep.prob * (rep.mean_a + rep.mean_b) for rep in reports)
            if abs(kept - (1.0 - params.r) * (nbar_a + nbar_b)) > 1e-9:
                failures.append(f"{name}: bookkeeping off")
            if name in ("noon", "anticorr-thermal"):
                if reports[OUTCOMES.index((1, 1))].prob != 0.0:
                    failures.append(f"{name}: double click has nonzero probability")
            _, best = best_strategy(reports)
            if best + 1e-12 < max(delta_n(reports, s) for s in all_strategies()):
                failures.append(f"{name}: strategy enumeration beats the pointwise rule")
    detail = "no violations in 125 randomized cases" if not failures else "; ".join(failures[:4])
    criterion(12, "probability, bookkeeping, and strategy properties", not failures, detail)
