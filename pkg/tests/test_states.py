import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from photondemon import (
    InfeasibleMarginalError,
    InvalidStateError,
    ThermalSpec,
    anticorrelated,
    make_thermal,
    marginal_means,
    product_thermal,
    split_thermal,
    thermal_marginal_anticorrelated,
    tmss_diagonal,
)
from photondemon.states import thermal_lambda


def thermal_pointwise(nbar, n):
    lam = thermal_lambda(nbar)
    return (1.0 - lam) * lam**n


class TestMakeThermal:
    def test_unit_mean_values_and_cutoff(self):
        pmf = make_thermal(1.0, 1e-12)
        assert pmf[0] == pytest.approx(0.5, abs=1e-15)
        assert pmf[1] == pytest.approx(0.25, abs=1e-15)
        assert pmf[2] == pytest.approx(0.125, abs=1e-15)
        assert pmf.cutoff == 39
        assert pmf.tail_mass == pytest.approx(0.5**40, rel=1e-12)

    @pytest.mark.parametrize("nbar", [0.1, 1.0, 7.3, 50.0])
    def test_vacuum_probability(self, nbar):
        pmf = make_thermal(nbar)
        assert pmf[0] == pytest.approx(1.0 / (1.0 + nbar), rel=1e-14)

    def test_mean_of_truncated_pmf(self):
        # Oracle: direct lattice sum against the closed-form mean; truncation
        # only ever loses mass from the top, measured at ~1.4e-9 for nbar=50.
        pmf = make_thermal(50.0)
        deficit = 50.0 - pmf.mean()
        assert 0.0 <= deficit < 1e-8

    def test_thermal_variance_identity(self):
        for nbar in (0.4, 1.0, 10.0):
            pmf = make_thermal(nbar)
            assert pmf.variance() == pytest.approx(nbar**2 + nbar, rel=1e-9)

    @pytest.mark.parametrize("bad", [0.0, -1.0, float("nan"), float("inf")])
    def test_rejects_bad_mean(self, bad):
        with pytest.raises(InvalidStateError):
            make_thermal(bad)

    def test_rejects_bad_eps(self):
        with pytest.raises(InvalidStateError):
            make_thermal(1.0, 0.0)

    def test_thermal_spec_lambda(self):
        spec = ThermalSpec(nbar=3.0)
        assert spec.lam == pytest.approx(0.75, abs=1e-15)
        assert make_thermal(spec)[0] == pytest.approx(0.25, rel=1e-14)


class TestProductThermal:
    def test_vacuum_entry(self):
        st_ = product_thermal(1.0, 1.0)
        assert st_.prob(0, 0) == pytest.approx(0.25, abs=1e-13)

    def test_marginal_means(self):
        st_ = product_thermal(1.0, 2.0)
        na, nb = marginal_means(st_)
        assert na == pytest.approx(1.0, abs=1e-9)
        assert nb == pytest.approx(2.0, abs=1e-9)

    def test_factorizes_pointwise(self):
        st_ = product_thermal(0.7, 1.9)
        rng = np.random.default_rng(0)
        for _ in range(100):
            n_a = int(rng.integers(0, 30))
            n_b = int(rng.integers(0, 30))
            expected = thermal_pointwise(0.7, n_a) * thermal_pointwise(1.9, n_b)
            assert st_.prob(n_a, n_b) == pytest.approx(expected, rel=1e-12)

    def test_refuses_huge_lattice(self):
        with pytest.raises(InvalidStateError, match="factorized"):
            product_thermal(100.0, 100.0, max_entries=10_000)


class TestSplitThermal:
    def test_balanced_unit_input(self):
        st_ = split_thermal(1.0, math.pi / 4)
        assert st_.prob(0, 0) == pytest.approx(0.5, rel=1e-12)
        assert st_.prob(1, 0) == pytest.approx(0.125, rel=1e-12)
        assert st_.prob(0, 1) == pytest.approx(0.125, rel=1e-12)

    def test_transparent_splitter(self):
        st_ = split_thermal(2.0, 0.0)
        assert np.all(st_.nb == 0)
        for n in range(5):
            assert st_.prob(n, 0) == pytest.approx(thermal_pointwise(2.0, n), rel=1e-12)

    def test_marginal_means_follow_angle(self):
        st_ = split_thermal(2.0, math.pi / 3)
        na, nb = st_.marginal_means()
        assert na == pytest.approx(0.5, abs=1e-9)
        assert nb == pytest.approx(1.5, abs=1e-9)

    def test_correlation(self):
        # <n_a n_b> doubles the product of means on this family.
        st_ = split_thermal(2.0, math.pi / 4)
        assert st_.correlation() == pytest.approx(2.0 * 1.0 * 1.0, abs=1e-8)

    @pytest.mark.parametrize("theta", [math.pi / 4, math.pi / 3, 0.2])
    def test_marginals_stay_thermal(self, theta):
        eps = 1e-12
        st_ = split_thermal(2.5, theta, eps)
        for mode, nbar in (("a", 2.5 * math.cos(theta) ** 2), ("b", 2.5 * math.sin(theta) ** 2)):
            pmf = st_.marginal_pmf(mode)
            lam = thermal_lambda(nbar)
            ns = np.arange(pmf.size)
            ref = (1 - lam) * lam**ns
            # points near the box corner lose cross-tail mass
            assert np.max(np.abs(pmf - ref)) < 10 * eps

    def test_rejects_bad_angle(self):
        with pytest.raises(InvalidStateError):
            split_thermal(1.0, -0.1)
        with pytest.raises(InvalidStateError):
            split_thermal(1.0, 2.0)


class TestTmss:
    def test_diagonal_values(self):
        st_ = tmss_diagonal(1.0)
        assert st_.prob(0, 0) == pytest.approx(0.5, rel=1e-13)
        assert st_.prob(1, 1) == pytest.approx(0.25, rel=1e-13)
        assert st_.prob(1, 0) == 0.0

    def test_marginals_thermal_and_equal(self):
        st_ = tmss_diagonal(2.0)
        na, nb = st_.marginal_means()
        assert na == pytest.approx(2.0, abs=1e-8)
        assert na == nb
        pmf = st_.marginal_pmf("a")
        lam = thermal_lambda(2.0)
        assert np.max(np.abs(pmf - (1 - lam) * lam ** np.arange(pmf.size))) < 1e-11

    def test_unit_mean_correlation(self):
        # diagonal support: <n_a n_b> = <n^2> = 2 nbar^2 + nbar = 3
        assert tmss_diagonal(1.0).correlation() == pytest.approx(3.0, abs=1e-8)


class TestAnticorrelated:
    def test_single_count_mixture(self):
        st_ = anticorrelated([0.0, 0.0, 1.0])
        assert st_.prob(2, 0) == 0.5
        assert st_.prob(0, 2) == 0.5
        assert st_.marginal_means() == (pytest.approx(1.0), pytest.approx(1.0))

    def test_axis_support_only(self):
        st_ = thermal_marginal_anticorrelated(0.8)
        assert np.all(st_.na * st_.nb == 0)

    def test_rejects_unnormalized(self):
        with pytest.raises(InvalidStateError):
            anticorrelated([0.5, 0.4])

    def test_thermal_marginal_weights_at_unit_mean(self):
        st_ = thermal_marginal_anticorrelated(1.0)
        assert st_.prob(0, 0) == 0.0
        for n in range(1, 6):
            assert st_.prob(n, 0) == pytest.approx(2.0**-n / 2.0, rel=1e-13)

    def test_thermal_marginal_vacuum_weight(self):
        st_ = thermal_marginal_anticorrelated(0.5)
        assert st_.prob(0, 0) == pytest.approx(1.0 / 3.0, rel=1e-13)

    def test_marginals_are_thermal(self):
        st_ = thermal_marginal_anticorrelated(0.9)
        lam = thermal_lambda(0.9)
        pmf = st_.marginal_pmf("b")
        assert np.max(np.abs(pmf - (1 - lam) * lam ** np.arange(pmf.size))) < 1e-11

    def test_rejects_super_unit_mean(self):
        with pytest.raises(InfeasibleMarginalError):
            thermal_marginal_anticorrelated(1.2)


@settings(max_examples=60, deadline=None)
@given(nbar=st.floats(min_value=0.01, max_value=30.0), exp=st.integers(min_value=7, max_value=12))
def test_normalization_invariant_thermal_families(nbar, exp):
    eps = 10.0**-exp
    for state in (
        product_thermal(nbar, 1.0, eps),
        split_thermal(nbar, 0.9, eps),
        tmss_diagonal(nbar, eps),
    ):
        assert abs(state.norm + state.tail_mass - 1.0) <= 1e-12
        assert state.tail_mass <= eps


@settings(max_examples=40, deadline=None)
@given(nbar=st.floats(min_value=0.01, max_value=1.0))
def test_normalization_invariant_anticorrelated(nbar):
    state = thermal_marginal_anticorrelated(nbar)
    assert abs(state.norm + state.tail_mass - 1.0) <= 1e-12
    assert state.tail_mass <= 1e-12


def test_marginal_means_examples():
    assert marginal_means(product_thermal(1.0, 1.0)) == (pytest.approx(1.0, abs=1e-9),) * 2
    assert marginal_means(tmss_diagonal(2.0)) == (pytest.approx(2.0, abs=1e-8),) * 2


def test_state_rows_are_sorted_triples():
    st_ = anticorrelated([0.2, 0.8])
    assert list(st_.rows()) == [(0, 0, 0.2), (0, 1, 0.4), (1, 0, 0.4)]
