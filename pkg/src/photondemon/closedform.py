"""Closed-form outcome statistics for each state family.

These expressions are transcriptions, not derivations: every function here is
validated numerically against the brute-force lattice engine in the test
suite, and they in turn guard the engine. Where a formula is a known
asymptotic approximation rather than an identity it is exposed as a reference
curve and never used as ground truth away from its regime.

Two incompatible shorthand conventions for the reduced reflectance are in
use across these expressions:

* mean-scaled: rt_x = nbar_x * R * eta_x  (uncorrelated and split tables)
* bare:        rt_x = eta_x * R           (number-correlated expressions)

They are kept as tagged values so that feeding one convention's numbers into
the other convention's formula raises instead of silently returning garbage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .channel import OUTCOMES, DemonParams, OutcomeReport
from .states import InvalidStateError, thermal_lambda

# Large-mean ceiling of the optimal figure of merit per unit mean for
# uncorrelated equal-temperature thermal modes.
PLATEAU_RATIO = 16.0 / 27.0


class RTildeConvention(Enum):
    MEAN_SCALED = "mean-scaled"
    BARE = "bare"


@dataclass(frozen=True)
class RTilde:
    """Reduced-reflectance pair tagged with the convention that produced it."""

    a: float
    b: float
    convention: RTildeConvention

    def __post_init__(self) -> None:
        if self.a < 0.0 or self.b < 0.0:
            raise InvalidStateError("reduced reflectances must be nonnegative")

    @classmethod
    def mean_scaled(cls, nbar_a: float, nbar_b: float, params: DemonParams) -> "RTilde":
        return cls(
            nbar_a * params.reflectance_a * params.eta_a,
            nbar_b * params.reflectance_b * params.eta_b,
            RTildeConvention.MEAN_SCALED,
        )

    @classmethod
    def bare(cls, params: DemonParams) -> "RTilde":
        return cls(
            params.reflectance_a * params.eta_a,
            params.reflectance_b * params.eta_b,
            RTildeConvention.BARE,
        )

    def require(self, convention: RTildeConvention) -> None:
        if self.convention is not convention:
            raise TypeError(
                f"formula expects {convention.value} reduced reflectances, "
                f"got {self.convention.value}"
            )


def _require_common(params: DemonParams) -> None:
    if not params.is_common:
        raise InvalidStateError("closed forms assume a common reflectance on both modes")


def click_prob_thermal(nbar: float, r: float, eta: float) -> float:
    """Probability that a counter clicks on a thermal mode of mean nbar."""
    lam = thermal_lambda(nbar)
    return r * eta * lam / (1.0 - lam + r * eta * lam)


def rtilde_from_click_prob(p_click: float) -> float:
    """Mean-scaled reduced reflectance from the click probability:
    rt = 1 / (1 - p) - 1."""
    return 1.0 / (1.0 - p_click) - 1.0


def _reports(probs: dict, deltas: dict) -> list[OutcomeReport]:
    # Conditional means individually are not fixed by these closed forms (only
    # their difference is); report the difference on mode b with mode a at 0.
    out = []
    for c in OUTCOMES:
        if probs[c] > 0.0:
            out.append(OutcomeReport(c, probs[c], 0.0, deltas[c]))
        else:
            out.append(OutcomeReport(c, 0.0, 0.0, 0.0, defined=False))
    return out


# --------------------------------------------------------------------------
# Uncorrelated thermal modes at (possibly) different temperatures
# --------------------------------------------------------------------------

def uncorrelated_scaled_rows(rt: RTilde, nbar_a: float, nbar_b: float) -> dict:
    """Per-outcome conditional differences, scaled by P_(0,0) * (1 - R)."""
    rt.require(RTildeConvention.MEAN_SCALED)
    # The three polynomial corrections entering the scaled rows; only the
    # second is sign-definite.
    d1 = rt.a * nbar_b - rt.b * nbar_a  # = R nbar_a nbar_b (eta_a - eta_b)
    d2 = rt.b * (nbar_b - nbar_a) + rt.a * nbar_b * (2.0 + rt.b)
    d3 = rt.a * (nbar_b - nbar_a) - rt.b * nbar_a * (2.0 + rt.a)
    return {
        (0, 0): nbar_b - nbar_a + d1,
        (0, 1): 2.0 * nbar_b - nbar_a + d2,
        (1, 0): nbar_b - 2.0 * nbar_a + d3,
        (1, 1): 2.0 * (nbar_b - nbar_a) + d2 + d3 - d1,
    }


def uncorrelated_reports(nbar_a: float, nbar_b: float, params: DemonParams) -> list[OutcomeReport]:
    """Closed-form outcome reports for independent thermal modes.

    Pattern probabilities are products of per-mode click probabilities; the
    conditional differences come from the scaled-row table.
    """
    _require_common(params)
    r = params.reflectance_a
    p_a = click_prob_thermal(nbar_a, r, params.eta_a)
    p_b = click_prob_thermal(nbar_b, params.reflectance_b, params.eta_b)
    probs = {
        (0, 0): (1.0 - p_a) * (1.0 - p_b),
        (0, 1): (1.0 - p_a) * p_b,
        (1, 0): p_a * (1.0 - p_b),
        (1, 1): p_a * p_b,
    }
    rows = uncorrelated_scaled_rows(RTilde.mean_scaled(nbar_a, nbar_b, params), nbar_a, nbar_b)
    scale = probs[(0, 0)] * (1.0 - r)
    deltas = {c: rows[c] * scale for c in OUTCOMES}
    return _reports(probs, deltas)


def uncorrelated_delta_n(nbar_a: float, nbar_b: float, params: DemonParams) -> float:
    """Figure of merit for independent thermal modes, flipping only (1, 0).

    Evaluates the expression in both its reduced-reflectance and its
    click-probability form and insists the two agree before returning.
    """
    _require_common(params)
    r = params.reflectance_a
    rt = RTilde.mean_scaled(nbar_a, nbar_b, params)
    form_rt = (1.0 - r) * (
        nbar_b
        - nbar_a
        + 2.0
        * rt.a
        * (nbar_a * (1.0 + rt.b) * (2.0 + rt.a) - nbar_b * (1.0 + rt.a))
        / ((1.0 + rt.a) ** 2 * (1.0 + rt.b) ** 2)
    )
    p_a = click_prob_thermal(nbar_a, r, params.eta_a)
    p_b = click_prob_thermal(nbar_b, r, params.eta_b)
    form_p = (1.0 - r) * (
        nbar_b
        - nbar_a
        + 2.0 * p_a * (1.0 - p_b) * (nbar_a * (2.0 - p_a) - nbar_b * (1.0 - p_b))
    )
    if abs(form_rt - form_p) > 1e-12 * max(1.0, abs(form_rt)):
        raise AssertionError(
            f"the two equivalent forms disagree: {form_rt!r} vs {form_p!r}"
        )
    return form_rt


def uncorrelated_asymptotic_max(nbar_a: float, nbar_b: float) -> tuple[float, DemonParams]:
    """Large-mean optimum nbar_b - nbar_a + (16/27) nbar_a^2 / nbar_b and the
    parameters that attain it (reference curve, exact only as nbar -> inf)."""
    value = nbar_b - nbar_a + PLATEAU_RATIO * nbar_a**2 / nbar_b
    params = DemonParams.common(
        r=min(2.0 / nbar_a, 1.0),
        eta_a=1.0,
        eta_b=(3.0 * nbar_b - 2.0 * nbar_a) / (4.0 * nbar_b),
    )
    return value, params


# --------------------------------------------------------------------------
# Split thermal state
# --------------------------------------------------------------------------

def split_scaled_rows(rt: RTilde, nbar_a: float, nbar_b: float) -> tuple[dict, dict]:
    """Probability ratios P_C / P_(0,0) and scaled conditional differences.

    Every difference carries the common factor nbar_b - nbar_a with a
    positive cofactor, which is why feed-forward cannot help on this family.
    """
    rt.require(RTildeConvention.MEAN_SCALED)
    ra, rb = rt.a, rt.b
    k = 2.0 + ra + rb
    kp = 2.0 * (k - 1.0) * (3.0 + ra * rb + (ra + rb) * (ra + rb + 3.0)) + ra * rb * (ra + rb) ** 2
    prob_ratios = {
        (0, 0): 1.0,
        (0, 1): rb / (1.0 + ra),
        (1, 0): ra / (1.0 + rb),
        (1, 1): ra * rb * k / ((1.0 + ra) * (1.0 + rb)),
    }
    diff = nbar_b - nbar_a
    rows = {
        (0, 0): diff,
        (0, 1): diff * (k + ra) / (1.0 + ra),
        (1, 0): diff * (k + rb) / (1.0 + rb),
        (1, 1): diff * kp / ((1.0 + ra) * (1.0 + rb) * k),
    }
    return prob_ratios, rows


def split_reports(nbar_a: float, nbar_b: float, params: DemonParams) -> list[OutcomeReport]:
    """Closed-form outcome reports for a split thermal state with the given
    marginal means."""
    _require_common(params)
    rt = RTilde.mean_scaled(nbar_a, nbar_b, params)
    p00 = 1.0 / (1.0 + rt.a + rt.b)
    prob_ratios, rows = split_scaled_rows(rt, nbar_a, nbar_b)
    probs = {c: p00 * v for c, v in prob_ratios.items()}
    scale = p00 * (1.0 - params.reflectance_a)
    deltas = {c: scale * v for c, v in rows.items()}
    return _reports(probs, deltas)


# --------------------------------------------------------------------------
# Number-correlated state (two-mode squeezed statistics)
# --------------------------------------------------------------------------

def tmss_reports(nbar: float, params: DemonParams) -> list[OutcomeReport]:
    """Closed-form outcome reports for the perfectly number-correlated state.

    Uses the bare convention rt_x = eta_x * R. The conditional difference is
    always negative after a click on mode b alone and always positive after a
    click on mode a alone: a click reveals one extra photon in the *other*
    mode. The no-click and double-click differences share the sign of
    rt_b - rt_a; the lattice engine pins that orientation in the tests.
    """
    _require_common(params)
    rt = RTilde.bare(params)
    rt.require(RTildeConvention.BARE)
    ra, rb = rt.a, rt.b
    r = params.reflectance_a
    s = ra + rb - ra * rb
    den = 1.0 + nbar * s
    probs = {
        (0, 0): 1.0 / den,
        (0, 1): nbar * rb * (1.0 - ra) / ((1.0 + nbar * ra) * den),
        (1, 0): nbar * ra * (1.0 - rb) / ((1.0 + nbar * rb) * den),
        (1, 1): nbar * ra * rb * (1.0 + 2.0 * nbar + nbar**2 * s)
        / ((1.0 + nbar * ra) * (1.0 + nbar * rb) * den),
    }
    f1 = 3.0 + 2.0 * ra + 2.0 * rb - ra * rb
    f2 = 2.0 * (2.0 * ra + 2.0 * rb - ra * rb)
    f3 = rb**2 * (1.0 - ra) ** 2 + ra * rb * (3.0 - 2.0 * ra) + ra**2
    deltas = {
        (0, 0): nbar * (1.0 - r) * (rb - ra) / den,
        (0, 1): (
            -(1.0 - r)
            * (1.0 + nbar * ra * (4.0 - 2.0 * ra + nbar * (ra * (3.0 - 2.0 * ra) + rb * (1.0 - ra) ** 2)))
            / ((1.0 - ra) * (1.0 + nbar * ra) * den)
            if ra < 1.0
            else 0.0
        ),
        (1, 0): (
            (1.0 - r)
            * (1.0 + nbar * rb * (4.0 - 2.0 * rb + nbar * (rb * (3.0 - 2.0 * rb) + ra * (1.0 - rb) ** 2)))
            / ((1.0 - rb) * (1.0 + nbar * rb) * den)
            if rb < 1.0
            else 0.0
        ),
        (1, 1): nbar
        * (1.0 - r)
        * (rb - ra)
        * (2.0 + nbar * f1 + nbar**2 * f2 + nbar**3 * f3)
        / ((1.0 + nbar * ra) * (1.0 + nbar * rb) * den * (1.0 + 2.0 * nbar + nbar**2 * s)),
    }
    return _reports(probs, deltas)


def tmss_delta_n(nbar: float, params: DemonParams) -> float:
    """Feed-forward figure of merit for the number-correlated state with the
    polarity flipped on outcome (0, 1) only.

    Coincides with the pointwise-optimal value whenever eta_b >= eta_a.
    """
    _require_common(params)
    rt = RTilde.bare(params)
    ra, rb = rt.a, rt.b
    r = params.reflectance_a
    s = ra + rb - ra * rb
    num = 2.0 * nbar * (1.0 - r) * rb * (
        1.0
        + 2.0 * nbar * ra * (2.0 - ra)
        + nbar**2 * (ra**2 * (3.0 - 2.0 * ra) + ra * rb * (1.0 - ra) ** 2)
    )
    return num / ((1.0 + nbar * ra) ** 2 * (1.0 + nbar * s) ** 2)


# --------------------------------------------------------------------------
# Number-anticorrelated states
# --------------------------------------------------------------------------

def fixed_m_delta_n(m: int, params: DemonParams) -> float:
    """Figure of merit for the balanced mixture of (m, 0) and (0, m), with the
    polarity flipped on outcome (1, 0).

    Value: m * (1 - R) * (1 - (1 - R*eta_a)**(m - 1)); the eta_b dependence
    cancels. The strategy is optimal in the regime eta_a >= eta_b. For
    m in {0, 1} there is nothing to gain and the value is 0.
    """
    if m < 0:
        raise InvalidStateError(f"m must be a nonnegative integer, got {m!r}")
    if m <= 1:
        return 0.0
    _require_common(params)
    r, eta_a = params.reflectance_a, params.eta_a
    return m * (1.0 - r) * (1.0 - (1.0 - r * eta_a) ** (m - 1))


def fixed_m_max(m: int) -> tuple[float, float]:
    """Optimal value and reflectance for the fixed-m anticorrelated family:
    value (m - 1) * m**(1/(1-m)) at R = 1 - m**(1/(1-m)), eta_a = 1."""
    if m < 2:
        raise InvalidStateError(f"the optimum requires m >= 2, got {m!r}")
    u = m ** (1.0 / (1.0 - m))
    return (m - 1) * u, 1.0 - u


def fixed_m_asymptotic(m: int) -> float:
    """Large-m approximation m - 1 - ln(m) of :func:`fixed_m_max` (reference
    curve only)."""
    return m - 1.0 - math.log(m)


def anticorr_thermal_delta_n(r: float, eta_a: float) -> float:
    """Figure of merit for the thermal-marginal anticorrelated state at unit
    mean (axis weights 2**-n), flipping outcome (1, 0):
    2 (1 - R) R eta_a (2 + R eta_a) / (1 + R eta_a)**2."""
    x = r * eta_a
    return 2.0 * (1.0 - r) * x * (2.0 + x) / (1.0 + x) ** 2


def _bisect_root(poly, lo: float, hi: float, tol: float = 1e-12) -> float:
    flo = poly(lo)
    if flo == 0.0:
        return lo
    if flo * poly(hi) > 0.0:
        raise ValueError("root not bracketed")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if flo * poly(mid) <= 0.0:
            hi = mid
        else:
            lo = mid
            flo = poly(lo)
    return 0.5 * (lo + hi)


def anticorr_thermal_optimum() -> tuple[float, float]:
    """Optimal (reflectance, value) for the unit-mean thermal-marginal
    anticorrelated state at eta_a = 1.

    Both numbers are characterized as the unique roots in (0, 1) of cubics:
    R**3 + 3 R**2 + 4 R - 2 for the reflectance and
    4 x**3 - 49 x**2 + 272 x - 144 for the value. Found by bisection, which
    needs no complex arithmetic and cannot silently pick a wrong branch.
    """
    r_opt = _bisect_root(lambda r: r**3 + 3.0 * r**2 + 4.0 * r - 2.0, 0.0, 1.0)
    dn_max = _bisect_root(lambda x: 4.0 * x**3 - 49.0 * x**2 + 272.0 * x - 144.0, 0.0, 1.0)
    return r_opt, dn_max
