"""The demon's measurement: beam splitter plus inefficient click detector.

On each mode a beam splitter of reflectance R routes k of n photons to a
photon counter of quantum efficiency eta (binomial channel); the counter
either clicks or stays silent. Conditioned on input n, the three reductions
everything downstream needs are

    P(no click | n)              = (1 - R*eta)**n
    E[kept * 1{no click} | n]    = n * (1 - R) * (1 - R*eta)**(n - 1)
    E[kept | n]                  = n * (1 - R)

where "kept" is the transmitted photon number. The closed forms are the
production path; the explicit binomial sums they collapse are retained as a
test oracle (``kernel="binomial"``).

The two modes are measured independently, so joint outcome statistics over a
number-diagonal state factor into per-mode terms accumulated by lattice sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .states import InvalidStateError, JointNumberState, ModePmf

# Click patterns (c_a, c_b) in canonical order; strategy bitmasks follow it.
OUTCOMES: tuple[tuple[int, int], ...] = ((0, 0), (0, 1), (1, 0), (1, 1))


class UndefinedSubtractionError(ValueError):
    """Photon subtraction is undefined on a zero-mean pmf."""


def _check_unit(value: float, name: str) -> None:
    if not (math.isfinite(value) and 0.0 <= value <= 1.0):
        raise InvalidStateError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class DemonParams:
    """Demon settings: splitter reflectance and counter efficiencies.

    By default one reflectance ``r`` is shared by both modes. Setting both
    ``r_a`` and ``r_b`` (with ``r=None``) enables the independent-reflectance
    mode, which is kept only to demonstrate the trivial optimum it produces.
    """

    r: float | None
    eta_a: float
    eta_b: float
    r_a: float | None = None
    r_b: float | None = None

    def __post_init__(self) -> None:
        _check_unit(self.eta_a, "eta_a")
        _check_unit(self.eta_b, "eta_b")
        if self.r is None:
            if self.r_a is None or self.r_b is None:
                raise InvalidStateError("either common r or both r_a and r_b must be set")
            _check_unit(self.r_a, "r_a")
            _check_unit(self.r_b, "r_b")
        else:
            _check_unit(self.r, "r")
            if self.r_a is not None or self.r_b is not None:
                raise InvalidStateError("common r and per-mode r_a/r_b are mutually exclusive")

    @classmethod
    def common(cls, r: float, eta_a: float, eta_b: float) -> "DemonParams":
        return cls(r=r, eta_a=eta_a, eta_b=eta_b)

    @classmethod
    def independent(cls, r_a: float, r_b: float, eta_a: float, eta_b: float) -> "DemonParams":
        return cls(r=None, eta_a=eta_a, eta_b=eta_b, r_a=r_a, r_b=r_b)

    @property
    def reflectance_a(self) -> float:
        return self.r if self.r is not None else self.r_a  # type: ignore[return-value]

    @property
    def reflectance_b(self) -> float:
        return self.r if self.r is not None else self.r_b  # type: ignore[return-value]

    @property
    def is_common(self) -> bool:
        return self.r is not None


@dataclass(frozen=True)
class OutcomeReport:
    """Statistics of one click pattern: probability and conditional means.

    ``defined`` is False when the pattern has zero probability; the means are
    then reported as 0 so strategy sums (which weight by ``prob``) stay finite.
    """

    outcome: tuple[int, int]
    prob: float
    mean_a: float
    mean_b: float
    defined: bool = True

    @property
    def delta(self) -> float:
        """Conditional transmitted difference mean_b - mean_a."""
        return self.mean_b - self.mean_a


def mode_kernel(n: int, r: float, eta: float) -> tuple[float, float, float]:
    """Closed-form per-mode reductions for photon number n.

    Returns ``(p_noclick, kept_mean_noclick_weighted, kept_mean_total)``.
    """
    if n < 0:
        raise InvalidStateError(f"photon number must be nonnegative, got {n}")
    _check_unit(r, "r")
    _check_unit(eta, "eta")
    t = 1.0 - r * eta
    p_noclick = t**n
    kept_noclick = n * (1.0 - r) * t ** (n - 1) if n > 0 else 0.0
    return p_noclick, kept_noclick, n * (1.0 - r)


def mode_kernel_binomial(n: int, r: float, eta: float) -> tuple[float, float, float]:
    """Explicit binomial-sum oracle for :func:`mode_kernel`.

    Sums the splitter's binomial channel composed with the no-click weight
    (1 - eta)**k over reflected counts k. Slow but independent of the closed
    forms; tests use it to validate the production kernel.
    """
    if n < 0:
        raise InvalidStateError(f"photon number must be nonnegative, got {n}")
    _check_unit(r, "r")
    _check_unit(eta, "eta")
    p_noclick = 0.0
    kept_noclick = 0.0
    kept_total = 0.0
    for k in range(n + 1):
        w = math.comb(n, k) * r**k * (1.0 - r) ** (n - k)
        p_noclick += w * (1.0 - eta) ** k
        kept_noclick += w * (1.0 - eta) ** k * (n - k)
        kept_total += w * (n - k)
    return p_noclick, kept_noclick, kept_total


def _mode_tables(ns: np.ndarray, r: float, eta: float, kernel: str) -> tuple[np.ndarray, ...]:
    """Vectorized kernel over an array of photon numbers.

    Returns (w0, w1, g0, g1): no-click/click probabilities and the kept-mean
    weights under no click / click.
    """
    if kernel == "closed":
        t = 1.0 - r * eta
        if t == 0.0:
            # Only the vacuum survives unclicked; a single photon, if kept,
            # must have been transmitted.
            w0 = (ns == 0).astype(float)
            g0 = np.where(ns == 1, 1.0 - r, 0.0)
        elif t == 1.0:
            w0 = np.ones(ns.size)
            g0 = ns * (1.0 - r)
        else:
            # t**n via exp(n log t); the shifted power reuses it as w0/t.
            w0 = np.exp(math.log(t) * ns)
            g0 = ns * ((1.0 - r) / t) * w0
    elif kernel == "binomial":
        w0 = np.empty(ns.size)
        g0 = np.empty(ns.size)
        for i, n in enumerate(ns):
            w0[i], g0[i], _ = mode_kernel_binomial(int(n), r, eta)
    else:
        raise ValueError(f"unknown kernel {kernel!r}")
    kept = ns * (1.0 - r)
    return w0, 1.0 - w0, g0, kept - g0


def _reports_from_sums(probs, means_a, means_b) -> list[OutcomeReport]:
    reports = []
    for outcome, pc, ea, eb in zip(OUTCOMES, probs, means_a, means_b):
        if pc > 0.0:
            reports.append(OutcomeReport(outcome, float(pc), float(ea / pc), float(eb / pc)))
        else:
            reports.append(OutcomeReport(outcome, 0.0, 0.0, 0.0, defined=False))
    return reports


def outcome_reports(
    state: JointNumberState, params: DemonParams, kernel: str = "closed"
) -> list[OutcomeReport]:
    """Outcome probabilities and conditional transmitted means by lattice sums.

    For each click pattern C the probability P_C and the conditional means of
    the transmitted modes are accumulated over the state's sparse support,
    the two per-mode kernels combining multiplicatively.
    """
    wa = _mode_tables(state.na, params.reflectance_a, params.eta_a, kernel)
    wb = _mode_tables(state.nb, params.reflectance_b, params.eta_b, kernel)
    p = state.p
    probs, means_a, means_b = [], [], []
    for ca, cb in OUTCOMES:
        fa, fb = wa[ca], wb[cb]
        ga, gb = wa[2 + ca], wb[2 + cb]
        probs.append(np.einsum("i,i,i->", p, fa, fb))
        means_a.append(np.einsum("i,i,i->", p, ga, fb))
        means_b.append(np.einsum("i,i,i->", p, fa, gb))
    return _reports_from_sums(probs, means_a, means_b)


def _mode_sums(pmf: ModePmf, r: float, eta: float, kernel: str) -> tuple[tuple[float, float], tuple[float, float]]:
    """Per-mode reductions ((P_noclick, P_click), (M_noclick, M_click)) where
    M is the kept-mean sum under the given click outcome."""
    if kernel != "closed":
        w0, w1, g0, g1 = _mode_tables(np.arange(len(pmf)), r, eta, kernel)
        p = pmf.probs
        return (
            (float(np.dot(p, w0)), float(np.dot(p, w1))),
            (float(np.dot(p, g0)), float(np.dot(p, g1))),
        )
    total = float(pmf.probs.sum())
    kept_total = (1.0 - r) * pmf.mean()
    t = 1.0 - r * eta
    if t == 0.0:
        a0 = float(pmf.probs[0])
        m0 = (1.0 - r) * float(pmf.probs[1]) if len(pmf) > 1 else 0.0
    elif t == 1.0:
        a0, m0 = total, kept_total
    else:
        w0 = np.exp(math.log(t) * pmf.ns)
        a0 = float(np.dot(pmf.probs, w0))
        m0 = (1.0 - r) / t * float(np.dot(pmf.weighted_ns, w0))
    return (a0, max(total - a0, 0.0)), (m0, max(kept_total - m0, 0.0))


def product_outcome_reports(
    pmf_a: ModePmf, pmf_b: ModePmf, params: DemonParams, kernel: str = "closed"
) -> list[OutcomeReport]:
    """Outcome reports for a product state from its per-mode pmfs.

    Identical results to :func:`outcome_reports` on the outer-product lattice
    but in O(cutoff) per mode, which is what makes large-mean sweeps viable.
    """
    pa, ma = _mode_sums(pmf_a, params.reflectance_a, params.eta_a, kernel)
    pb, mb = _mode_sums(pmf_b, params.reflectance_b, params.eta_b, kernel)
    probs = [pa[ca] * pb[cb] for ca, cb in OUTCOMES]
    means_a = [ma[ca] * pb[cb] for ca, cb in OUTCOMES]
    means_b = [pa[ca] * mb[cb] for ca, cb in OUTCOMES]
    return _reports_from_sums(probs, means_a, means_b)


def photon_subtracted_mean(pmf: ModePmf | np.ndarray) -> float:
    """Mean photon number after conditional single-photon subtraction.

    For a pmf p(n) this is sum n^2 p / sum n p - 1, the mean of the state
    reweighted by n and shifted down one photon. Equals nbar - 1 +
    variance/nbar, so super-Poissonian inputs end up with a *larger* mean.
    """
    probs = pmf.probs if isinstance(pmf, ModePmf) else np.ascontiguousarray(pmf, dtype=np.float64)
    ns = np.arange(probs.size, dtype=np.float64)
    m1 = float(np.dot(ns, probs))
    if m1 <= 0.0:
        raise UndefinedSubtractionError("photon subtraction undefined for a zero-mean pmf")
    m2 = float(np.dot(ns * ns, probs))
    return m2 / m1 - 1.0
