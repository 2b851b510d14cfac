"""Number-diagonal two-mode optical states as truncated sparse pmfs.

Every state handled here is diagonal in the two-mode Fock basis, so it is
fully described by a joint pmf p(n_a, n_b). Five families are provided:

* independent thermal modes (equal or different temperatures),
* a single thermal state split on a beam splitter of angle theta,
* the two-mode squeezed state (perfect number correlation, thermal marginals),
* number-anticorrelated mixtures supported on the axes n_a * n_b = 0,
* the thermal-marginal special case of the anticorrelated family (nbar <= 1).

States are truncated to a finite photon-number box. The probability mass
discarded by the truncation is recorded in ``tail_mass`` and carried along,
never renormalized away, so downstream error bounds stay honest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np
from scipy.special import gammaln

DEFAULT_EPS_TAIL = 1e-12

# Allowed slack on "stored mass + tail mass == 1".
NORMALIZATION_TOL = 1e-12

# product_thermal materializes the full lattice; above this support size the
# factorized per-mode path (see channel.product_outcome_reports) must be used.
MAX_PRODUCT_ENTRIES = 2_000_000


class InvalidStateError(ValueError):
    """Raised when a state constructor receives parameters outside its domain."""


class InfeasibleMarginalError(InvalidStateError):
    """Raised when requested marginals cannot be realized by the family."""


def thermal_lambda(nbar: float) -> float:
    """Geometric ratio lambda = nbar / (1 + nbar) of a thermal state."""
    return nbar / (1.0 + nbar)


def _check_nbar(nbar: float, name: str = "nbar") -> None:
    if not (math.isfinite(nbar) and nbar > 0.0):
        raise InvalidStateError(f"{name} must be finite and positive, got {nbar!r}")


def _check_eps_tail(eps_tail: float) -> None:
    if not (0.0 < eps_tail < 1.0):
        raise InvalidStateError(f"eps_tail must lie in (0, 1), got {eps_tail!r}")


def _geometric_cutoff(lam: float, eps_tail: float) -> int:
    """Smallest N >= 0 such that lam**(N + 1) <= eps_tail."""
    if lam <= 0.0:
        return 0
    n_plus_1 = math.ceil(math.log(eps_tail) / math.log(lam))
    return max(int(n_plus_1) - 1, 0)


@dataclass(frozen=True)
class ThermalSpec:
    """Single-mode thermal state, parametrized by its mean photon number."""

    nbar: float

    def __post_init__(self) -> None:
        _check_nbar(self.nbar)

    @property
    def lam(self) -> float:
        return thermal_lambda(self.nbar)


@dataclass(frozen=True)
class ModePmf:
    """Truncated single-mode photon-number pmf.

    Behaves as a sequence of probabilities over n = 0..cutoff; ``tail_mass``
    is the probability discarded beyond the cutoff.
    """

    probs: np.ndarray
    tail_mass: float

    def __post_init__(self) -> None:
        p = np.ascontiguousarray(self.probs, dtype=np.float64)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        if np.any(p < 0.0):
            raise InvalidStateError("mode pmf has negative entries")
        if abs(float(p.sum()) + self.tail_mass - 1.0) > NORMALIZATION_TOL:
            raise InvalidStateError("mode pmf + tail_mass does not sum to 1")

    def __len__(self) -> int:
        return self.probs.size

    def __getitem__(self, n):
        return self.probs[n]

    def __iter__(self) -> Iterator[float]:
        return iter(self.probs)

    @property
    def cutoff(self) -> int:
        return self.probs.size - 1

    @cached_property
    def ns(self) -> np.ndarray:
        ns = np.arange(self.probs.size, dtype=np.float64)
        ns.setflags(write=False)
        return ns

    @cached_property
    def weighted_ns(self) -> np.ndarray:
        """Cached n * p(n), the workhorse of the factorized measurement path."""
        w = self.ns * self.probs
        w.setflags(write=False)
        return w

    def mean(self) -> float:
        return float(self.weighted_ns.sum())

    def second_moment(self) -> float:
        return float(np.dot(self.ns, self.weighted_ns))

    def variance(self) -> float:
        m = self.mean()
        return self.second_moment() - m * m


@dataclass(frozen=True)
class JointNumberState:
    """Sparse truncated joint photon-number pmf p(n_a, n_b).

    Stored as coordinate arrays (na, nb, p) over the support; ``cutoff``
    bounds the photon number retained in either mode and ``tail_mass`` is the
    probability discarded by truncation.
    """

    na: np.ndarray
    nb: np.ndarray
    p: np.ndarray
    cutoff: int
    tail_mass: float

    def __post_init__(self) -> None:
        na = np.ascontiguousarray(self.na, dtype=np.int64)
        nb = np.ascontiguousarray(self.nb, dtype=np.int64)
        p = np.ascontiguousarray(self.p, dtype=np.float64)
        for arr in (na, nb, p):
            arr.setflags(write=False)
        object.__setattr__(self, "na", na)
        object.__setattr__(self, "nb", nb)
        object.__setattr__(self, "p", p)
        if not (na.shape == nb.shape == p.shape) or na.ndim != 1:
            raise InvalidStateError("na, nb, p must be 1-D arrays of equal length")
        if np.any(p < 0.0):
            raise InvalidStateError("joint pmf has negative entries")
        if na.size and (na.min() < 0 or nb.min() < 0):
            raise InvalidStateError("photon numbers must be nonnegative")
        if na.size and max(int(na.max()), int(nb.max())) > self.cutoff:
            raise InvalidStateError("entry exceeds the stated cutoff")
        if not 0.0 <= self.tail_mass <= 1.0:
            raise InvalidStateError(f"tail_mass out of [0, 1]: {self.tail_mass!r}")
        if abs(self.norm + self.tail_mass - 1.0) > NORMALIZATION_TOL:
            raise InvalidStateError("stored mass + tail_mass does not sum to 1")

    @property
    def norm(self) -> float:
        return float(self.p.sum())

    @property
    def support_size(self) -> int:
        return self.p.size

    def marginal_means(self) -> tuple[float, float]:
        """Exact lattice sums (sum na*p, sum nb*p) over the stored support."""
        return float(np.dot(self.na, self.p)), float(np.dot(self.nb, self.p))

    @cached_property
    def _index(self) -> dict[tuple[int, int], float]:
        return {
            (int(a), int(b)): float(q)
            for a, b, q in zip(self.na, self.nb, self.p)
        }

    def prob(self, n_a: int, n_b: int) -> float:
        return self._index.get((n_a, n_b), 0.0)

    def entries(self) -> dict[tuple[int, int], float]:
        return dict(self._index)

    def marginal_pmf(self, mode: str) -> np.ndarray:
        """Marginal pmf of mode 'a' or 'b' over n = 0..cutoff."""
        ns = {"a": self.na, "b": self.nb}[mode]
        out = np.zeros(self.cutoff + 1)
        np.add.at(out, ns, self.p)
        return out

    def correlation(self) -> float:
        """Lattice sum <n_a n_b>."""
        return float(np.einsum("i,i,i->", self.na.astype(float), self.nb.astype(float), self.p))

    def rows(self) -> Iterator[tuple[int, int, float]]:
        """Entries as (n_a, n_b, p) triples in lexicographic order."""
        order = np.lexsort((self.nb, self.na))
        for i in order:
            yield int(self.na[i]), int(self.nb[i]), float(self.p[i])


def make_thermal(spec: ThermalSpec | float, eps_tail: float = DEFAULT_EPS_TAIL) -> ModePmf:
    """Truncated thermal pmf p(n) = (1 - lam) * lam**n.

    The cutoff N is the smallest integer with lam**(N + 1) <= eps_tail, which
    is exactly the discarded geometric tail.
    """
    nbar = spec.nbar if isinstance(spec, ThermalSpec) else float(spec)
    _check_nbar(nbar)
    _check_eps_tail(eps_tail)
    lam = thermal_lambda(nbar)
    cutoff = _geometric_cutoff(lam, eps_tail)
    ns = np.arange(cutoff + 1)
    probs = (1.0 - lam) * lam**ns
    tail = lam ** (cutoff + 1)
    return ModePmf(probs=probs, tail_mass=tail)


def product_thermal(
    nbar_a: float,
    nbar_b: float,
    eps_tail: float = DEFAULT_EPS_TAIL,
    max_entries: int = MAX_PRODUCT_ENTRIES,
) -> JointNumberState:
    """Two independent thermal modes as an explicit joint lattice.

    Each mode is truncated with budget eps_tail / 2 so the combined discarded
    mass stays below eps_tail. For means where the lattice would exceed
    ``max_entries`` this refuses to materialize; use the per-mode pmfs with
    the factorized measurement path instead.
    """
    pmf_a = make_thermal(nbar_a, eps_tail / 2.0)
    pmf_b = make_thermal(nbar_b, eps_tail / 2.0)
    size = len(pmf_a) * len(pmf_b)
    if size > max_entries:
        raise InvalidStateError(
            f"product lattice would hold {size} entries (> {max_entries}); "
            "use the factorized per-mode path for large means"
        )
    na, nb = np.meshgrid(pmf_a.ns, pmf_b.ns, indexing="ij")
    p = np.outer(pmf_a.probs, pmf_b.probs)
    stored = float(p.sum())
    return JointNumberState(
        na=na.ravel(),
        nb=nb.ravel(),
        p=p.ravel(),
        cutoff=max(pmf_a.cutoff, pmf_b.cutoff),
        tail_mass=max(1.0 - stored, 0.0),
    )


def split_thermal(nbar_in: float, theta: float, eps_tail: float = DEFAULT_EPS_TAIL) -> JointNumberState:
    """Thermal state of mean nbar_in split on a beam splitter of angle theta.

    The splitter reflectance is sin(theta)**2, so the marginal means are
    nbar_a = nbar_in * cos(theta)**2 and nbar_b = nbar_in * sin(theta)**2.
    The joint pmf is

        p(n_a, n_b) = (n_a + n_b)! / (n_a! n_b!)
                      * x**n_a * y**n_b / (1 + nbar_in),

    with x = nbar_a / (1 + nbar_in), y = nbar_b / (1 + nbar_in). Both
    marginals remain thermal; the modes are positively correlated with
    <n_a n_b> = 2 * nbar_a * nbar_b. Binomial weights are evaluated through
    log-gamma so large n_a + n_b cannot overflow.
    """
    _check_nbar(nbar_in, "nbar_in")
    _check_eps_tail(eps_tail)
    if not (math.isfinite(theta) and 0.0 <= theta <= math.pi / 2.0):
        raise InvalidStateError(f"theta must lie in [0, pi/2], got {theta!r}")
    nbar_a = nbar_in * math.cos(theta) ** 2
    nbar_b = nbar_in * math.sin(theta) ** 2
    x = nbar_a / (1.0 + nbar_in)
    y = nbar_b / (1.0 + nbar_in)

    def axis(nbar_mode: float) -> np.ndarray:
        if nbar_mode == 0.0:
            return np.arange(1)
        lam = thermal_lambda(nbar_mode)
        return np.arange(_geometric_cutoff(lam, eps_tail / 2.0) + 1)

    ns_a, ns_b = axis(nbar_a), axis(nbar_b)
    na, nb = np.meshgrid(ns_a, ns_b, indexing="ij")
    logp = gammaln(na + nb + 1.0) - gammaln(na + 1.0) - gammaln(nb + 1.0)
    logp -= math.log1p(nbar_in)
    with np.errstate(divide="ignore", invalid="ignore"):
        logp = logp + np.where(na > 0, na * np.log(x) if x > 0 else -np.inf, 0.0)
        logp = logp + np.where(nb > 0, nb * np.log(y) if y > 0 else -np.inf, 0.0)
    p = np.exp(logp).ravel()
    na, nb = na.ravel(), nb.ravel()
    keep = p > 0.0
    stored = float(p[keep].sum())
    return JointNumberState(
        na=na[keep],
        nb=nb[keep],
        p=p[keep],
        cutoff=int(max(ns_a[-1], ns_b[-1])),
        tail_mass=max(1.0 - stored, 0.0),
    )


def tmss_diagonal(nbar: float, eps_tail: float = DEFAULT_EPS_TAIL) -> JointNumberState:
    """Perfectly number-correlated state with thermal marginals of mean nbar.

    This is the photon-number distribution of the two-mode squeezed state:
    p(n, n) = (1 - lam) * lam**n on the diagonal, zero elsewhere.
    """
    _check_nbar(nbar)
    _check_eps_tail(eps_tail)
    lam = thermal_lambda(nbar)
    cutoff = _geometric_cutoff(lam, eps_tail)
    ns = np.arange(cutoff + 1)
    p = (1.0 - lam) * lam**ns
    return JointNumberState(na=ns, nb=ns, p=p, cutoff=cutoff, tail_mass=lam ** (cutoff + 1))


def anticorrelated(q: Sequence[float]) -> JointNumberState:
    """Number-anticorrelated mixture from axis weights q.

    p(0, 0) = q[0] and p(n, 0) = p(0, n) = q[n] / 2 for n > 0; every entry
    satisfies n_a * n_b = 0. The weights must sum to 1 within 1e-12.
    """
    q = np.ascontiguousarray(q, dtype=np.float64)
    if q.ndim != 1 or q.size == 0:
        raise InvalidStateError("q must be a nonempty 1-D sequence")
    if np.any(q < 0.0) or not np.all(np.isfinite(q)):
        raise InvalidStateError("q must be nonnegative and finite")
    total = float(q.sum())
    if abs(total - 1.0) > 1e-12:
        raise InvalidStateError(f"q must sum to 1 within 1e-12, got {total!r}")
    na = [0] if q[0] > 0.0 else []
    nb = [0] if q[0] > 0.0 else []
    p = [float(q[0])] if q[0] > 0.0 else []
    for n in range(1, q.size):
        if q[n] > 0.0:
            na.extend((n, 0))
            nb.extend((0, n))
            p.extend((float(q[n]) / 2.0, float(q[n]) / 2.0))
    return JointNumberState(
        na=np.asarray(na, dtype=np.int64),
        nb=np.asarray(nb, dtype=np.int64),
        p=np.asarray(p),
        cutoff=q.size - 1,
        tail_mass=max(1.0 - total, 0.0),
    )


def thermal_marginal_anticorrelated(nbar: float, eps_tail: float = DEFAULT_EPS_TAIL) -> JointNumberState:
    """Anticorrelated state whose marginals are thermal with mean nbar.

    Requires q_n = 2 * (1 - lam) * lam**n for n > 0 and q_0 = 1 - 2 * lam,
    which is a valid pmf only for nbar <= 1.
    """
    _check_nbar(nbar)
    _check_eps_tail(eps_tail)
    if nbar > 1.0:
        raise InfeasibleMarginalError(
            f"thermal marginals require nbar <= 1 (q_0 = 1 - 2*lam >= 0), got {nbar!r}"
        )
    lam = thermal_lambda(nbar)
    # Residual axis mass beyond N is 2 * lam**(N + 1).
    cutoff = _geometric_cutoff(lam, eps_tail / 2.0)
    ns = np.arange(1, cutoff + 1)
    q_pos = 2.0 * (1.0 - lam) * lam**ns
    q0 = 1.0 - 2.0 * lam
    na = np.concatenate(([0], ns, np.zeros_like(ns)))
    nb = np.concatenate(([0], np.zeros_like(ns), ns))
    p = np.concatenate(([q0], q_pos / 2.0, q_pos / 2.0))
    keep = p > 0.0
    return JointNumberState(
        na=na[keep],
        nb=nb[keep],
        p=p[keep],
        cutoff=cutoff,
        tail_mass=2.0 * lam ** (cutoff + 1),
    )


def marginal_means(state: JointNumberState) -> tuple[float, float]:
    """Lattice-sum marginal means (nbar_a, nbar_b) of a joint state."""
    return state.marginal_means()
