"""State-family registry: build states or measurement evaluators by name.

The service and the reproduction harness address the five families by a
string kind plus keyword parameters. Product (uncorrelated) inputs get the
factorized per-mode measurement path so large means never materialize a
joint lattice; the correlated families have thin supports and go through the
sparse lattice engine directly.
"""

from __future__ import annotations

import math
from typing import Callable

from .channel import DemonParams, OutcomeReport, outcome_reports, product_outcome_reports
from .states import (
    DEFAULT_EPS_TAIL,
    InvalidStateError,
    JointNumberState,
    anticorrelated,
    make_thermal,
    product_thermal,
    split_thermal,
    thermal_marginal_anticorrelated,
    tmss_diagonal,
)

UNCORRELATED = "uncorrelated"
SPLIT = "split"
TMSS = "tmss"
NOON = "noon"
ANTICORR_THERMAL = "anticorr-thermal"

FAMILY_KINDS = (UNCORRELATED, SPLIT, TMSS, NOON, ANTICORR_THERMAL)

ReportsFn = Callable[[DemonParams], list[OutcomeReport]]


def _noon_weights(m: int) -> list[float]:
    if m < 0:
        raise InvalidStateError(f"m must be nonnegative, got {m!r}")
    q = [0.0] * (m + 1)
    q[m] = 1.0
    return q


def family_state(
    kind: str,
    *,
    eps_tail: float = DEFAULT_EPS_TAIL,
    nbar_a: float | None = None,
    nbar_b: float | None = None,
    nbar_in: float | None = None,
    theta: float | None = None,
    nbar: float | None = None,
    m: int | None = None,
) -> JointNumberState:
    """Materialize the joint lattice state for a family."""
    if kind == UNCORRELATED:
        return product_thermal(_req(nbar_a, "nbar_a"), _req(nbar_b, "nbar_b"), eps_tail)
    if kind == SPLIT:
        return split_thermal(_req(nbar_in, "nbar_in"), _req(theta, "theta"), eps_tail)
    if kind == TMSS:
        return tmss_diagonal(_req(nbar, "nbar"), eps_tail)
    if kind == NOON:
        return anticorrelated(_noon_weights(int(_req(m, "m"))))
    if kind == ANTICORR_THERMAL:
        return thermal_marginal_anticorrelated(_req(nbar, "nbar"), eps_tail)
    raise InvalidStateError(f"unknown family kind {kind!r}")


def family_problem(kind: str, *, eps_tail: float = DEFAULT_EPS_TAIL, **kw) -> tuple[ReportsFn, tuple[float, float]]:
    """Measurement evaluator and marginal means for a family.

    Returns ``(reports_fn, (nbar_a, nbar_b))`` where ``reports_fn`` maps demon
    parameters to the four outcome reports.
    """
    if kind == UNCORRELATED:
        pmf_a = make_thermal(_req(kw.get("nbar_a"), "nbar_a"), eps_tail / 2.0)
        pmf_b = make_thermal(_req(kw.get("nbar_b"), "nbar_b"), eps_tail / 2.0)
        return (
            lambda params: product_outcome_reports(pmf_a, pmf_b, params),
            (pmf_a.mean(), pmf_b.mean()),
        )
    state = family_state(kind, eps_tail=eps_tail, **kw)
    return (lambda params: outcome_reports(state, params)), state.marginal_means()


def split_theta_for_ratio(ratio_b_over_total: float) -> float:
    """Splitter angle given the fraction of the input mean sent to mode b."""
    if not 0.0 <= ratio_b_over_total <= 1.0:
        raise InvalidStateError("fraction must lie in [0, 1]")
    return math.asin(math.sqrt(ratio_b_over_total))


def _req(value, name: str):
    if value is None:
        raise InvalidStateError(f"family parameter {name!r} is required")
    return value
