"""HTTP service exposing the simulator, optimizer, and reproduction harness.

The CLI is a thin client of these endpoints; anything it can do, any other
HTTP client can do as well.
"""

from __future__ import annotations

from importlib.metadata import PackageNotFoundError, version

from fastapi import FastAPI, HTTPException

from .. import reproduce
from ..channel import DemonParams, OutcomeReport, outcome_reports, product_outcome_reports
from ..families import family_problem, family_state
from ..merit import PolarityStrategy, best_strategy, classify_passive, delta_n, transmitted_baseline
from ..optimize import OptimizationResult, OptimizerConfig, maximize_merit
from ..states import InvalidStateError, make_thermal
from . import schemas

try:
    _VERSION = version("photondemon")
except PackageNotFoundError:  # pragma: no cover - editable/dev tree
    _VERSION = "0.0.0"

app = FastAPI(
    title="photondemon",
    version=_VERSION,
    description="Photonic Maxwell's demon: number-diagonal two-mode states, "
    "click-pattern statistics, feed-forward figure of merit, and parameter optimization.",
)


def _params_from_model(model: schemas.DemonParamsModel) -> DemonParams:
    if model.r is not None:
        return DemonParams.common(model.r, model.eta_a, model.eta_b)
    return DemonParams.independent(model.r_a, model.r_b, model.eta_a, model.eta_b)


def _params_to_model(params: DemonParams) -> schemas.DemonParamsModel:
    return schemas.DemonParamsModel(
        r=params.r, r_a=params.r_a, r_b=params.r_b, eta_a=params.eta_a, eta_b=params.eta_b
    )


def _report_models(reports: list[OutcomeReport]) -> list[schemas.OutcomeReportModel]:
    return [
        schemas.OutcomeReportModel(
            outcome=r.outcome, prob=r.prob, mean_a=r.mean_a, mean_b=r.mean_b,
            delta=r.delta, defined=r.defined,
        )
        for r in reports
    ]


def _family_kwargs(family) -> dict:
    kw = family.model_dump()
    kw.pop("kind")
    return kw


def _optimize_result_model(result: OptimizationResult, objective: str, include_trace: bool) -> schemas.OptimizeResponse:
    return schemas.OptimizeResponse(
        value=result.value,
        params=_params_to_model(result.params),
        strategy_mask=result.strategy.mask,
        evaluations=result.evaluations,
        converged=result.converged,
        starts=result.starts,
        objective=objective,
        trace=[list(t) for t in result.trace] if include_trace else None,
    )


@app.get("/health", response_model=schemas.HealthResponse)
def health() -> schemas.HealthResponse:
    return schemas.HealthResponse(status="ok", version=_VERSION)


@app.post("/eval", response_model=schemas.EvalResponse)
def evaluate(req: schemas.EvalRequest) -> schemas.EvalResponse:
    kwargs = _family_kwargs(req.family)
    try:
        params = _params_from_model(req.params)
        if req.family.kind == "uncorrelated" and not req.include_state:
            # Factorized path: product states never need the joint lattice,
            # which keeps large means evaluable.
            pmf_a = make_thermal(req.family.nbar_a, req.eps_tail / 2.0)
            pmf_b = make_thermal(req.family.nbar_b, req.eps_tail / 2.0)
            reports = product_outcome_reports(pmf_a, pmf_b, params)
            nbar_a, nbar_b = pmf_a.mean(), pmf_b.mean()
            norm = float(pmf_a.probs.sum()) * float(pmf_b.probs.sum())
            summary = schemas.StateSummary(
                cutoff=max(pmf_a.cutoff, pmf_b.cutoff),
                tail_mass=max(1.0 - norm, 0.0),
                support_size=len(pmf_a) * len(pmf_b),
                norm=norm,
                nbar_a=nbar_a,
                nbar_b=nbar_b,
            )
            state = None
        else:
            state = family_state(req.family.kind, eps_tail=req.eps_tail, **kwargs)
            reports = outcome_reports(state, params)
            nbar_a, nbar_b = state.marginal_means()
            summary = schemas.StateSummary(
                cutoff=state.cutoff,
                tail_mass=state.tail_mass,
                support_size=state.support_size,
                norm=state.norm,
                nbar_a=nbar_a,
                nbar_b=nbar_b,
            )
    except InvalidStateError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    best, best_value = best_strategy(reports)
    strategy = (
        PolarityStrategy.from_mask(req.strategy_mask) if req.strategy_mask is not None else best
    )
    baseline = transmitted_baseline(nbar_a, nbar_b, params)
    value = delta_n(reports, strategy)
    rows = None
    if req.include_state:
        assert state is not None
        if state.support_size > req.max_state_rows:
            raise HTTPException(
                status_code=413,
                detail=f"state holds {state.support_size} entries (> {req.max_state_rows})",
            )
        rows = list(state.rows())
    return schemas.EvalResponse(
        reports=_report_models(reports),
        strategy_mask=strategy.mask,
        delta_n=value,
        best_strategy_mask=best.mask,
        best_value=best_value,
        baseline=baseline,
        contribution=value - baseline,
        state=summary,
        state_rows=rows,
    )


@app.post("/optimize", response_model=schemas.OptimizeResponse)
def optimize_endpoint(req: schemas.OptimizeRequest) -> schemas.OptimizeResponse:
    config = OptimizerConfig(
        seed=req.seed,
        n_starts=req.n_starts,
        grid_points=req.grid_points,
        max_evals_per_start=req.budget,
        fixed_strategy=(
            PolarityStrategy.from_mask(req.fixed_strategy_mask)
            if req.fixed_strategy_mask is not None
            else None
        ),
    )
    try:
        reports_fn, marginals = family_problem(
            req.family.kind, eps_tail=req.eps_tail, **_family_kwargs(req.family)
        )
        result = maximize_merit(
            reports_fn, marginals, objective=req.objective, common_r=req.common_r, config=config
        )
    except InvalidStateError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return _optimize_result_model(result, req.objective, req.include_trace)


@app.post("/passivity", response_model=schemas.PassivityResponse)
def passivity(req: schemas.PassivityRequest) -> schemas.PassivityResponse:
    try:
        state = family_state(req.family.kind, eps_tail=req.eps_tail, **_family_kwargs(req.family))
        verdict = classify_passive(state, req.nbar_bath, req.tol)
    except (InvalidStateError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return schemas.PassivityResponse(
        passive=verdict.passive,
        reason=verdict.reason.value,
        nbar_a=verdict.nbar_a,
        nbar_b=verdict.nbar_b,
        nbar_bath=req.nbar_bath,
    )


@app.post("/tables/table3", response_model=schemas.RowsResponse)
def table3(req: schemas.TableRequest) -> schemas.RowsResponse:
    config = OptimizerConfig(seed=req.seed, n_starts=req.n_starts, max_evals_per_start=req.budget)
    fields, rows = reproduce.summary_table(seed=req.seed, eps_tail=req.eps_tail, config=config)
    return schemas.RowsResponse(fields=list(fields), rows=rows, ok=all(r["ok"] for r in rows))


@app.post("/figures/{name}", response_model=schemas.RowsResponse)
def figure(name: str, req: schemas.FigureRequest) -> schemas.RowsResponse:
    if name not in reproduce.FIG_FIELDS:
        raise HTTPException(status_code=404, detail=f"unknown figure {name!r}")
    config = None
    if req.n_starts is not None or req.grid_points is not None or req.budget is not None:
        config = OptimizerConfig(
            seed=req.seed,
            n_starts=req.n_starts or 16,
            grid_points=req.grid_points or 9,
            max_evals_per_start=req.budget or 10_000,
        )
    try:
        fields, rows = reproduce.figure_rows(
            name,
            req.grid,
            seed=req.seed,
            eps_tail=req.eps_tail,
            ratios=req.ratios,
            nbar_a=req.nbar_a,
            config=config,
        )
    except (InvalidStateError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    value_key = {
        "fig3": "delta_n_max",
        "fig4": "contribution_max",
        "fig5": "delta_n_max",
        "fig6": "with_demon_max",
        "fig7": "delta_n_max",
    }[name]
    ok = all(row[value_key] is not None for row in rows)
    return schemas.RowsResponse(fields=list(fields), rows=rows, ok=ok)
