"""Request and response models for the HTTP service."""

from __future__ import annotations

from typing import Literal, Optional, Union

from pydantic import BaseModel, Field, model_validator


class UncorrelatedFamily(BaseModel):
    kind: Literal["uncorrelated"] = "uncorrelated"
    nbar_a: float = Field(..., gt=0, description="Mean photon number of mode a")
    nbar_b: float = Field(..., gt=0, description="Mean photon number of mode b")


class SplitFamily(BaseModel):
    kind: Literal["split"] = "split"
    nbar_in: float = Field(..., gt=0, description="Mean photon number entering the splitter")
    theta: float = Field(..., ge=0, description="Splitter angle; reflectance is sin(theta)**2")


class TmssFamily(BaseModel):
    kind: Literal["tmss"] = "tmss"
    nbar: float = Field(..., gt=0, description="Common marginal mean photon number")


class NoonFamily(BaseModel):
    kind: Literal["noon"] = "noon"
    m: int = Field(..., ge=0, description="Photon count of the anticorrelated mixture")


class AnticorrThermalFamily(BaseModel):
    kind: Literal["anticorr-thermal"] = "anticorr-thermal"
    nbar: float = Field(..., gt=0, le=1, description="Thermal marginal mean (at most 1)")


StateFamily = Union[UncorrelatedFamily, SplitFamily, TmssFamily, NoonFamily, AnticorrThermalFamily]


class DemonParamsModel(BaseModel):
    r: Optional[float] = Field(None, ge=0, le=1, description="Common splitter reflectance")
    r_a: Optional[float] = Field(None, ge=0, le=1)
    r_b: Optional[float] = Field(None, ge=0, le=1)
    eta_a: float = Field(..., ge=0, le=1, description="Counter efficiency on mode a")
    eta_b: float = Field(..., ge=0, le=1, description="Counter efficiency on mode b")

    @model_validator(mode="after")
    def _one_reflectance_mode(self) -> "DemonParamsModel":
        independent = self.r_a is not None or self.r_b is not None
        if self.r is None and not (self.r_a is not None and self.r_b is not None):
            raise ValueError("set either r or both r_a and r_b")
        if self.r is not None and independent:
            raise ValueError("r and r_a/r_b are mutually exclusive")
        return self


class OutcomeReportModel(BaseModel):
    outcome: tuple[int, int]
    prob: float
    mean_a: float
    mean_b: float
    delta: float
    defined: bool


class StateSummary(BaseModel):
    cutoff: int
    tail_mass: float
    support_size: int
    norm: float
    nbar_a: float
    nbar_b: float


class EvalRequest(BaseModel):
    family: StateFamily = Field(..., discriminator="kind")
    params: DemonParamsModel
    strategy_mask: Optional[int] = Field(
        None, ge=0, le=15,
        description="Polarity bits, bit i flips outcome ((0,0),(0,1),(1,0),(1,1))[i]; omit for the best strategy",
    )
    eps_tail: float = Field(1e-12, gt=0, le=1e-6)
    include_state: bool = Field(False, description="Include the state lattice in the response")
    max_state_rows: int = Field(100_000, gt=0)


class EvalResponse(BaseModel):
    reports: list[OutcomeReportModel]
    strategy_mask: int
    delta_n: float
    best_strategy_mask: int
    best_value: float
    baseline: float
    contribution: float
    state: StateSummary
    state_rows: Optional[list[tuple[int, int, float]]] = None


class OptimizeRequest(BaseModel):
    family: StateFamily = Field(..., discriminator="kind")
    objective: Literal["total-delta", "demon-contribution"] = "total-delta"
    common_r: bool = True
    fixed_strategy_mask: Optional[int] = Field(None, ge=0, le=15)
    seed: int = 0
    n_starts: int = Field(16, ge=1, le=256)
    grid_points: int = Field(9, ge=2, le=21)
    budget: int = Field(10_000, ge=10, le=10_000_000, description="Evaluation cap per descent")
    eps_tail: float = Field(1e-12, gt=0, le=1e-6)
    include_trace: bool = False


class OptimizeResponse(BaseModel):
    value: float
    params: DemonParamsModel
    strategy_mask: int
    evaluations: int
    converged: bool
    starts: int
    objective: str
    trace: Optional[list[list[float]]] = None


class PassivityRequest(BaseModel):
    family: StateFamily = Field(..., discriminator="kind")
    nbar_bath: float = Field(..., gt=0)
    tol: float = Field(1e-9, gt=0)
    eps_tail: float = Field(1e-12, gt=0, le=1e-6)


class PassivityResponse(BaseModel):
    passive: bool
    reason: Literal["means-differ", "mean-differs-from-bath", "passive"]
    nbar_a: float
    nbar_b: float
    nbar_bath: float


class TableRequest(BaseModel):
    seed: int = 0
    eps_tail: float = Field(1e-12, gt=0, le=1e-6)
    n_starts: int = Field(16, ge=1, le=256)
    budget: int = Field(10_000, ge=10, le=10_000_000)


class RowsResponse(BaseModel):
    fields: list[str]
    rows: list[dict]
    ok: bool = True


class FigureRequest(BaseModel):
    grid: Optional[list[float]] = Field(None, description="Grid values; figure default when omitted")
    ratios: Optional[list[float]] = Field(None, description="Mean ratios (ratio-family figure only)")
    nbar_a: float = Field(1e4, gt=0, description="Fixed reference mean (backflow figure only)")
    seed: int = 0
    eps_tail: float = Field(1e-12, gt=0, le=1e-6)
    n_starts: Optional[int] = Field(None, ge=1, le=256)
    grid_points: Optional[int] = Field(None, ge=2, le=21)
    budget: Optional[int] = Field(None, ge=10, le=10_000_000)


class HealthResponse(BaseModel):
    status: str
    version: str
