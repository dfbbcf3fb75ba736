from pydantic import BaseModel, Field, model_validator
from typing import Any, Dict, List, Literal, Optional

from sdcabench.core.config import settings
from sdcabench.schemas.problem import ProblemConfig

SolverName = Literal["sdca", "prox_gd", "prox_sgd", "rda", "prox_svrg", "saga", "prox_sag"]
CONSTANT_RATE_SOLVERS = ("sdca", "prox_gd", "prox_svrg", "saga", "prox_sag")


class BaselineConfig(BaseModel):
    """Resolved parameters of one baseline run.

    ``step`` is the fixed rate for constant-rate solvers, eta_0 for Prox-SGD
    (eta_k = eta_0 / sqrt(k)) and beta_0 for RDA (beta_k = beta_0 * sqrt(k)).
    """
    solver: SolverName
    step: float = Field(gt=0.0)
    inner_loop: Optional[int] = Field(default=None, ge=1)
    epochs: int = Field(ge=1)
    seed: int = 0


class SolverConfig(BaseModel):
    name: SolverName
    step: Optional[float] = Field(default=None, gt=0.0)
    tune: bool = False
    inner_loop: Optional[int] = Field(default=None, ge=1)
    potentials: bool = False
    init_policy: Literal["zero", "gradient"] = "zero"


class ReferenceConfig(BaseModel):
    tol: float = Field(default=settings.REFERENCE_TOL, gt=0.0)
    max_iter: int = Field(default=settings.REFERENCE_MAX_ITER, ge=1)
    accept_inexact: bool = True


class ExperimentConfig(BaseModel):
    name: str = "experiment"
    problem: ProblemConfig
    solvers: List[SolverConfig] = Field(min_length=1)
    epochs: int = Field(default=100, ge=1)
    seeds: List[int] = Field(default_factory=lambda: [0], min_length=1)
    gap_tol: Optional[float] = Field(default=None, gt=0.0)
    reference: ReferenceConfig = Field(default_factory=ReferenceConfig)
    output_dir: Optional[str] = None

    @model_validator(mode="after")
    def check_solvers(self):
        names = [s.name for s in self.solvers]
        if len(set(names)) != len(names):
            raise ValueError(f"solver names must be unique, got {names}")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be unique")
        for solver in self.solvers:
            if solver.tune and solver.name not in CONSTANT_RATE_SOLVERS:
                raise ValueError(f"{solver.name} uses a decaying schedule and cannot be grid-tuned")
            if solver.tune and solver.step is not None:
                raise ValueError(f"{solver.name}: give either a step or tune, not both")
            if solver.name != "sdca" and (solver.potentials or solver.init_policy != "zero"):
                raise ValueError(f"{solver.name}: potentials and init policies apply to sdca only")
        return self


class RunRecord(BaseModel):
    solver: str
    seed: int
    step: Optional[float] = None
    csv: Optional[str] = None
    status: Literal["ok", "diverged", "error"] = "ok"
    message: Optional[str] = None
    epochs_run: float = 0.0
    final_objective: Optional[float] = None
    final_gap: Optional[float] = None
    # per-epoch contraction of the gap fitted above the reference noise floor
    rate: Optional[float] = None
    rate_r_squared: Optional[float] = None


class ReferenceInfo(BaseModel):
    objective: float
    residual: float
    exact: bool
    note: Optional[str] = None


class Manifest(BaseModel):
    config: ExperimentConfig
    resolved: Dict[str, Any]
    reference: ReferenceInfo
    runs: List[RunRecord]
    advisories: List[str] = Field(default_factory=list)


class RunResponse(BaseModel):
    run_id: str
    manifest: Manifest


class TuneRequest(BaseModel):
    config: ExperimentConfig
    solver: SolverName


class TuneResponse(BaseModel):
    solver: str
    step: float


class PresetInfo(BaseModel):
    name: str
    needs_dataset: bool
