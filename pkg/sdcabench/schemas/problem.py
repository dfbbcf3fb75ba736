from pydantic import BaseModel, Field, model_validator
from typing import Literal, Optional


class SynthSpec(BaseModel):
    family: Literal["lasso", "group", "corrected", "scad"]
    n: int = Field(gt=0)
    p: int = Field(gt=0)
    s: int = Field(default=0, ge=0)
    group_size: Optional[int] = Field(default=None, gt=0)
    n_groups: Optional[int] = Field(default=None, gt=0)
    group_sparsity: Optional[int] = Field(default=None, ge=0)
    b: float = Field(default=0.0, ge=0.0, lt=1.0)
    sigma: float = Field(default=1.0, ge=0.0)
    correction: float = Field(default=0.0, ge=0.0)
    seed: int = 0

    @model_validator(mode="after")
    def check_shape(self):
        if self.s > self.p:
            raise ValueError(f"sparsity s={self.s} exceeds p={self.p}")
        if self.family == "group":
            if self.group_size is None or self.n_groups is None or self.group_sparsity is None:
                raise ValueError("group family needs group_size, n_groups and group_sparsity")
            if self.group_size * self.n_groups != self.p:
                raise ValueError("group_size * n_groups must equal p")
            if self.group_sparsity > self.n_groups:
                raise ValueError("group_sparsity exceeds n_groups")
        return self


class ProblemConfig(BaseModel):
    synth: Optional[SynthSpec] = None
    dataset_path: Optional[str] = None
    n_features: Optional[int] = Field(default=None, gt=0)
    normalize: bool = False

    loss: Literal["squared", "logistic"] = "squared"
    regularizer: Literal["l1", "group", "scad", "elastic"] = "l1"
    # contiguous groups of this size for loaded data; synthetic group data uses its own layout
    group_size: Optional[int] = Field(default=None, gt=0)
    polynomial_degree: Optional[int] = Field(default=None, gt=0)

    # None: use recommend_lambda for synthetic data
    lam: Optional[float] = Field(default=None, gt=0.0)
    lam_tilde: float = Field(default=0.25, gt=0.0)
    zeta: float = Field(default=3.7, gt=2.0)
    # None: take the synthetic corruption variance (0 for loaded data)
    correction: Optional[float] = Field(default=None, ge=0.0)
    # None encodes an infinite radius
    rho: Optional[float] = Field(default=None, gt=0.0)
    mode: Literal["split", "direct"] = "split"

    @model_validator(mode="after")
    def check_source(self):
        if (self.synth is None) == (self.dataset_path is None):
            raise ValueError("exactly one of synth or dataset_path must be given")
        if self.mode == "direct" and self.regularizer != "elastic":
            raise ValueError("direct mode needs the 1-strongly convex elastic regularizer")
        if self.dataset_path is not None and self.lam is None:
            raise ValueError("lam is required for loaded datasets")
        return self
