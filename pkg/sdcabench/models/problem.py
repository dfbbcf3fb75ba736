"""The regularized ERM problem min F(w) = (1/n) sum f_i(w) - (gamma/2)||w||^2 + penalty(w)."""
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import svds

from sdcabench.core.errors import ContractError
from sdcabench.models.dataset import Dataset
from sdcabench.models.loss import LossModel, full_objective, smooth_gradient, smoothness_all
from sdcabench.models.regularizer import Regularizer


def spectral_norm_sq(X) -> float:
    """Largest eigenvalue of X'X, computed deterministically."""
    if min(X.shape) == 0:
        return 0.0
    if min(X.shape) <= 2:
        dense = X.toarray() if sp.issparse(X) else np.asarray(X)
        return float(np.linalg.norm(dense, 2) ** 2)
    k = min(X.shape)
    v0 = np.full(k, 1.0 / math.sqrt(k))
    top = svds(X, k=1, v0=v0, return_singular_vectors=False)
    return float(top[0] ** 2)


@dataclass(frozen=True)
class ProblemSpec:
    loss: LossModel
    reg: Regularizer
    lam: float
    dataset: Dataset
    rho: float = math.inf

    def __post_init__(self):
        if not self.lam > 0:
            raise ContractError("regularization level lam must be > 0")
        if not self.rho > 0:
            raise ContractError("constraint radius rho must be > 0")
        if not self.reg.convex:
            if not math.isclose(getattr(self.reg, "lam", self.lam), self.lam, rel_tol=1e-15, abs_tol=0.0):
                raise ContractError(
                    f"nonconvex regularizer level {self.reg.lam} differs from problem lam {self.lam}")
            if not math.isinf(self.rho):
                raise ContractError("finite radius is only supported for convex regularizers")

    @property
    def n(self) -> int:
        return self.dataset.n

    @property
    def p(self) -> int:
        return self.dataset.p

    @property
    def mu(self) -> float:
        """Total concave curvature carried by the objective (regularizer plus loss correction)."""
        return self.reg.mu + self.loss.correction

    @cached_property
    def smoothness(self) -> np.ndarray:
        return smoothness_all(self.loss, self.dataset)

    @cached_property
    def lipschitz(self) -> float:
        """Gradient Lipschitz constant of the smooth part (1/n)sum f_i - (gamma/2)||w||^2."""
        if self.n == 0:
            return self.loss.correction
        top = self.loss.curvature_bound * spectral_norm_sq(self.dataset.X) / self.n
        return max(top, self.loss.correction)

    def objective(self, w: np.ndarray) -> float:
        return full_objective(self.loss, self.dataset, w, self.reg, self.lam)

    def smooth_gradient(self, w: np.ndarray) -> np.ndarray:
        return smooth_gradient(self.loss, self.dataset, w)

    def penalty_prox(self, v: np.ndarray, step: float) -> np.ndarray:
        return self.reg.penalty_prox(v, step, self.lam, self.rho)

    def prox_grad_step(self, w: np.ndarray, step: float) -> np.ndarray:
        return self.penalty_prox(w - step * self.smooth_gradient(w), step)

    def stationarity_residual(self, w: np.ndarray, step: float = None) -> float:
        """||w - prox_{step*penalty}(w - step * grad f(w))||, with step 1/L by default."""
        w = np.asarray(w, dtype=float)
        if step is None:
            step = 1.0 / self.lipschitz if self.lipschitz > 0 else 1.0
        return float(np.linalg.norm(w - self.prox_grad_step(w, step)))


def stationarity_residual(spec: ProblemSpec, w: np.ndarray, step: float = None) -> float:
    return spec.stationarity_residual(w, step)
