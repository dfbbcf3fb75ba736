"""Per-sample smooth losses f_i(w) = loss(x_i'w, y_i).

Every gradient is colinear with its row: grad f_i(w) = c_i(w) * x_i, so solvers only ever
store the scalar coefficient c_i.  The corrected-Lasso term -(gamma/2)||w||^2 is never part of
a per-sample loss; it is added by ``full_objective`` and by the splitting layer.
"""
from dataclasses import dataclass
from typing import Callable, Literal, Optional

import numpy as np
from scipy.special import expit

from sdcabench.core.config import settings
from sdcabench.core.errors import ContractError
from sdcabench.models.dataset import Dataset

ScalarFn = Callable[[np.ndarray], np.ndarray]
LossKind = Literal["squared", "logistic", "glm"]


def curvature_grid() -> np.ndarray:
    return np.linspace(-settings.GLM_GRID_LIMIT, settings.GLM_GRID_LIMIT, settings.GLM_GRID_POINTS)


@dataclass(frozen=True)
class LossModel:
    kind: LossKind = "squared"
    correction: float = 0.0
    phi: Optional[ScalarFn] = None
    phi_prime: Optional[ScalarFn] = None
    phi_second: Optional[ScalarFn] = None

    def __post_init__(self):
        if self.kind not in ("squared", "logistic", "glm"):
            raise ContractError(f"unknown loss kind {self.kind!r}")
        if self.correction < 0:
            raise ContractError("correction strength must be >= 0")
        if self.kind == "glm":
            if self.phi is None or self.phi_prime is None or self.phi_second is None:
                raise ContractError("glm losses need phi, phi_prime and phi_second")
            curvature = np.asarray(self.phi_second(curvature_grid()), dtype=float)
            if np.any(curvature < 0) or not np.all(np.isfinite(curvature)):
                raise ContractError("glm link is not convex on the curvature grid (phi'' < 0)")

    @classmethod
    def squared(cls, correction: float = 0.0) -> "LossModel":
        return cls(kind="squared", correction=correction)

    @classmethod
    def logistic(cls) -> "LossModel":
        return cls(kind="logistic")

    @classmethod
    def glm(cls, phi: ScalarFn, phi_prime: ScalarFn, phi_second: ScalarFn) -> "LossModel":
        return cls(kind="glm", phi=phi, phi_prime=phi_prime, phi_second=phi_second)

    def values(self, margins: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self.kind == "squared":
            return 0.5 * (y - margins) ** 2
        if self.kind == "logistic":
            return np.logaddexp(0.0, -y * margins)
        return np.asarray(self.phi(margins), dtype=float) - y * margins

    def coefficients(self, margins: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self.kind == "squared":
            return margins - y
        if self.kind == "logistic":
            return -y * expit(-y * margins)
        return np.asarray(self.phi_prime(margins), dtype=float) - y

    def coefficient(self, margin: float, label: float) -> float:
        """Scalar fast path of ``coefficients`` for the stochastic inner loops."""
        if self.kind == "squared":
            return margin - label
        if self.kind == "logistic":
            return -label * float(expit(-label * margin))
        return float(self.phi_prime(np.asarray(margin))) - label

    @property
    def curvature_bound(self) -> float:
        """sup of the second derivative of the scalar link."""
        if self.kind == "squared":
            return 1.0
        if self.kind == "logistic":
            return 0.25
        return float(np.max(self.phi_second(curvature_grid())))


def _check_index(d: Dataset, i: int) -> None:
    if not 0 <= i < d.n:
        raise ContractError(f"sample index {i} out of range [0, {d.n})")


def loss_value(m: LossModel, d: Dataset, i: int, w: np.ndarray) -> float:
    _check_index(d, i)
    margin = d.rows.dot(i, w)
    return float(m.values(np.array([margin]), d.y[i:i + 1])[0])


def grad_coeff(m: LossModel, d: Dataset, i: int, w: np.ndarray) -> float:
    _check_index(d, i)
    return m.coefficient(d.rows.dot(i, w), float(d.y[i]))


def smoothness(m: LossModel, d: Dataset, i: int) -> float:
    _check_index(d, i)
    return m.curvature_bound * float(d.row_norms_sq[i])


def smoothness_all(m: LossModel, d: Dataset) -> np.ndarray:
    return m.curvature_bound * d.row_norms_sq


def mean_loss(m: LossModel, d: Dataset, w: np.ndarray) -> float:
    if d.n == 0:
        return 0.0
    return float(np.mean(m.values(d.margins(w), d.y)))


def smooth_gradient(m: LossModel, d: Dataset, w: np.ndarray) -> np.ndarray:
    """Gradient of (1/n) sum f_i(w) - (gamma/2)||w||^2."""
    coef = m.coefficients(d.margins(w), d.y)
    return d.rmatvec(coef) / d.n - m.correction * w


def full_objective(m: LossModel, d: Dataset, w: np.ndarray, reg, lam: float) -> float:
    """(1/n) sum f_i(w) - (gamma/2)||w||^2 + penalty.

    For convex regularizers the penalty is ``lam * reg(w)``; for nonconvex ones it is the
    regularizer's own d_{lambda,mu}(w).
    """
    w = np.asarray(w, dtype=float)
    return mean_loss(m, d, w) - 0.5 * m.correction * float(w @ w) + reg.penalty(w, lam)
