"""Reference solutions, conjugate values, potentials and empirical rate fits."""
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

from sdcabench.core.config import settings
from sdcabench.core.errors import ContractError, InsufficientDataError, ReferenceQualityError
from sdcabench.models.problem import ProblemSpec
from sdcabench.models.trace import Trace
from sdcabench.services.splitting import Composite, SplitProblem

logger = logging.getLogger(__name__)

MIN_FIT_POINTS = 5


@dataclass(frozen=True)
class Reference:
    w: np.ndarray
    v: np.ndarray
    alpha: np.ndarray
    aug: Optional[np.ndarray]
    objective: float
    residual: float
    exact: bool
    conjugate: float


class Potentials(NamedTuple):
    A: float
    B: float
    C: float


class RateFit(NamedTuple):
    rate: float
    r_squared: float
    n_points: int


def solve_original(spec: ProblemSpec, tol: Optional[float] = None, max_iter: Optional[int] = None,
                   w0: Optional[np.ndarray] = None):
    """Prox-GD with step 1/L until ||w_{k+1} - w_k|| <= tol; returns (w, residual, iterations)."""
    tol = settings.REFERENCE_TOL if tol is None else tol
    max_iter = settings.REFERENCE_MAX_ITER if max_iter is None else max_iter
    step = 1.0 / spec.lipschitz if spec.lipschitz > 0 else 1.0
    w = np.zeros(spec.p) if w0 is None else np.array(w0, dtype=float)
    residual = math.inf
    k = 0
    for k in range(1, max_iter + 1):
        w_next = spec.prox_grad_step(w, step)
        residual = float(np.linalg.norm(w_next - w))
        w = w_next
        if residual <= tol or not math.isfinite(residual):
            break
    return w, residual, k


def conjugate_value(composite: Composite, v: np.ndarray) -> float:
    """g~*(v) = <w_bar, v> - g~(w_bar) with w_bar the prox step at v."""
    v = np.asarray(v, dtype=float)
    w_bar = composite.prox_step(v)
    return float(w_bar @ v) - composite.value(w_bar)


def reference_from_point(sp: SplitProblem, w: np.ndarray, residual: float = 0.0,
                         exact: bool = True) -> Reference:
    """Assemble the optimal pseudo-duals a_j = -grad phi_j(w) and their aggregate."""
    w = np.array(w, dtype=float)
    alpha = -sp.coefficients(w)
    aug = sp.aug_strength * w if sp.has_augmentation else None
    total = sp.spec.dataset.rmatvec(alpha)
    if aug is not None:
        total = total + aug
    v = total / (sp.lam_tilde * sp.N)
    for arr in (w, v, alpha) + ((aug,) if aug is not None else ()):
        arr.setflags(write=False)
    return Reference(w=w, v=v, alpha=alpha, aug=aug, objective=sp.original_objective(w),
                     residual=float(residual), exact=exact, conjugate=conjugate_value(sp.composite, v))


def compute_reference(sp: SplitProblem, tol: Optional[float] = None, max_iter: Optional[int] = None,
                      w0: Optional[np.ndarray] = None) -> Reference:
    tol = settings.REFERENCE_TOL if tol is None else tol
    w, residual, iterations = solve_original(sp.spec, tol, max_iter, w0)
    exact = residual <= tol
    reference = reference_from_point(sp, w, residual, exact)
    logger.info("reference after %d prox-gd iterations: F=%.17g residual=%.3e",
                iterations, reference.objective, residual)
    if not exact:
        raise ReferenceQualityError(residual, reference)
    return reference


def potentials(state, ref: Reference, sp: SplitProblem) -> Potentials:
    """A, B, C for any object carrying ``alpha``, ``aug`` and ``v``."""
    norms = sp.spec.dataset.row_norms_sq
    diff = np.asarray(state.alpha) - ref.alpha
    A = float(np.sum(diff * diff * norms / sp.Q[:sp.n]))
    if sp.has_augmentation:
        delta = np.asarray(state.aug) - ref.aug
        A += float(delta @ delta) / sp.Q[sp.n]
    v = np.asarray(state.v, dtype=float)
    B = 2.0 * (conjugate_value(sp.composite, v) - float(ref.w @ (v - ref.v)) - ref.conjugate)
    C = sp.eta / sp.N ** 2 * A + 0.5 * sp.lam_tilde * B
    return Potentials(A, B, C)


def default_floor(reference: Optional[Reference] = None) -> float:
    """Gap level below which a trace is noise: three reference residuals, at least RATE_FIT_FLOOR."""
    if reference is None:
        return settings.RATE_FIT_FLOOR
    return max(settings.RATE_FIT_FLOOR, 3.0 * reference.residual)


def fit_linear_rate(values: Union[Trace, Sequence[float]], floor: Optional[float] = None,
                    ceiling: float = math.inf, epochs: Optional[Sequence[float]] = None,
                    reference: Optional[Reference] = None) -> RateFit:
    """Least-squares fit of log(values) against epochs over the points in (floor, ceiling].

    ``floor`` defaults to ``default_floor(reference)``.

    Returns the per-epoch contraction exp(slope) and the R^2 of the fit.
    """
    if isinstance(values, Trace):
        epochs = values.epochs if epochs is None else epochs
        values = values.gaps
    y = np.asarray(values, dtype=float)
    x = np.arange(y.size, dtype=float) if epochs is None else np.asarray(epochs, dtype=float)
    if x.shape != y.shape:
        raise ContractError("epochs and values must have the same length")
    floor = default_floor(reference) if floor is None else floor
    keep = np.isfinite(y) & (y > floor) & (y <= ceiling)
    if int(keep.sum()) < MIN_FIT_POINTS:
        raise InsufficientDataError(
            f"need at least {MIN_FIT_POINTS} points above floor {floor:g}, got {int(keep.sum())}")
    x, logs = x[keep], np.log(y[keep])
    if np.ptp(logs) == 0.0:
        return RateFit(1.0, 1.0, int(keep.sum()))
    slope, intercept = np.polyfit(x, logs, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((logs - fitted) ** 2))
    ss_tot = float(np.sum((logs - logs.mean()) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return RateFit(float(np.exp(slope)), r_squared, int(keep.sum()))
