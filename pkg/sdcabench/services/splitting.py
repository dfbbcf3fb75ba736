"""Rewrite F(w) as (1/N) sum_i phi_i(w) + lam_tilde * g~(w) with a strongly convex g~.

Split mode (N = n + 1):
    phi_i = ((n+1)/n) f_i for i < n,
    phi_N(w) = -((lam_tilde + mu) N / 2)||w||^2,
    g~(w) = 1/2||w||^2 + (lam/lam_tilde) r(w),
where r is the convex regularizer (or d_lam for SCAD) and mu collects the concave curvature of
the regularizer and of the loss correction.

Direct mode (N = n) keeps the losses unscaled and takes g~ = g for a 1-strongly convex g.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Literal, Optional, Sequence

import numpy as np

from sdcabench.core.errors import ContractError, MisuseError
from sdcabench.models.problem import ProblemSpec
from sdcabench.models.regularizer import ElasticReg, Regularizer
from sdcabench.utils.rng import cumulative

logger = logging.getLogger(__name__)

LAMBDA_TILDE_FLOOR = 1e-12


@dataclass(frozen=True)
class Composite:
    """g~(w) = 1/2||w||^2 + scale * reg.split_value(w), optionally under reg.split_value(w) <= rho."""
    reg: Regularizer
    scale: float
    rho: float = math.inf

    def value(self, w: np.ndarray) -> float:
        w = np.asarray(w, dtype=float)
        base = self.reg.split_value(w) if self.scale else 0.0
        return 0.5 * float(w @ w) + self.scale * base

    def prox_step(self, v: np.ndarray) -> np.ndarray:
        """argmax_w <w, v> - g~(w), the gradient of the conjugate at v."""
        return self.reg.split_prox(v, self.scale, self.rho)


@dataclass(frozen=True)
class SplitProblem:
    spec: ProblemSpec
    mode: Literal["split", "direct"]
    lam_tilde: float
    mu: float
    scale: float
    composite: Composite
    L: np.ndarray
    Q: np.ndarray
    eta: float
    advisories: List[str] = field(default_factory=list)

    def __post_init__(self):
        for name in ("L", "Q"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "cdf", cumulative(self.Q))

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def N(self) -> int:
        return len(self.L)

    @property
    def has_augmentation(self) -> bool:
        return self.mode == "split"

    @property
    def aug_strength(self) -> float:
        """(lam_tilde + mu) * N, so that grad phi_N(w) = -aug_strength * w."""
        return (self.lam_tilde + self.mu) * self.N

    @property
    def L_bar(self) -> float:
        return float(np.mean(self.L))

    def with_step(self, eta: float) -> "SplitProblem":
        if not eta > 0:
            raise ContractError("step size must be > 0")
        return SplitProblem(spec=self.spec, mode=self.mode, lam_tilde=self.lam_tilde, mu=self.mu,
                            scale=self.scale, composite=self.composite, L=self.L, Q=self.Q,
                            eta=float(eta), advisories=list(self.advisories))

    def component_value(self, i: int, w: np.ndarray) -> float:
        w = np.asarray(w, dtype=float)
        if i < self.n:
            margin = self.spec.dataset.rows.dot(i, w)
            return self.scale * float(self.spec.loss.values(np.array([margin]), self.spec.dataset.y[i:i + 1])[0])
        if self.has_augmentation and i == self.n:
            return -0.5 * self.aug_strength * float(w @ w)
        raise ContractError(f"component index {i} out of range [0, {self.N})")

    def coefficient(self, i: int, w: np.ndarray) -> float:
        """c with grad phi_i(w) = c * x_i, for sample components i < n."""
        d = self.spec.dataset
        return self.scale * self.spec.loss.coefficient(d.rows.dot(i, w), float(d.y[i]))

    def coefficients(self, w: np.ndarray) -> np.ndarray:
        d = self.spec.dataset
        return self.scale * self.spec.loss.coefficients(d.margins(w), d.y)

    def objective(self, w: np.ndarray) -> float:
        """(1/N) sum_i phi_i(w) + lam_tilde * g~(w)."""
        w = np.asarray(w, dtype=float)
        d = self.spec.dataset
        total = self.scale * float(np.sum(self.spec.loss.values(d.margins(w), d.y)))
        if self.has_augmentation:
            total -= 0.5 * self.aug_strength * float(w @ w)
        return total / self.N + self.lam_tilde * self.composite.value(w)

    def original_objective(self, w: np.ndarray) -> float:
        return self.spec.objective(w)


def sampling_distribution(L: Sequence[float]) -> np.ndarray:
    L = np.asarray(L, dtype=float)
    if L.ndim != 1 or L.size == 0:
        raise ContractError("smoothness list must be a nonempty 1-d sequence")
    if np.any(L < 0) or not np.all(np.isfinite(L)):
        raise ContractError("smoothness constants must be finite and >= 0")
    N = L.size
    L_bar = float(np.mean(L))
    if L_bar == 0.0:
        logger.warning("all smoothness constants are zero; falling back to uniform sampling")
        return np.full(N, 1.0 / N)
    Q = (L + L_bar) / (2.0 * N * L_bar)
    return Q / Q.sum()


def max_step_size(lam_tilde: float, L_bar: float, N: int) -> float:
    if lam_tilde <= 0 or L_bar <= 0 or N < 1:
        raise ContractError("max_step_size needs lam_tilde > 0, L_bar > 0 and N >= 1")
    first = 1.0 / (16.0 * (lam_tilde + L_bar))
    second = 1.0 / (4.0 * lam_tilde * N) if lam_tilde >= LAMBDA_TILDE_FLOOR else math.inf
    return min(first, second)


def max_step_size_direct(lam: float, L_bar: float, n: int, convex_components: bool = True) -> float:
    """Step rule for the unsplit method with a 1-strongly convex regularizer."""
    if lam <= 0 or L_bar <= 0 or n < 1:
        raise ContractError("max_step_size_direct needs lam > 0, L_bar > 0 and n >= 1")
    first = 1.0 / (4.0 * L_bar) if convex_components else lam / (4.0 * L_bar * L_bar)
    return min(first, 1.0 / (4.0 * lam * n))


def _build(spec: ProblemSpec, lam_tilde: float, mu: float, eta: Optional[float],
           advisories: List[str]) -> SplitProblem:
    n = spec.n
    if n < 1:
        raise ContractError("splitting needs at least one sample")
    N = n + 1
    scale = N / n
    L = np.append(scale * spec.smoothness, (lam_tilde + mu) * N)
    Q = sampling_distribution(L)
    step = eta if eta is not None else max_step_size(lam_tilde, float(np.mean(L)), N)
    composite = Composite(reg=spec.reg, scale=spec.lam / lam_tilde, rho=spec.rho)
    sp = SplitProblem(spec=spec, mode="split", lam_tilde=float(lam_tilde), mu=float(mu), scale=scale,
                      composite=composite, L=L, Q=Q, eta=float(step), advisories=advisories)
    logger.debug("split problem: N=%d lam_tilde=%g mu=%g eta=%.3e", N, lam_tilde, mu, sp.eta)
    return sp


def split_convex(spec: ProblemSpec, lam_tilde: float, eta: Optional[float] = None) -> SplitProblem:
    if lam_tilde <= 0:
        raise ContractError("lam_tilde must be > 0")
    if not spec.reg.convex:
        raise MisuseError("nonconvex regularizer: use split_nonconvex")
    if spec.loss.correction > 0:
        raise MisuseError("loss carries a correction term (gamma > 0): use split_nonconvex")
    return _build(spec, lam_tilde, 0.0, eta, [])


def split_nonconvex(spec: ProblemSpec, lam_tilde: float, eta: Optional[float] = None) -> SplitProblem:
    if lam_tilde <= 0:
        raise ContractError("lam_tilde must be > 0")
    mu = spec.mu
    advisories = []
    if mu >= lam_tilde:
        message = (f"augmentation strength mu={mu:.4g} is not below lam_tilde={lam_tilde:.4g}; "
                   "convergence relies on restricted strong convexity of the loss")
        logger.warning(message)
        advisories.append(message)
    return _build(spec, lam_tilde, mu, eta, advisories)


def split_direct(spec: ProblemSpec, eta: Optional[float] = None) -> SplitProblem:
    """Run on F = (1/n) sum f_i + lam * g directly, for g = 1/2||w||^2 + r(w)."""
    if not isinstance(spec.reg, ElasticReg):
        raise MisuseError("direct mode needs a 1-strongly convex regularizer (ElasticReg)")
    if spec.loss.correction > 0:
        raise MisuseError("direct mode needs convex losses; the correction term requires splitting")
    if not math.isinf(spec.rho):
        raise ContractError("direct mode does not support a finite radius")
    n = spec.n
    if n < 1:
        raise ContractError("direct mode needs at least one sample")
    L = np.array(spec.smoothness, dtype=float)
    Q = sampling_distribution(L)
    L_bar = float(np.mean(L))
    if eta is None:
        eta = max_step_size_direct(spec.lam, L_bar, n) if L_bar > 0 else 1.0 / (4.0 * spec.lam * n)
    composite = Composite(reg=spec.reg.base, scale=1.0)
    return SplitProblem(spec=spec, mode="direct", lam_tilde=float(spec.lam), mu=0.0, scale=1.0,
                        composite=composite, L=L, Q=Q, eta=float(eta), advisories=[])


def recommend_lambda(family: str, *, sigma: float, n: int, p: Optional[int] = None,
                     group_size: Optional[int] = None, n_groups: Optional[int] = None,
                     sigma_max: float = 1.0, correction: float = 0.0, w_norm: float = 0.0,
                     rho: float = math.inf) -> float:
    """Lower bound on lam suggested by the statistical-rate corollaries (natural logarithm).

    The radius-dependent branch (lam >= c * tau * rho, c unspecified) is not evaluated; ``rho``
    is accepted for interface completeness only.  The corrected family takes the unknown
    universal constant as 1.
    """
    if n < 1 or sigma < 0:
        raise ContractError("recommend_lambda needs n >= 1 and sigma >= 0")
    if family in ("lasso", "scad", "corrected"):
        if p is None or p < 1:
            raise ContractError(f"{family} recommendation needs p >= 1")
        root = math.sqrt(math.log(p) / n)
        if family == "lasso":
            return 6.0 * sigma * root
        if family == "scad":
            return 12.0 * sigma * root
        phi = (math.sqrt(sigma_max) + math.sqrt(correction)) * (sigma + math.sqrt(correction) * w_norm)
        return phi * root
    if family == "group":
        if not group_size or not n_groups:
            raise ContractError("group recommendation needs group_size and n_groups")
        return 4.0 * sigma * (math.sqrt(group_size / n) + math.sqrt(math.log(n_groups) / n))
    raise ContractError(f"unknown model family {family!r}")
