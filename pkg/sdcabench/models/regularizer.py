"""Regularizers and their proximal operators.

``prox(v, c)`` always returns argmin_w 1/2||w - v||^2 + c * r(w).  Every operator is applied
per coordinate or per group so a proximal step costs O(p).

Convex regularizers (``L1Reg``, ``GroupReg``, ``ElasticReg``) enter the objective as
``lam * r(w)``.  ``ScadReg`` carries its own level and enters as sum_j SCAD(w_j); it is split as
lam * d_lam(w) - (mu/2)||w||^2 with the convex d_lam = (SCAD + (mu/2)t^2) / lam.
"""
import math
from abc import ABC, abstractmethod
from typing import Callable, Optional, Sequence

import numpy as np

from sdcabench.core.config import settings
from sdcabench.core.errors import ContractError, NumericalError
from sdcabench.schemas.reports import AssumptionReport


def soft_threshold(v: np.ndarray, c: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - c, 0.0)


def _bisect_threshold(prox: Callable[[np.ndarray, float], np.ndarray],
                      value: Callable[[np.ndarray], float],
                      v: np.ndarray, c: float, rho: float,
                      zero_threshold: Optional[float] = None,
                      max_iter: Optional[int] = None, tol: Optional[float] = None) -> np.ndarray:
    """Raise the prox threshold from c to c + theta* until value(prox) <= rho.

    value(prox(v, c + theta)) is nonincreasing in theta, so theta* is found by bisection on
    the scalar dual; the feasible end of the final bracket is returned.
    """
    max_iter = max_iter or settings.BISECTION_MAX_ITER
    tol = tol or settings.BISECTION_TOL
    if rho <= 0:
        raise ContractError("constraint radius must be > 0")
    w = prox(v, c)
    if math.isinf(rho) or value(w) <= rho:
        return w

    if zero_threshold is not None:
        hi = max(zero_threshold - c, 0.0)
    else:
        hi = max(c, 1.0)
        for _ in range(max_iter):
            if value(prox(v, c + hi)) <= rho:
                break
            hi *= 2.0
        else:
            raise NumericalError("no feasible threshold bracket", value(prox(v, c + hi)) - rho)
    lo = 0.0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if value(prox(v, c + mid)) > rho:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * (1.0 + hi):
            return prox(v, c + hi)
    raise NumericalError("constrained prox bisection did not converge", hi - lo)


class Regularizer(ABC):
    convex: bool = True
    mu: float = 0.0

    @abstractmethod
    def value(self, w: np.ndarray) -> float:
        ...

    @abstractmethod
    def prox(self, v: np.ndarray, c: float) -> np.ndarray:
        ...

    def zero_threshold(self, v: np.ndarray) -> Optional[float]:
        """Smallest c with prox(v, c) == 0, when known in closed form."""
        return None

    def prox_constrained(self, v: np.ndarray, c: float, rho: float) -> np.ndarray:
        """argmin 1/2||w - v||^2 + c r(w) subject to r(w) <= rho."""
        v = np.asarray(v, dtype=float)
        return _bisect_threshold(self.prox, self.value, v, c, rho, self.zero_threshold(v))

    # objective-facing hooks: the term added to the mean loss, and its prox
    def penalty(self, w: np.ndarray, lam: float) -> float:
        return lam * self.value(w)

    def penalty_prox(self, v: np.ndarray, step: float, lam: float, rho: float = math.inf) -> np.ndarray:
        if math.isinf(rho):
            return self.prox(v, step * lam)
        return self.prox_constrained(v, step * lam, rho)

    # hooks used by the composite g~(w) = 1/2||w||^2 + scale * split_value(w)
    def split_value(self, w: np.ndarray) -> float:
        return self.value(w)

    def split_prox(self, v: np.ndarray, c: float, rho: float = math.inf) -> np.ndarray:
        if math.isinf(rho):
            return self.prox(v, c)
        return self.prox_constrained(v, c, rho)


class L1Reg(Regularizer):
    kind = "l1"

    def value(self, w):
        return float(np.sum(np.abs(w)))

    def prox(self, v, c):
        v = np.asarray(v, dtype=float)
        if c == 0:
            return v.copy()
        return soft_threshold(v, c)

    def zero_threshold(self, v):
        return float(np.max(np.abs(v))) if v.size else 0.0

    def dual_norm(self, u):
        u = np.asarray(u, dtype=float)
        return float(np.max(np.abs(u))) if u.size else 0.0

    def __repr__(self):
        return "L1Reg()"


class GroupReg(Regularizer):
    """Non-overlapping group-l1,2 norm sum_g ||w_g||_2."""

    kind = "group"

    def __init__(self, groups: Sequence[Sequence[int]]):
        members = [int(j) for g in groups for j in g]
        p = len(members)
        if sorted(members) != list(range(p)):
            raise ContractError("groups must be disjoint and cover every index 0..p-1")
        if any(len(g) == 0 for g in groups):
            raise ContractError("groups must be nonempty")
        self.groups = [list(map(int, g)) for g in groups]
        self.p = p
        self.membership = np.empty(p, dtype=np.int64)
        for gid, g in enumerate(self.groups):
            self.membership[g] = gid

    @classmethod
    def contiguous(cls, n_groups: int, size: int) -> "GroupReg":
        return cls([list(range(g * size, (g + 1) * size)) for g in range(n_groups)])

    def group_norms(self, w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        if w.shape != (self.p,):
            raise ContractError(f"vector of length {w.shape} does not match {self.p} grouped indices")
        return np.sqrt(np.bincount(self.membership, weights=w * w, minlength=len(self.groups)))

    def value(self, w):
        return float(np.sum(self.group_norms(w)))

    def prox(self, v, c):
        v = np.asarray(v, dtype=float)
        if c == 0:
            return v.copy()
        norms = self.group_norms(v)
        with np.errstate(divide="ignore", invalid="ignore"):
            factor = np.where(norms > c, 1.0 - c / np.where(norms > 0, norms, 1.0), 0.0)
        return v * factor[self.membership]

    def zero_threshold(self, v):
        norms = self.group_norms(v)
        return float(norms.max()) if norms.size else 0.0

    def dual_norm(self, u):
        norms = self.group_norms(u)
        return float(norms.max()) if norms.size else 0.0

    def __repr__(self):
        return f"GroupReg(n_groups={len(self.groups)})"


class ElasticReg(Regularizer):
    """The 1-strongly convex composite 1/2||w||^2 + base(w)."""

    kind = "elastic"

    def __init__(self, base: Optional[Regularizer] = None):
        self.base = base or L1Reg()
        if not self.base.convex:
            raise ContractError("elastic composite needs a convex base regularizer")

    def value(self, w):
        w = np.asarray(w, dtype=float)
        return 0.5 * float(w @ w) + self.base.value(w)

    def prox(self, v, c):
        v = np.asarray(v, dtype=float)
        if c == 0:
            return v.copy()
        return self.base.prox(v / (1.0 + c), c / (1.0 + c))

    def dual_norm(self, u):
        return self.base.dual_norm(u)

    def __repr__(self):
        return f"ElasticReg({self.base!r})"


# ---------------------------------------------------------------------------
# SCAD


def scad_value(t, lam: float, zeta: float):
    """Elementwise SCAD_{lam,zeta}(t); returns an array (or float for scalar input)."""
    if zeta <= 2:
        raise ContractError("SCAD shape parameter zeta must be > 2")
    a = np.abs(np.asarray(t, dtype=float))
    out = np.where(
        a <= lam,
        lam * a,
        np.where(
            a <= zeta * lam,
            -(a * a - 2.0 * zeta * lam * a + lam * lam) / (2.0 * (zeta - 1.0)),
            (zeta + 1.0) * lam * lam / 2.0,
        ),
    )
    return float(out) if out.ndim == 0 else out


def scad_prox(v, c: float, lam: float, zeta: float) -> np.ndarray:
    """Global minimizer of 1/2(w - v)^2 + c SCAD(w) per coordinate.

    Candidates are listed by increasing magnitude and argmin keeps the first minimum, so
    ties resolve toward the smaller |w|.
    """
    if c < 0:
        raise ContractError("prox scale must be >= 0")
    v = np.asarray(v, dtype=float)
    if c == 0:
        return v.copy()
    a = np.abs(v)
    lo, hi = lam, zeta * lam
    inner = np.clip(a - c * lam, 0.0, lo)
    denom = zeta - 1.0 - c
    if denom > 0:
        middle = np.clip(((zeta - 1.0) * a - c * zeta * lam) / denom, lo, hi)
    else:
        # concave middle piece: only its endpoints can be optimal
        middle = np.full_like(a, lo)
    outer = np.maximum(a, hi)
    candidates = np.stack([inner, np.full_like(a, lo), middle, np.full_like(a, hi), outer])
    objective = 0.5 * (candidates - a) ** 2 + c * scad_value(candidates, lam, zeta)
    best = np.take_along_axis(candidates.reshape(5, -1),
                              np.argmin(objective.reshape(5, -1), axis=0)[None, :], axis=0)
    return np.sign(v) * best.reshape(v.shape)


class ScadReg(Regularizer):
    kind = "scad"
    convex = False
    l_d = 1.0

    def __init__(self, lam: float, zeta: float = 3.7):
        if zeta <= 2:
            raise ContractError("SCAD shape parameter zeta must be > 2")
        if lam <= 0:
            raise ContractError("SCAD level lam must be > 0")
        self.lam = float(lam)
        self.zeta = float(zeta)
        self.mu = 1.0 / (self.zeta - 1.0)

    def scalar(self, t):
        return scad_value(t, self.lam, self.zeta)

    def value(self, w):
        return float(np.sum(self.scalar(np.asarray(w, dtype=float))))

    def prox(self, v, c):
        return scad_prox(v, c, self.lam, self.zeta)

    def penalty(self, w, lam):
        return self.value(w)

    def penalty_prox(self, v, step, lam, rho=math.inf):
        # the constraint lives on d_lam; the original-objective prox ignores it
        return self.prox(v, step)

    def dlambda_scalar(self, t):
        t = np.asarray(t, dtype=float)
        return (self.scalar(t) + 0.5 * self.mu * t * t) / self.lam

    def dlambda_value(self, w) -> float:
        return float(np.sum(self.dlambda_scalar(w)))

    def dlambda_prox(self, v, c: float) -> np.ndarray:
        """argmin 1/2||w - v||^2 + c d_lam(w), closed form on each of SCAD's three pieces."""
        if c < 0:
            raise ContractError("prox scale must be >= 0")
        v = np.asarray(v, dtype=float)
        if c == 0:
            return v.copy()
        lam, zeta, mu = self.lam, self.zeta, self.mu
        k = c / lam
        a = np.abs(v)
        inner = np.clip((a - k * lam) / (1.0 + k * mu), 0.0, lam)
        middle = np.clip(a - k * zeta * lam * mu, lam, zeta * lam)  # d_lam is linear here
        outer = np.maximum(a / (1.0 + k * mu), zeta * lam)
        candidates = np.stack([inner, middle, outer])
        objective = 0.5 * (candidates - a) ** 2 + c * self.dlambda_scalar(candidates)
        best = np.take_along_axis(candidates.reshape(3, -1),
                                  np.argmin(objective.reshape(3, -1), axis=0)[None, :], axis=0)
        return np.sign(v) * best.reshape(v.shape)

    def split_value(self, w):
        return self.dlambda_value(w)

    def split_prox(self, v, c, rho=math.inf):
        v = np.asarray(v, dtype=float)
        if math.isinf(rho):
            return self.dlambda_prox(v, c)
        return _bisect_threshold(self.dlambda_prox, self.dlambda_value, v, c, rho)

    def dual_norm(self, u):
        raise ContractError("SCAD is not a norm; dual norm is undefined")

    def __repr__(self):
        return f"ScadReg(lam={self.lam:g}, zeta={self.zeta:g})"


def validate_assumptions(r: ScadReg, grid: Sequence[float]) -> AssumptionReport:
    """Numerically check the separable-penalty assumptions on a sorted grid of t > 0."""
    t = np.asarray(grid, dtype=float)
    if t.ndim != 1 or t.size < 3 or np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise ContractError("grid must be a sorted 1-d array of at least 3 positive values")
    d = np.asarray(r.scalar(t), dtype=float)
    d_neg = np.asarray(r.scalar(-t), dtype=float)
    checks = {}
    checks["symmetric_zero_at_origin"] = bool(
        abs(float(r.scalar(0.0))) <= 1e-15 and np.allclose(d, d_neg, rtol=0.0, atol=1e-12))
    checks["nondecreasing"] = bool(np.all(np.diff(d) >= -1e-12))
    checks["ratio_nonincreasing"] = bool(np.all(np.diff(d / t) <= 1e-12))

    t0 = 1e-8
    slope = float(r.scalar(t0)) / t0
    checks["limit_slope"] = bool(abs(slope - r.lam * r.l_d) <= 1e-6)

    sym = np.concatenate([-t[::-1], [0.0], t])
    h = (np.asarray(r.scalar(sym), dtype=float) + 0.5 * r.mu * sym * sym) / r.lam
    slopes = np.diff(h) / np.diff(sym)
    checks["dlambda_convex"] = bool(np.all(np.diff(slopes) >= -1e-9))

    return AssumptionReport(
        checks=checks,
        passed=all(checks.values()),
        l_d=r.l_d,
        estimated_l_d=slope / r.lam,
        mu=r.mu,
    )
