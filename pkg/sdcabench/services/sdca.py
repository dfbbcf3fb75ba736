"""Dual-free SDCA on a split (or direct) problem.

Sample components keep their pseudo-dual as a scalar, a_i = alpha_i * x_i, which the update
preserves because grad phi_i(w) is colinear with x_i.  The augmentation component of split mode
keeps a dense pseudo-dual.  One epoch is N sampled steps.
"""
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Literal, Optional, Tuple

import numpy as np

from sdcabench.core.errors import ContractError, DivergenceError
from sdcabench.models.trace import Trace
from sdcabench.services import diagnostics
from sdcabench.services.splitting import SplitProblem
from sdcabench.services.tracking import Callback, TraceRecorder
from sdcabench.utils.rng import STREAM_SOLVER, make_rng, sample_categorical

logger = logging.getLogger(__name__)

InitPolicy = Literal["zero", "gradient"]


@dataclass
class SdcaState:
    alpha: np.ndarray
    aug: Optional[np.ndarray]
    v: np.ndarray
    w: np.ndarray
    rng: np.random.Generator
    t: int = 0
    last_finite_epoch: float = 0.0

    def dual_sum(self, sp: SplitProblem) -> np.ndarray:
        """sum_i a_i as a dense vector."""
        total = sp.spec.dataset.rmatvec(self.alpha)
        if self.aug is not None:
            total = total + self.aug
        return total

    def aggregate_error(self, sp: SplitProblem) -> float:
        """||v - (1/(lam_tilde N)) sum_i a_i||."""
        return float(np.linalg.norm(self.v - self.dual_sum(sp) / (sp.lam_tilde * sp.N)))


def init(sp: SplitProblem, policy: InitPolicy = "zero", w0: Optional[np.ndarray] = None,
         seed: int = 0) -> SdcaState:
    p = sp.spec.p
    rng = make_rng(seed, STREAM_SOLVER)
    if policy == "zero":
        if w0 is not None:
            raise ContractError("w0 only applies to the gradient init policy")
        alpha = np.zeros(sp.n)
        aug = np.zeros(p) if sp.has_augmentation else None
        v = np.zeros(p)
    elif policy == "gradient":
        start = np.zeros(p) if w0 is None else np.array(w0, dtype=float)
        if start.shape != (p,):
            raise ContractError(f"w0 has shape {start.shape}, expected ({p},)")
        alpha = -sp.coefficients(start)
        aug = sp.aug_strength * start if sp.has_augmentation else None
        v = sp.spec.dataset.rmatvec(alpha)
        if aug is not None:
            v = v + aug
        v = v / (sp.lam_tilde * sp.N)
    else:
        raise ContractError(f"unknown init policy {policy!r}")
    return SdcaState(alpha=alpha, aug=aug, v=v, w=sp.composite.prox_step(v), rng=rng)


def step(state: SdcaState, sp: SplitProblem, i: Optional[int] = None) -> SdcaState:
    """One update of component i (drawn from Q when not given); mutates and returns ``state``."""
    if i is None:
        i = int(sample_categorical(state.rng, sp.cdf, 1)[0])
    eta_i = sp.eta / (sp.Q[i] * sp.N)
    beta = eta_i * sp.lam_tilde * sp.N
    if i < sp.n:
        r = sp.coefficient(i, state.w) + state.alpha[i]
        if not math.isfinite(r):
            raise DivergenceError(f"non-finite residual at iteration {state.t}", state.last_finite_epoch)
        state.alpha[i] -= beta * r
        sp.spec.dataset.rows.axpy(i, -eta_i * r, state.v)
    else:
        r = state.aug - sp.aug_strength * state.w
        if not np.all(np.isfinite(r)):
            raise DivergenceError(f"non-finite residual at iteration {state.t}", state.last_finite_epoch)
        state.aug -= beta * r
        state.v -= eta_i * r
    state.w = sp.composite.prox_step(state.v)
    state.t += 1
    return state


def run(sp: SplitProblem, epochs: int, seed: int = 0,
        reference: Optional["diagnostics.Reference"] = None, gap_tol: Optional[float] = None,
        callbacks: Iterable[Callback] = (), init_policy: InitPolicy = "zero",
        w0: Optional[np.ndarray] = None, potentials: bool = False,
        state: Optional[SdcaState] = None) -> Tuple[np.ndarray, Trace]:
    if epochs < 1:
        raise ContractError("epochs must be >= 1")
    if potentials and reference is None:
        raise ContractError("potentials need a reference solution")
    if state is None:
        state = init(sp, init_policy, w0, seed)

    tracked = None
    if potentials:
        def tracked():
            return tuple(diagnostics.potentials(state, reference, sp))

    recorder = TraceRecorder("sdca", seed, sp.original_objective,
                             reference.objective if reference is not None else None,
                             gap_tol, tracked, callbacks)
    if recorder.record(0, state.w):
        return state.w.copy(), recorder.trace

    for epoch in range(1, epochs + 1):
        indices = sample_categorical(state.rng, sp.cdf, sp.N)
        try:
            for i in indices:
                step(state, sp, int(i))
        except DivergenceError as exc:
            raise recorder.diverged(epoch, str(exc)) from exc
        if recorder.record(epoch, state.w):
            logger.info("sdca seed=%d reached gap tolerance at epoch %d", seed, epoch)
            break
        state.last_finite_epoch = float(epoch)
    return state.w.copy(), recorder.trace
