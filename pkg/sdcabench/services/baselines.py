"""Comparison solvers on the original objective F(w) = (1/n) sum f_i(w) - (gamma/2)||w||^2 + penalty(w).

Stochastic solvers sample uniformly and record one trace point per n sampled components, so the
trace epoch is the number of dataset passes.  Prox-SVRG also charges one pass per snapshot.
"""
import logging
import math
from typing import Callable, Dict, Iterable, Optional, Tuple

import numpy as np

from sdcabench.core.errors import ContractError, UnsupportedSolverError
from sdcabench.models.problem import ProblemSpec
from sdcabench.models.trace import Trace
from sdcabench.schemas.experiment import BaselineConfig
from sdcabench.services.tracking import Callback, TraceRecorder
from sdcabench.utils.rng import STREAM_SOLVER, make_rng

logger = logging.getLogger(__name__)

Result = Tuple[np.ndarray, Trace]


def _recorder(name: str, spec: ProblemSpec, config: BaselineConfig, reference, gap_tol,
              callbacks) -> TraceRecorder:
    return TraceRecorder(name, config.seed, spec.objective,
                         reference.objective if reference is not None else None,
                         gap_tol, None, callbacks)


def _check(spec: ProblemSpec) -> None:
    if spec.n < 1:
        raise ContractError("baselines need at least one sample")


def prox_gd_run(spec: ProblemSpec, config: BaselineConfig, reference=None, gap_tol: Optional[float] = None,
                callbacks: Iterable[Callback] = ()) -> Result:
    w = np.zeros(spec.p)
    recorder = _recorder("prox_gd", spec, config, reference, gap_tol, callbacks)
    if recorder.record(0, w):
        return w, recorder.trace
    for epoch in range(1, config.epochs + 1):
        w = spec.prox_grad_step(w, config.step)
        if recorder.record(epoch, w):
            break
    return w, recorder.trace


def prox_sgd_run(spec: ProblemSpec, config: BaselineConfig, reference=None, gap_tol: Optional[float] = None,
                 callbacks: Iterable[Callback] = ()) -> Result:
    """Step eta_k = eta_0 / sqrt(k) with eta_0 = ``config.step``."""
    _check(spec)
    n, d, loss, gamma = spec.n, spec.dataset, spec.loss, spec.loss.correction
    rng_draws = make_rng(config.seed, STREAM_SOLVER)
    w = np.zeros(spec.p)
    recorder = _recorder("prox_sgd", spec, config, reference, gap_tol, callbacks)
    if recorder.record(0, w):
        return w, recorder.trace
    k = 0
    for epoch in range(1, config.epochs + 1):
        for i in rng_draws.integers(0, n, size=n):
            k += 1
            eta = config.step / math.sqrt(k)
            c = loss.coefficient(d.rows.dot(i, w), float(d.y[i]))
            v = w * (1.0 + eta * gamma)
            d.rows.axpy(i, -eta * c, v)
            w = spec.penalty_prox(v, eta)
        if recorder.record(epoch, w):
            break
    return w, recorder.trace


def rda_run(spec: ProblemSpec, config: BaselineConfig, reference=None, gap_tol: Optional[float] = None,
            callbacks: Iterable[Callback] = ()) -> Result:
    """Regularized dual averaging with beta_k = beta_0 * sqrt(k), beta_0 = ``config.step``.

    w_{k+1} = argmin <g_bar_k, w> + penalty(w) + (beta_k / k) * 1/2||w||^2
            = prox_{(k/beta_k) penalty}(-(k/beta_k) g_bar_k).
    """
    if not spec.reg.convex:
        raise UnsupportedSolverError(
            f"RDA is only defined here for convex regularizers, not {spec.reg!r}")
    _check(spec)
    n, d, loss, gamma = spec.n, spec.dataset, spec.loss, spec.loss.correction
    rng_draws = make_rng(config.seed, STREAM_SOLVER)
    w = np.zeros(spec.p)
    grad_sum = np.zeros(spec.p)
    recorder = _recorder("rda", spec, config, reference, gap_tol, callbacks)
    if recorder.record(0, w):
        return w, recorder.trace
    k = 0
    for epoch in range(1, config.epochs + 1):
        for i in rng_draws.integers(0, n, size=n):
            k += 1
            c = loss.coefficient(d.rows.dot(i, w), float(d.y[i]))
            if gamma:
                grad_sum -= gamma * w
            d.rows.axpy(i, c, grad_sum)
            beta = config.step * math.sqrt(k)
            w = spec.penalty_prox(-grad_sum / beta, k / beta)
        if recorder.record(epoch, w):
            break
    return w, recorder.trace


def prox_svrg_run(spec: ProblemSpec, config: BaselineConfig, reference=None, gap_tol: Optional[float] = None,
                  callbacks: Iterable[Callback] = ()) -> Result:
    """Outer loops of m = ``inner_loop`` (default 2n) steps until ``config.epochs`` passes are spent.

    Each outer loop costs 1 + m/n passes (full gradient plus m sampled rows); snapshot = last iterate.
    """
    _check(spec)
    n, d, loss, gamma = spec.n, spec.dataset, spec.loss, spec.loss.correction
    m = config.inner_loop or 2 * n
    eta = config.step
    rng_draws = make_rng(config.seed, STREAM_SOLVER)
    w = np.zeros(spec.p)
    recorder = _recorder("prox_svrg", spec, config, reference, gap_tol, callbacks)
    if recorder.record(0, w):
        return w, recorder.trace
    passes = 0.0
    while passes < config.epochs:
        snapshot = w.copy()
        full_grad = spec.smooth_gradient(snapshot)
        snap_coef = loss.coefficients(d.margins(snapshot), d.y)
        for i in rng_draws.integers(0, n, size=m):
            c = loss.coefficient(d.rows.dot(i, w), float(d.y[i]))
            v = w - eta * full_grad
            if gamma:
                v += eta * gamma * (w - snapshot)
            d.rows.axpy(i, -eta * (c - snap_coef[i]), v)
            w = spec.penalty_prox(v, eta)
        passes += 1.0 + m / n
        if recorder.record(passes, w):
            break
    return w, recorder.trace


def _table(table: Optional[np.ndarray], n: int) -> np.ndarray:
    if table is None:
        return np.zeros(n)
    if table.shape != (n,):
        raise ContractError(f"gradient table has shape {table.shape}, expected ({n},)")
    return table


def saga_run(spec: ProblemSpec, config: BaselineConfig, reference=None, gap_tol: Optional[float] = None,
             callbacks: Iterable[Callback] = (), table: Optional[np.ndarray] = None) -> Result:
    """SAGA with a table of scalar gradient coefficients (updated in place when ``table`` is given)."""
    _check(spec)
    n, d, loss, gamma = spec.n, spec.dataset, spec.loss, spec.loss.correction
    eta = config.step
    table = _table(table, n)
    average = d.rmatvec(table) / n
    rng_draws = make_rng(config.seed, STREAM_SOLVER)
    w = np.zeros(spec.p)
    recorder = _recorder("saga", spec, config, reference, gap_tol, callbacks)
    if recorder.record(0, w):
        return w, recorder.trace
    for epoch in range(1, config.epochs + 1):
        for i in rng_draws.integers(0, n, size=n):
            c = loss.coefficient(d.rows.dot(i, w), float(d.y[i]))
            delta = c - table[i]
            v = w - eta * average
            if gamma:
                v += eta * gamma * w
            d.rows.axpy(i, -eta * delta, v)
            d.rows.axpy(i, delta / n, average)
            table[i] = c
            w = spec.penalty_prox(v, eta)
        if recorder.record(epoch, w):
            break
    return w, recorder.trace


def prox_sag_run(spec: ProblemSpec, config: BaselineConfig, reference=None, gap_tol: Optional[float] = None,
                 callbacks: Iterable[Callback] = (), table: Optional[np.ndarray] = None) -> Result:
    """SAG with a proximal step after every update: w <- prox(w - (eta/n) * sum_j stored_j)."""
    _check(spec)
    n, d, loss, gamma = spec.n, spec.dataset, spec.loss, spec.loss.correction
    eta = config.step
    table = _table(table, n)
    total = d.rmatvec(table)
    rng_draws = make_rng(config.seed, STREAM_SOLVER)
    w = np.zeros(spec.p)
    recorder = _recorder("prox_sag", spec, config, reference, gap_tol, callbacks)
    if recorder.record(0, w):
        return w, recorder.trace
    for epoch in range(1, config.epochs + 1):
        for i in rng_draws.integers(0, n, size=n):
            c = loss.coefficient(d.rows.dot(i, w), float(d.y[i]))
            d.rows.axpy(i, c - table[i], total)
            table[i] = c
            v = w - (eta / n) * total
            if gamma:
                v += eta * gamma * w
            w = spec.penalty_prox(v, eta)
        if recorder.record(epoch, w):
            break
    return w, recorder.trace


SOLVERS: Dict[str, Callable[..., Result]] = {
    "prox_gd": prox_gd_run,
    "prox_sgd": prox_sgd_run,
    "rda": rda_run,
    "prox_svrg": prox_svrg_run,
    "saga": saga_run,
    "prox_sag": prox_sag_run,
}


def default_step(spec: ProblemSpec, solver: str) -> float:
    """Untuned step parameter: the usual safe choice for each method."""
    L_max = float(np.max(spec.smoothness)) + spec.loss.correction if spec.n else spec.loss.correction
    L_max = L_max if L_max > 0 else 1.0
    if solver == "prox_gd":
        return 1.0 / spec.lipschitz if spec.lipschitz > 0 else 1.0
    if solver == "prox_sgd":
        return 1.0 / L_max
    if solver == "rda":
        return L_max
    if solver == "prox_svrg":
        return 0.1 / L_max
    if solver == "saga":
        return 1.0 / (3.0 * L_max)
    if solver == "prox_sag":
        return 1.0 / (16.0 * L_max)
    raise ContractError(f"unknown baseline {solver!r}")


def run_baseline(spec: ProblemSpec, config: BaselineConfig, reference=None, gap_tol: Optional[float] = None,
                 callbacks: Iterable[Callback] = ()) -> Result:
    try:
        solver = SOLVERS[config.solver]
    except KeyError:
        raise ContractError(f"{config.solver!r} is not a baseline solver") from None
    logger.debug("running %s step=%g epochs=%d seed=%d", config.solver, config.step, config.epochs, config.seed)
    return solver(spec, config, reference, gap_tol, callbacks)
