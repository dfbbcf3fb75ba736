"""Epoch-boundary bookkeeping shared by SDCA and the baselines."""
import logging
import math
import time
from typing import Callable, Iterable, Optional, Tuple

import numpy as np

from sdcabench.core.config import settings
from sdcabench.core.errors import DivergenceError
from sdcabench.models.trace import Trace, TraceRecord

logger = logging.getLogger(__name__)

Callback = Callable[[TraceRecord], None]


class TraceRecorder:
    """Evaluates the objective at epoch boundaries, detects divergence and decides early stops."""

    def __init__(self, solver: str, seed: int, objective: Callable[[np.ndarray], float],
                 reference_objective: Optional[float] = None, gap_tol: Optional[float] = None,
                 potentials: Optional[Callable[[], Tuple[float, float, float]]] = None,
                 callbacks: Iterable[Callback] = ()):
        self.trace = Trace(solver=solver, seed=seed)
        self._objective = objective
        self._reference = reference_objective
        self._gap_tol = gap_tol
        self._potentials = potentials
        self._callbacks = list(callbacks)
        self._start_value: Optional[float] = None
        self._t0 = time.perf_counter()
        self.last_finite_epoch = 0.0

    def diverged(self, epoch: float, reason: str) -> DivergenceError:
        error = DivergenceError(f"{self.trace.solver} diverged at epoch {epoch:g}: {reason}",
                                self.last_finite_epoch)
        error.trace = self.trace
        return error

    def record(self, epoch: float, w: np.ndarray) -> bool:
        """Append one record; returns True when the gap tolerance is met."""
        if not np.all(np.isfinite(w)):
            raise self.diverged(epoch, "non-finite iterate")
        value = float(self._objective(w))
        if not math.isfinite(value):
            raise self.diverged(epoch, "non-finite objective")
        if self._start_value is None:
            self._start_value = value
        elif value > settings.DIVERGENCE_FACTOR * max(1.0, abs(self._start_value)):
            raise self.diverged(epoch, f"objective {value:.3e} blew up")

        gap = value - self._reference if self._reference is not None else None
        A = B = C = None
        if self._potentials is not None:
            A, B, C = self._potentials()
        record = TraceRecord(epoch=float(epoch), objective=value, gap=gap, A=A, B=B, C=C,
                             seconds=time.perf_counter() - self._t0)
        self.trace.append(record)
        self.last_finite_epoch = float(epoch)
        logger.debug("%s seed=%d epoch=%g objective=%.17g", self.trace.solver, self.trace.seed, epoch, value)
        for callback in self._callbacks:
            callback(record)
        return self._gap_tol is not None and gap is not None and gap <= self._gap_tol
