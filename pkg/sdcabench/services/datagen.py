"""Synthetic sparse-regression designs.

Rows follow an equicorrelated Gaussian with unit variances and pairwise correlation b, drawn with
the one-factor construction x = sqrt(1 - b) g + sqrt(b) z 1 so no p x p factorization is needed.
"""
import logging
import math
from typing import Tuple

import numpy as np

from sdcabench.core.errors import ContractError
from sdcabench.models.dataset import Dataset
from sdcabench.schemas.problem import SynthSpec
from sdcabench.utils.rng import STREAM_DATA, make_rng

logger = logging.getLogger(__name__)


def _check_family(spec: SynthSpec, family: str) -> None:
    if spec.family != family:
        raise ContractError(f"expected a {family!r} spec, got {spec.family!r}")


def _design(rng: np.random.Generator, n: int, p: int, b: float, variance: float = 1.0) -> np.ndarray:
    X = math.sqrt(1.0 - b) * rng.standard_normal((n, p))
    if b > 0:
        X += math.sqrt(b) * rng.standard_normal((n, 1))
    if variance != 1.0:
        X *= math.sqrt(variance)
    return X


def _sparse_signs(rng: np.random.Generator, p: int, s: int) -> np.ndarray:
    w = np.zeros(p)
    support = rng.choice(p, size=s, replace=False)
    w[support] = rng.choice(np.array([-1.0, 1.0]), size=s)
    return w


def _responses(rng: np.random.Generator, X: np.ndarray, w_star: np.ndarray, sigma: float) -> np.ndarray:
    return X @ w_star + sigma * rng.standard_normal(X.shape[0])


def _meta(spec: SynthSpec, **extra):
    return {"synthetic": spec.family, "seed": spec.seed, "b": spec.b, "sigma": spec.sigma, **extra}


def gen_lasso(spec: SynthSpec) -> Tuple[Dataset, np.ndarray]:
    _check_family(spec, "lasso")
    rng = make_rng(spec.seed, STREAM_DATA)
    w_star = _sparse_signs(rng, spec.p, spec.s)
    X = _design(rng, spec.n, spec.p, spec.b)
    y = _responses(rng, X, w_star, spec.sigma)
    return Dataset(X=X, y=y, meta=_meta(spec)), w_star


def gen_group(spec: SynthSpec) -> Tuple[Dataset, np.ndarray]:
    """Contiguous groups of ``group_size``; ``group_sparsity`` of them carry Uniform[-1, 1] weights."""
    _check_family(spec, "group")
    m, n_groups, s_g = spec.group_size, spec.n_groups, spec.group_sparsity
    rng = make_rng(spec.seed, STREAM_DATA)
    w_star = np.zeros(spec.p)
    for g in np.sort(rng.choice(n_groups, size=s_g, replace=False)):
        w_star[g * m:(g + 1) * m] = rng.uniform(-1.0, 1.0, size=m)
    X = _design(rng, spec.n, spec.p, spec.b)
    y = _responses(rng, X, w_star, spec.sigma)
    return Dataset(X=X, y=y, meta=_meta(spec, group_size=m, n_groups=n_groups)), w_star


def gen_corrected(spec: SynthSpec) -> Tuple[Dataset, np.ndarray]:
    """Errors-in-variables design: responses from clean x_i, observed rows z_i = x_i + noise.

    The corruption variance is carried in ``meta["correction"]`` for the loss correction.
    """
    _check_family(spec, "corrected")
    rng = make_rng(spec.seed, STREAM_DATA)
    w_star = _sparse_signs(rng, spec.p, spec.s)
    X = _design(rng, spec.n, spec.p, spec.b)
    y = _responses(rng, X, w_star, spec.sigma)
    Z = X + math.sqrt(spec.correction) * rng.standard_normal(X.shape) if spec.correction > 0 else X
    return Dataset(X=Z, y=y, meta=_meta(spec, correction=spec.correction)), w_star


def gen_scad(spec: SynthSpec) -> Tuple[Dataset, np.ndarray]:
    """As gen_lasso with rows of variance 2."""
    _check_family(spec, "scad")
    rng = make_rng(spec.seed, STREAM_DATA)
    w_star = _sparse_signs(rng, spec.p, spec.s)
    X = _design(rng, spec.n, spec.p, spec.b, variance=2.0)
    y = _responses(rng, X, w_star, spec.sigma)
    return Dataset(X=X, y=y, meta=_meta(spec)), w_star


GENERATORS = {
    "lasso": gen_lasso,
    "group": gen_group,
    "corrected": gen_corrected,
    "scad": gen_scad,
}


def generate(spec: SynthSpec) -> Tuple[Dataset, np.ndarray]:
    d, w_star = GENERATORS[spec.family](spec)
    logger.info("generated %s data: n=%d p=%d nnz(w*)=%d seed=%d",
                spec.family, d.n, d.p, int(np.count_nonzero(w_star)), spec.seed)
    return d, w_star


def design_top_eigenvalue(spec: SynthSpec) -> float:
    """Largest eigenvalue of the population covariance of the clean rows."""
    variance = 2.0 if spec.family == "scad" else 1.0
    return variance * (1.0 - spec.b + spec.b * spec.p)
