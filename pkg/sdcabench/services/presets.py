"""Named experiment settings.

Desk presets are small enough for a laptop; full-size presets use the large synthetic
settings (n=2500, p=5000).  Real-data presets need a LIBSVM file supplied by the caller.  Lambda
values taken from sum-scaled objectives are divided by n, since every objective here is a mean.
"""
import copy
from typing import Any, Dict, List, Optional

from sdcabench.core.errors import ContractError
from sdcabench.schemas.experiment import ExperimentConfig

FULL_N = 2500
FULL_P = 5000

_COMPARE = ["sdca", "prox_gd", "prox_svrg", "saga"]
_ALL_STOCHASTIC = ["sdca", "prox_sgd", "rda", "prox_svrg", "saga", "prox_sag"]


def _solvers(names: List[str], tune: bool = False) -> List[Dict[str, Any]]:
    out = []
    for name in names:
        entry = {"name": name}
        # the worst-case sdca step is far too cautious on restricted-curvature problems, so sdca
        # is always grid-tuned; the other constant-rate solvers only when asked
        if name == "sdca" or (tune and name not in ("prox_sgd", "rda")):
            entry["tune"] = True
        out.append(entry)
    return out


def _lasso(name, n, p, s, b, lam=None, lam_tilde=0.25, epochs=300, solvers=None, tune=False):
    return {
        "name": name,
        "problem": {
            "synth": {"family": "lasso", "n": n, "p": p, "s": s, "b": b, "sigma": 1.0},
            "loss": "squared", "regularizer": "l1", "lam": lam, "lam_tilde": lam_tilde,
        },
        "solvers": _solvers(solvers or ["sdca", "prox_gd"], tune),
        "epochs": epochs,
    }


def _group(name, n, m, n_groups, s_g, b, lam=None, lam_tilde=0.1, epochs=300, solvers=None, tune=False):
    return {
        "name": name,
        "problem": {
            "synth": {"family": "group", "n": n, "p": m * n_groups, "group_size": m,
                      "n_groups": n_groups, "group_sparsity": s_g, "b": b, "sigma": 1.0},
            "loss": "squared", "regularizer": "group", "lam": lam, "lam_tilde": lam_tilde,
        },
        "solvers": _solvers(solvers or _COMPARE, tune),
        "epochs": epochs,
    }


def _corrected(name, n, p, s, gamma, lam, lam_tilde=0.1, epochs=500, solvers=None, tune=False):
    return {
        "name": name,
        "problem": {
            "synth": {"family": "corrected", "n": n, "p": p, "s": s, "sigma": 1.0, "correction": gamma},
            "loss": "squared", "regularizer": "l1", "lam": lam, "lam_tilde": lam_tilde,
        },
        "solvers": _solvers(solvers or ["sdca", "prox_gd"], tune),
        "epochs": epochs,
    }


def _scad(name, n, p, s, lam, lam_tilde=0.1, zeta=3.7, epochs=500, solvers=None, tune=False):
    return {
        "name": name,
        "problem": {
            "synth": {"family": "scad", "n": n, "p": p, "s": s, "sigma": 1.0},
            "loss": "squared", "regularizer": "scad", "lam": lam, "lam_tilde": lam_tilde, "zeta": zeta,
        },
        "solvers": _solvers(solvers or ["sdca", "prox_gd"], tune),
        "epochs": epochs,
    }


def _real(name, loss, regularizer, lam, lam_tilde, epochs=100, solvers=None, **problem):
    return {
        "name": name,
        "problem": {"dataset_path": None, "loss": loss, "regularizer": regularizer,
                    "lam": lam, "lam_tilde": lam_tilde, **problem},
        "solvers": _solvers(solvers or _ALL_STOCHASTIC, tune=True),
        "epochs": epochs,
    }


PRESETS: Dict[str, Dict[str, Any]] = {
    # desk scale
    "lasso-desk": _lasso("lasso-desk", 400, 800, 20, 0.0),
    "lasso-desk-b01": _lasso("lasso-desk-b01", 400, 800, 20, 0.1),
    "group-desk": _group("group-desk", 400, 10, 80, 8, 0.0, solvers=_COMPARE, tune=True),
    "scad-desk": _scad("scad-desk", 400, 500, 15, lam=0.05),
    "corrected-desk": _corrected("corrected-desk", 400, 500, 15, gamma=0.05, lam=0.05),
    "elastic-direct": {
        "name": "elastic-direct",
        "problem": {
            "synth": {"family": "lasso", "n": 200, "p": 100, "s": 10, "sigma": 1.0},
            "loss": "squared", "regularizer": "elastic", "lam": 0.1, "mode": "direct",
        },
        # strongly convex: the worst-case sdca step already converges linearly
        "solvers": [{"name": "sdca"}, {"name": "prox_gd"}],
        "epochs": 400,
    },
    # full size
    "lasso-s50-b0": _lasso("lasso-s50-b0", FULL_N, FULL_P, 50, 0.0, lam=0.05 / FULL_N,
                           epochs=100, solvers=_ALL_STOCHASTIC, tune=True),
    "lasso-s100-b0": _lasso("lasso-s100-b0", FULL_N, FULL_P, 100, 0.0, lam=0.05 / FULL_N,
                            epochs=100, solvers=_ALL_STOCHASTIC, tune=True),
    "lasso-s50-b01": _lasso("lasso-s50-b01", FULL_N, FULL_P, 50, 0.1, lam=0.05 / FULL_N,
                            epochs=100, solvers=_ALL_STOCHASTIC, tune=True),
    "lasso-s100-b04": _lasso("lasso-s100-b04", FULL_N, FULL_P, 100, 0.4, lam=0.05 / FULL_N,
                             epochs=100, solvers=_ALL_STOCHASTIC, tune=True),
    "group-m10-b0": _group("group-m10-b0", FULL_N, 10, FULL_P // 10, 10, 0.0, lam=0.05 / FULL_N,
                           epochs=100, solvers=_ALL_STOCHASTIC, tune=True),
    "group-m20-b0": _group("group-m20-b0", FULL_N, 20, FULL_P // 20, 10, 0.0, lam=0.05 / FULL_N,
                           epochs=100, solvers=_ALL_STOCHASTIC, tune=True),
    "group-m10-b01": _group("group-m10-b01", FULL_N, 10, FULL_P // 10, 10, 0.1, lam=0.05 / FULL_N,
                            epochs=100, solvers=_ALL_STOCHASTIC, tune=True),
    "group-m20-b04": _group("group-m20-b04", FULL_N, 20, FULL_P // 20, 10, 0.4, lam=0.05 / FULL_N,
                            epochs=100, solvers=_ALL_STOCHASTIC, tune=True),
    "corrected-p3000": _corrected("corrected-p3000", FULL_N, 3000, 50, gamma=0.05, lam=0.05,
                                  epochs=200, solvers=["sdca", "prox_gd", "prox_svrg", "saga", "prox_sag"],
                                  tune=True),
    "corrected-p5000": _corrected("corrected-p5000", FULL_N, FULL_P, 100, gamma=0.1, lam=0.05,
                                  epochs=200, solvers=["sdca", "prox_gd", "prox_svrg", "saga", "prox_sag"],
                                  tune=True),
    "scad-p5000": _scad("scad-p5000", FULL_N, FULL_P, 100, lam=0.05, epochs=200,
                        solvers=["sdca", "prox_gd", "prox_svrg", "saga", "prox_sag"], tune=True),
    # real data, path supplied at run time
    "rcv1-logistic": _real("rcv1-logistic", "logistic", "l1", lam=2e-5, lam_tilde=0.002),
    "sido0-logistic": _real("sido0-logistic", "logistic", "l1", lam=1e-4, lam_tilde=0.001),
    "ijcnn1-lasso": _real("ijcnn1-lasso", "squared", "l1", lam=0.02, lam_tilde=0.1),
    "ijcnn1-scad": _real("ijcnn1-scad", "squared", "scad", lam=0.02, lam_tilde=0.1,
                         solvers=["sdca", "prox_gd", "prox_svrg", "saga", "prox_sag"]),
    "housing-group": _real("housing-group", "squared", "group", lam=0.1, lam_tilde=0.1,
                           polynomial_degree=3, normalize=True,
                           solvers=["sdca", "prox_gd", "prox_svrg", "saga", "prox_sag"]),
}


def needs_dataset(name: str) -> bool:
    return "synth" not in _raw(name)["problem"]


def _raw(name: str) -> Dict[str, Any]:
    try:
        return PRESETS[name]
    except KeyError:
        raise ContractError(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}") from None


def list_presets() -> List[str]:
    return list(PRESETS)


def get_preset(name: str, dataset_path: Optional[str] = None, **overrides) -> ExperimentConfig:
    """Validated config for preset ``name``; top-level fields can be overridden."""
    raw = copy.deepcopy(_raw(name))
    if needs_dataset(name):
        if dataset_path is None:
            raise ContractError(f"preset {name!r} needs a LIBSVM dataset path")
        raw["problem"]["dataset_path"] = dataset_path
    elif dataset_path is not None:
        raise ContractError(f"preset {name!r} generates its own data")
    raw.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.model_validate(raw)
