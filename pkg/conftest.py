import numpy as np
import pytest

from sdcabench.models.dataset import Dataset
from sdcabench.models.loss import LossModel
from sdcabench.models.problem import ProblemSpec
from sdcabench.models.regularizer import L1Reg
from sdcabench.schemas.problem import SynthSpec
from sdcabench.services import datagen
from sdcabench.services.diagnostics import compute_reference
from sdcabench.services.splitting import split_convex


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(scope="session")
def lasso_data():
    """Well-conditioned Lasso design: n >> p keeps the restricted curvature above lam_tilde."""
    return datagen.gen_lasso(SynthSpec(family="lasso", n=300, p=10, s=4, seed=3))


@pytest.fixture(scope="session")
def lasso_spec(lasso_data):
    d, _ = lasso_data
    return ProblemSpec(loss=LossModel.squared(), reg=L1Reg(), lam=0.1, dataset=d)


@pytest.fixture(scope="session")
def lasso_split(lasso_spec):
    return split_convex(lasso_spec, 0.25)


@pytest.fixture(scope="session")
def lasso_reference(lasso_split):
    return compute_reference(lasso_split)


@pytest.fixture
def tiny_dataset():
    X = np.array([[1.0, 0.0, 2.0], [0.0, -1.0, 0.5], [3.0, 1.0, 0.0], [0.5, 0.5, 0.5]])
    y = np.array([1.0, -1.0, 2.0, 0.0])
    return Dataset(X=X, y=y)


def small_experiment(**problem_overrides):
    problem = {
        "synth": {"family": "lasso", "n": 60, "p": 8, "s": 3, "seed": 11},
        "loss": "squared",
        "regularizer": "l1",
        "lam": 0.1,
        "lam_tilde": 0.25,
    }
    problem.update(problem_overrides)
    return {
        "name": "small",
        "problem": problem,
        "solvers": [{"name": "sdca"}, {"name": "prox_gd"}],
        "epochs": 15,
        "seeds": [0, 1],
    }


@pytest.fixture
def small_config():
    from sdcabench.schemas.experiment import ExperimentConfig

    return ExperimentConfig.model_validate(small_experiment())


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: desk-scale preset runs, deselect with -m 'not slow'")
