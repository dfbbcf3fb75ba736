import sys


def test_imports():
    """Test that all modules can be imported without errors."""
    from sdcabench.main import app
    from sdcabench.core.config import settings
    from sdcabench.core.errors import SdcaBenchError

    from sdcabench.models.dataset import Dataset
    from sdcabench.models.loss import LossModel
    from sdcabench.models.regularizer import L1Reg, GroupReg, ElasticReg, ScadReg
    from sdcabench.models.problem import ProblemSpec
    from sdcabench.models.trace import Trace

    from sdcabench.schemas.experiment import ExperimentConfig, Manifest
    from sdcabench.schemas.problem import ProblemConfig, SynthSpec

    from sdcabench.crud.dataset import load_libsvm
    from sdcabench.crud.trace import write_trace_csv

    from sdcabench.api.v1 import datasets, experiments

    from sdcabench.services import baselines, datagen, diagnostics, experiment, plotting, presets, sdca, splitting

    from sdcabench.cli import main

    assert app.title == settings.PROJECT_NAME
    routes = {route.path for route in app.routes}
    assert "/api/v1/experiments/run" in routes
    assert "/api/v1/datasets/upload" in routes


def test_desk_preset_builds():
    """Test that a desk preset assembles into a solvable problem."""
    from sdcabench.services.experiment import build_problem
    from sdcabench.services.presets import get_preset

    problem = build_problem(get_preset("lasso-desk").problem)
    assert problem.spec.n == 400 and problem.spec.p == 800
    assert problem.split.N == 401
    assert 0 < problem.split.eta <= 1.0 / (4 * problem.split.lam_tilde * problem.split.N)


if __name__ == "__main__":
    print("Testing SDCA Benchmark...\n")
    test_imports()
    print("✓ All modules imported successfully")
    test_desk_preset_builds()
    print("✓ Desk preset builds")
    sys.exit(0)
