import logging
import math

import numpy as np
import pytest

from sdcabench.core.errors import ContractError, MisuseError
from sdcabench.models.dataset import Dataset
from sdcabench.models.loss import LossModel, loss_value
from sdcabench.models.problem import ProblemSpec, spectral_norm_sq
from sdcabench.models.regularizer import ElasticReg, GroupReg, L1Reg, ScadReg
from sdcabench.services.splitting import (
    max_step_size,
    max_step_size_direct,
    recommend_lambda,
    sampling_distribution,
    split_convex,
    split_direct,
    split_nonconvex,
)


@pytest.fixture
def regression(rng):
    X = rng.standard_normal((40, 6))
    y = X @ np.array([1.0, -1.0, 0.0, 0.0, 0.5, 0.0]) + 0.1 * rng.standard_normal(40)
    return Dataset(X=X, y=y)


def test_sampling_distribution_examples(caplog):
    np.testing.assert_allclose(sampling_distribution([1.0, 1.0, 1.0, 1.0]), 0.25)
    np.testing.assert_allclose(sampling_distribution([2.0, 0.0]), [0.75, 0.25])
    with caplog.at_level(logging.WARNING):
        np.testing.assert_allclose(sampling_distribution([0.0, 0.0, 0.0]), 1.0 / 3.0)
    assert "uniform" in caplog.text
    with pytest.raises(ContractError):
        sampling_distribution([1.0, -1.0])
    with pytest.raises(ContractError):
        sampling_distribution([])


def test_sampling_distribution_bounds(rng):
    L = rng.exponential(size=50)
    Q = sampling_distribution(L)
    assert Q.sum() == pytest.approx(1.0, abs=1e-15)
    assert np.all(Q >= 1.0 / (2 * L.size) - 1e-15)


def test_max_step_size_examples():
    assert max_step_size(0.25, 1.0, 100) == pytest.approx(0.01)
    assert max_step_size(1e-13, 1.0, 10 ** 9) == pytest.approx(1.0 / (16.0 * (1.0 + 1e-13)))
    assert max_step_size_direct(0.1, 1.0, 100) == pytest.approx(0.025)
    assert max_step_size_direct(0.1, 1.0, 100, convex_components=False) == pytest.approx(0.1 / 4.0)
    with pytest.raises(ContractError):
        max_step_size(0.0, 1.0, 10)


def test_recommend_lambda_examples():
    assert recommend_lambda("lasso", sigma=1.0, n=500, p=1000) == pytest.approx(0.70523, abs=1e-4)
    assert recommend_lambda("lasso", sigma=1.0, n=500, p=1000) == pytest.approx(
        6.0 * math.sqrt(math.log(1000) / 500), rel=1e-12)
    assert recommend_lambda("scad", sigma=1.0, n=500, p=1000) == pytest.approx(
        2.0 * recommend_lambda("lasso", sigma=1.0, n=500, p=1000))
    group = recommend_lambda("group", sigma=1.0, n=500, group_size=10, n_groups=300)
    assert group == pytest.approx(4.0 * (math.sqrt(10 / 500) + math.sqrt(math.log(300) / 500)))
    with pytest.raises(ContractError):
        recommend_lambda("group", sigma=1.0, n=500)
    with pytest.raises(ContractError):
        recommend_lambda("ridge", sigma=1.0, n=500, p=10)


def test_problem_spec_validation(regression):
    with pytest.raises(ContractError):
        ProblemSpec(LossModel.squared(), L1Reg(), 0.0, regression)
    with pytest.raises(ContractError):
        ProblemSpec(LossModel.squared(), L1Reg(), 0.1, regression, rho=0.0)
    with pytest.raises(ContractError):
        ProblemSpec(LossModel.squared(), ScadReg(lam=0.1), 0.2, regression)
    with pytest.raises(ContractError):
        ProblemSpec(LossModel.squared(), ScadReg(lam=0.1), 0.1, regression, rho=3.0)


def test_lipschitz_matches_dense_eigenvalue(regression):
    spec = ProblemSpec(LossModel.squared(), L1Reg(), 0.1, regression)
    top = np.linalg.eigvalsh(regression.X.T @ regression.X).max()
    assert spec.lipschitz == pytest.approx(top / regression.n, rel=1e-8)
    assert spectral_norm_sq(np.array([[3.0, 4.0]])) == pytest.approx(25.0)


def _specs(regression):
    return {
        "lasso": (ProblemSpec(LossModel.squared(), L1Reg(), 0.1, regression), split_convex),
        "group": (ProblemSpec(LossModel.squared(), GroupReg.contiguous(3, 2), 0.1, regression), split_convex),
        "constrained": (ProblemSpec(LossModel.squared(), L1Reg(), 0.1, regression, rho=2.0), split_convex),
        "scad": (ProblemSpec(LossModel.squared(), ScadReg(lam=0.1), 0.1, regression), split_nonconvex),
        "corrected": (ProblemSpec(LossModel.squared(correction=0.05), L1Reg(), 0.1, regression),
                      split_nonconvex),
    }


@pytest.mark.parametrize("name", ["lasso", "group", "constrained", "scad", "corrected"])
def test_split_objective_equals_original(name, regression, rng):
    spec, splitter = _specs(regression)[name]
    sp = splitter(spec, 0.25)
    assert sp.N == regression.n + 1
    assert sp.L[-1] == pytest.approx((0.25 + spec.mu) * sp.N)
    for _ in range(100):
        w = rng.standard_normal(6) * 2.0
        if name == "constrained":
            w *= min(1.0, 2.0 / np.abs(w).sum())
        assert sp.objective(w) == pytest.approx(spec.objective(w), rel=1e-10, abs=1e-10)


def test_direct_objective_equals_original(regression, rng):
    spec = ProblemSpec(LossModel.squared(), ElasticReg(), 0.1, regression)
    sp = split_direct(spec)
    assert sp.N == regression.n and not sp.has_augmentation
    assert sp.eta == pytest.approx(max_step_size_direct(0.1, sp.L_bar, regression.n))
    for _ in range(100):
        w = rng.standard_normal(6)
        assert sp.objective(w) == pytest.approx(spec.objective(w), rel=1e-10, abs=1e-10)


def test_single_sample_doubles_the_loss():
    d = Dataset(X=np.array([[1.0, -2.0]]), y=[0.5])
    spec = ProblemSpec(LossModel.squared(), L1Reg(), 0.1, d)
    sp = split_convex(spec, 0.25)
    w = np.array([0.3, 0.2])
    assert sp.scale == 2.0
    assert sp.component_value(0, w) == pytest.approx(2.0 * loss_value(spec.loss, d, 0, w))
    assert sp.component_value(1, w) == pytest.approx(-0.5 * 0.25 * 2 * float(w @ w))
    with pytest.raises(ContractError):
        sp.component_value(2, w)


def test_composite_threshold_scale(regression):
    spec = ProblemSpec(LossModel.squared(), L1Reg(), 0.05, regression)
    sp = split_convex(spec, 0.25)
    assert sp.composite.scale == pytest.approx(0.2)
    np.testing.assert_allclose(sp.composite.prox_step(np.array([1.0, -0.1, 0.3, 0, 0, 0])),
                               [0.8, 0.0, 0.1, 0, 0, 0], atol=1e-15)


def test_scad_split_curvature(regression):
    spec = ProblemSpec(LossModel.squared(), ScadReg(lam=0.1), 0.1, regression)
    assert spec.mu == pytest.approx(1.0 / 2.7)
    assert split_nonconvex(spec, 0.25).advisories
    assert not split_nonconvex(spec, 0.5).advisories


def test_entry_points_reject_misuse(regression):
    specs = _specs(regression)
    with pytest.raises(MisuseError):
        split_convex(specs["scad"][0], 0.25)
    with pytest.raises(MisuseError):
        split_convex(specs["corrected"][0], 0.25)
    with pytest.raises(MisuseError):
        split_direct(specs["lasso"][0])
    with pytest.raises(ContractError):
        split_convex(specs["lasso"][0], 0.0)
    with pytest.raises(ContractError):
        split_convex(specs["lasso"][0], 0.25).with_step(0.0)


def test_explicit_step_is_kept(regression):
    spec = _specs(regression)["lasso"][0]
    sp = split_convex(spec, 0.25, eta=1e-3)
    assert sp.eta == 1e-3
    assert sp.with_step(2e-3).eta == 2e-3
    default = split_convex(spec, 0.25)
    assert default.eta == pytest.approx(max_step_size(0.25, default.L_bar, default.N))
