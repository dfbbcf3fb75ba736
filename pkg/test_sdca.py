import numpy as np
import pytest

from sdcabench.core.errors import ContractError, DivergenceError
from sdcabench.models.dataset import Dataset
from sdcabench.models.loss import LossModel
from sdcabench.models.problem import ProblemSpec
from sdcabench.models.regularizer import ElasticReg, L1Reg, ScadReg
from sdcabench.schemas.problem import SynthSpec
from sdcabench.services import datagen, diagnostics, sdca
from sdcabench.services.splitting import split_convex, split_direct, split_nonconvex
from sdcabench.utils.rng import STREAM_SOLVER, make_rng, sample_categorical


def test_one_dimensional_closed_form():
    # F(w) = 1/2 (3 - 2w)^2 + 0.5|w|, minimized at w = (6 - 0.5) / 4
    d = Dataset(X=np.array([[2.0]]), y=[3.0])
    spec = ProblemSpec(LossModel.squared(), L1Reg(), 0.5, d)
    sp = split_convex(spec, 1.0, eta=0.1)
    w, trace = sdca.run(sp, epochs=200, seed=0)
    assert abs(w[0] - 1.375) <= 1e-8
    assert len(trace) == 201


def test_matches_dense_pseudo_dual_implementation(rng):
    X = rng.standard_normal((50, 8))
    y = X[:, 0] - X[:, 3] + 0.1 * rng.standard_normal(50)
    spec = ProblemSpec(LossModel.squared(), L1Reg(), 0.05, Dataset(X=X, y=y))
    sp = split_convex(spec, 0.25)
    n, N = sp.n, sp.N

    a = np.zeros((N, 8))
    v = np.zeros(8)
    w = sp.composite.prox_step(v)
    draws = make_rng(7, STREAM_SOLVER)
    for _ in range(20):
        for i in sample_categorical(draws, sp.cdf, N):
            eta_i = sp.eta / (sp.Q[i] * N)
            grad = sp.coefficient(i, w) * X[i] if i < n else -sp.aug_strength * w
            r = grad + a[i]
            a[i] -= eta_i * sp.lam_tilde * N * r
            v -= eta_i * r
            w = sp.composite.prox_step(v)

    got, _ = sdca.run(sp, epochs=20, seed=7)
    np.testing.assert_allclose(got, w, atol=1e-10)
    np.testing.assert_allclose(v, a.sum(axis=0) / (sp.lam_tilde * N), atol=1e-10)


def test_aggregate_invariant_holds_every_epoch(lasso_split):
    state = sdca.init(lasso_split, seed=3)
    errors = []
    sdca.run(lasso_split, epochs=100, state=state,
             callbacks=[lambda record: errors.append(state.aggregate_error(lasso_split)
                                                     / (1.0 + np.linalg.norm(state.v)))])
    assert len(errors) == 101
    assert max(errors) <= 1e-9


def test_optimal_pseudo_duals_are_a_fixed_point(lasso_split, lasso_reference):
    state = sdca.init(lasso_split, "gradient", w0=lasso_reference.w, seed=0)
    w, _ = sdca.run(lasso_split, epochs=10, state=state)
    assert np.linalg.norm(w - lasso_reference.w) <= 1e-8


def test_converges_to_reference(lasso_split, lasso_reference):
    w, trace = sdca.run(lasso_split, epochs=200, seed=0, reference=lasso_reference)
    gaps = trace.gaps
    assert gaps[0] > gaps[10] > gaps[-1] - 1e-15
    assert gaps[-1] <= 1e-9
    assert np.linalg.norm(w - lasso_reference.w) <= 1e-6


def test_runs_are_deterministic(lasso_split):
    _, first = sdca.run(lasso_split, epochs=5, seed=11)
    _, again = sdca.run(lasso_split, epochs=5, seed=11)
    _, other = sdca.run(lasso_split, epochs=5, seed=12)
    np.testing.assert_array_equal(first.objectives, again.objectives)
    assert not np.array_equal(first.objectives, other.objectives)


def test_gap_tolerance_stops_early(lasso_split, lasso_reference):
    _, trace = sdca.run(lasso_split, epochs=300, seed=0, reference=lasso_reference, gap_tol=1e-6)
    assert trace.last.gap <= 1e-6
    assert len(trace) < 301


def test_potentials_vanish_at_reference(lasso_split, lasso_reference):
    state = sdca.init(lasso_split, "gradient", w0=lasso_reference.w)
    A, B, C = diagnostics.potentials(state, lasso_reference, lasso_split)
    assert A == pytest.approx(0.0, abs=1e-20)
    assert B == pytest.approx(0.0, abs=1e-20)
    assert C == pytest.approx(0.0, abs=1e-20)


def test_b_potential_bounds_iterate_distance(lasso_split, lasso_reference):
    state = sdca.init(lasso_split, seed=1)
    violations = []

    def check(record):
        dist = float(np.sum((state.w - lasso_reference.w) ** 2))
        if record.B < dist - 1e-8:
            violations.append((record.epoch, record.B, dist))

    _, trace = sdca.run(lasso_split, epochs=40, reference=lasso_reference, potentials=True,
                        state=state, callbacks=[check])
    assert not violations
    assert np.all(trace.column("A") >= 0.0)


def test_expected_potential_contracts_at_the_predicted_rate(lasso_split, lasso_reference):
    seeds = range(8)
    curves = []
    for seed in seeds:
        _, trace = sdca.run(lasso_split, epochs=60, seed=seed, reference=lasso_reference, potentials=True)
        curves.append(trace.column("C"))
    mean_c = np.mean(curves, axis=0)
    epochs = np.arange(mean_c.size, dtype=float)
    fit = diagnostics.fit_linear_rate(mean_c[3:], floor=1e-20, epochs=epochs[3:])
    bound = (1.0 - lasso_split.eta * lasso_split.lam_tilde) ** lasso_split.N
    assert fit.rate <= bound + 0.05


def test_nonconvex_scad_reaches_a_stationary_point():
    d, _ = datagen.gen_scad(SynthSpec(family="scad", n=200, p=10, s=3, seed=5))
    spec = ProblemSpec(LossModel.squared(), ScadReg(lam=0.1), 0.1, d)
    sp = split_nonconvex(spec, 0.5)
    w, _ = sdca.run(sp, epochs=200, seed=0)
    assert spec.stationarity_residual(w) <= 1e-6


def test_corrected_lasso_reaches_the_reference():
    d, _ = datagen.gen_corrected(SynthSpec(family="corrected", n=200, p=10, s=3, correction=0.05, seed=2))
    spec = ProblemSpec(LossModel.squared(correction=0.05), L1Reg(), 0.1, d)
    sp = split_nonconvex(spec, 0.5)
    reference = diagnostics.compute_reference(sp)
    w, trace = sdca.run(sp, epochs=200, seed=0, reference=reference)
    assert np.linalg.norm(w - reference.w) <= 1e-6
    assert abs(trace.last.gap) <= 1e-9


def test_direct_mode_converges_linearly():
    d, _ = datagen.gen_lasso(SynthSpec(family="lasso", n=200, p=20, s=5, seed=9))
    spec = ProblemSpec(LossModel.squared(), ElasticReg(), 0.1, d)
    sp = split_direct(spec)
    reference = diagnostics.compute_reference(sp)
    _, trace = sdca.run(sp, epochs=150, seed=0, reference=reference)
    assert trace.last.gap <= 1e-9
    fit = diagnostics.fit_linear_rate(trace, floor=1e-11, ceiling=1e-2)
    assert fit.rate < 1.0
    assert fit.r_squared >= 0.9


def test_oversized_step_diverges(lasso_split):
    with pytest.raises(DivergenceError) as info:
        sdca.run(lasso_split.with_step(50.0), epochs=50, seed=0)
    assert info.value.trace.solver == "sdca"
    assert info.value.last_finite_epoch >= 0.0


def test_invalid_calls(lasso_split):
    with pytest.raises(ContractError):
        sdca.run(lasso_split, epochs=0)
    with pytest.raises(ContractError):
        sdca.run(lasso_split, epochs=1, potentials=True)
    with pytest.raises(ContractError):
        sdca.init(lasso_split, "random")
    with pytest.raises(ContractError):
        sdca.init(lasso_split, "zero", w0=np.zeros(lasso_split.spec.p))
    with pytest.raises(ContractError):
        sdca.init(lasso_split, "gradient", w0=np.zeros(3))


def test_single_step_touches_one_component(lasso_split):
    state = sdca.init(lasso_split, seed=0)
    sdca.step(state, lasso_split, i=4)
    assert state.t == 1
    assert np.count_nonzero(state.alpha) == 1 and state.alpha[4] != 0.0
    assert not np.any(state.aug)
    sdca.step(state, lasso_split, i=lasso_split.n)
    assert state.aggregate_error(lasso_split) <= 1e-12
