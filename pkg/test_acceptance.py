"""Desk-scale runs of the shipped presets.

These build the named presets at full desk size and take minutes; run them with ``-m slow``.
"""
import itertools

import numpy as np
import pytest

from sdcabench.schemas.experiment import SolverConfig
from sdcabench.services.diagnostics import compute_reference, fit_linear_rate
from sdcabench.services.experiment import build_problem, resolve_step, solve
from sdcabench.services.presets import get_preset

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def desk():
    """Config, built problem and resolved steps of a preset, computed once per name."""
    cache = {}

    def get(name):
        if name not in cache:
            cfg = get_preset(name)
            problem = build_problem(cfg.problem)
            steps = {s.name: resolve_step(cfg, s, problem) for s in cfg.solvers}
            cache[name] = cfg, problem, steps
        return cache[name]

    return get


@pytest.mark.parametrize("name", ["lasso-desk", "lasso-desk-b01"])
def test_lasso_desk_converges_linearly(desk, name):
    cfg, problem, steps = desk(name)
    reference = compute_reference(problem.split)
    sdca = SolverConfig(name="sdca")
    gaps = []
    for seed in range(10):
        _, trace = solve(problem, sdca, steps["sdca"], cfg.epochs, seed, reference)
        assert trace.gaps.min() <= 1e-8, seed
        gaps.append(trace.gaps)
    mean_gap = np.mean(gaps, axis=0)
    fit = fit_linear_rate(mean_gap, floor=1e-8, ceiling=1e-2, epochs=trace.epochs)
    assert fit.rate < 1.0
    assert fit.r_squared >= 0.90


def test_lasso_desk_potential_contracts_at_the_worst_case_step(desk):
    cfg, problem, _ = desk("lasso-desk")
    split = problem.split
    reference = compute_reference(split)
    sdca = SolverConfig(name="sdca", potentials=True)
    curves = []
    for seed in range(20):
        _, trace = solve(problem, sdca, split.eta, 40, seed, reference)
        curves.append(trace.column("C"))
    mean_c = np.mean(curves, axis=0)[3:]
    # nonincreasing up to sampling noise well below the expected per-epoch decrease
    assert np.all(np.diff(mean_c) <= 1e-3 * mean_c[0])
    fit = fit_linear_rate(mean_c, floor=1e-20, epochs=np.arange(3, 3 + mean_c.size, dtype=float))
    assert fit.rate <= (1.0 - split.eta * split.lam_tilde) ** split.N + 0.05


@pytest.mark.parametrize("name", ["lasso-desk", "group-desk"])
def test_solvers_agree_on_convex_desk_presets(desk, name):
    cfg, problem, steps = desk(name)
    finals = {}
    for solver_name in ("sdca", "prox_gd", "prox_svrg", "saga"):
        solver = next((s for s in cfg.solvers if s.name == solver_name), None)
        if solver is None:
            solver = SolverConfig(name=solver_name, tune=True)
            steps[solver_name] = resolve_step(cfg, solver, problem)
        finals[solver_name], _ = solve(problem, solver, steps[solver_name], cfg.epochs, 0)
    for a, b in itertools.combinations(finals, 2):
        assert np.linalg.norm(finals[a] - finals[b]) <= 1e-5, (a, b)


@pytest.mark.parametrize("name", ["scad-desk", "corrected-desk"])
def test_nonconvex_desk_presets_reach_stationarity(desk, name):
    cfg, problem, steps = desk(name)
    assert not problem.spec.reg.convex or problem.spec.loss.correction > 0
    w, trace = solve(problem, SolverConfig(name="sdca"), steps["sdca"], cfg.epochs, 0)
    assert problem.spec.stationarity_residual(w) <= 1e-6

    # gap against the run's own limit point
    gaps = trace.objectives - trace.last.objective
    fit = fit_linear_rate(gaps, floor=1e-9, ceiling=1e-2, epochs=trace.epochs)
    assert gaps.max() >= 1e-2 and gaps[-2] <= 1e-9
    assert fit.r_squared >= 0.85


def test_direct_mode_spans_six_decades(desk):
    cfg, problem, steps = desk("elastic-direct")
    assert problem.split.mode == "direct" and problem.split.N == problem.spec.n == 200
    assert problem.spec.p == 100
    assert steps["sdca"] == problem.split.eta
    reference = compute_reference(problem.split)
    _, trace = solve(problem, SolverConfig(name="sdca"), steps["sdca"], cfg.epochs, 0, reference)
    gaps = trace.gaps
    assert gaps[0] > 1e-3 and gaps.min() < 1e-9
    fit = fit_linear_rate(trace, floor=1e-9, ceiling=1e-3)
    assert fit.rate < 1.0
    assert fit.r_squared >= 0.95
