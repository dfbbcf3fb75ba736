"""Config-driven solver comparisons: problem assembly, learning-rate tuning and trace export."""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from sdcabench.core.config import settings
from sdcabench.core.errors import (
    ContractError,
    DivergenceError,
    InsufficientDataError,
    ReferenceQualityError,
    SdcaBenchError,
    TuningError,
)
from sdcabench.crud.dataset import load_libsvm
from sdcabench.crud.trace import read_manifest, trace_filename, write_manifest, write_trace_csv
from sdcabench.models.dataset import Dataset, normalize_columns, polynomial_group_expand
from sdcabench.models.loss import LossModel
from sdcabench.models.problem import ProblemSpec
from sdcabench.models.regularizer import ElasticReg, GroupReg, L1Reg, Regularizer, ScadReg
from sdcabench.models.trace import Trace
from sdcabench.schemas.experiment import (
    CONSTANT_RATE_SOLVERS,
    BaselineConfig,
    ExperimentConfig,
    Manifest,
    ReferenceConfig,
    ReferenceInfo,
    RunRecord,
    SolverConfig,
)
from sdcabench.schemas.problem import ProblemConfig
from sdcabench.services import baselines, datagen, sdca
from sdcabench.services.diagnostics import Reference, compute_reference, fit_linear_rate
from sdcabench.services.splitting import (
    SplitProblem,
    recommend_lambda,
    split_convex,
    split_direct,
    split_nonconvex,
)

logger = logging.getLogger(__name__)

TUNING_GRID = tuple(2.0 / 2 ** k for k in range(13))


@dataclass(frozen=True)
class BuiltProblem:
    spec: ProblemSpec
    split: SplitProblem
    w_star: Optional[np.ndarray]
    resolved: Dict[str, Any]


def _load(cfg: ProblemConfig) -> Tuple[Dataset, Optional[np.ndarray]]:
    if cfg.synth is not None:
        return datagen.generate(cfg.synth)
    return load_libsvm(cfg.dataset_path, cfg.n_features), None


def _recommended_lam(cfg: ProblemConfig, d: Dataset, correction: float, w_star: Optional[np.ndarray]) -> float:
    synth = cfg.synth
    if synth is None:
        raise ContractError("lam can only be recommended for synthetic problems")
    if cfg.regularizer == "scad":
        return recommend_lambda("scad", sigma=synth.sigma, n=d.n, p=d.p)
    if cfg.regularizer == "group":
        return recommend_lambda("group", sigma=synth.sigma, n=d.n, group_size=synth.group_size,
                                n_groups=synth.n_groups)
    if correction > 0:
        return recommend_lambda("corrected", sigma=synth.sigma, n=d.n, p=d.p,
                                sigma_max=datagen.design_top_eigenvalue(synth), correction=correction,
                                w_norm=float(np.linalg.norm(w_star)))
    return recommend_lambda("lasso", sigma=synth.sigma, n=d.n, p=d.p)


def _regularizer(cfg: ProblemConfig, d: Dataset, groups, lam: float) -> Regularizer:
    if cfg.regularizer == "l1":
        return L1Reg()
    if cfg.regularizer == "elastic":
        return ElasticReg(L1Reg())
    if cfg.regularizer == "scad":
        return ScadReg(lam, cfg.zeta)
    if groups is not None:
        return GroupReg(groups)
    if "group_size" in d.meta and "n_groups" in d.meta:
        return GroupReg.contiguous(d.meta["n_groups"], d.meta["group_size"])
    if cfg.group_size is not None:
        if d.p % cfg.group_size:
            raise ContractError(f"p={d.p} is not a multiple of group_size={cfg.group_size}")
        return GroupReg.contiguous(d.p // cfg.group_size, cfg.group_size)
    raise ContractError("group regularizer needs group_size, a polynomial expansion or grouped synthetic data")


def build_problem(cfg: ProblemConfig) -> BuiltProblem:
    d, w_star = _load(cfg)
    groups = None
    if cfg.polynomial_degree is not None:
        d, groups = polynomial_group_expand(d, cfg.polynomial_degree)
    if cfg.normalize:
        d, _ = normalize_columns(d)

    correction = cfg.correction if cfg.correction is not None else float(d.meta.get("correction", 0.0))
    if cfg.loss == "squared":
        loss = LossModel.squared(correction)
    elif correction > 0:
        raise ContractError("the correction term applies to the squared loss only")
    else:
        loss = LossModel.logistic()

    lam = cfg.lam if cfg.lam is not None else _recommended_lam(cfg, d, correction, w_star)
    reg = _regularizer(cfg, d, groups, lam)
    spec = ProblemSpec(loss=loss, reg=reg, lam=lam, dataset=d,
                       rho=cfg.rho if cfg.rho is not None else math.inf)
    if cfg.mode == "direct":
        split = split_direct(spec)
    elif reg.convex and correction == 0:
        split = split_convex(spec, cfg.lam_tilde)
    else:
        split = split_nonconvex(spec, cfg.lam_tilde)

    resolved = {
        "dataset": d.summary(),
        "loss": loss.kind,
        "correction": correction,
        "regularizer": repr(reg),
        "lam": lam,
        "lam_tilde": split.lam_tilde,
        "mu": split.mu,
        "rho": cfg.rho,
        "mode": split.mode,
        "N": split.N,
        "sdca_eta": split.eta,
        "lipschitz": spec.lipschitz,
        "w_star_nnz": int(np.count_nonzero(w_star)) if w_star is not None else None,
    }
    logger.info("problem: n=%d p=%d %r lam=%.6g lam_tilde=%.6g mode=%s",
                d.n, d.p, reg, lam, split.lam_tilde, split.mode)
    return BuiltProblem(spec=spec, split=split, w_star=w_star, resolved=resolved)


def solve(problem: BuiltProblem, solver: SolverConfig, step: float, epochs: int, seed: int,
          reference: Optional[Reference] = None, gap_tol: Optional[float] = None) -> Tuple[np.ndarray, Trace]:
    if solver.name == "sdca":
        split = problem.split if step == problem.split.eta else problem.split.with_step(step)
        return sdca.run(split, epochs, seed=seed, reference=reference, gap_tol=gap_tol,
                        init_policy=solver.init_policy, potentials=solver.potentials)
    config = BaselineConfig(solver=solver.name, step=step, inner_loop=solver.inner_loop,
                            epochs=epochs, seed=seed)
    return baselines.run_baseline(problem.spec, config, reference, gap_tol)


def _solver_config(cfg: ExperimentConfig, solver: Union[str, SolverConfig]) -> SolverConfig:
    if isinstance(solver, SolverConfig):
        return solver
    for entry in cfg.solvers:
        if entry.name == solver:
            return entry
    return SolverConfig(name=solver)


def tune_rate(cfg: ExperimentConfig, solver: Union[str, SolverConfig],
              problem: Optional[BuiltProblem] = None) -> float:
    """Pick the grid step with the smallest final objective; ties go to the smaller step."""
    solver_cfg = _solver_config(cfg, solver)
    if solver_cfg.name not in CONSTANT_RATE_SOLVERS:
        raise ContractError(f"{solver_cfg.name} does not use a constant rate and cannot be grid-tuned")
    solver_cfg = solver_cfg.model_copy(update={"potentials": False, "tune": False, "step": None})
    problem = problem or build_problem(cfg.problem)
    seed = cfg.seeds[0]

    def final_objective(step: float) -> Optional[float]:
        try:
            with np.errstate(all="ignore"):
                _, trace = solve(problem, solver_cfg, step, cfg.epochs, seed)
        except DivergenceError:
            return None
        value = trace.last.objective
        return value if math.isfinite(value) else None

    with ThreadPoolExecutor(max_workers=settings.MAX_WORKERS) as pool:
        finals = list(pool.map(final_objective, TUNING_GRID))

    finite = [(step, value) for step, value in zip(TUNING_GRID, finals) if value is not None]
    if not finite:
        raise TuningError(f"every grid step diverged for {solver_cfg.name}")
    # min over (value, step): exact ties go to the smaller step
    value, step = min((value, step) for step, value in finite)
    logger.info("tuned %s: step=%g final objective=%.17g", solver_cfg.name, step, value)
    return step


def resolve_step(cfg: ExperimentConfig, solver: SolverConfig, problem: BuiltProblem) -> float:
    if solver.step is not None:
        return solver.step
    if solver.tune:
        return tune_rate(cfg, solver, problem)
    if solver.name == "sdca":
        return problem.split.eta
    return baselines.default_step(problem.spec, solver.name)


def _reference(split: SplitProblem, rc: ReferenceConfig) -> Tuple[Reference, List[str]]:
    notes = []
    try:
        reference = compute_reference(split, rc.tol, rc.max_iter)
    except ReferenceQualityError as exc:
        if not rc.accept_inexact:
            raise
        message = f"inexact reference accepted (residual {exc.residual:.3e})"
        logger.warning(message)
        notes.append(message)
        reference = exc.reference
    if not split.spec.reg.convex or split.spec.loss.correction > 0:
        notes.append("nonconvex objective: reference is the stationary point reached by prox-gd from 0")
    return reference, notes


def _run_job(cfg: ExperimentConfig, solver: SolverConfig, seed: int, step: Optional[float],
             problem: BuiltProblem, reference: Reference, out: Path, failure: Optional[str] = None) -> RunRecord:
    status, message = "ok", None
    if failure is not None:
        status, message = "error", failure
        trace = Trace(solver=solver.name, seed=seed)
    else:
        try:
            _, trace = solve(problem, solver, step, cfg.epochs, seed, reference, cfg.gap_tol)
        except DivergenceError as exc:
            logger.warning("%s seed=%d: %s", solver.name, seed, exc)
            status, message = "diverged", str(exc)
            trace = getattr(exc, "trace", None) or Trace(solver=solver.name, seed=seed)
        except SdcaBenchError as exc:
            logger.warning("%s seed=%d failed: %s", solver.name, seed, exc)
            status, message = "error", str(exc)
            trace = Trace(solver=solver.name, seed=seed)

    fit = None
    if status == "ok" and len(trace) > 1:
        try:
            fit = fit_linear_rate(trace, reference=reference)
        except InsufficientDataError:
            logger.debug("%s seed=%d: too few points above the noise floor for a rate fit", solver.name, seed)

    path = write_trace_csv(trace, out / trace_filename(solver.name, seed))
    last = trace.last
    return RunRecord(
        solver=solver.name,
        seed=seed,
        step=step,
        csv=path.name,
        status=status,
        message=message,
        epochs_run=last.epoch if last else 0.0,
        final_objective=last.objective if last else None,
        final_gap=last.gap if last else None,
        rate=fit.rate if fit else None,
        rate_r_squared=fit.r_squared if fit else None,
    )


def run_experiment(cfg: ExperimentConfig, out_dir: Union[str, Path, None] = None) -> Manifest:
    """Run every (solver, seed) pair, write one CSV each plus ``manifest.json`` into the output directory."""
    out = Path(out_dir or cfg.output_dir or settings.SDCA_OUTPUT_DIR)
    out.mkdir(parents=True, exist_ok=True)
    logger.info("experiment %s: %d solvers x %d seeds -> %s", cfg.name, len(cfg.solvers), len(cfg.seeds), out)

    problem = build_problem(cfg.problem)
    reference, notes = _reference(problem.split, cfg.reference)
    steps: Dict[str, Optional[float]] = {}
    failures: Dict[str, str] = {}
    for solver in cfg.solvers:
        try:
            steps[solver.name] = resolve_step(cfg, solver, problem)
        except SdcaBenchError as exc:
            logger.warning("%s: no usable step: %s", solver.name, exc)
            steps[solver.name] = None
            failures[solver.name] = f"step selection failed: {exc}"

    jobs = [(solver, seed) for solver in cfg.solvers for seed in cfg.seeds]
    with ThreadPoolExecutor(max_workers=settings.MAX_WORKERS) as pool:
        runs = list(pool.map(
            lambda job: _run_job(cfg, job[0], job[1], steps[job[0].name], problem, reference, out,
                                 failures.get(job[0].name)), jobs))

    resolved = dict(problem.resolved, steps=steps)
    if problem.w_star is not None:
        resolved["reference_error_to_truth"] = float(np.linalg.norm(reference.w - problem.w_star))
    manifest = Manifest(
        config=cfg,
        resolved=resolved,
        reference=ReferenceInfo(objective=reference.objective, residual=reference.residual,
                                exact=reference.exact, note="; ".join(notes) or None),
        runs=runs,
        advisories=list(problem.split.advisories) + notes,
    )
    write_manifest(manifest, out)
    failed = [r for r in runs if r.status != "ok"]
    logger.info("experiment %s finished: %d runs, %d not ok", cfg.name, len(runs), len(failed))
    return manifest


def rerun_from_manifest(path: Union[str, Path], out_dir: Union[str, Path, None] = None) -> Manifest:
    manifest = read_manifest(path)
    return run_experiment(manifest.config, out_dir)
