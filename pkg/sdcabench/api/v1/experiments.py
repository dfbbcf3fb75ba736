import hashlib
import re
from pathlib import Path
from typing import Any, Dict, List

from fastapi import APIRouter, Depends, HTTPException
from fastapi.responses import Response

from sdcabench.api.deps import get_output_root, get_run_dir
from sdcabench.core.errors import ContractError, MisuseError, PlotError, SdcaBenchError, TuningError
from sdcabench.crud.trace import read_manifest
from sdcabench.schemas.experiment import (
    ExperimentConfig,
    Manifest,
    PresetInfo,
    RunResponse,
    TuneRequest,
    TuneResponse,
)
from sdcabench.services import experiment, plotting, presets

router = APIRouter()


def run_id_for(cfg: ExperimentConfig) -> str:
    slug = re.sub(r"[^A-Za-z0-9._-]+", "-", cfg.name).strip("-") or "experiment"
    digest = hashlib.sha256(cfg.model_dump_json().encode("utf-8")).hexdigest()[:12]
    return f"{slug}-{digest}"


def _http_error(exc: SdcaBenchError) -> HTTPException:
    if isinstance(exc, (ContractError, MisuseError)):
        return HTTPException(status_code=400, detail=str(exc))
    if isinstance(exc, TuningError):
        return HTTPException(status_code=422, detail=str(exc))
    return HTTPException(status_code=500, detail=f"Error running experiment: {exc}")


@router.get("/presets", response_model=List[PresetInfo])
def list_presets():
    return [PresetInfo(name=name, needs_dataset=presets.needs_dataset(name)) for name in presets.list_presets()]


@router.get("/presets/{name}")
def read_preset(name: str) -> Dict[str, Any]:
    if name not in presets.PRESETS:
        raise HTTPException(status_code=404, detail="Preset not found")
    return presets.PRESETS[name]


@router.post("/run", response_model=RunResponse)
def run_experiment(cfg: ExperimentConfig, root: Path = Depends(get_output_root)):
    run_id = run_id_for(cfg)
    try:
        manifest = experiment.run_experiment(cfg, root / run_id)
    except SdcaBenchError as e:
        raise _http_error(e)
    return RunResponse(run_id=run_id, manifest=manifest)


@router.post("/tune", response_model=TuneResponse)
def tune(request: TuneRequest):
    try:
        step = experiment.tune_rate(request.config, request.solver)
    except SdcaBenchError as e:
        raise _http_error(e)
    return TuneResponse(solver=request.solver, step=step)


@router.get("/{run_id}/manifest", response_model=Manifest)
def read_run_manifest(run_dir: Path = Depends(get_run_dir)):
    return read_manifest(run_dir)


@router.get("/{run_id}/plot")
def plot_run(run_dir: Path = Depends(get_run_dir)):
    sources = sorted(run_dir.glob("*_seed*.csv"))
    try:
        path = plotting.plot_svg(sources, run_dir / "convergence.svg", title=run_dir.name)
    except PlotError as e:
        raise HTTPException(status_code=409, detail=str(e))
    return Response(content=path.read_bytes(), media_type="image/svg+xml")
