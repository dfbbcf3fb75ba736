"""Trace CSV and run manifest persistence."""
import json
import os
import re
from pathlib import Path
from typing import Tuple, Union

import pandas as pd

from sdcabench.core.errors import ContractError
from sdcabench.models.trace import TRACE_COLUMNS, Trace
from sdcabench.schemas.experiment import Manifest

PathLike = Union[str, os.PathLike]
FLOAT_FORMAT = "%.17g"
MANIFEST_NAME = "manifest.json"
_TRACE_NAME = re.compile(r"^(?P<solver>.+)_seed(?P<seed>-?\d+)\.csv$")


def trace_filename(solver: str, seed: int) -> str:
    return f"{solver}_seed{seed}.csv"


def parse_trace_filename(path: PathLike) -> Tuple[str, int]:
    match = _TRACE_NAME.match(Path(path).name)
    if match is None:
        raise ContractError(f"{Path(path).name!r} is not a <solver>_seed<seed>.csv trace file")
    return match.group("solver"), int(match.group("seed"))


def write_trace_csv(trace: Trace, path: PathLike) -> Path:
    path = Path(path)
    trace.to_frame().to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="",
                            columns=TRACE_COLUMNS, lineterminator="\n")
    return path


def read_trace_csv(path: PathLike) -> pd.DataFrame:
    frame = pd.read_csv(path, dtype=float)
    missing = [c for c in TRACE_COLUMNS if c not in frame.columns]
    if missing:
        raise ContractError(f"{path}: missing trace columns {missing}")
    return frame[TRACE_COLUMNS]


def write_manifest(manifest: Manifest, directory: PathLike) -> Path:
    path = Path(directory) / MANIFEST_NAME
    payload = manifest.model_dump(mode="json")
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_manifest(path: PathLike) -> Manifest:
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    if not path.exists():
        raise ContractError(f"no manifest at {path}")
    return Manifest.model_validate_json(path.read_text(encoding="utf-8"))
