import re
from pathlib import Path

from fastapi import Depends, HTTPException, status

from sdcabench.core.config import settings

_RUN_ID = re.compile(r"^[A-Za-z0-9._-]+$")


def get_output_root() -> Path:
    root = Path(settings.SDCA_OUTPUT_DIR)
    root.mkdir(parents=True, exist_ok=True)
    return root


def get_run_dir(run_id: str, root: Path = Depends(get_output_root)) -> Path:
    not_found = HTTPException(
        status_code=status.HTTP_404_NOT_FOUND,
        detail="Run not found",
    )
    if not _RUN_ID.match(run_id) or run_id in (".", ".."):
        raise not_found
    run_dir = root / run_id
    if not (run_dir / "manifest.json").exists():
        raise not_found
    return run_dir
