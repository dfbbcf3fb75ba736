from typing import Optional

from fastapi import APIRouter, File, Form, HTTPException, UploadFile
from fastapi.responses import Response

from sdcabench.core.errors import LibsvmParseError
from sdcabench.crud.dataset import decode_bytes, parse_libsvm, serialize_libsvm
from sdcabench.schemas.problem import SynthSpec
from sdcabench.schemas.reports import DatasetSummary
from sdcabench.services import datagen

router = APIRouter()


@router.post("/upload", response_model=DatasetSummary)
async def upload_dataset(
    file: UploadFile = File(...),
    n_features: Optional[int] = Form(None),
):
    raw = await file.read()
    try:
        d = parse_libsvm(decode_bytes(raw), n_features=n_features)
    except UnicodeDecodeError:
        raise HTTPException(status_code=400, detail="Dataset is not UTF-8 text")
    except LibsvmParseError as e:
        raise HTTPException(status_code=400, detail=f"Error parsing dataset: {e}")
    return DatasetSummary(**d.summary())


@router.post("/generate")
def generate_dataset(spec: SynthSpec, download: bool = False):
    d, _ = datagen.generate(spec)
    if download:
        return Response(content=serialize_libsvm(d), media_type="text/plain", headers={
            "Content-Disposition": f"attachment; filename={spec.family}_seed{spec.seed}.libsvm"
        })
    return DatasetSummary(**d.summary())
