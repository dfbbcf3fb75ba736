from fastapi import APIRouter
from sdcabench.api.v1 import datasets, experiments

api_router = APIRouter()
api_router.include_router(experiments.router, prefix="/experiments", tags=["experiments"])
api_router.include_router(datasets.router, prefix="/datasets", tags=["datasets"])
