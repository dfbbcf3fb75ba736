from pydantic import BaseModel
from typing import Dict, Optional


class AssumptionReport(BaseModel):
    checks: Dict[str, bool]
    passed: bool
    l_d: float
    estimated_l_d: float
    mu: float


class DatasetSummary(BaseModel):
    n: int
    p: int
    nnz: int
    density: float
    sparse: bool
    label_min: Optional[float] = None
    label_max: Optional[float] = None
