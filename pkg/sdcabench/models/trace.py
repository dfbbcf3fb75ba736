from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np
import pandas as pd

from sdcabench.core.errors import ContractError

TRACE_COLUMNS = ["epoch", "objective", "gap", "A", "B", "C", "seconds"]


@dataclass
class TraceRecord:
    epoch: float
    objective: float
    gap: Optional[float] = None
    A: Optional[float] = None
    B: Optional[float] = None
    C: Optional[float] = None
    seconds: float = 0.0


@dataclass
class Trace:
    """Per-epoch history of one solver run; epochs are dataset passes."""
    solver: str
    seed: int = 0
    records: List[TraceRecord] = field(default_factory=list)

    def append(self, record: TraceRecord) -> None:
        if self.records and not record.epoch > self.records[-1].epoch:
            raise ContractError(
                f"trace epochs must increase: {record.epoch} after {self.records[-1].epoch}")
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([np.nan if getattr(r, name) is None else getattr(r, name) for r in self.records],
                        dtype=float)

    @property
    def epochs(self) -> np.ndarray:
        return self.column("epoch")

    @property
    def objectives(self) -> np.ndarray:
        return self.column("objective")

    @property
    def gaps(self) -> np.ndarray:
        return self.column("gap")

    @property
    def last(self) -> Optional[TraceRecord]:
        return self.records[-1] if self.records else None

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(r) for r in self.records], columns=TRACE_COLUMNS).astype(float)
