"""Feature containers shared by every solver.

A ``Dataset`` stores its rows either as one dense ``(n, p)`` array or as one CSR matrix,
never a mix of both, and both are treated as immutable after construction.
"""
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from sdcabench.core.errors import ContractError

Matrix = Union[np.ndarray, sp.csr_matrix]


@dataclass(frozen=True)
class SparseRow:
    indices: np.ndarray
    values: np.ndarray
    dim: int

    def __post_init__(self):
        indices = np.asarray(self.indices, dtype=np.int64)
        values = np.asarray(self.values, dtype=float)
        if indices.shape != values.shape or indices.ndim != 1:
            raise ContractError("indices and values must be 1-d sequences of equal length")
        if indices.size:
            if np.any(np.diff(indices) <= 0):
                raise ContractError("sparse row indices must be strictly increasing")
            if indices[0] < 0 or indices[-1] >= self.dim:
                raise ContractError(f"sparse row index out of range for dim={self.dim}")
        if np.any(values == 0.0):
            raise ContractError("sparse rows must not store explicit zeros")
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "values", values)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        out[self.indices] = self.values
        return out


FeatureRow = Union[SparseRow, np.ndarray]


def dot(a: FeatureRow, b: np.ndarray) -> float:
    """Inner product of a feature row with a dense vector."""
    b = np.asarray(b, dtype=float)
    if isinstance(a, SparseRow):
        if a.dim != b.shape[0]:
            raise ContractError(f"dimension mismatch: row has {a.dim}, vector has {b.shape[0]}")
        return float(a.values @ b[a.indices])
    a = np.asarray(a, dtype=float)
    if a.shape != b.shape:
        raise ContractError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(a @ b)


@dataclass(frozen=True)
class Dataset:
    X: Matrix
    y: np.ndarray
    meta: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        X = self.X
        y = np.array(self.y, dtype=float).reshape(-1)
        if sp.issparse(X):
            X = sp.csr_matrix(X, dtype=float)
            X.sum_duplicates()
            X.eliminate_zeros()
            X.sort_indices()
            values = X.data
        else:
            X = np.array(X, dtype=float)
            if X.ndim != 2:
                raise ContractError("dense feature matrix must be 2-d")
            values = X
            X.setflags(write=False)
        if X.shape[0] != y.shape[0]:
            raise ContractError(f"{X.shape[0]} rows but {y.shape[0]} labels")
        if not np.all(np.isfinite(values)) or not np.all(np.isfinite(y)):
            raise ContractError("features and labels must be finite")
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "meta", dict(self.meta))

    @classmethod
    def from_rows(cls, rows: Sequence[FeatureRow], labels: Sequence[float], dim: int,
                  meta: Optional[Mapping[str, Any]] = None) -> "Dataset":
        kinds = {isinstance(r, SparseRow) for r in rows}
        if len(kinds) > 1:
            raise ContractError("a dataset cannot mix sparse and dense rows")
        if kinds == {True}:
            indptr = np.zeros(len(rows) + 1, dtype=np.int64)
            for i, row in enumerate(rows):
                if row.dim != dim:
                    raise ContractError(f"row {i} has dim {row.dim}, expected {dim}")
                indptr[i + 1] = indptr[i] + row.indices.size
            indices = np.concatenate([r.indices for r in rows]) if rows else np.zeros(0, np.int64)
            values = np.concatenate([r.values for r in rows]) if rows else np.zeros(0)
            X = sp.csr_matrix((values, indices, indptr), shape=(len(rows), dim))
        elif rows:
            X = np.vstack([np.asarray(r, dtype=float) for r in rows])
            if X.shape[1] != dim:
                raise ContractError(f"dense rows have dim {X.shape[1]}, expected {dim}")
        else:
            X = sp.csr_matrix((0, dim))
        return cls(X=X, y=np.asarray(labels, dtype=float), meta=meta or {})

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.X)

    def row(self, i: int) -> FeatureRow:
        if not 0 <= i < self.n:
            raise ContractError(f"sample index {i} out of range [0, {self.n})")
        if self.is_sparse:
            start, end = self.X.indptr[i], self.X.indptr[i + 1]
            return SparseRow(self.X.indices[start:end], self.X.data[start:end], self.p)
        return self.X[i]

    def margins(self, w: np.ndarray) -> np.ndarray:
        """``X @ w`` for all samples."""
        return np.asarray(self.X @ w).reshape(-1)

    def rmatvec(self, coef: np.ndarray) -> np.ndarray:
        """``X.T @ coef``, the sum of rows weighted by ``coef``."""
        return np.asarray(self.X.T @ coef).reshape(-1)

    def to_dense(self) -> np.ndarray:
        return self.X.toarray() if self.is_sparse else np.array(self.X)

    @cached_property
    def row_norms_sq(self) -> np.ndarray:
        if self.is_sparse:
            return np.asarray(self.X.multiply(self.X).sum(axis=1)).reshape(-1)
        return np.einsum("ij,ij->i", self.X, self.X)

    @cached_property
    def column_norms(self) -> np.ndarray:
        if self.is_sparse:
            return np.sqrt(np.asarray(self.X.multiply(self.X).sum(axis=0)).reshape(-1))
        return np.linalg.norm(self.X, axis=0)

    @cached_property
    def rows(self) -> "RowAccess":
        return RowAccess(self)

    def with_features(self, X: Matrix, **meta) -> "Dataset":
        return Dataset(X=X, y=self.y, meta={**self.meta, **meta})

    def summary(self) -> Dict[str, Any]:
        nnz = int(self.X.nnz) if self.is_sparse else int(np.count_nonzero(self.X))
        cells = self.n * self.p
        return {
            "n": self.n,
            "p": self.p,
            "nnz": nnz,
            "density": nnz / cells if cells else 0.0,
            "sparse": self.is_sparse,
            "label_min": float(self.y.min()) if self.n else None,
            "label_max": float(self.y.max()) if self.n else None,
        }


class RowAccess:
    """Per-row dot/axpy kernels used in the stochastic inner loops (O(nnz) per call)."""

    __slots__ = ("_indices", "_values", "_sparse")

    def __init__(self, dataset: Dataset):
        self._sparse = dataset.is_sparse
        if self._sparse:
            X = dataset.X
            self._indices = [X.indices[X.indptr[i]:X.indptr[i + 1]] for i in range(dataset.n)]
            self._values = [X.data[X.indptr[i]:X.indptr[i + 1]] for i in range(dataset.n)]
        else:
            self._indices = None
            self._values = [dataset.X[i] for i in range(dataset.n)]

    def dot(self, i: int, w: np.ndarray) -> float:
        if self._sparse:
            return float(self._values[i] @ w[self._indices[i]])
        return float(self._values[i] @ w)

    def axpy(self, i: int, alpha: float, out: np.ndarray) -> None:
        """``out += alpha * x_i`` in place."""
        if self._sparse:
            out[self._indices[i]] += alpha * self._values[i]
        else:
            out += alpha * self._values[i]


def normalize_columns(d: Dataset) -> Tuple[Dataset, np.ndarray]:
    """Scale columns so that ``||X_j||_2 / sqrt(n) <= 1``; compliant columns are untouched."""
    if d.n < 1:
        raise ContractError("normalize_columns needs at least one sample")
    ratio = d.column_norms / np.sqrt(d.n)
    # slack keeps the operation idempotent under rounding
    scale = np.where(ratio > 1.0 + 1e-12, 1.0 / np.where(ratio > 0, ratio, 1.0), 1.0)
    if np.all(scale == 1.0):
        return d, scale
    if d.is_sparse:
        X = d.X @ sp.diags(scale)
    else:
        X = d.X * scale
    return d.with_features(X, column_normalized=True), scale


def polynomial_group_expand(d: Dataset, degree: int = 3) -> Tuple[Dataset, List[List[int]]]:
    """Expand every feature into its powers 1..degree; the powers of one feature form a group."""
    if degree < 1:
        raise ContractError("degree must be >= 1")
    if d.is_sparse:
        blocks = [d.X.power(k) for k in range(1, degree + 1)]
        stacked = sp.hstack(blocks, format="csc")
    else:
        stacked = np.hstack([d.X ** k for k in range(1, degree + 1)])
    # column j*degree + (k-1) holds feature j to the power k
    order = np.array([(k * d.p) + j for j in range(d.p) for k in range(degree)], dtype=np.int64)
    X = stacked[:, order]
    if d.is_sparse:
        X = sp.csr_matrix(X)
    groups = [list(range(j * degree, (j + 1) * degree)) for j in range(d.p)]
    return d.with_features(X, polynomial_degree=degree), groups
