"""LIBSVM text I/O.

Grammar per nonempty line: ``<label> <idx>:<val> ...`` with 1-based, strictly ascending indices.
Anything after ``#`` is a comment.  Indices are stored 0-based; explicit zero values are dropped.
"""
import gzip
import logging
import os
from typing import Iterable, Optional, Union

import numpy as np
import scipy.sparse as sp

from sdcabench.core.errors import ContractError, LibsvmFormatError, LibsvmParseError
from sdcabench.models.dataset import Dataset

logger = logging.getLogger(__name__)

GZIP_MAGIC = b"\x1f\x8b"


def parse_libsvm(text: Union[str, Iterable[str]], n_features: Optional[int] = None) -> Dataset:
    lines = text.splitlines() if isinstance(text, str) else text
    labels = []
    indptr = [0]
    indices = []
    values = []
    max_index = 0

    for line_number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            label = float(tokens[0])
        except ValueError:
            raise LibsvmParseError(f"label {tokens[0]!r} is not a number", line_number)
        if not np.isfinite(label):
            raise LibsvmParseError(f"label {tokens[0]!r} is not finite", line_number)

        previous = 0
        for token in tokens[1:]:
            idx_text, sep, val_text = token.partition(":")
            if not sep:
                raise LibsvmParseError(f"expected <index>:<value>, got {token!r}", line_number)
            try:
                idx = int(idx_text)
                val = float(val_text)
            except ValueError:
                raise LibsvmParseError(f"malformed feature {token!r}", line_number)
            if not np.isfinite(val):
                raise LibsvmParseError(f"feature value {val_text!r} is not finite", line_number)
            if idx < 1:
                raise LibsvmFormatError(f"feature index {idx} is not 1-based", line_number)
            if idx <= previous:
                raise LibsvmFormatError(f"feature index {idx} does not ascend after {previous}", line_number)
            if n_features is not None and idx > n_features:
                raise LibsvmFormatError(f"feature index {idx} exceeds n_features={n_features}", line_number)
            previous = idx
            if val != 0.0:
                indices.append(idx - 1)
                values.append(val)
        max_index = max(max_index, previous)
        labels.append(label)
        indptr.append(len(indices))

    p = n_features if n_features is not None else max_index
    X = sp.csr_matrix(
        (np.asarray(values, dtype=float), np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(labels), p),
    )
    return Dataset(X=X, y=np.asarray(labels, dtype=float), meta={"format": "libsvm"})


def _fmt(x: float) -> str:
    return "%.17g" % x


def serialize_libsvm(d: Dataset) -> str:
    X = d.X if d.is_sparse else sp.csr_matrix(d.X)
    out = []
    for i in range(d.n):
        start, end = X.indptr[i], X.indptr[i + 1]
        features = " ".join(f"{j + 1}:{_fmt(v)}" for j, v in zip(X.indices[start:end], X.data[start:end]))
        out.append(f"{_fmt(d.y[i])} {features}".rstrip())
    return "\n".join(out) + ("\n" if out else "")


def decode_bytes(raw: bytes) -> str:
    """Decode file content, gunzipping when the gzip magic bytes are present."""
    if raw[:2] == GZIP_MAGIC:
        raw = gzip.decompress(raw)
    return raw.decode("utf-8")


def load_libsvm(path: Union[str, os.PathLike], n_features: Optional[int] = None) -> Dataset:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ContractError(f"cannot read dataset {os.fspath(path)!r}: {exc}") from exc
    d = parse_libsvm(decode_bytes(raw), n_features=n_features)
    logger.info("loaded %s: n=%d p=%d nnz=%d", os.fspath(path), d.n, d.p, d.X.nnz)
    return d.with_features(d.X, source=os.fspath(path))


def save_libsvm(d: Dataset, path: Union[str, os.PathLike]) -> None:
    data = serialize_libsvm(d).encode("utf-8")
    if os.fspath(path).endswith(".gz"):
        # mtime pinned so repeated exports are byte-identical
        data = gzip.compress(data, mtime=0)
    with open(path, "wb") as fh:
        fh.write(data)
    logger.info("wrote %d samples to %s", d.n, os.fspath(path))
