"""Data ingestion, synthetic problems and trace serialization.

File formats
------------
CSV
    comma separated, one matrix row per line, optional single header line.
    Values are written with 17 significant digits so they round-trip.
PMAT1 binary
    magic ``b"PMAT1"``, little-endian ``u64 p`` (followed by ``u64 n`` for a
    data matrix), then row-major little-endian float64 values.
Trace
    CSV with columns ``iter, elapsed_s, objective, step, batch_n, nnz,
    rel_change, rel_error`` or the same records as JSON lines.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, NotSymmetric, ParseError
from .linalg import cholesky, extreme_eigenvalues, mirror_lower
from .results import SolveResult, TraceRecord
from .sampler import GaussianSampler, make_rng

MAGIC = b"PMAT1"
SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class DatasetMatrix:
    values: np.ndarray  # (n, p)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise DimensionMismatch(f"data matrix must be 2-d, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("data matrix has non-finite entries")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class SyntheticProblem:
    theta_star: np.ndarray
    x: DatasetMatrix
    s: np.ndarray
    seed: int
    density: float
    magnitude: float
    ell: float


def sample_covariance(x, center: bool = False) -> np.ndarray:
    """``X^T X / n``; with ``center=True`` column means are removed first."""
    v = x.values if isinstance(x, DatasetMatrix) else np.asarray(x, dtype=np.float64)
    if v.ndim != 2 or v.shape[0] < 1:
        raise DimensionMismatch("need an (n, p) data matrix with n >= 1")
    if center:
        v = v - v.mean(axis=0)
    return mirror_lower(v.T @ v / v.shape[0])


def sparse_signal(p: int, density: float, magnitude: float, rng: np.random.Generator) -> np.ndarray:
    """Symmetric matrix with zero diagonal and off-diagonal fill ``density``.

    Nonzero values are standard normal pushed away from zero by ``magnitude``.
    """
    iu = np.triu_indices(p, 1)
    mask = rng.random(iu[0].size) < density
    vals = rng.standard_normal(int(mask.sum()))
    vals += np.where(vals >= 0, magnitude, -magnitude)
    b = np.zeros((p, p))
    b[iu[0][mask], iu[1][mask]] = vals
    return b + b.T


def generate_synthetic(
    p: int,
    density: float | None = None,
    magnitude: float = 4.0,
    ell: float = 1.0,
    seed: int = 0,
    n: int | None = None,
) -> SyntheticProblem:
    """Sparse ground-truth precision with ``lambda_min = ell`` and ``n = ceil(p/2)`` draws."""
    if p < 2:
        raise ValueError("p must be at least 2")
    if density is None:
        density = min(1.0, 10.0 / p)
    if not 0 < density <= 1:
        raise ValueError("density must lie in (0, 1]")
    if ell <= 0:
        raise ValueError("ell must be positive")
    rng = make_rng(seed)
    b = sparse_signal(p, density, magnitude, rng)
    b_min, _ = extreme_eigenvalues(b)
    theta_star = b + (ell - b_min) * np.eye(p)
    n = math.ceil(p / 2) if n is None else n
    x = GaussianSampler(cholesky(theta_star), rng).sample(n)
    data = DatasetMatrix(x)
    return SyntheticProblem(
        theta_star=theta_star,
        x=data,
        s=sample_covariance(data),
        seed=seed,
        density=density,
        magnitude=magnitude,
        ell=ell,
    )


# -- file formats -----------------------------------------------------------


def infer_format(path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix in (".bin", ".pmat"):
        return "binary"
    return "csv"


def _parse_csv(text: str, header: bool) -> np.ndarray:
    rows = []
    width = None
    reader = csv.reader(io.StringIO(text))
    for lineno, row in enumerate(reader, start=1):
        if header and lineno == 1:
            continue
        if not row or all(not c.strip() for c in row):
            continue
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(f"expected {width} fields, found {len(row)}", line=lineno, column=min(len(row), width) + 1)
        vals = []
        for col, cell in enumerate(row, start=1):
            try:
                vals.append(float(cell))
            except ValueError:
                raise ParseError(f"cannot parse {cell.strip()!r} as a number", line=lineno, column=col) from None
        rows.append(vals)
    if not rows:
        raise ParseError("no data rows")
    return np.array(rows, dtype=np.float64)


def _read_binary(path, kind: str) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[: len(MAGIC)] != MAGIC:
        raise ParseError("missing PMAT1 magic bytes")
    off = len(MAGIC)
    try:
        (p,) = struct.unpack_from("<Q", raw, off)
        off += 8
        n = p
        if kind == "data":
            (n,) = struct.unpack_from("<Q", raw, off)
            off += 8
    except struct.error:
        raise ParseError("truncated header") from None
    expected = off + 8 * n * p
    if len(raw) != expected:
        raise DimensionMismatch(f"binary payload has {len(raw)} bytes, header implies {expected}")
    return np.frombuffer(raw, dtype="<f8", count=n * p, offset=off).reshape(n, p).astype(np.float64)


def read_matrix(path, format: str | None = None, kind: str = "covariance", header: bool = False):
    """Read a covariance (``kind="covariance"``) or data matrix (``kind="data"``)."""
    if kind not in ("covariance", "data"):
        raise ValueError(f"unknown kind {kind!r}")
    format = format or infer_format(path)
    if format == "csv":
        a = _parse_csv(Path(path).read_text(), header)
    elif format == "binary":
        a = _read_binary(path, kind)
    else:
        raise ValueError(f"unknown format {format!r}")
    if not np.all(np.isfinite(a)):
        raise ParseError("matrix has non-finite entries")
    if kind == "data":
        return DatasetMatrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"covariance must be square, got {a.shape}")
    asym = np.max(np.abs(a - a.T)) if a.size else 0.0
    if asym > SYMMETRY_TOL * max(1.0, np.max(np.abs(a))):
        raise NotSymmetric(f"max asymmetry {asym:.3g} exceeds tolerance")
    return mirror_lower((a + a.T) / 2.0)


def _atomic_write(path, data: bytes):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def write_matrix(a, path, format: str | None = None):
    """Write a square matrix, a :class:`DatasetMatrix` or any 2-d array atomically."""
    is_data = isinstance(a, DatasetMatrix)
    v = a.values if is_data else np.asarray(a, dtype=np.float64)
    format = format or infer_format(path)
    if format == "csv":
        buf = io.StringIO()
        np.savetxt(buf, v, delimiter=",", fmt="%.17g")
        _atomic_write(path, buf.getvalue().encode())
    elif format == "binary":
        n, p = v.shape
        if not is_data and n != p:
            raise DimensionMismatch("non-square array must be wrapped in DatasetMatrix for binary output")
        head = MAGIC + struct.pack("<Q", p) + (struct.pack("<Q", n) if is_data else b"")
        _atomic_write(path, head + np.ascontiguousarray(v, dtype="<f8").tobytes())
    else:
        raise ValueError(f"unknown format {format!r}")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _json_safe(row: dict) -> dict:
    return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in row.items()}


def write_trace(result: SolveResult | list[TraceRecord], path, format: str | None = None):
    records = result.trace if isinstance(result, SolveResult) else result
    if format is None:
        format = "jsonl" if Path(path).suffix.lower() in (".jsonl", ".json") else "csv"
    if format == "csv":
        lines = [",".join(TraceRecord.FIELDS)]
        lines += [",".join(_fmt(getattr(r, f)) for f in TraceRecord.FIELDS) for r in records]
        payload = "\n".join(lines) + "\n"
    elif format == "jsonl":
        # strict JSON has no NaN; the first row's rel_change becomes null
        payload = "".join(json.dumps(_json_safe(r.as_row())) + "\n" for r in records)
    else:
        raise ValueError(f"unknown trace format {format!r}")
    _atomic_write(path, payload.encode())


def read_trace(path, format: str | None = None) -> list[TraceRecord]:
    if format is None:
        format = "jsonl" if Path(path).suffix.lower() in (".jsonl", ".json") else "csv"
    text = Path(path).read_text()
    rows = []
    if format == "jsonl":
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
    else:
        for row in csv.DictReader(io.StringIO(text)):
            rows.append({k: (None if v == "" else v) for k, v in row.items()})
    out = []
    for r in rows:
        out.append(
            TraceRecord(
                iter=int(r["iter"]),
                elapsed_s=float(r["elapsed_s"]),
                objective=float(r["objective"]),
                step=float(r["step"]),
                nnz=int(r["nnz"]),
                rel_change=math.nan if r["rel_change"] is None else float(r["rel_change"]),
                batch_n=None if r["batch_n"] is None else int(r["batch_n"]),
                rel_error=None if r["rel_error"] is None else float(r["rel_error"]),
            )
        )
    return out
