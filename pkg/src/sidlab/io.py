"""File formats: CSV tables, JSON reports and little-endian binary arrays.

Binary layout (all little-endian)::

    4 bytes  magic  (b"PSF1" phase-space function, b"KRN1" operator kernel)
    u32      rank
    u64      dims[rank]
    complex64 payload, C order
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .errors import ExportError

PSF_MAGIC = b"PSF1"
KERNEL_MAGIC = b"KRN1"
MAGICS = (PSF_MAGIC, KERNEL_MAGIC)


def _open(path, mode):
    path = Path(path)
    try:
        if "w" in mode:
            path.parent.mkdir(parents=True, exist_ok=True)
        return open(path, mode, newline="" if "b" not in mode else None)
    except OSError as exc:
        raise ExportError(f"{path}: {exc.strerror or exc}") from exc


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays and complex numbers for JSON."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if np.isfinite(x) else repr(x)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": to_jsonable(obj.real), "im": to_jsonable(obj.imag)}
    return obj


def dumps_json(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True)


def write_json(obj, path) -> Path:
    with _open(path, "w") as fh:
        fh.write(dumps_json(obj) + "\n")
    return Path(path)


def read_json(path):
    with _open(path, "r") as fh:
        return json.load(fh)


def _write_rows(path, header, rows) -> Path:
    with _open(path, "w") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) for x in row])
    return Path(path)


def write_diagonal_csv(diag, path) -> Path:
    """One row per (omega, p) cell: ``omega,p,rho``."""
    labels = np.asarray(diag.label_values(), dtype=float)
    rows = []
    for i, w in enumerate(diag.grid_w.nodes):
        for j in range(diag.values.shape[1]):
            rows.append((w, labels[i, j], np.real(diag.values[i, j])))
    return _write_rows(path, ["omega", "p", "rho"], rows)


def write_trace_csv(times, values, path) -> Path:
    values = np.asarray(values, dtype=complex)
    rows = zip(np.asarray(times, dtype=float), values.real, values.imag, np.abs(values))
    return _write_rows(path, ["t", "re", "im", "modulus"], rows)


def write_trajectory_csv(traj, path) -> Path:
    d = traj.dof
    header = ["t"] + [f"q{i + 1}" for i in range(d)] + [f"p{i + 1}" for i in range(d)]
    rows = (np.concatenate([[t], pt]) for t, pt in zip(traj.times, traj.points))
    return _write_rows(path, header, rows)


def write_phase_space_csv(f, path, real_tol: float = 1e-12) -> Path:
    """Columns ``q..., p..., value`` (or ``value_re, value_im`` for complex data)."""
    chart = f.chart
    d = chart.dof
    coords = [m.ravel() for m in chart.mesh()]
    vals = np.asarray(f.values).ravel()
    names = [f"q{i + 1}" for i in range(d)] + [f"p{i + 1}" for i in range(d)]
    if d == 1:
        names = ["q", "p"]
    if np.max(np.abs(vals.imag), initial=0.0) <= real_tol * max(1.0, np.max(np.abs(vals), initial=0.0)):
        return _write_rows(path, names + ["value"], zip(*coords, vals.real))
    return _write_rows(path, names + ["value_re", "value_im"], zip(*coords, vals.real, vals.imag))


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with _open(path, "r") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float).reshape(len(rows) - 1, len(rows[0]))


def write_array(array, path, magic: bytes = PSF_MAGIC) -> Path:
    if magic not in MAGICS:
        raise ExportError(f"{path}: unknown magic {magic!r}")
    a = np.ascontiguousarray(np.asarray(array, dtype="<c8"))
    with _open(path, "wb") as fh:
        fh.write(magic)
        fh.write(struct.pack("<I", a.ndim))
        fh.write(struct.pack(f"<{a.ndim}Q", *a.shape))
        fh.write(a.tobytes(order="C"))
    return Path(path)


def read_array(path) -> tuple[bytes, np.ndarray]:
    with _open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 8 or data[:4] not in MAGICS:
        raise ExportError(f"{path}: not a recognised binary array file")
    (rank,) = struct.unpack_from("<I", data, 4)
    dims = struct.unpack_from(f"<{rank}Q", data, 8)
    offset = 8 + 8 * rank
    count = int(np.prod(dims)) if rank else 1
    if len(data) - offset != 8 * count:
        raise ExportError(f"{path}: payload size does not match header dims {dims}")
    arr = np.frombuffer(data, dtype="<c8", count=count, offset=offset).reshape(dims)
    return data[:4], arr.copy()


def save_phase_space_function(f, path) -> Path:
    return write_array(f.values, path, PSF_MAGIC)


def save_kernel(K, path) -> Path:
    matrix = K.matrix if hasattr(K, "matrix") else K
    return write_array(matrix, path, KERNEL_MAGIC)


def load_kernel(path) -> np.ndarray:
    magic, arr = read_array(path)
    if magic != KERNEL_MAGIC:
        raise ExportError(f"{path}: expected a kernel file, found {magic!r}")
    return arr
