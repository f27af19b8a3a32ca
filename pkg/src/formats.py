"""
formats.py

Reading and writing of result files: energy fields (CSV long form, JSON,
compact binary), peak lists, RK4 trajectories and response profiles.

CSV dialect everywhere: comma separated, header row, LF line endings,
floats written with repr() so that a re-read gives the same bits.
"""

from __future__ import annotations

import csv
import io
import json
import math
import struct
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from src.energy import EnergyField
from src.errors import ConfigError
from src.oracle import Trajectory
from src.peaks import Peak

PathLike = Union[str, Path]

FIELD_CSV_HEADER = ("xi_hz", "t", "n", "energy")
PEAKS_CSV_HEADER = ("rank", "freq_hz", "note", "cents", "energy", "prominence", "classification")

# Binary layout (little endian):
#   magic(8) | X u32 | T u32 | M u32 | meta_len u32
#   modes  M x i4
#   xi     X x f8   (rad/s)
#   t      T x f8
#   total  X*T x f8 (row major, xi first)
#   per    M*X*T x f8 (only when the has-per-mode flag, the high bit of M, is set)
#   meta   meta_len bytes of UTF-8 JSON
BIN_MAGIC = b"BSLRFLD1"
_BIN_HEADER = struct.Struct("<8sIIII")
_PER_MODE_FLAG = 1 << 31

FORMATS = ("csv", "json", "bin")


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def _write_text(path: PathLike, text: str) -> Path:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8", newline="") as f:
        f.write(text)
    return out


def format_from_path(path: PathLike, fmt: Optional[str] = None) -> str:
    if fmt:
        if fmt not in FORMATS:
            raise ConfigError(f"unknown output format {fmt!r}; expected one of {FORMATS}")
        return fmt
    suffix = Path(path).suffix.lower().lstrip(".")
    return suffix if suffix in FORMATS else "csv"


def meta_path(path: PathLike) -> Path:
    p = Path(path)
    return p.with_name(p.name + ".meta.json")


# ---------------------------------------------------------------------
# Energy fields
# ---------------------------------------------------------------------


def field_csv_rows(field: EnergyField) -> Iterable[List[Any]]:
    """One row per (xi, t, n); n = 0 is the total, then each retained mode."""
    freq = field.freq_hz
    for i in range(field.xi_axis.size):
        for j in range(field.t_axis.size):
            yield [float(freq[i]), float(field.t_axis[j]), 0, float(field.total[i, j])]
            if field.per_mode is not None:
                for m, n in enumerate(field.modes):
                    yield [float(freq[i]), float(field.t_axis[j]), n, float(field.per_mode[m, i, j])]


def format_field_csv(field: EnergyField) -> str:
    return _csv_text(FIELD_CSV_HEADER, field_csv_rows(field))


def write_field_csv(field: EnergyField, path: PathLike) -> Path:
    out = _write_text(path, format_field_csv(field))
    _write_text(meta_path(out), json.dumps(_field_meta(field), indent=2, sort_keys=True) + "\n")
    return out


def _field_meta(field: EnergyField) -> Dict[str, Any]:
    meta = dict(field.metadata)
    meta["modes"] = list(field.modes)
    return meta


def read_field_csv(path: PathLike) -> EnergyField:
    p = Path(path)
    try:
        with p.open("r", encoding="utf-8", newline="") as f:
            rows = list(csv.reader(f))
    except OSError as e:
        raise ConfigError(f"cannot read field file {p}: {e}") from e
    if not rows or tuple(rows[0]) != FIELD_CSV_HEADER:
        raise ConfigError(f"{p}: not a field CSV (expected header {','.join(FIELD_CSV_HEADER)})")

    xi_hz: Dict[float, int] = {}
    ts: Dict[float, int] = {}
    modes: Dict[int, int] = {}
    parsed = []
    try:
        for row in rows[1:]:
            x, t, n, e = float(row[0]), float(row[1]), int(row[2]), float(row[3])
            xi_hz.setdefault(x, len(xi_hz))
            ts.setdefault(t, len(ts))
            if n != 0:
                modes.setdefault(n, len(modes))
            parsed.append((x, t, n, e))
    except (ValueError, IndexError) as e:
        raise ConfigError(f"{p}: malformed field row: {e}") from e

    total = np.zeros((len(xi_hz), len(ts)))
    per_mode = np.zeros((len(modes), len(xi_hz), len(ts))) if modes else None
    for x, t, n, e in parsed:
        i, j = xi_hz[x], ts[t]
        if n == 0:
            total[i, j] = e
        else:
            per_mode[modes[n], i, j] = e

    metadata: Dict[str, Any] = {}
    if meta_path(p).exists():
        metadata = json.loads(meta_path(p).read_text(encoding="utf-8"))
    field_modes = tuple(modes) if modes else tuple(metadata.get("modes", ()))
    xi = 2.0 * math.pi * np.array(list(xi_hz))
    return EnergyField(xi, np.array(list(ts)), total, field_modes, per_mode, metadata)


def field_to_json(field: EnergyField) -> Dict[str, Any]:
    return {
        "xi_hz": field.freq_hz.tolist(),
        "t": field.t_axis.tolist(),
        "modes": list(field.modes),
        "total": field.total.tolist(),
        "per_mode": None if field.per_mode is None else field.per_mode.tolist(),
        "metadata": _field_meta(field),
    }


def write_field_json(field: EnergyField, path: PathLike) -> Path:
    return _write_text(path, json.dumps(field_to_json(field), sort_keys=True) + "\n")


def read_field_json(path: PathLike) -> EnergyField:
    p = Path(path)
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
        per = data.get("per_mode")
        return EnergyField(
            2.0 * math.pi * np.asarray(data["xi_hz"], dtype=float),
            np.asarray(data["t"], dtype=float),
            np.asarray(data["total"], dtype=float),
            tuple(int(n) for n in data["modes"]),
            None if per is None else np.asarray(per, dtype=float),
            dict(data.get("metadata", {})),
        )
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise ConfigError(f"cannot read field JSON {p}: {e}") from e


def field_to_bytes(field: EnergyField) -> bytes:
    meta = json.dumps(_field_meta(field), sort_keys=True).encode("utf-8")
    X, T, M = field.xi_axis.size, field.t_axis.size, len(field.modes)
    flag = _PER_MODE_FLAG if field.per_mode is not None else 0
    parts = [
        _BIN_HEADER.pack(BIN_MAGIC, X, T, M | flag, len(meta)),
        np.asarray(field.modes, dtype="<i4").tobytes(),
        np.asarray(field.xi_axis, dtype="<f8").tobytes(),
        np.asarray(field.t_axis, dtype="<f8").tobytes(),
        np.ascontiguousarray(field.total, dtype="<f8").tobytes(),
    ]
    if field.per_mode is not None:
        parts.append(np.ascontiguousarray(field.per_mode, dtype="<f8").tobytes())
    parts.append(meta)
    return b"".join(parts)


def field_from_bytes(blob: bytes) -> EnergyField:
    if len(blob) < _BIN_HEADER.size:
        raise ConfigError("binary field truncated before header")
    magic, X, T, M_flag, meta_len = _BIN_HEADER.unpack_from(blob, 0)
    if magic != BIN_MAGIC:
        raise ConfigError(f"bad magic {magic!r}; not a binary energy field")
    has_per = bool(M_flag & _PER_MODE_FLAG)
    M = M_flag & ~_PER_MODE_FLAG
    offset = _BIN_HEADER.size

    def take(dtype: str, count: int) -> np.ndarray:
        nonlocal offset
        size = np.dtype(dtype).itemsize * count
        if offset + size > len(blob):
            raise ConfigError("binary field truncated")
        arr = np.frombuffer(blob, dtype=dtype, count=count, offset=offset).astype(dtype[1:])
        offset += size
        return arr

    modes = tuple(int(n) for n in take("<i4", M))
    xi = take("<f8", X)
    t = take("<f8", T)
    total = take("<f8", X * T).reshape(X, T)
    per_mode = take("<f8", M * X * T).reshape(M, X, T) if has_per else None
    if offset + meta_len != len(blob):
        raise ConfigError("binary field has trailing or missing metadata bytes")
    metadata = json.loads(blob[offset:].decode("utf-8")) if meta_len else {}
    return EnergyField(xi, t, total, modes, per_mode, metadata)


def write_field_bin(field: EnergyField, path: PathLike) -> Path:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(field_to_bytes(field))
    return out


def read_field_bin(path: PathLike) -> EnergyField:
    try:
        blob = Path(path).read_bytes()
    except OSError as e:
        raise ConfigError(f"cannot read field file {path}: {e}") from e
    return field_from_bytes(blob)


def write_field(field: EnergyField, path: PathLike, fmt: Optional[str] = None) -> Path:
    kind = format_from_path(path, fmt)
    if kind == "json":
        return write_field_json(field, path)
    if kind == "bin":
        return write_field_bin(field, path)
    return write_field_csv(field, path)


def read_field(path: PathLike) -> EnergyField:
    """Dispatch on the file's magic bytes, then on its suffix."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"field file not found: {p}")
    with p.open("rb") as f:
        head = f.read(len(BIN_MAGIC))
    if head == BIN_MAGIC:
        return read_field_bin(p)
    if p.suffix.lower() == ".json":
        return read_field_json(p)
    return read_field_csv(p)


# ---------------------------------------------------------------------
# Peaks, trajectories, profiles
# ---------------------------------------------------------------------


def format_peaks_csv(peaks: Sequence[Peak]) -> str:
    rows = (
        [rank, pk.freq_hz, pk.note.label, pk.note.cents, pk.energy, pk.prominence, pk.classification.label]
        for rank, pk in enumerate(peaks, start=1)
    )
    return _csv_text(PEAKS_CSV_HEADER, rows)


def format_trajectory_csv(traj: Trajectory) -> str:
    return _csv_text(("t", "p", "v"), traj.to_rows())


def format_response_csv(xi: np.ndarray, R: np.ndarray, phi: np.ndarray, n: int) -> str:
    freq = np.asarray(xi, dtype=float) / (2.0 * math.pi)
    rows = ([float(f), n, float(r), float(ph)] for f, r, ph in zip(freq, R, phi))
    return _csv_text(("xi_hz", "n", "R", "phi"), rows)


def write_text(path: PathLike, text: str) -> Path:
    return _write_text(path, text)
