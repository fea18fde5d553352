"""Snapshot and diagnostics file formats.

Snapshot layout (little endian): magic ``BBWAVE01``, u32 N, f64 L, f64 t, then
zeta, v1, v2 as N*N binary64 blocks in row-major order with x as the leading
index.
"""
from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dynamics import State
from .spectral import Grid2D

MAGIC = b"BBWAVE01"
_HEADER = struct.Struct("<8sIdd")

DIAGNOSTICS_HEADER = (
    "t", "H", "mean_zeta", "mean_v1", "mean_v2",
    "err_l2_zeta", "err_l2_v1", "err_linf_zeta", "err_linf_v1", "iters",
)


class SnapshotFormatError(ValueError):
    pass


def write_snapshot(path, s: State) -> None:
    g = s.grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, g.N, float(g.L), float(s.t)))
        for f in (s.zeta, s.v1, s.v2):
            fh.write(np.ascontiguousarray(f, dtype="<f8").tobytes())


def read_snapshot(path) -> State:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise SnapshotFormatError("truncated header")
    magic, N, L, t = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise SnapshotFormatError(f"bad magic {magic!r}")
    block = N * N * 8
    if len(data) != _HEADER.size + 3 * block:
        raise SnapshotFormatError(f"expected {3 * block} payload bytes for N={N}")
    arrays = [
        np.frombuffer(data, dtype="<f8", count=N * N, offset=_HEADER.size + i * block)
        .reshape(N, N).astype(float)
        for i in range(3)
    ]
    return State(Grid2D(L, N), *arrays, t=t)


@dataclass
class DiagnosticsRecord:
    t: float
    H: float
    mean_zeta: float
    mean_v1: float
    mean_v2: float
    err_l2_zeta: float | None = None
    err_l2_v1: float | None = None
    err_linf_zeta: float | None = None
    err_linf_v1: float | None = None
    iters: int | None = None

    def row(self):
        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, int):
                return str(v)
            return repr(float(v))

        return [fmt(getattr(self, k)) for k in DIAGNOSTICS_HEADER]


def write_diagnostics(path, records) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(DIAGNOSTICS_HEADER)
        for r in records:
            w.writerow(r.row())


def read_diagnostics(path) -> list[DiagnosticsRecord]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            kw = {}
            for k in DIAGNOSTICS_HEADER:
                v = row[k]
                if v == "":
                    kw[k] = None
                elif k == "iters":
                    kw[k] = int(v)
                else:
                    kw[k] = float(v)
            out.append(DiagnosticsRecord(**kw))
    return out
