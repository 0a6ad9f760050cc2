"""Binary field (NVS1) and scattering-data (NVB1) files, and CSV export.

NVS1: ``b"NVS1"``, u32 N, f64 L, u8 kind (0 real f64, 1 complex f64 pairs),
then N*N values in row-major ``[m, n]`` order, little-endian.

NVB1: ``b"NVB1"``, u32 M, f64 K, f64 t, then M*M complex f64 pairs (values at
time t) in k-grid storage order, little-endian.

CSV files carry one ``#`` metadata line followed by a header; values use 17
significant digits so the text form is lossless.
"""
from __future__ import annotations

import csv
import io as _io
import struct
from pathlib import Path

import numpy as np

from .grid import ComplexField, GridSpec
from .scattering import KGrid, ScatteringData

NVS_MAGIC = b"NVS1"
NVB_MAGIC = b"NVB1"


class FormatError(ValueError):
    pass


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def encode_nvs1(f: ComplexField, kind: int | None = None) -> bytes:
    v = f.values
    if kind is None:
        kind = 0 if (f.real or not np.any(v.imag)) else 1
    head = NVS_MAGIC + struct.pack("<IdB", f.grid.N, f.grid.L, kind)
    if kind == 0:
        if np.any(v.imag):
            raise FormatError("complex field cannot be stored as real")
        body = np.ascontiguousarray(v.real, dtype="<f8").tobytes()
    else:
        pairs = np.stack([v.real, v.imag], axis=-1)
        body = np.ascontiguousarray(pairs, dtype="<f8").tobytes()
    return head + body


def decode_nvs1(data: bytes) -> ComplexField:
    if len(data) < 17 or data[:4] != NVS_MAGIC:
        raise FormatError("not an NVS1 file")
    N, L, kind = struct.unpack("<IdB", data[4:17])
    if kind not in (0, 1):
        raise FormatError(f"unknown kind {kind}")
    count = N * N * (1 if kind == 0 else 2)
    if len(data) != 17 + 8 * count:
        raise FormatError("truncated or oversized NVS1 payload")
    arr = np.frombuffer(data, dtype="<f8", offset=17, count=count)
    if kind == 0:
        vals = arr.reshape(N, N).astype(complex)
    else:
        pairs = arr.reshape(N, N, 2)
        vals = pairs[..., 0] + 1j * pairs[..., 1]
    return ComplexField(GridSpec(L, N), vals, real=(kind == 0))


def encode_nvb1(s: ScatteringData) -> bytes:
    kg = s.kgrid
    head = NVB_MAGIC + struct.pack("<Idd", kg.M, kg.K, s.t)
    b = s.b
    pairs = np.stack([b.real, b.imag], axis=-1)
    return head + np.ascontiguousarray(pairs, dtype="<f8").tobytes()


def decode_nvb1(data: bytes, k_min: float = 0.0) -> ScatteringData:
    if len(data) < 24 or data[:4] != NVB_MAGIC:
        raise FormatError("not an NVB1 file")
    M, K, t = struct.unpack("<Idd", data[4:24])
    if len(data) != 24 + 16 * M * M:
        raise FormatError("truncated or oversized NVB1 payload")
    pairs = np.frombuffer(data, dtype="<f8", offset=24).reshape(M, M, 2)
    b = pairs[..., 0] + 1j * pairs[..., 1]
    return ScatteringData.at_time(KGrid(K, M, k_min=k_min), b, t)


def write_field(path, f: ComplexField) -> None:
    Path(path).write_bytes(encode_nvs1(f))


def read_field(path) -> ComplexField:
    return decode_nvs1(Path(path).read_bytes())


def write_data(path, s: ScatteringData) -> None:
    Path(path).write_bytes(encode_nvb1(s))


def read_data(path) -> ScatteringData:
    return decode_nvb1(Path(path).read_bytes())


def field_csv(f: ComplexField, kind: int | None = None) -> str:
    buf = _io.StringIO()
    if kind is None:
        kind = 0 if (f.real or not np.any(f.values.imag)) else 1
    buf.write(f"# NVS1 N={f.grid.N} L={_fmt(f.grid.L)} kind={kind}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x1", "x2", "re", "im"])
    x = f.grid.x
    v = f.values
    for m in range(f.grid.N):
        for n in range(f.grid.N):
            w.writerow([_fmt(x[m]), _fmt(x[n]), _fmt(v[m, n].real), _fmt(v[m, n].imag)])
    return buf.getvalue()


def data_csv(s: ScatteringData) -> str:
    return export_csv(encode_nvb1(s))


def _meta(line: str) -> tuple[str, dict]:
    parts = line.lstrip("#").split()
    if not parts:
        raise FormatError("missing CSV metadata line")
    return parts[0], dict(p.split("=", 1) for p in parts[1:])


def binary_from_csv(text: str) -> bytes:
    """Rebuild the binary file a CSV export came from."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise FormatError("missing CSV metadata line")
    tag, meta = _meta(lines[0])
    rows = list(csv.reader(lines[2:]))
    if tag == "NVS1":
        N, L, kind = int(meta["N"]), float(meta["L"]), int(meta["kind"])
        if len(rows) != N * N:
            raise FormatError("row count does not match N")
        vals = np.array([float(r[2]) + 1j * float(r[3]) for r in rows]).reshape(N, N)
        return encode_nvs1(ComplexField(GridSpec(L, N), vals), kind)
    if tag == "NVB1":
        M, K, t = int(meta["M"]), float(meta["K"]), float(meta["t"])
        if len(rows) != M * M:
            raise FormatError("row count does not match M")
        b = np.array([float(r[2]) + 1j * float(r[3]) for r in rows]).reshape(M, M)
        head = NVB_MAGIC + struct.pack("<Idd", M, K, t)
        pairs = np.stack([b.real, b.imag], axis=-1)
        return head + np.ascontiguousarray(pairs, dtype="<f8").tobytes()
    raise FormatError(f"unknown CSV tag {tag!r}")


def export_csv(data: bytes) -> str:
    """CSV text of an NVS1 or NVB1 file given as bytes."""
    if data[:4] == NVS_MAGIC:
        f = decode_nvs1(data)
        return field_csv(f, data[16])
    if data[:4] == NVB_MAGIC:
        # keep the stored values bit for bit rather than re-applying phases
        M, K, t = struct.unpack("<Idd", data[4:24])
        pairs = np.frombuffer(data, dtype="<f8", offset=24)
        if pairs.size != 2 * M * M:
            raise FormatError("truncated or oversized NVB1 payload")
        b = pairs.reshape(M, M, 2)
        kg = KGrid(K, M, k_min=0.0)
        buf = _io.StringIO()
        buf.write(f"# NVB1 M={M} K={_fmt(K)} t={_fmt(t)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kre", "kim", "bre", "bim"])
        for k, (re, im) in zip(kg.nodes(), b.reshape(-1, 2)):
            w.writerow([_fmt(k.real), _fmt(k.imag), _fmt(re), _fmt(im)])
        return buf.getvalue()
    raise FormatError("unrecognised file magic")
