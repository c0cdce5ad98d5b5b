"""Serialization of grid fields and point evaluations.

GridField CSV
    Two ``#`` lines carry the metadata (``names``, ``spacing``, ``origin``,
    ``dims``), followed by a header row ``i1,...,id,value`` (or
    ``value_re,value_im`` for complex samples) and one row per grid point
    in C order.

GridField binary (little endian)
    A fixed 64-byte header

    ======  =====  ==========================================
    offset  type   content
    ======  =====  ==========================================
    0       8s     magic ``b"CPGRID01"``
    8       u4     ``ndim``
    12      u4     flags (bit 0: complex samples)
    16      u8     number of samples
    24      u8     byte offset of the sample block
    32      f8     largest box length ``L = max(dims * spacing)``
    40      f8     smallest spacing
    48      16s    reserved (zero)
    ======  =====  ==========================================

    then ``ndim`` records ``(u8 dims, f8 spacing, f8 origin, f8 L)``, the
    axis names as one UTF-8 string joined by ``\\x1f`` and prefixed by its
    ``u4`` length, padding to an 8-byte boundary, and finally the samples
    as ``<f8`` (or ``<c16``) in C order.

Evaluation CSV
    Header ``<coordinate names>,value,error`` and one row per point.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .euclid_field import GridField

PathLike = Union[str, Path]
MAGIC = b"CPGRID01"
_HEAD = struct.Struct("<8sIIQQdd16s")
_AXIS = struct.Struct("<Qddd")


class FormatError(ValueError):
    """Malformed serialized field."""


def _fmt_list(xs) -> str:
    return " ".join(repr(float(x)) for x in xs)


def write_field_csv(u: GridField, path: PathLike) -> None:
    cplx = np.iscomplexobj(u.samples)
    with open(path, "w", newline="") as fh:
        fh.write(f"# names={','.join(u.names)} dims={' '.join(map(str, u.dims))}\n")
        fh.write(f"# spacing={_fmt_list(u.spacing)} origin={_fmt_list(u.origin)}\n")
        w = csv.writer(fh)
        idx_cols = [f"i{k + 1}" for k in range(u.ndim)]
        w.writerow(idx_cols + (["value_re", "value_im"] if cplx else ["value"]))
        flat = u.samples.reshape(-1)
        for lin, idx in enumerate(np.ndindex(*u.dims)):
            v = flat[lin]
            vals = [repr(float(v.real)), repr(float(v.imag))] if cplx else [repr(float(v))]
            w.writerow(list(map(str, idx)) + vals)


def _parse_meta(line: str) -> dict:
    out = {}
    for part in line.lstrip("#").strip().split(" "):
        if "=" in part:
            key, val = part.split("=", 1)
            out[key] = [val]
            last = key
        elif part:
            out[last].append(part)
    return out


def read_field_csv(path: PathLike) -> GridField:
    with open(path, newline="") as fh:
        l1 = fh.readline()
        l2 = fh.readline()
        if not (l1.startswith("#") and l2.startswith("#")):
            raise FormatError("missing metadata lines")
        meta = {**_parse_meta(l1), **_parse_meta(l2)}
        try:
            names = tuple(meta["names"][0].split(",")) if meta["names"][0] else ()
            dims = tuple(int(d) for d in meta["dims"])
            spacing = tuple(float(h) for h in meta["spacing"])
            origin = tuple(float(o) for o in meta["origin"])
        except KeyError as exc:
            raise FormatError(f"missing metadata key {exc}") from None
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    nd = len(dims)
    cplx = header[-1] == "value_im"
    arr = np.zeros(dims, complex if cplx else float)
    if len(body) != int(np.prod(dims)):
        raise FormatError("row count does not match dims")
    for r in body:
        idx = tuple(int(x) for x in r[:nd])
        arr[idx] = complex(float(r[nd]), float(r[nd + 1])) if cplx else float(r[nd])
    return GridField(arr, spacing, origin, names)


def write_field_binary(u: GridField, path: PathLike) -> None:
    cplx = np.iscomplexobj(u.samples)
    lengths = [d * h for d, h in zip(u.dims, u.spacing)]
    names = "\x1f".join(u.names).encode("utf-8")
    axes = b"".join(_AXIS.pack(d, h, o, L) for d, h, o, L in zip(u.dims, u.spacing, u.origin, lengths))
    ext = axes + struct.pack("<I", len(names)) + names
    ext += b"\0" * (-(len(ext)) % 8)
    offset = _HEAD.size + len(ext)
    head = _HEAD.pack(MAGIC, u.ndim, int(cplx), u.samples.size, offset,
                      max(lengths), min(u.spacing), b"\0" * 16)
    data = np.ascontiguousarray(u.samples, dtype="<c16" if cplx else "<f8").tobytes()
    Path(path).write_bytes(head + ext + data)


def read_field_binary(path: PathLike) -> GridField:
    raw = Path(path).read_bytes()
    if len(raw) < _HEAD.size:
        raise FormatError("file shorter than the header")
    magic, ndim, flags, count, offset, _, _, _ = _HEAD.unpack_from(raw, 0)
    if magic != MAGIC:
        raise FormatError("bad magic")
    pos = _HEAD.size
    dims, spacing, origin = [], [], []
    try:
        for _ in range(ndim):
            d, h, o, _L = _AXIS.unpack_from(raw, pos)
            pos += _AXIS.size
            dims.append(int(d))
            spacing.append(h)
            origin.append(o)
        (nlen,) = struct.unpack_from("<I", raw, pos)
        pos += 4
        names = raw[pos:pos + nlen].decode("utf-8")
    except (struct.error, UnicodeDecodeError) as exc:
        raise FormatError(f"corrupt axis table: {exc}") from None
    dtype = np.dtype("<c16" if flags & 1 else "<f8")
    if len(raw) < offset + count * dtype.itemsize:
        raise FormatError("sample block truncated")
    data = np.frombuffer(raw, dtype=dtype, count=count, offset=offset)
    if data.size != int(np.prod(dims)):
        raise FormatError("sample count does not match dims")
    return GridField(data.reshape(dims).copy(), tuple(spacing), tuple(origin),
                     tuple(names.split("\x1f")) if names else ())


def write_eval_csv(path: PathLike, points: np.ndarray, values: np.ndarray,
                   errors: Optional[np.ndarray] = None, names: Sequence[str] = ()) -> None:
    pts = np.atleast_2d(np.asarray(points, float))
    names = list(names) or [f"x{i + 1}" for i in range(pts.shape[1])]
    errors = np.zeros(len(pts)) if errors is None else np.asarray(errors, float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names + ["value", "error"])
        for p, v, e in zip(pts, np.asarray(values, float), errors):
            w.writerow([repr(float(x)) for x in p] + [repr(float(v)), repr(float(e))])


def read_eval_csv(path: PathLike) -> Tuple[list, np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(names, points, values, errors)``; ``value``/``error``
    columns may be absent in request files."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    header, body = rows[0], rows[1:]
    nc = len([h for h in header if h not in ("value", "error")])
    data = np.array([[float(x) for x in r] for r in body], float).reshape(len(body), len(header))
    vals = data[:, header.index("value")] if "value" in header else np.full(len(body), np.nan)
    errs = data[:, header.index("error")] if "error" in header else np.full(len(body), np.nan)
    return header[:nc], data[:, :nc], vals, errs
