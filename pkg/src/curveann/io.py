"""Dataset text files and binary index files.

Dataset format
--------------
One curve per line: ``<id> <d> <count> <x_11> .. <x_1d> <x_21> ..``, i.e.
the id, the dimension, the number of points, then ``d * count``
coordinates, all whitespace separated. Blank lines and lines starting with
``#`` are ignored. Coordinates are written with Python's shortest
round-trip float repr, so ``parse(format(X)) == X`` exactly.

Index format (all integers little-endian)
-----------------------------------------
::

    magic      b"CRVX1"
    u32        length of the metadata block
    bytes      metadata, UTF-8 JSON with sorted keys
    u32        number of curves
      u16 + bytes   curve id (UTF-8)
      u32           point count m
      f64[m*d]      coordinates, row-major
    u32        number of repetitions
      u32           repetition number r (matrix seed = seed + r)
      u32           number of sub-indices
        u16 + bytes   signature key (ASCII)
        u8            backend tag, 0 = scan, 1 = grid
        u32           owner count n, then u32[n] positions in the curve table
        u32           vector length d'
        scan: f64[n*d']   vector table
        grid: u8 degenerate flag, u32 radius count R, f64[R] radii, then per
              radius: u32 bucket count, and per bucket u16 + varint cell key,
              u32 count, u32[count] positions in the owner list
    u32        CRC-32 of everything above

Projection matrices are not stored; they are re-derived from the seed.
"""

import io as _io
import json
import math
import struct
import zlib

import numpy as np

from .embedding import GENERATOR_VERSION, repetition_seed, sample_matrix
from .errors import CorruptIndex, EmptyDataset, ParseError, VersionMismatch
from .geometry import Backend, Curve, SearchParams, validate_dataset
from .index import CurveIndex, Repetition
from .product import BucketTable, GridIndex, ScanIndex, decode_cell_key, encode_cell_key

__all__ = [
    "FORMAT_MAGIC",
    "dumps_index",
    "format_dataset",
    "load_index",
    "loads_index",
    "parse_dataset",
    "parse_dataset_text",
    "save_index",
    "write_dataset",
]

FORMAT_MAGIC = b"CRVX1"
_MAGIC_STEM = b"CRVX"


def parse_dataset_text(text, allow_empty=False):
    """Parse dataset text into validated curves."""
    curves = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) < 3:
            raise ParseError("expected '<id> <d> <count> <coords...>'", lineno)
        cid = tokens[0]
        try:
            d = int(tokens[1])
        except ValueError:
            raise ParseError(f"bad dimension {tokens[1]!r}", lineno, 2) from None
        try:
            count = int(tokens[2])
        except ValueError:
            raise ParseError(f"bad point count {tokens[2]!r}", lineno, 3) from None
        if d < 1 or count < 1:
            raise ParseError("dimension and point count must be positive", lineno)
        coords = tokens[3:]
        if len(coords) != d * count:
            raise ParseError(f"expected {d * count} coordinates, found {len(coords)}", lineno)
        values = []
        for col, tok in enumerate(coords, start=4):
            try:
                values.append(float(tok))
            except ValueError:
                raise ParseError(f"bad coordinate {tok!r}", lineno, col) from None
        try:
            curves.append(Curve(cid, np.array(values).reshape(count, d)))
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
    if not curves:
        if allow_empty:
            return curves
        raise EmptyDataset("dataset file holds no curves")
    validate_dataset(curves)
    return curves


def parse_dataset(path):
    with open(path, encoding="utf-8") as fh:
        return parse_dataset_text(fh.read())


def format_dataset(curves):
    lines = []
    for c in curves:
        coords = " ".join(repr(float(x)) for x in c.points.ravel())
        lines.append(f"{c.id} {c.dim} {len(c)} {coords}")
    return "\n".join(lines) + "\n"


def write_dataset(curves, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_dataset(curves))


class _Writer:
    def __init__(self):
        self.buf = _io.BytesIO()

    def u8(self, v):
        self.buf.write(struct.pack("<B", v))

    def u16(self, v):
        self.buf.write(struct.pack("<H", v))

    def u32(self, v):
        self.buf.write(struct.pack("<I", v))

    def blob16(self, b):
        self.u16(len(b))
        self.buf.write(b)

    def f64(self, arr):
        self.buf.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())

    def u32s(self, arr):
        self.buf.write(np.ascontiguousarray(arr, dtype="<u4").tobytes())


class _Reader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def take(self, n):
        if n < 0 or self.pos + n > len(self.data):
            raise CorruptIndex("index file is truncated")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u8(self):
        return self.take(1)[0]

    def u16(self):
        return struct.unpack("<H", self.take(2))[0]

    def u32(self):
        return struct.unpack("<I", self.take(4))[0]

    def blob16(self):
        return self.take(self.u16())

    def f64(self, n):
        return np.frombuffer(self.take(8 * n), dtype="<f8").astype(np.float64)

    def u32s(self, n):
        return np.frombuffer(self.take(4 * n), dtype="<u4").astype(np.int64)


def dumps_index(index):
    w = _Writer()
    w.buf.write(FORMAT_MAGIC)
    meta = json.dumps(index.metadata(), sort_keys=True, separators=(",", ":")).encode()
    w.u32(len(meta))
    w.buf.write(meta)
    position = {cid: i for i, cid in enumerate(index.order)}
    w.u32(index.n)
    for cid in index.order:
        c = index.curves[cid]
        w.blob16(cid.encode())
        w.u32(len(c))
        w.f64(c.points)
    w.u32(len(index.repetitions))
    for r, rep in enumerate(index.repetitions):
        w.u32(r)
        w.u32(len(rep.subindices))
        for key in sorted(rep.subindices):
            sub = rep.subindices[key]
            w.blob16(key.encode("ascii"))
            w.u8(0 if isinstance(sub, ScanIndex) else 1)
            w.u32(len(sub.owners))
            w.u32s([position[o] for o in sub.owners])
            w.u32(sub.dim)
            if isinstance(sub, ScanIndex):
                w.f64(sub.vectors)
                continue
            w.u8(int(sub.degenerate))
            w.u32(len(sub.radii))
            w.f64(sub.radii)
            for table in sub.buckets:
                w.u32(len(table))
                for cell, members in table.items():
                    w.blob16(encode_cell_key(np.frombuffer(cell, dtype="<i8")))
                    w.u32(len(members))
                    w.u32s(members)
    body = w.buf.getvalue()
    return body + struct.pack("<I", zlib.crc32(body))


def save_index(index, path):
    with open(path, "wb") as fh:
        fh.write(dumps_index(index))


def _params_from_meta(meta):
    p = math.inf if meta["p_requested"] == "inf" else float(meta["p_requested"])
    return SearchParams(
        p=p,
        epsilon=meta["epsilon"],
        repetitions=meta["repetitions"],
        backend=Backend(meta["backend"]),
        seed=meta["seed"],
        k_override=meta["k_override"],
        k_scale=meta["k_scale"],
    )


def loads_index(data):
    data = bytes(data)
    if len(data) < len(FORMAT_MAGIC) or not data.startswith(_MAGIC_STEM):
        raise CorruptIndex("not an index file (bad magic)")
    magic = data[:len(FORMAT_MAGIC)]
    if magic != FORMAT_MAGIC:
        raise VersionMismatch(
            f"index format {magic.decode(errors='replace')} is not supported; "
            f"this library reads {FORMAT_MAGIC.decode()}"
        )
    if len(data) < len(FORMAT_MAGIC) + 4:
        raise CorruptIndex("index file is truncated")
    body, crc = data[:-4], struct.unpack("<I", data[-4:])[0]
    if zlib.crc32(body) != crc:
        raise CorruptIndex("checksum mismatch (truncated or damaged file)")
    rd = _Reader(body)
    rd.take(len(FORMAT_MAGIC))
    try:
        meta = json.loads(rd.take(rd.u32()).decode())
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise CorruptIndex("unreadable metadata block") from None
    if meta.get("generator") != GENERATOR_VERSION:
        raise VersionMismatch(
            f"index was built with generator {meta.get('generator')!r}; "
            f"this library uses {GENERATOR_VERSION!r}"
        )
    try:
        params = _params_from_meta(meta)
        d = meta["d"]
        curves = []
        for _ in range(rd.u32()):
            cid = rd.blob16().decode()
            m = rd.u32()
            curves.append(Curve(cid, rd.f64(m * d).reshape(m, d)))
        order = [c.id for c in curves]
        reps = []
        for _ in range(rd.u32()):
            r = rd.u32()
            G = sample_matrix(meta["k"], d, repetition_seed(params.seed, r))
            subs = {}
            for _ in range(rd.u32()):
                key = rd.blob16().decode("ascii")
                tag = rd.u8()
                owners = [order[i] for i in rd.u32s(rd.u32())]
                dim = rd.u32()
                if tag == 0:
                    subs[key] = ScanIndex(owners, rd.f64(len(owners) * dim).reshape(len(owners), dim),
                                          meta["p_effective"])
                elif tag == 1:
                    degenerate = bool(rd.u8())
                    radii = rd.f64(rd.u32())
                    buckets = []
                    for _ in radii:
                        items = []
                        for _ in range(rd.u32()):
                            cell = decode_cell_key(rd.blob16(), dim)
                            items.append((cell.tobytes(), rd.u32s(rd.u32())))
                        buckets.append(BucketTable.from_items(items, dim))
                    subs[key] = GridIndex(owners, dim, meta["p_effective"], params.epsilon,
                                          radii, buckets, degenerate=degenerate)
                else:
                    raise CorruptIndex(f"unknown backend tag {tag}")
            reps.append(Repetition(G, subs))
    except (KeyError, IndexError, ValueError, UnicodeDecodeError) as exc:
        if isinstance(exc, (CorruptIndex, VersionMismatch)):
            raise
        raise CorruptIndex(f"malformed index: {exc}") from None
    if rd.pos != len(body):
        raise CorruptIndex("trailing bytes after the last repetition")
    return CurveIndex(params, curves, reps, d=d, m=meta["m"], k=meta["k"],
                      p_effective=meta["p_effective"],
                      max_query_length=meta["max_query_length"],
                      grid_dim_cap=meta["grid_dim_cap"])


def load_index(path):
    with open(path, "rb") as fh:
        return loads_index(fh.read())
