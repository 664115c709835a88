"""Binary model files.

BQM1 (float model), little-endian::

    b"BQM1" u32 layer_count
    per layer: u32 rows, u32 cols, u8 activation (0 none, 1 relu),
               rows*cols f64 row-major

BQQ1 (quantized model) keeps the per-layer header and replaces the float
payload with::

    u8 wbit, u32 group_size, rows*cols u8 Q, rows*cols f64 S, rows*cols f64 Z
"""
import os
import struct
import tempfile

import numpy as np

from .pipeline import LayerSpec, QuantizedLayer
from .quantgrid import QuantGrid

MAGIC_MODEL = b"BQM1"
MAGIC_QUANT = b"BQQ1"
_ACT_TAGS = {"none": 0, "relu": 1}
_TAG_ACTS = {v: k for k, v in _ACT_TAGS.items()}


class FormatError(ValueError):
    pass


class _Reader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.data):
            raise FormatError(f"truncated file at byte {self.pos}")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def array(self, dtype, count):
        dt = np.dtype(dtype)
        return np.frombuffer(self.take(dt.itemsize * count), dtype=dt).copy()


def _header(r, magic):
    got = r.take(4)
    if got != magic:
        raise FormatError(f"bad magic {got!r}, expected {magic!r}")
    (count,) = r.unpack("<I")
    return count


def _layer_header(r):
    rows, cols, tag = r.unpack("<IIB")
    if tag not in _TAG_ACTS:
        raise FormatError(f"unknown activation tag {tag}")
    return rows, cols, _TAG_ACTS[tag]


def encode_model(layers):
    parts = [MAGIC_MODEL, struct.pack("<I", len(layers))]
    for layer in layers:
        rows, cols = layer.W.shape
        parts.append(struct.pack("<IIB", rows, cols, _ACT_TAGS[layer.activation]))
        parts.append(np.ascontiguousarray(layer.W, dtype="<f8").tobytes())
    return b"".join(parts)


def decode_model(data):
    r = _Reader(data)
    layers = []
    for _ in range(_header(r, MAGIC_MODEL)):
        rows, cols, act = _layer_header(r)
        W = r.array("<f8", rows * cols).reshape(rows, cols)
        if not np.all(np.isfinite(W)):
            raise FormatError("non-finite weight")
        layers.append(LayerSpec(W, act))
    if r.pos != len(data):
        raise FormatError("trailing bytes after last layer")
    return layers


def encode_quantized(qlayers):
    parts = [MAGIC_QUANT, struct.pack("<I", len(qlayers))]
    for ql in qlayers:
        rows, cols = ql.Q.shape
        g = ql.grid
        parts.append(struct.pack("<IIB", rows, cols, _ACT_TAGS[ql.activation]))
        parts.append(struct.pack("<BI", g.wbit, g.group_size))
        parts.append(np.ascontiguousarray(ql.Q, dtype=np.uint8).tobytes())
        parts.append(np.ascontiguousarray(g.S, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(g.Z, dtype="<f8").tobytes())
    return b"".join(parts)


def decode_quantized(data):
    r = _Reader(data)
    out = []
    for _ in range(_header(r, MAGIC_QUANT)):
        rows, cols, act = _layer_header(r)
        wbit, group_size = r.unpack("<BI")
        n = rows * cols
        Q = r.array(np.uint8, n).reshape(rows, cols).astype(np.int64)
        S = r.array("<f8", n).reshape(rows, cols)
        Z = r.array("<f8", n).reshape(rows, cols)
        out.append(QuantizedLayer(Q, QuantGrid(wbit, group_size, S, Z), act))
    if r.pos != len(data):
        raise FormatError("trailing bytes after last layer")
    return out


def atomic_write(path, data):
    """Write via a temp file in the same directory, then rename."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data if isinstance(data, bytes) else data.encode())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_model(path):
    with open(path, "rb") as fh:
        return decode_model(fh.read())


def write_model(path, layers):
    atomic_write(path, encode_model(layers))


def read_quantized(path):
    with open(path, "rb") as fh:
        return decode_quantized(fh.read())


def write_quantized(path, qlayers):
    atomic_write(path, encode_quantized(qlayers))
