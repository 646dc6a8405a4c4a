"""Binary wavefunction checkpoints.

Layout: a fixed 64-byte little-endian header followed by the raw values as
interleaved re/im pairs in C order.

    offset  size  field
    0       5     magic b"PHMV1"
    5       1     zero
    6       2     version (uint16)
    8       1     dim
    9       1     representation (0 position, 1 momentum)
    10      1     precision (0 complex128, 1 complex64)
    11      1     radial flag
    12      4     points per axis (uint32)
    16      8     half length L (float64)
    24      8     time t (float64)
    32      8     payload bytes (uint64)
    40      24    reserved, zero
"""
import os
import struct

import numpy as np

from .errors import CheckpointError
from .grid import MOMENTUM, POSITION, Field, make_grid

MAGIC = b"PHMV1"
VERSION = 1
HEADER = struct.Struct("<5sxHBBBBIddQ24x")
assert HEADER.size == 64

_REPS = {POSITION: 0, MOMENTUM: 1}
_PRECISION = {np.dtype(np.complex128): 0, np.dtype(np.complex64): 1}


def save_checkpoint(f, t, path, precision=np.complex128):
    """Write f at time t; the file is replaced atomically."""
    g = f.grid
    dt = np.dtype(precision)
    if dt not in _PRECISION:
        raise CheckpointError(f"unsupported precision {dt}")
    payload = np.ascontiguousarray(f.values, dtype=dt).astype(dt.newbyteorder("<"), copy=False).tobytes()
    head = HEADER.pack(MAGIC, VERSION, g.dim, _REPS[f.rep], _PRECISION[dt], int(g.radial), g.n,
                       float(g.L), float(t), len(payload))
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(head)
        fh.write(payload)
    os.replace(tmp, path)


def read_header(path):
    with open(path, "rb") as fh:
        raw = fh.read(HEADER.size)
    return _unpack(raw)


def _unpack(raw):
    if len(raw) < HEADER.size:
        raise CheckpointError(f"truncated header: {len(raw)} of {HEADER.size} bytes")
    magic, version, dim, rep, prec, radial, n, L, t, nbytes = HEADER.unpack(raw[:HEADER.size])
    if magic != MAGIC:
        raise CheckpointError(f"bad magic {magic!r}")
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    if rep not in (0, 1) or prec not in (0, 1):
        raise CheckpointError("corrupt header tags")
    return {"dim": dim, "rep": POSITION if rep == 0 else MOMENTUM,
            "dtype": np.complex128 if prec == 0 else np.complex64, "radial": bool(radial),
            "n": n, "L": L, "t": t, "nbytes": nbytes}


def load_checkpoint(path, grid=None):
    """Read a checkpoint; returns (Field, t).

    With ``grid`` the stored grid must match it exactly, otherwise the grid
    is rebuilt from the header.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    h = _unpack(raw)
    dt = np.dtype(h["dtype"]).newbyteorder("<")
    expect = h["n"] ** h["dim"] * dt.itemsize
    if h["nbytes"] != expect:
        raise CheckpointError(f"header payload size {h['nbytes']} does not match the grid ({expect})")
    body = raw[HEADER.size:]
    if len(body) != expect:
        raise CheckpointError(f"truncated payload: {len(body)} of {expect} bytes")
    if grid is not None:
        if (grid.dim, grid.n, float(grid.L), bool(grid.radial)) != (h["dim"], h["n"], h["L"], h["radial"]):
            raise CheckpointError(
                f"grid mismatch: file has dim={h['dim']} n={h['n']} L={h['L']:g} radial={h['radial']}, "
                f"expected dim={grid.dim} n={grid.n} L={grid.L:g} radial={grid.radial}")
    else:
        grid = make_grid(h["dim"], h["n"], h["L"], radial=h["radial"])
    vals = np.frombuffer(body, dtype=dt).astype(np.dtype(h["dtype"])).reshape(grid.shape)
    return Field(grid, vals, h["rep"]), h["t"]
