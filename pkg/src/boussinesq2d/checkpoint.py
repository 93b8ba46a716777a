"""Binary checkpoints.

Layout (little endian)::

    magic   4 bytes  b"BSQ1"
    version u32      1
    n       u64
    t       f64
    nu      f64
    seed    u64
    u.x, u.y, rho    three n*n blocks of complex128 coefficients
                     (real, imaginary f64 pairs), row-major over (k1, k2)
                     in FFT order
"""
from __future__ import annotations

import os
import struct
from pathlib import Path

import numpy as np

from .dynamics import SimState
from .errors import CorruptCheckpointError
from .spectral import SpectralScalar, SpectralVector, grid

MAGIC = b"BSQ1"
VERSION = 1
_HEADER = struct.Struct("<4sIQddQ")
_BLOCKS = ("u.x", "u.y", "rho")


def save_checkpoint(state: SimState, path, seed: int = 0) -> None:
    """Write ``state`` atomically (temporary file, then rename)."""
    path = Path(path)
    n = state.grid.n
    header = _HEADER.pack(MAGIC, VERSION, n, float(state.t), float(state.nu), int(seed))
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(header)
        for c in (state.u.x.coeffs, state.u.y.coeffs, state.rho.coeffs):
            fh.write(np.ascontiguousarray(c, dtype="<c16").tobytes())
    os.replace(tmp, path)


def read_header(path) -> dict:
    data = Path(path).read_bytes()
    return _parse_header(data)


def _parse_header(data: bytes) -> dict:
    if len(data) < 4 or data[:4] != MAGIC:
        raise CorruptCheckpointError("magic", f"expected {MAGIC!r}, found {data[:4]!r}")
    if len(data) < _HEADER.size:
        raise CorruptCheckpointError("header", f"truncated header ({len(data)} of {_HEADER.size} bytes)")
    _, version, n, t, nu, seed = _HEADER.unpack_from(data)
    if version != VERSION:
        raise CorruptCheckpointError("version", f"unsupported version {version}")
    if n < 8 or n % 2 or n > 1 << 16:
        raise CorruptCheckpointError("n", f"implausible grid size {n}")
    return {"version": version, "n": n, "t": t, "nu": nu, "seed": seed}


def load_checkpoint(path, with_header: bool = False):
    """Read a checkpoint back into a :class:`SimState` (bit-exact)."""
    data = Path(path).read_bytes()
    head = _parse_header(data)
    n = head["n"]
    block = 16 * n * n
    off = _HEADER.size
    arrays = []
    for name in _BLOCKS:
        if len(data) < off + block:
            raise CorruptCheckpointError(name, f"truncated payload in block {name}")
        arrays.append(np.frombuffer(data, dtype="<c16", count=n * n, offset=off).reshape(n, n).astype(complex))
        off += block
    if len(data) != off:
        raise CorruptCheckpointError("payload", f"{len(data) - off} trailing bytes")
    for name, c in zip(_BLOCKS, arrays):
        if not np.all(np.isfinite(c)):
            raise CorruptCheckpointError(name, f"non-finite coefficients in block {name}")
    if not head["nu"] > 0:
        raise CorruptCheckpointError("nu", f"nonpositive viscosity {head['nu']}")
    g = grid(n)
    try:
        state = SimState(head["t"], SpectralVector.from_arrays(g, arrays[0], arrays[1]), SpectralScalar(g, arrays[2]), head["nu"])
    except ValueError as exc:
        raise CorruptCheckpointError("payload", str(exc)) from exc
    return (state, head) if with_header else state
