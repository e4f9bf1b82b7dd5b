"""Binary field snapshots.

Layout (little-endian): magic ``b"MHDF"``, u32 version, u32 dim, u32 n,
f64 box length, u32 component count, then float64 physical samples,
component-major in C order.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .spectral import Grid, MhdState, forward_transform

MAGIC = b"MHDF"
VERSION = 1
_HEADER = struct.Struct("<4sIIIdI")


class SnapshotError(ValueError):
    pass


@dataclass
class Snapshot:
    grid: Grid
    samples: np.ndarray  # (ncomp, *grid.shape)

    def to_state(self) -> MhdState:
        d = self.grid.dim
        if self.samples.shape[0] != 2 * d:
            raise SnapshotError(f"{self.samples.shape[0]} components is not a (v, H) state in {d}D")
        return MhdState(self.grid, forward_transform(self.samples, self.grid).coeffs.reshape((2, d) + self.grid.shape))


def write_snapshot(path, grid: Grid, samples: np.ndarray) -> None:
    samples = np.ascontiguousarray(samples, dtype="<f8")
    if samples.shape[1:] != grid.shape:
        raise ValueError(f"samples shape {samples.shape} does not match grid {grid.shape}")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, grid.dim, grid.n, grid.box_length, samples.shape[0]))
        fh.write(samples.tobytes(order="C"))


def write_state(path, state: MhdState) -> None:
    phys = state.to_physical().reshape((-1,) + state.grid.shape)
    write_snapshot(path, state.grid, phys)


def read_snapshot(path) -> Snapshot:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise SnapshotError(f"{path}: truncated header ({len(data)} bytes)")
    magic, version, dim, n, length, ncomp = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise SnapshotError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise SnapshotError(f"{path}: unsupported version {version}")
    try:
        grid = Grid(dim, n, length)
    except ValueError as exc:
        raise SnapshotError(f"{path}: invalid header: {exc}") from None
    expected = ncomp * n**dim * 8
    body = data[_HEADER.size :]
    if len(body) != expected:
        raise SnapshotError(f"{path}: corrupt payload, expected {expected} bytes, found {len(body)}")
    samples = np.frombuffer(body, dtype="<f8").reshape((ncomp,) + grid.shape).copy()
    return Snapshot(grid, samples)
