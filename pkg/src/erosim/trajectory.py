"""Recorded potential trajectories and their binary file format.

A trajectory of ``t`` microsteps is stored as

    magic            b"EROSIM-TRAJ v1\\n"
    n_steps          uint64 little-endian
    n_explorations   uint64
    explorations     n_explorations records of (int64 step, int32 site, int8 color)
    increments       ceil(n_steps / 8) bytes, bit i (LSB first) is 1 when step i+1
                     raised the potential by 2 and 0 when it lowered it by 2

Steps are numbered from 1.  At an exploration step the potential first moves
by +-2 like any other step and then drops by ``color * site``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

MAGIC = b"EROSIM-TRAJ v1\n"
_RECORD = np.dtype([("step", "<i8"), ("site", "<i4"), ("color", "i1")])


class TrajectoryFormatError(ValueError):
    pass


@dataclass
class Trajectory:
    increments: np.ndarray          # uint8 0/1, one per microstep
    exploration_steps: np.ndarray   # int64, 1-based microstep indices
    exploration_sites: np.ndarray   # int64
    exploration_colors: np.ndarray  # int8, +1 Blue / -1 Red

    @property
    def n_steps(self) -> int:
        return int(self.increments.size)

    def martingale(self) -> tuple[np.ndarray, np.ndarray]:
        """Potential after each step (index 0 is the start) and the values
        reached at exploration steps before the drop."""
        delta = 4 * self.increments.astype(np.int64) - 2
        post = np.zeros(self.n_steps + 1, dtype=np.int64)
        np.cumsum(delta, out=post[1:])
        drops = np.zeros(self.n_steps + 1, dtype=np.int64)
        steps = self.exploration_steps.astype(np.int64)
        drops[steps] = self.exploration_colors.astype(np.int64) * self.exploration_sites
        post -= np.cumsum(drops)
        pre = post[steps] + drops[steps]
        return post, pre

    def drops(self) -> np.ndarray:
        return self.exploration_colors.astype(np.int64) * self.exploration_sites

    def to_bytes(self) -> bytes:
        buf = io.BytesIO()
        buf.write(MAGIC)
        buf.write(np.array([self.n_steps, self.exploration_steps.size], dtype="<u8").tobytes())
        rec = np.zeros(self.exploration_steps.size, dtype=_RECORD)
        rec["step"] = self.exploration_steps
        rec["site"] = self.exploration_sites
        rec["color"] = self.exploration_colors
        buf.write(rec.tobytes())
        buf.write(np.packbits(self.increments.astype(np.uint8), bitorder="little").tobytes())
        return buf.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "Trajectory":
        if not data.startswith(MAGIC):
            raise TrajectoryFormatError("bad magic")
        off = len(MAGIC)
        if len(data) < off + 16:
            raise TrajectoryFormatError("truncated header")
        n_steps, n_expl = (int(x) for x in np.frombuffer(data, dtype="<u8", count=2, offset=off))
        off += 16
        rec_bytes = n_expl * _RECORD.itemsize
        bit_bytes = (n_steps + 7) // 8
        if len(data) != off + rec_bytes + bit_bytes:
            raise TrajectoryFormatError("length does not match header")
        rec = np.frombuffer(data, dtype=_RECORD, count=n_expl, offset=off)
        bits = np.frombuffer(data, dtype=np.uint8, offset=off + rec_bytes)
        inc = np.unpackbits(bits, bitorder="little")[:n_steps]
        return cls(inc.astype(np.uint8), rec["step"].astype(np.int64),
                   rec["site"].astype(np.int64), rec["color"].astype(np.int8))

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "Trajectory":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


def record_trajectory(seed: int, microsteps: int) -> Trajectory:
    from .engine import Engine
    return Engine(seed, record_trajectory=True).run_until_microsteps(microsteps).trajectory()
