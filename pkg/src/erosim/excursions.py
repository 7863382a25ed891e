"""Splitting the potential trajectory into two glued random walks.

Explorations cut the potential path into alternating segments.  Segment
``E_k`` runs while the supports are (k, k): it starts at +-k(k+1) and ends
when |M| reaches (k+1)(k+2).  Segment ``F_k`` runs while the supports are
{k, k+1}: it starts at +-(k+1)^2 and ends at +-((k+2)^2 - 1).

The E segments are glued end to end after flipping signs where needed, which
yields a step-2 walk from 0.  The F segments need a shift as well, because
each one starts one unit further from zero than the previous one ended;
every F segment is flipped so that its start has the sign of the running
endpoint and then translated onto it, so the accumulated shift after k+1
segments is at most k+1.

The orientation and shift of every segment are kept so the original path can
be rebuilt exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .trajectory import Trajectory


@dataclass(frozen=True)
class Segment:
    kind: str          # "E" or "F"
    level: int         # k
    first_step: int    # microstep index of the segment start (0-based time)
    last_step: int     # time of the segment end (exploration step, or t)
    start: int         # raw potential at the start
    end: int           # raw potential at the end (before the drop if complete)
    complete: bool
    orientation: int   # +1 or -1
    shift: int         # added after orientation
    path_start: int    # index into the glued path
    path_end: int

    def expected_start(self) -> int:
        k = self.level
        return k * (k + 1) if self.kind == "E" else (k + 1) ** 2

    def expected_end(self) -> int:
        k = self.level
        return (k + 1) * (k + 2) if self.kind == "E" else (k + 2) ** 2 - 1


@dataclass
class ExcursionDecomposition:
    path_e: np.ndarray
    path_f: np.ndarray
    segments: list[Segment] = field(default_factory=list)
    n_steps: int = 0

    def boundary_violations(self) -> list[str]:
        out = []
        for s in self.segments:
            if abs(s.start) != s.expected_start():
                out.append(f"{s.kind}_{s.level} starts at {s.start}")
            if s.complete and abs(s.end) != s.expected_end():
                out.append(f"{s.kind}_{s.level} ends at {s.end}")
            if s.complete and s.kind == "E":
                v = int(self.path_e[s.path_end])
                if abs(v) != s.expected_end():
                    out.append(f"glued E path at {v} after E_{s.level}")
        return out

    def f_discrepancies(self) -> list[tuple[int, int]]:
        """(k, ||F'' endpoint| - ((k+2)^2 - 1)|) for each complete F segment."""
        return [(s.level, abs(abs(int(self.path_f[s.path_end])) - s.expected_end()))
                for s in self.segments if s.kind == "F" and s.complete]

    def reconstruct(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Invert the gluing: increments, exploration steps and the drop
        ``color * site`` applied at each exploration."""
        inc = np.zeros(self.n_steps, dtype=np.uint8)
        raws = []
        for s in self.segments:
            glued = self.path_e if s.kind == "E" else self.path_f
            raw = s.orientation * (glued[s.path_start: s.path_end + 1] - s.shift)
            raws.append(raw)
            d = np.diff(raw)
            inc[s.first_step: s.first_step + d.size] = (d > 0).astype(np.uint8)
        steps, drops = [], []
        for i, s in enumerate(self.segments):
            if s.complete:
                steps.append(s.last_step)
                drops.append(int(raws[i][-1]) - int(raws[i + 1][0]))
        return inc, np.array(steps, dtype=np.int64), np.array(drops, dtype=np.int64)


def decompose_excursions(traj: Trajectory) -> ExcursionDecomposition:
    post, pre = traj.martingale()
    cuts = [int(x) for x in traj.exploration_steps]
    bounds = [0] + cuts + [traj.n_steps]
    e_parts, f_parts = [np.zeros(1, dtype=np.int64)], [np.zeros(1, dtype=np.int64)]
    e_end = f_end = 0
    e_len = f_len = 0
    f_started = False
    segments = []
    for i in range(len(bounds) - 1):
        lo, hi = bounds[i], bounds[i + 1]
        complete = i < len(cuts)
        raw = post[lo: hi + 1].copy()
        if complete:
            raw[-1] = pre[i]
        kind = "E" if i % 2 == 0 else "F"
        level = i // 2
        if kind == "E":
            o = 1 if raw[0] == e_end else -1
            shift = 0
            glued = o * raw
            start_idx = e_len
            e_parts.append(glued[1:])
            e_len += raw.size - 1
            e_end = int(glued[-1])
            end_idx = e_len
        else:
            if not f_started:
                o, shift = 1, -int(raw[0])
                f_started = True
            else:
                o = 1 if (raw[0] > 0) == (f_end > 0) else -1
                shift = f_end - o * int(raw[0])
            glued = o * raw + shift
            start_idx = f_len
            f_parts.append(glued[1:])
            f_len += raw.size - 1
            f_end = int(glued[-1])
            end_idx = f_len
        segments.append(Segment(kind, level, lo, hi, int(raw[0]), int(raw[-1]), complete,
                                o, shift, start_idx, end_idx))
    return ExcursionDecomposition(np.concatenate(e_parts), np.concatenate(f_parts), segments,
                                  traj.n_steps)
