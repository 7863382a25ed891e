"""Model variants: more colors, random color sequences, and the lattice Z^d.

On Z the colored set is always an interval around the origin, so a walker can
be moved to its stopping site in one gambler's-ruin draw, exactly as in the
fast mode of the core engine.  With two mutually antagonistic colors emitted
alternately the kernel below consumes the random stream in the same way as
that engine and reproduces it bit for bit.

Palette indices run from 0 to c-1.  For two colors index 0 is Blue and index
1 is Red, and Blue goes first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from numba import njit

from .engine import _bit_length, _read
from .rng import BitStream

_MIN_BITS = 256
_DONE, _NEED_BITS, _GROW = 0, 1, 2

MUTUAL, CYCLIC = "mutual", "cyclic"


@dataclass(frozen=True)
class Alternating:
    pass


@dataclass(frozen=True)
class IidUniform:
    pass


@dataclass(frozen=True)
class PeriodicPattern:
    pattern: tuple[int, ...]

    def __post_init__(self):
        if not self.pattern:
            raise ValueError("pattern must not be empty")


Schedule = Union[Alternating, IidUniform, PeriodicPattern]


@dataclass(frozen=True)
class ColorRule:
    palette: int = 2
    schedule: Schedule = field(default_factory=Alternating)
    antagonism: str = MUTUAL

    def __post_init__(self):
        if self.palette < 1:
            raise ValueError("palette must have at least one color")
        if self.antagonism not in (MUTUAL, CYCLIC):
            raise ValueError(f"unknown antagonism {self.antagonism!r}")
        if isinstance(self.schedule, PeriodicPattern):
            if any(not 0 <= p < self.palette for p in self.schedule.pattern):
                raise ValueError("pattern entries must be palette indices")

    def stops(self, walker: int, site: int | None) -> bool:
        """Whether a walker of color ``walker`` stops on a site colored ``site``."""
        if site is None:
            return True
        if self.antagonism == MUTUAL:
            return site != walker
        return site == (walker - 1) % self.palette

    def pattern_array(self) -> np.ndarray:
        if isinstance(self.schedule, PeriodicPattern):
            return np.array(self.schedule.pattern, dtype=np.int64)
        if isinstance(self.schedule, Alternating):
            return np.arange(self.palette, dtype=np.int64)
        return np.zeros(0, dtype=np.int64)


# kernel scalar slots
_N, _SE, _SW, _ORIGIN, _PHASE, _COL, _POS, _VIOL = range(8)


@njit(cache=True, inline="always")
def _stops(site, walker, palette, cyclic):
    # site: 0 uncolored, otherwise palette index + 1
    if site == 0:
        return True
    if cyclic:
        return site - 1 == (walker - 1) % palette
    return site - 1 != walker


@njit(cache=True, inline="always")
def _site(east, west, origin, x):
    if x > 0:
        return east[x]
    if x < 0:
        return west[-x]
    return origin


@njit(cache=True)
def _line_kernel(sc, east, west, pattern, palette, cyclic, iid, origin_stops, target_n, words,
                 cursor):
    total_bits = words.size * 64
    cap = east.size
    while sc[_N] < target_n:
        if total_bits - cursor < _MIN_BITS:
            return _NEED_BITS, cursor
        if sc[_SE] + 2 >= cap or sc[_SW] + 2 >= cap:
            return _GROW, cursor
        phase = sc[_PHASE]
        if phase == 0:
            if iid:
                k = _bit_length(palette - 1)
                r = _read(words, cursor, k)
                cursor += k
                if r >= palette:
                    continue
                sc[_COL] = r
            else:
                sc[_COL] = pattern[sc[_N] % pattern.size]
            sc[_POS] = 0
            sc[_PHASE] = 1 if origin_stops else 2
            continue
        c = sc[_COL]
        if phase == 1:
            # the walker leaves the origin before it may stop there
            bit = (words[cursor >> 6] >> np.uint64(cursor & 63)) & np.uint64(1)
            cursor += 1
            p = 1 if bit else -1
            sc[_POS] = p
            sc[_PHASE] = 2
            if _stops(_site(east, west, sc[_ORIGIN], p), c, palette, cyclic):
                sc[_PHASE] = 3
            continue
        p = sc[_POS]
        if phase == 2:
            b = p + 1
            while b <= sc[_SE] and not _stops(_site(east, west, sc[_ORIGIN], b), c, palette,
                                               cyclic):
                b += 1
            a = p - 1
            while a >= -sc[_SW] and not _stops(_site(east, west, sc[_ORIGIN], a), c, palette,
                                                cyclic):
                a -= 1
            span = b - a
            k = _bit_length(span - 1)
            r = _read(words, cursor, k)
            cursor += k
            if r >= span:
                continue
            p = b if r < p - a else a
        # settle at p
        old = _site(east, west, sc[_ORIGIN], p)
        if cyclic and old != 0 and palette >= 3 and old - 1 == (c + 1) % palette:
            sc[_VIOL] += 1
        if p > 0:
            east[p] = c + 1
            if p > sc[_SE]:
                sc[_SE] = p
        elif p < 0:
            west[-p] = c + 1
            if -p > sc[_SW]:
                sc[_SW] = -p
        else:
            sc[_ORIGIN] = c + 1
        sc[_PHASE] = 0
        sc[_N] += 1
    return _DONE, cursor


@dataclass
class LineColoring:
    east: np.ndarray     # palette index at 1..S_E
    west: np.ndarray     # palette index at -1..-S_W
    origin: int | None

    @property
    def colored_sites(self) -> int:
        return self.east.size + self.west.size + (self.origin is not None)

    def color_at(self, x: int) -> int | None:
        if x > 0:
            return int(self.east[x - 1]) if x <= self.east.size else None
        if x < 0:
            return int(self.west[-x - 1]) if -x <= self.west.size else None
        return self.origin


@dataclass
class VariantStats:
    checkpoints: np.ndarray     # particle counts
    colored: np.ndarray         # colored sites at each checkpoint
    cyclic_violations: int


def geometric_checkpoints(n: int, per_decade: int = 4, start: int = 1) -> list[int]:
    out = set()
    x = float(start)
    while x < n:
        out.add(int(round(x)))
        x *= 10 ** (1 / per_decade)
    out.add(n)
    return sorted(out)


def run_variant_line(rule: ColorRule, n: int, seed: int, origin_stops: bool = False,
                     checkpoints: list[int] | None = None) -> tuple[LineColoring, VariantStats]:
    if n < 1:
        raise ValueError("n must be at least 1")
    checkpoints = geometric_checkpoints(n) if checkpoints is None else sorted(set(checkpoints))
    rng = BitStream(seed)
    sc = np.zeros(8, dtype=np.int64)
    cap = 1024
    east = np.zeros(cap, dtype=np.int64)
    west = np.zeros(cap, dtype=np.int64)
    pattern = rule.pattern_array()
    iid = isinstance(rule.schedule, IidUniform)
    cyclic = rule.antagonism == CYCLIC
    counts = []
    for target in checkpoints:
        while True:
            rng.reserve()
            status, cur = _line_kernel(sc, east, west, pattern, rule.palette, cyclic, iid,
                                       origin_stops, target, rng.words, rng.cursor)
            rng.cursor = int(cur)
            if status == _DONE:
                break
            if status == _GROW:
                cap *= 2
                east = np.concatenate([east, np.zeros(cap - east.size, dtype=np.int64)])
                west = np.concatenate([west, np.zeros(cap - west.size, dtype=np.int64)])
        counts.append(int(sc[_SE] + sc[_SW] + (sc[_ORIGIN] != 0)))
    coloring = LineColoring(east[1: sc[_SE] + 1] - 1, west[1: sc[_SW] + 1] - 1,
                            int(sc[_ORIGIN]) - 1 if sc[_ORIGIN] else None)
    return coloring, VariantStats(np.array(checkpoints), np.array(counts), int(sc[_VIOL]))


# ---------------------------------------------------------------- Z^d

class ColoredSetTooLarge(MemoryError):
    pass


# scalar slots for the lattice kernel
_ZN, _ZCOUNT, _ZCAPHITS, _ZPHASE, _ZSTEPS = range(5)


@njit(cache=True)
def _zd_kernel(sc, grid, side, d, pos, target_n, step_cap, words, cursor):
    """Grid cells hold 0 (uncolored), 1 (Blue) or 2 (Red); the origin sits at
    the centre.  Returns GROW when a walker gets within one cell of the edge."""
    total_bits = words.size * 64
    half = side // 2
    ndir = 2 * d
    k = _bit_length(ndir - 1)
    stride = np.ones(d, dtype=np.int64)
    for i in range(1, d):
        stride[i] = stride[i - 1] * side
    while sc[_ZN] < target_n:
        if sc[_ZPHASE] == 0:
            for i in range(d):
                pos[i] = 0
            sc[_ZSTEPS] = 0
            sc[_ZPHASE] = 1
        color = 1 if sc[_ZN] % 2 == 0 else 2
        while True:
            if total_bits - cursor < _MIN_BITS:
                return _NEED_BITS, cursor
            r = _read(words, cursor, k)
            cursor += k
            if r >= ndir:
                continue
            axis = r >> 1
            pos[axis] += 1 if r & 1 else -1
            sc[_ZSTEPS] += 1
            idx = 0
            at_origin = True
            for i in range(d):
                idx += (pos[i] + half) * stride[i]
                if pos[i] != 0:
                    at_origin = False
            site = grid[idx]
            if not at_origin and (site == 0 or site != color):
                if site == 0:
                    sc[_ZCOUNT] += 1
                grid[idx] = color
                break
            if sc[_ZSTEPS] >= step_cap:
                sc[_ZCAPHITS] += 1
                break
            for i in range(d):
                if pos[i] + half <= 1 or pos[i] + half >= side - 2:
                    return _GROW, cursor
        sc[_ZPHASE] = 0
        sc[_ZN] += 1
    return _DONE, cursor


@dataclass
class LatticeColoring:
    d: int
    sites: dict   # coordinate tuple -> palette index (0 Blue, 1 Red)

    def __len__(self) -> int:
        return len(self.sites)

    def slice_rows(self) -> list[tuple[int, int, int]]:
        """(x, y, colorIndex) rows of the plane through the origin."""
        rows = [(p[0], p[1], c) for p, c in self.sites.items() if all(v == 0 for v in p[2:])]
        return sorted(rows)


@dataclass
class ZdStats:
    checkpoints: np.ndarray
    colored: np.ndarray
    cap_hits: int


def run_zd(d: int, n: int, seed: int, slice_output: bool = False,
           checkpoints: list[int] | None = None, max_cells: int = 50_000_000,
           step_cap: int = 10 ** 12):
    """Alternating Blue/Red walkers on Z^d.  Returns the coloring, the count
    series and, when ``slice_output`` is set, the rows of the plane slice."""
    if d not in (2, 3):
        raise ValueError("d must be 2 or 3")
    if n < 1:
        raise ValueError("n must be at least 1")
    checkpoints = geometric_checkpoints(n) if checkpoints is None else sorted(set(checkpoints))
    rng = BitStream(seed)
    side = 17
    grid = np.zeros(side ** d, dtype=np.int8)
    pos = np.zeros(d, dtype=np.int64)
    sc = np.zeros(5, dtype=np.int64)
    counts = []
    for target in checkpoints:
        while True:
            rng.reserve()
            status, cur = _zd_kernel(sc, grid, side, d, pos, target, step_cap, rng.words,
                                     rng.cursor)
            rng.cursor = int(cur)
            if status == _DONE:
                break
            if status == _GROW:
                new_side = 2 * side + 1
                if new_side ** d > max_cells:
                    raise ColoredSetTooLarge(f"grid of side {new_side} exceeds {max_cells} cells")
                bigger = np.zeros((new_side,) * d, dtype=np.int8)
                off = (new_side - side) // 2
                sl = tuple(slice(off, off + side) for _ in range(d))
                bigger[sl] = grid.reshape((side,) * d, order="F")
                grid = bigger.reshape(-1, order="F")
                side = new_side
        counts.append(int(sc[_ZCOUNT]))
    cube = grid.reshape((side,) * d, order="F")
    half = side // 2
    sites = {tuple(int(v) - half for v in idx): int(cube[tuple(idx)]) - 1
             for idx in np.argwhere(cube > 0)}
    coloring = LatticeColoring(d, sites)
    stats = ZdStats(np.array(checkpoints), np.array(counts), int(sc[_ZCAPHITS]))
    if slice_output:
        return coloring, stats, coloring.slice_rows()
    return coloring, stats


@dataclass
class SlopeReport:
    slope: float
    ci_low: float
    ci_high: float
    runs: int


def loglog_slope(ns, counts) -> float:
    x = np.log(np.asarray(ns, dtype=float))
    y = np.log(np.asarray(counts, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def slope_report(series: list[tuple[np.ndarray, np.ndarray]], n_min: int) -> SlopeReport:
    """Mean log-log slope over independent runs with a 95% normal interval."""
    slopes = []
    for ns, counts in series:
        keep = ns >= n_min
        slopes.append(loglog_slope(ns[keep], counts[keep]))
    s = np.array(slopes)
    half = 1.96 * s.std(ddof=1) / math.sqrt(s.size) if s.size > 1 else math.inf
    return SlopeReport(float(s.mean()), float(s.mean() - half), float(s.mean() + half), s.size)
