"""Discretized limit functionals of two independent Brownian motions.

For two paths f, g on [0, 1] let T^f_a, T^g_a be the first times |f|, |g|
reach level a and

    X1 = sup{a : T^f_a + T^g_a <= 1}.

Exactly one path "carries" X1: after its hitting time it stays below X1 in
absolute value until the window end 1 - T^other_{X1}.  Flipped so that it sits
at +X1 at its hitting time, the carrier then has alternating global minima
and maxima M1 < U1 > M2 < ... on shrinking windows, and

    X2 = X1 - M1,  X3 = U1 - M1,  X4 = U1 - M2, ...

On lattice paths of m steps the levels are integers: X1 is the largest
integer level a with T^f_a + T^g_a <= m, divided by sqrt(m).

Two implementations live here.  ``hitting_functional`` and
``alternating_extrema`` work on explicit value arrays with numpy and serve as
the reference; ``sample_limit`` drives compiled kernels that read the walks
straight from the random bit stream, sixteen steps per table lookup.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from numba import njit

from .rng import BitStream, trial_seed

_INF = np.iinfo(np.int64).max // 4


@dataclass
class DiscretePath:
    values: np.ndarray   # integers, values[0] == 0, unit increments

    @classmethod
    def from_bits(cls, bits: np.ndarray) -> "DiscretePath":
        steps = 2 * bits.astype(np.int64) - 1
        return cls(np.concatenate([[0], np.cumsum(steps)]))

    @property
    def steps(self) -> int:
        return self.values.size - 1

    def scaled(self) -> np.ndarray:
        return self.values / math.sqrt(self.steps)


@dataclass
class LimitSample:
    x: list[float]
    carrier: str          # "g" when the second path carries (event A), "f" otherwise
    tie: bool
    hit_time_f: float
    hit_time_g: float
    level: int = 0        # lattice level a* (0 when nothing qualified)


def _first_hits(values: np.ndarray) -> np.ndarray:
    """hits[a] = first index with |value| >= a, for a = 0..max|value|."""
    running = np.maximum.accumulate(np.abs(values))
    levels = np.arange(int(running[-1]) + 1)
    return np.searchsorted(running, levels, side="left")


def _lattice_level(hf: np.ndarray, hg: np.ndarray, m: int) -> int:
    top = min(hf.size, hg.size) - 1
    ok = np.nonzero(hf[: top + 1] + hg[: top + 1] <= m)[0]
    return int(ok[-1]) if ok.size else 0


def _sampled_hit(times: np.ndarray, vals: np.ndarray, a: float) -> float:
    absv = np.abs(vals)
    idx = np.nonzero(absv >= a)[0]
    if idx.size == 0:
        return math.inf
    i = int(idx[0])
    if i == 0:
        return float(times[0])
    v0, v1 = absv[i - 1], absv[i]
    return float(times[i - 1] + (times[i] - times[i - 1]) * (a - v0) / (v1 - v0))


PathLike = Union[DiscretePath, Callable[[np.ndarray], np.ndarray], None]


def hitting_functional(f: PathLike, g: PathLike, grid: int = 1 << 16):
    """(x1, T^f_{x1}, T^g_{x1}) on the unit time scale.

    Lattice paths use exact integer levels.  Callables on [0, 1] are sampled
    on ``grid`` points and hitting times interpolated linearly.  ``g=None``
    stands for a path whose hitting times are all 0.
    """
    if isinstance(f, DiscretePath) and (g is None or isinstance(g, DiscretePath)):
        m = f.steps
        hf = _first_hits(f.values)
        hg = _first_hits(g.values) if g is not None else np.zeros(hf.size, dtype=np.int64)
        a = _lattice_level(hf, hg, m)
        return a / math.sqrt(m), hf[a] / m, hg[a] / m
    t = np.linspace(0.0, 1.0, grid + 1)
    fv = np.asarray(f(t), dtype=float)
    gv = np.asarray(g(t), dtype=float) if g is not None else None

    def total(a):
        tg = 0.0 if gv is None else _sampled_hit(t, gv, a)
        return _sampled_hit(t, fv, a) + tg

    lo, hi = 0.0, float(np.max(np.abs(fv)))
    if gv is not None:
        hi = min(hi, float(np.max(np.abs(gv))))
    if hi == 0.0 or total(1e-300) > 1:
        return 0.0, 0.0, 0.0
    if total(hi) <= 1:
        lo = hi
    else:
        for _ in range(200):
            mid = (lo + hi) / 2
            if total(mid) <= 1:
                lo = mid
            else:
                hi = mid
    tg = 0.0 if gv is None else _sampled_hit(t, gv, lo)
    return lo, _sampled_hit(t, fv, lo), tg


def _alternating(values: np.ndarray, start: int, end: int, k: int) -> list[int]:
    """Extrema e0 = values[start], e1 = min, e2 = max, ... on shrinking windows
    [argmin/argmax, end], earliest attainment."""
    ext = [int(values[start])]
    i = start
    for j in range(1, k + 1):
        window = values[i: end + 1]
        off = int(np.argmin(window)) if j % 2 == 1 else int(np.argmax(window))
        i += off
        ext.append(int(values[i]))
    return ext


def _continuous_extrema(f, g, k: int, grid: int) -> LimitSample:
    x1, tf, tg = hitting_functional(f, g, grid)
    if x1 == 0.0:
        return LimitSample([0.0] * (k + 1), "g", True, tf, tg)
    t = np.linspace(0.0, 1.0, grid + 1)
    fv, gv = np.asarray(f(t), dtype=float), np.asarray(g(t), dtype=float)
    tol = 1e-9 * max(1.0, x1)

    def carries(v, other_hit):
        return np.max(np.abs(v[t <= 1 - other_hit + 1e-12])) <= x1 + tol

    event_g, event_f = carries(gv, tf), carries(fv, tg)
    use_g = event_g or not event_f
    v, hit, other = (gv, tg, tf) if use_g else (fv, tf, tg)
    start = int(np.searchsorted(t, hit - 1e-12))
    end = int(np.searchsorted(t, 1 - other + 1e-12, side="right")) - 1
    v = v * (1.0 if v[start] > 0 else -1.0)
    ext = [x1]
    i = start
    for j in range(1, k + 1):
        window = v[i: end + 1]
        i += int(np.argmin(window)) if j % 2 == 1 else int(np.argmax(window))
        ext.append(float(v[i]))
    x = [ext[0]] + [abs(ext[i] - ext[i - 1]) for i in range(1, k + 1)]
    return LimitSample(x, "g" if use_g else "f", event_g == event_f, tf, tg)


def alternating_extrema(f, g, k: int, grid: int = 1 << 16) -> LimitSample:
    """Event, carrier orientation and (X1, ..., X_{k+1}).

    Lattice paths are handled exactly; callables on [0, 1] are sampled on
    ``grid`` points."""
    if not isinstance(f, DiscretePath):
        return _continuous_extrema(f, g, k, grid)
    m = f.steps
    hf, hg = _first_hits(f.values), _first_hits(g.values)
    a = _lattice_level(hf, hg, m)
    if a == 0:
        return LimitSample([0.0] * (k + 1), "g", True, 0.0, 0.0, 0)

    def nxt(h):
        return int(h[a + 1]) if a + 1 < h.size else _INF

    margin_g = nxt(hg) - (m - int(hf[a]))
    margin_f = nxt(hf) - (m - int(hg[a]))
    event_g, event_f = margin_g > 0, margin_f > 0
    tie = event_g == event_f
    use_g = margin_g >= margin_f
    path, other = (g, hf) if use_g else (f, hg)
    hits = hg if use_g else hf
    start, end = int(hits[a]), m - int(other[a])
    v = path.values * (1 if path.values[start] > 0 else -1)
    ext = _alternating(v, start, end, k)
    x = [ext[0]] + [abs(ext[i] - ext[i - 1]) for i in range(1, k + 1)]
    if not strictly_ordered(x):
        tie = True
    scale = math.sqrt(m)
    return LimitSample([xi / scale for xi in x], "g" if use_g else "f", tie,
                       int(hf[a]) / m, int(hg[a]) / m, a)


def strictly_ordered(x) -> bool:
    """X2 < 2 X1 and X_{i+1} < X_i for i >= 2.

    X1 > X2 fails whenever the first window minimum is negative; the ordering
    that does hold is the one of the layer sizes sqrt(X1) > sqrt(X2/2) > ...
    """
    if len(x) > 1 and not x[1] < 2 * x[0]:
        return False
    return all(x[i + 1] < x[i] for i in range(1, len(x) - 1))


# ---------------------------------------------------------------- kernels

def _chunk_tables():
    n = 1 << 16
    net = np.zeros(n, dtype=np.int64)
    hi = np.zeros(n, dtype=np.int64)
    lo = np.zeros(n, dtype=np.int64)
    steps = np.where(((np.arange(n)[:, None] >> np.arange(16)) & 1) == 1, 1, -1)
    prefix = np.cumsum(steps, axis=1)
    net[:] = prefix[:, -1]
    hi[:] = prefix.max(axis=1)
    lo[:] = prefix.min(axis=1)
    return net, hi, lo


NET16, MAX16, MIN16 = _chunk_tables()


@njit(cache=True, inline="always")
def _bits16(words, pos):
    w = pos >> 6
    s = pos & 63
    v = words[w] >> np.uint64(s)
    if s > 48:
        v |= words[w + 1] << np.uint64(64 - s)
    return np.int64(v & np.uint64(0xFFFF))


@njit(cache=True, inline="always")
def _bit(words, pos):
    return np.int64((words[pos >> 6] >> np.uint64(pos & 63)) & np.uint64(1))


@njit(cache=True)
def _path_hits(words, off, m, net, hi, lo, hits):
    """First hitting times of |x| = a for the walk on bits off..off+m-1."""
    x = 0
    rec = 0
    hits[0] = 0
    i = 0
    while i < m:
        if m - i >= 16:
            ch = _bits16(words, off + i)
            if x + hi[ch] <= rec and x + lo[ch] >= -rec:
                x += net[ch]
                i += 16
                continue
            end = i + 16
        else:
            end = m
        while i < end:
            x += 1 if _bit(words, off + i) else -1
            i += 1
            ax = x if x > 0 else -x
            if ax > rec:
                rec = ax
                hits[rec] = i
    return rec


@njit(cache=True)
def _value_at(words, off, idx, net):
    x = 0
    i = 0
    while idx - i >= 16:
        x += net[_bits16(words, off + i)]
        i += 16
    while i < idx:
        x += 1 if _bit(words, off + i) else -1
        i += 1
    return x


@njit(cache=True)
def _window_extreme(words, off, start, y0, end, sign, want_min, net, hi, lo):
    """Earliest extremum of sign * x over [start, end]; y0 = sign * x(start)."""
    best = y0
    best_i = start
    y = y0
    i = start
    while i < end:
        if end - i >= 16:
            ch = _bits16(words, off + i)
            if sign > 0:
                cmin, cmax, d = lo[ch], hi[ch], net[ch]
            else:
                cmin, cmax, d = -hi[ch], -lo[ch], -net[ch]
            if (want_min and y + cmin >= best) or ((not want_min) and y + cmax <= best):
                y += d
                i += 16
                continue
            stop = i + 16
        else:
            stop = end
        while i < stop:
            y += sign if _bit(words, off + i) else -sign
            i += 1
            if (want_min and y < best) or ((not want_min) and y > best):
                best = y
                best_i = i
    return best, best_i


@njit(cache=True)
def _limit_kernel(words, m, k, net, hi, lo, hf, hg, out_ext, out_meta):
    """One sample: walks f on bits [0, m) and g on bits [m, 2m)."""
    af = _path_hits(words, 0, m, net, hi, lo, hf)
    ag = _path_hits(words, m, m, net, hi, lo, hg)
    top = min(af, ag)
    a = 0
    for lev in range(top, 0, -1):
        if hf[lev] + hg[lev] <= m:
            a = lev
            break
    out_meta[0] = a
    if a == 0:
        out_meta[1] = 1
        out_meta[2] = 1
        out_meta[3] = 0
        out_meta[4] = 0
        for j in range(k + 1):
            out_ext[j] = 0
        return
    nf = hf[a + 1] if a + 1 <= af else _INF
    ng = hg[a + 1] if a + 1 <= ag else _INF
    margin_g = ng - (m - hf[a])
    margin_f = nf - (m - hg[a])
    ev_g = margin_g > 0
    ev_f = margin_f > 0
    use_g = margin_g >= margin_f
    out_meta[1] = 1 if use_g else 0
    out_meta[2] = 1 if ev_g == ev_f else 0
    out_meta[3] = hf[a]
    out_meta[4] = hg[a]
    if use_g:
        off = m
        start = hg[a]
        end = m - hf[a]
    else:
        off = 0
        start = hf[a]
        end = m - hg[a]
    x0 = _value_at(words, off, start, net)
    sign = 1 if x0 > 0 else -1
    out_ext[0] = a
    i = start
    y = a
    for j in range(1, k + 1):
        y, i = _window_extreme(words, off, i, y, end, sign, j % 2 == 1, net, hi, lo)
        out_ext[j] = y


@dataclass
class LimitBatch:
    x: np.ndarray        # trials x (k+1), real
    level: np.ndarray    # lattice level a*
    carrier_g: np.ndarray
    tie: np.ndarray
    hit_f: np.ndarray    # fractions of 1
    hit_g: np.ndarray
    m: int

    def __len__(self) -> int:
        return self.x.shape[0]

    def support(self, C: float) -> np.ndarray:
        return C * np.sqrt(self.x[:, 0])

    def runs(self, C: float, i: int) -> np.ndarray:
        """(C/2)(sqrt(X1) - sqrt(X2/2)) for i = 1, (C/2)(sqrt(Xi/2) - sqrt(X{i+1}/2)) after."""
        first = np.sqrt(self.x[:, 0]) if i == 1 else np.sqrt(self.x[:, i - 1] / 2)
        return C / 2 * (first - np.sqrt(self.x[:, i] / 2))


def sample_one(seed: int, m: int, k: int):
    """Kernel result for a single seeded sample: (extrema, meta)."""
    rng = BitStream(seed)
    rng.reserve((2 * m + 63) // 64 + 2)
    hf = np.zeros(m + 2, dtype=np.int64)
    hg = np.zeros(m + 2, dtype=np.int64)
    ext = np.zeros(k + 1, dtype=np.int64)
    meta = np.zeros(5, dtype=np.int64)
    _limit_kernel(rng.words, m, k, NET16, MAX16, MIN16, hf, hg, ext, meta)
    return ext, meta


def sample_paths(seed: int, m: int) -> tuple[DiscretePath, DiscretePath]:
    """The two lattice paths the kernel reads for ``seed``."""
    rng = BitStream(seed)
    bits = np.array([rng.bit() for _ in range(2 * m)], dtype=np.uint8) if m < 4096 else None
    if bits is None:
        rng.reserve((2 * m + 63) // 64 + 2)
        bits = np.unpackbits(rng.words.view(np.uint8), bitorder="little")[: 2 * m]
    return DiscretePath.from_bits(bits[:m]), DiscretePath.from_bits(bits[m:])


def sample_limit(trials: int, m: int, k: int, master_seed: int, first_trial: int = 0) -> LimitBatch:
    hf = np.zeros(m + 2, dtype=np.int64)
    hg = np.zeros(m + 2, dtype=np.int64)
    ext = np.zeros((trials, k + 1), dtype=np.int64)
    meta = np.zeros((trials, 5), dtype=np.int64)
    nwords = (2 * m + 63) // 64 + 2
    for i in range(trials):
        bitgen = np.random.PCG64(trial_seed(master_seed, first_trial + i))
        words = bitgen.random_raw(nwords).astype(np.uint64, copy=False)
        _limit_kernel(words, m, k, NET16, MAX16, MIN16, hf, hg, ext[i], meta[i])
    x = np.zeros((trials, k + 1))
    x[:, 0] = ext[:, 0]
    for j in range(1, k + 1):
        x[:, j] = np.abs(ext[:, j] - ext[:, j - 1])
    strict = np.array([strictly_ordered(row) for row in x]) if k else np.ones(trials, bool)
    tie = (meta[:, 2] == 1) | ~strict
    return LimitBatch(x / math.sqrt(m), meta[:, 0].copy(), meta[:, 1] == 1, tie,
                      meta[:, 3] / m, meta[:, 4] / m, m)
