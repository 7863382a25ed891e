"""Erosion restricted to [-L, L], killed when a walker steps outside.

Each trial starts from a monochromatic configuration, ``east_color`` on
[1, L] and the other color on [-L, -1], and alternates walker colors from
``first_color``.  The trial ends at the first microstep that reaches
+-(L+1).  The particle count includes the killed particle and the microstep
count includes the exiting step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .coloring import BLUE, SiteColoring
from .rng import BitStream

# kernel state slots
_TRIAL, _POS, _COL, _R, _Q, _LIVE = range(6)


@njit(cache=True)
def _killed_kernel(L, east_color, first_color, ntrials, ks, sites, words, cursor, out_r, out_q,
                   out_mono):
    total_bits = words.size * 64
    while ks[_TRIAL] < ntrials:
        if ks[_LIVE] == 0:
            for x in range(1, L + 1):
                sites[L + x] = east_color
                sites[L - x] = -east_color
            ks[_POS] = 0
            ks[_COL] = first_color
            ks[_R] = 0
            ks[_Q] = 0
            ks[_LIVE] = 1
        pos = ks[_POS]
        c = ks[_COL]
        r = ks[_R]
        q = ks[_Q]
        killed = False
        while total_bits - cursor >= 64:
            bit = (words[cursor >> 6] >> np.uint64(cursor & 63)) & np.uint64(1)
            cursor += 1
            pos += 1 if bit else -1
            q += 1
            if pos == L + 1 or pos == -L - 1:
                r += 1
                killed = True
                break
            if pos != 0 and sites[L + pos] != c:
                sites[L + pos] = c
                r += 1
                c = -c
                pos = 0
        ks[_POS] = pos
        ks[_COL] = c
        ks[_R] = r
        ks[_Q] = q
        if not killed:
            return cursor
        i = ks[_TRIAL]
        out_r[i] = r
        out_q[i] = q
        mono = True
        for x in range(2, L + 1):
            if sites[L + x] != sites[L + 1] or sites[L - x] != sites[L - 1]:
                mono = False
        if sites[L + 1] == sites[L - 1]:
            mono = False
        out_mono[i] = mono
        ks[_LIVE] = 0
        ks[_TRIAL] = i + 1
    return cursor


@dataclass
class KilledOutcome:
    particles: int
    microsteps: int
    final_coloring: SiteColoring


@dataclass
class KilledBatch:
    particles: np.ndarray
    microsteps: np.ndarray
    monochromatic: np.ndarray
    final_sites: np.ndarray  # sites -L..L of the last trial


def run_killed_batch(L: int, trials: int, seed: int, east_color: int = BLUE,
                     first_color: int | None = None) -> KilledBatch:
    if L < 1:
        raise ValueError("L must be at least 1")
    if first_color is None:
        first_color = -east_color
    rng = BitStream(seed)
    ks = np.zeros(6, dtype=np.int64)
    sites = np.zeros(2 * L + 1, dtype=np.int64)
    out_r = np.zeros(trials, dtype=np.int64)
    out_q = np.zeros(trials, dtype=np.int64)
    out_mono = np.zeros(trials, dtype=np.bool_)
    while ks[_TRIAL] < trials:
        rng.reserve()
        rng.cursor = int(_killed_kernel(L, east_color, first_color, trials, ks, sites, rng.words,
                                        rng.cursor, out_r, out_q, out_mono))
    return KilledBatch(out_r, out_q, out_mono, sites.copy())


def run_killed(L: int, east_color: int, first_color: int, seed: int) -> KilledOutcome:
    b = run_killed_batch(L, 1, seed, east_color, first_color)
    sites = b.final_sites
    coloring = SiteColoring.from_sites(sites[L + 1:], sites[:L][::-1])
    return KilledOutcome(int(b.particles[0]), int(b.microsteps[0]), coloring)


@dataclass
class RatioEstimate:
    trials: int
    mean_particles: float
    mean_microsteps: float
    se_particles: float
    se_microsteps: float
    ratio: float
    se_ratio: float


def summarize(particles: np.ndarray, microsteps: np.ndarray) -> RatioEstimate:
    n = particles.size
    r = particles.astype(np.float64)
    q = microsteps.astype(np.float64)
    mr, mq = r.mean(), q.mean()
    sr = r.std(ddof=1) / math.sqrt(n) if n > 1 else math.inf
    sq = q.std(ddof=1) / math.sqrt(n) if n > 1 else math.inf
    ratio = mr / mq
    if n > 1:
        # delta method for a ratio of means
        cov = np.cov(r, q)[0, 1]
        var = (sr ** 2 / mq ** 2 + mr ** 2 * sq ** 2 / mq ** 4 - 2 * mr * cov / n / mq ** 3)
        se_ratio = math.sqrt(max(var, 0.0))
    else:
        se_ratio = math.inf
    return RatioEstimate(n, mr, mq, sr, sq, ratio, se_ratio)


def estimate_ratio(L: int, trials: int, seed: int) -> RatioEstimate:
    b = run_killed_batch(L, trials, seed)
    return summarize(b.particles, b.microsteps)
