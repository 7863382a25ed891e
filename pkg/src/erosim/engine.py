"""Compiled erosion engine.

Same dynamics and the same random-bit consumption as :class:`ErosionState`,
but the configuration lives in flat numpy arrays and the walk loop runs under
numba.  Long stretches of a walk that cannot reach either stopping site are
advanced sixteen steps at a time through a lookup table; this consumes
exactly the bits a step-by-step walk would.

Trajectory recording stores one bit per microstep (1 when the potential
went up by 2) plus the exploration table, see :mod:`erosim.trajectory`.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .coloring import BLUE, RED, SiteColoring
from .goodness import GoodnessCounters
from .rng import BitStream
from .state import MICROSTEP_LIMIT, ExplorationRecord

# scalar slots
N, T, M, POS, COL, NE, NW, SE, SW, NRED, NBLUE, PSTART, GSIDE, GLEVEL, BA, BB, ACTIVE, NEXT, NEXPL, NTRAJ = range(20)
NSCAL = 20

DONE, NEED_BITS, GROW = 0, 1, 2
_MIN_BITS = 128

NET16 = np.array([2 * bin(i).count("1") - 16 for i in range(1 << 16)], dtype=np.int64)


@njit(cache=True, inline="always")
def _read(words, cursor, k):
    w = cursor >> 6
    s = cursor & 63
    v = words[w] >> np.uint64(s)
    if s + k > 64:
        v |= words[w + 1] << np.uint64(64 - s)
    if k < 64:
        v &= (np.uint64(1) << np.uint64(k)) - np.uint64(1)
    return np.int64(v)


@njit(cache=True)
def _bit_length(x):
    k = 0
    while x > 0:
        k += 1
        x >>= 1
    return k


@njit(cache=True, inline="always")
def _settle_side(col, ln, cnt, d, c, support):
    """Update one side's runs (outermost first) when site d takes color c."""
    if d == support + 1:
        if cnt == 0:
            col[0] = c
            ln[0] = 1
            return 1, True
        ln[0] += 1
        return cnt, True
    if col[cnt - 1] == c:
        ln[cnt - 1] += 1
        ln[cnt - 2] -= 1
        if ln[cnt - 2] == 0:
            if cnt >= 3:
                ln[cnt - 3] += ln[cnt - 1]
                cnt -= 2
            else:
                col[0] = c
                ln[0] = ln[1]
                cnt = 1
        return cnt, False
    ln[cnt - 1] -= 1
    if ln[cnt - 1] == 0:
        cnt -= 1
        if cnt > 0:
            ln[cnt - 1] += 1
        else:
            col[0] = c
            ln[0] = 1
            cnt = 1
    else:
        col[cnt] = c
        ln[cnt] = 1
        cnt += 1
    return cnt, False


@njit(cache=True)
def _run(sc, ecol, elen, wcol, wlen, good, expl, words, cursor, target_n, target_t, fast,
         traj, net16):
    total_bits = words.size * 64
    recording = traj.size > 0
    cap = ecol.size
    n = sc[N]
    t = sc[T]
    m = sc[M]
    pos = sc[POS]
    c = sc[COL]
    ne = sc[NE]
    nw = sc[NW]
    se = sc[SE]
    sw = sc[SW]
    nred = sc[NRED]
    nblue = sc[NBLUE]
    pstart = sc[PSTART]
    gside = sc[GSIDE]
    glevel = sc[GLEVEL]
    a = sc[BA]
    b = sc[BB]
    active = sc[ACTIVE]
    nxt = sc[NEXT]
    nexpl = sc[NEXPL]
    ntraj = sc[NTRAJ]
    status = DONE
    while True:
        if active == 0:
            # room for the coming settle and the next emission
            if (ne + 2 >= cap or nw + 2 >= cap or nexpl + 2 >= expl.shape[0]
                    or max(se, sw) + 3 >= good.shape[0]):
                status = GROW
                break
            c = nxt
            nxt = -c
            pos = 0
            active = 1
            b = elen[ne - 1] + 1 if ne > 0 and ecol[ne - 1] == c else 1
            a = -(wlen[nw - 1] + 1) if nw > 0 and wcol[nw - 1] == c else -1
            if b > 1:
                gside = 0
                glevel = b
            elif a < -1:
                gside = 1
                glevel = -a
            else:
                gside = 0
                glevel = 1
            pstart = t
        if n >= target_n:
            status = DONE
            break
        if total_bits - cursor < _MIN_BITS:
            status = NEED_BITS
            break
        if fast:
            span = b - a
            k = _bit_length(span - 1)
            r = _read(words, cursor, k)
            cursor += k
            if r >= span:
                continue
            pos = b if r < -a else a
            t += -a * b
            m += 2 * c * pos
        else:
            if t >= target_t:
                status = DONE
                break
            if recording and ntraj + 64 >= traj.size * 8:
                status = GROW
                break
            settled = False
            while total_bits - cursor >= _MIN_BITS and t < target_t:
                if b - pos > 16 and pos - a > 16 and target_t - t >= 16 and not recording:
                    d = net16[_read(words, cursor, 16)]
                    cursor += 16
                    pos += d
                    t += 16
                    m += 2 * c * d
                    continue
                bit = (words[cursor >> 6] >> np.uint64(cursor & 63)) & np.uint64(1)
                cursor += 1
                step = 1 if bit else -1
                pos += step
                t += 1
                m += 2 * c * step
                if recording:
                    if c * step > 0:
                        traj[ntraj >> 3] |= np.uint8(1 << (ntraj & 7))
                    ntraj += 1
                if pos == a or pos == b:
                    settled = True
                    break
                if recording and ntraj + 64 >= traj.size * 8:
                    break
            if not settled:
                continue
        # settle the walker at pos
        if pos > 0:
            ne, explored = _settle_side(ecol, elen, ne, pos, c, se)
            if explored:
                se += 1
            prev_se, prev_sw = se - explored, sw
        else:
            nw, explored = _settle_side(wcol, wlen, nw, -pos, c, sw)
            if explored:
                sw += 1
            prev_se, prev_sw = se, sw - explored
        if explored:
            expl[nexpl, 0] = n + 1
            expl[nexpl, 1] = t
            expl[nexpl, 2] = m
            expl[nexpl, 3] = pos
            expl[nexpl, 4] = prev_se
            expl[nexpl, 5] = prev_sw
            nexpl += 1
            m -= c * pos
            if c > 0:
                nblue += 1
            else:
                nred += 1
        elif c > 0:
            nblue += 1
            nred -= 1
        else:
            nred += 1
            nblue -= 1
        good[glevel, gside] += t - pstart
        n += 1
        active = 0
    sc[N] = n
    sc[T] = t
    sc[M] = m
    sc[POS] = pos
    sc[COL] = c
    sc[NE] = ne
    sc[NW] = nw
    sc[SE] = se
    sc[SW] = sw
    sc[NRED] = nred
    sc[NBLUE] = nblue
    sc[PSTART] = pstart
    sc[GSIDE] = gside
    sc[GLEVEL] = glevel
    sc[BA] = a
    sc[BB] = b
    sc[ACTIVE] = active
    sc[NEXT] = nxt
    sc[NEXPL] = nexpl
    sc[NTRAJ] = ntraj
    return status, cursor


class Engine:
    """Array-backed simulator; see the module docstring."""

    def __init__(self, seed: int, record_trajectory: bool = False, capacity: int = 64):
        self.rng = BitStream(seed)
        self.sc = np.zeros(NSCAL, dtype=np.int64)
        self.sc[NEXT] = BLUE
        self.ecol = np.zeros(capacity, dtype=np.int64)
        self.elen = np.zeros(capacity, dtype=np.int64)
        self.wcol = np.zeros(capacity, dtype=np.int64)
        self.wlen = np.zeros(capacity, dtype=np.int64)
        self.good = np.zeros((capacity, 2), dtype=np.int64)
        self.expl = np.zeros((capacity, 6), dtype=np.int64)
        self.traj = np.zeros(1 << 16 if record_trajectory else 0, dtype=np.uint8)

    # -- driving ---------------------------------------------------------
    def _grow(self) -> None:
        def bigger(arr):
            out = np.zeros((arr.shape[0] * 2,) + arr.shape[1:], dtype=arr.dtype)
            out[: arr.shape[0]] = arr
            return out
        self.ecol, self.elen = bigger(self.ecol), bigger(self.elen)
        self.wcol, self.wlen = bigger(self.wcol), bigger(self.wlen)
        self.good = bigger(self.good)
        self.expl = bigger(self.expl)
        if self.traj.size and self.sc[NTRAJ] + 64 >= self.traj.size * 8:
            self.traj = bigger(self.traj)

    def _drive(self, target_n: int, target_t: int, fast: bool) -> "Engine":
        if target_t > MICROSTEP_LIMIT:
            raise OverflowError("microstep budget exhausted")
        while True:
            self.rng.reserve()
            status, cursor = _run(self.sc, self.ecol, self.elen, self.wcol, self.wlen, self.good,
                                  self.expl, self.rng.words, self.rng.cursor, target_n, target_t,
                                  fast, self.traj, NET16)
            self.rng.cursor = int(cursor)
            if status == DONE:
                if self.sc[T] > MICROSTEP_LIMIT:
                    raise OverflowError("microstep budget exhausted")
                return self
            if status == GROW:
                self._grow()

    def run_until_particles(self, n: int, mode: str = "exact") -> "Engine":
        if n < self.particles:
            raise ValueError("target is behind the current particle count")
        return self._drive(n, MICROSTEP_LIMIT, mode == "fast")

    def run_until_microsteps(self, t: int) -> "Engine":
        if t < self.microsteps:
            raise ValueError("target is behind the current microstep count")
        return self._drive(2**62, t, False)

    # -- observables -----------------------------------------------------
    @property
    def particles(self) -> int:
        return int(self.sc[N])

    @property
    def microsteps(self) -> int:
        return int(self.sc[T])

    @property
    def martingale(self) -> int:
        return int(self.sc[M])

    @property
    def support_east(self) -> int:
        return int(self.sc[SE])

    @property
    def support_west(self) -> int:
        return int(self.sc[SW])

    @property
    def red(self) -> int:
        return int(self.sc[NRED])

    @property
    def blue(self) -> int:
        return int(self.sc[NBLUE])

    def coloring(self) -> SiteColoring:
        ne, nw = int(self.sc[NE]), int(self.sc[NW])
        east = [[int(self.ecol[i]), int(self.elen[i])] for i in range(ne)]
        west = [[int(self.wcol[i]), int(self.wlen[i])] for i in range(nw)]
        return SiteColoring(east, west)

    def east_runs(self) -> np.ndarray:
        return self.elen[: int(self.sc[NE])].copy()

    def west_runs(self) -> np.ndarray:
        return self.wlen[: int(self.sc[NW])].copy()

    def active_position(self) -> int:
        return int(self.sc[POS])

    def goodness(self) -> GoodnessCounters:
        """Counts including the microsteps of the walker still in flight."""
        g = GoodnessCounters()
        for level in np.nonzero(self.good.sum(axis=1))[0]:
            g.counts[int(level)] = [int(self.good[level, 0]), int(self.good[level, 1])]
        if self.sc[ACTIVE] and self.sc[T] > self.sc[PSTART]:
            g.side = "E" if self.sc[GSIDE] == 0 else "W"
            g.level = int(self.sc[GLEVEL])
            g.add(int(self.sc[T] - self.sc[PSTART]))
        return g

    def exploration_log(self) -> list[ExplorationRecord]:
        out = []
        for row in self.expl[: int(self.sc[NEXPL])]:
            p, t, pre, site, se, sw = (int(x) for x in row)
            out.append(ExplorationRecord(min(se, sw), se == sw, p, t, pre, site))
        return out

    def trajectory(self):
        from .trajectory import Trajectory
        n = int(self.sc[NTRAJ])
        bits = np.unpackbits(self.traj[: (n + 7) // 8], bitorder="little")[:n]
        rows = self.expl[: int(self.sc[NEXPL])]
        keep = rows[:, 1] <= n
        return Trajectory(increments=bits.astype(np.uint8),
                          exploration_steps=rows[keep, 1].copy(),
                          exploration_sites=rows[keep, 3].copy(),
                          exploration_colors=self._exploration_colors(rows[keep]))

    def _exploration_colors(self, rows) -> np.ndarray:
        # the exploring particle's index fixes its color: Blue on odd rounds
        return np.where(rows[:, 0] % 2 == 1, BLUE, RED).astype(np.int8)

    # -- persistence -----------------------------------------------------
    def get_state(self) -> dict:
        return {
            "scalars": [int(x) for x in self.sc],
            "east": [[int(c), int(n)] for c, n in zip(self.ecol[: self.sc[NE]], self.elen[: self.sc[NE]])],
            "west": [[int(c), int(n)] for c, n in zip(self.wcol[: self.sc[NW]], self.wlen[: self.sc[NW]])],
            "goodness": {str(i): [int(a), int(b)] for i, (a, b) in enumerate(self.good) if a or b},
            "explorations": [[int(x) for x in row] for row in self.expl[: self.sc[NEXPL]]],
            "rng": self.rng.get_state(),
            "recording": bool(self.traj.size),
            "trajectory_bits": bytes(self.traj[: (int(self.sc[NTRAJ]) + 7) // 8]).hex(),
        }

    @classmethod
    def from_state(cls, state: dict) -> "Engine":
        sc = state["scalars"]
        need = max(len(state["east"]), len(state["west"]), len(state["explorations"]),
                   max(sc[SE], sc[SW]) + 3, 32) * 2
        obj = cls(0, record_trajectory=state["recording"], capacity=need)
        obj.sc[:] = sc
        for i, (c, n) in enumerate(state["east"]):
            obj.ecol[i], obj.elen[i] = c, n
        for i, (c, n) in enumerate(state["west"]):
            obj.wcol[i], obj.wlen[i] = c, n
        for k, (a, b) in state["goodness"].items():
            obj.good[int(k)] = (a, b)
        for i, row in enumerate(state["explorations"]):
            obj.expl[i] = row
        if state["recording"]:
            raw = np.frombuffer(bytes.fromhex(state["trajectory_bits"]), dtype=np.uint8)
            size = max(1 << 16, 2 * raw.size + 64)
            obj.traj = np.zeros(size, dtype=np.uint8)
            obj.traj[: raw.size] = raw
        obj.rng = BitStream.from_state(state["rng"])
        return obj
