"""Reference simulator for competitive erosion on the integer line.

Blue and Red walkers are emitted alternately at the origin, Blue first.  A
walker performs a simple symmetric random walk and settles on the first
nonzero site that is uncolored (an exploration) or of the other color (a
conversion).  The origin itself is transparent: walkers pass through it and it
is never colored.

This module favours clarity over speed and keeps every observable up to date
(layers, goodness counters, exploration log, event sink).  The compiled engine
in :mod:`erosim.engine` reproduces it bit for bit on the same random stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .coloring import BLUE, RED, SiteColoring
from .goodness import GoodnessCounters
from .layers import LayerStack
from .rng import BitStream

MICROSTEP_LIMIT = 2**62


@dataclass
class ActiveParticle:
    position: int
    color: int


@dataclass(frozen=True)
class Moved:
    position: int


@dataclass(frozen=True)
class SettledConversion:
    site: int
    color: int


@dataclass(frozen=True)
class SettledExploration:
    site: int
    color: int


@dataclass(frozen=True)
class Emitted:
    color: int


MicrostepEvent = Moved | SettledConversion | SettledExploration | Emitted


@dataclass(frozen=True)
class ExplorationRecord:
    level: int            # k: supports were (k, k) or {k, k+1} before the event
    symmetric_before: bool  # True for (k,k) -> asymmetric, False for asymmetric -> (k+1,k+1)
    particle_index: int   # 1-based index of the exploring particle
    microstep_index: int  # microstep at which the new site was reached
    martingale_before_adjustment: int
    site: int

    def expected_level_value(self) -> int:
        k = self.level
        return (k + 1) * (k + 2) if self.symmetric_before else (k + 2) ** 2 - 1


class ErosionState:
    def __init__(self, seed: int = 0, coloring: SiteColoring | None = None,
                 next_color: int = BLUE, track_layers: bool = True):
        self.coloring = coloring.copy() if coloring is not None else SiteColoring()
        self.active: Optional[ActiveParticle] = None
        self.particles = 0
        self.microsteps = 0
        self.red = self.coloring.count(RED)
        self.blue = self.coloring.count(BLUE)
        self.martingale = self.coloring.signed_sum()
        self.rng = BitStream(seed)
        self.next_color = next_color
        self.track_layers = track_layers and coloring is None
        self.layers = LayerStack()
        self.goodness = GoodnessCounters()
        self.exploration_log: list[ExplorationRecord] = []
        self.sink: Optional[Callable[[MicrostepEvent, "ErosionState"], None]] = None
        self._bounds = (0, 0)

    @property
    def support_east(self) -> int:
        return self.coloring.support_east

    @property
    def support_west(self) -> int:
        return self.coloring.support_west

    def _send(self, event) -> None:
        if self.sink is not None:
            self.sink(event, self)

    def emit(self) -> Emitted:
        if self.active is not None:
            raise RuntimeError("a particle is already active")
        c = self.next_color
        self.next_color = -c
        self.active = ActiveParticle(0, c)
        self._bounds = self.coloring.boundaries(c)
        self.goodness.start_particle(*self._bounds)
        ev = Emitted(c)
        self._send(ev)
        return ev

    def _settle(self, site: int, color: int):
        se, sw = self.coloring.support_east, self.coloring.support_west
        exploration = self.coloring.settle(site, color)
        if exploration:
            pre = self.martingale
            self.martingale -= color * site
            sym = se == sw
            self.exploration_log.append(ExplorationRecord(
                level=min(se, sw), symmetric_before=sym,
                particle_index=self.particles + 1, microstep_index=self.microsteps,
                martingale_before_adjustment=pre, site=site))
            if color == BLUE:
                self.blue += 1
            else:
                self.red += 1
            ev = SettledExploration(site, color)
        else:
            if color == BLUE:
                self.blue += 1
                self.red -= 1
            else:
                self.red += 1
                self.blue -= 1
            ev = SettledConversion(site, color)
        if self.track_layers:
            self.layers.apply_settle(site, color, exploration)
        self.particles += 1
        self.active = None
        self._send(ev)
        return ev

    def microstep(self, step: int | None = None):
        """Advance the active walker by one lattice step (emitting one if needed).

        Returns the settle event if the walker stopped, else ``Moved``.  After a
        settle the next particle is emitted immediately.
        """
        if self.active is None:
            self.emit()
        if self.microsteps >= MICROSTEP_LIMIT:
            raise OverflowError("microstep budget exhausted")
        if step is None:
            step = 1 if self.rng.bit() else -1
        p = self.active
        p.position += step
        self.microsteps += 1
        self.goodness.add(1)
        self.martingale += 2 * p.color * step
        a, b = self._bounds
        if p.position == a or p.position == b:
            ev = self._settle(p.position, p.color)
            self.emit()
            return ev
        ev = Moved(p.position)
        self._send(ev)
        return ev

    def fast_settle(self):
        """Place the fresh walker by the gambler's-ruin law of its exit site.

        The configuration evolves with the exact law, but the walk itself is
        skipped and ``microsteps`` grows by the expected duration |a| * b.
        """
        if self.active is None:
            self.emit()
        if self.active.position != 0:
            raise RuntimeError("fast_settle needs a freshly emitted particle")
        a, b = self._bounds
        c = self.active.color
        east = self.rng.below(b - a) < -a
        site = b if east else a
        duration = -a * b
        if self.microsteps + duration > MICROSTEP_LIMIT:
            raise OverflowError("microstep budget exhausted")
        self.microsteps += duration
        self.goodness.add(duration)
        self.martingale += 2 * c * site
        self.active.position = site
        ev = self._settle(site, c)
        self.emit()
        return ev

    def run_until_particles(self, n: int, mode: str = "exact") -> "ErosionState":
        if n < self.particles:
            raise ValueError("target is behind the current particle count")
        while self.particles < n:
            if mode == "fast":
                self.fast_settle()
            else:
                self.microstep()
        return self

    def run_until_microsteps(self, t: int) -> "ErosionState":
        if t < self.microsteps:
            raise ValueError("target is behind the current microstep count")
        while self.microsteps < t:
            self.microstep()
        return self


def new_state(seed: int) -> ErosionState:
    return ErosionState(seed)


def stopping_set_boundaries(coloring: SiteColoring, walker_color: int) -> tuple[int, int]:
    return coloring.boundaries(walker_color)


def martingale_value(state: ErosionState) -> int:
    """Signed sum of colored positions plus twice the signed walker position."""
    m = state.coloring.signed_sum()
    if state.active is not None:
        m += 2 * state.active.color * state.active.position
    return m
