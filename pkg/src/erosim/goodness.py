"""Counters of L-good microsteps.

A particle is labelled by the run of its own color touching the origin at
emission: if that run has length L-1 on the east side the particle is
(E, L)-good, on the west side (W, L)-good.  When neither side starts with the
particle's color the run has length 0 and the particle counts as (E, 1)-good.
Every microstep inherits the label of the particle taking it, so the counts
over all L add up to the total number of microsteps.
"""

from __future__ import annotations

from dataclasses import dataclass, field


def goodness_label(west_boundary: int, east_boundary: int) -> tuple[str, int]:
    """Label from the stopping boundaries (a < 0 < b) seen at emission."""
    if east_boundary > 1:
        return "E", east_boundary
    if west_boundary < -1:
        return "W", -west_boundary
    return "E", 1


@dataclass
class GoodnessCounters:
    counts: dict[int, list[int]] = field(default_factory=dict)
    side: str = "E"
    level: int = 1

    def start_particle(self, west_boundary: int, east_boundary: int) -> None:
        self.side, self.level = goodness_label(west_boundary, east_boundary)

    def add(self, steps: int = 1) -> None:
        pair = self.counts.setdefault(self.level, [0, 0])
        pair[0 if self.side == "E" else 1] += steps

    def total(self) -> int:
        return sum(e + w for e, w in self.counts.values())

    def good(self, level: int) -> int:
        e, w = self.counts.get(level, (0, 0))
        return e + w

    def copy(self) -> "GoodnessCounters":
        return GoodnessCounters({k: v[:] for k, v in self.counts.items()}, self.side, self.level)


def record_goodness(counters: GoodnessCounters, west_boundary: int, east_boundary: int,
                    duration: int) -> GoodnessCounters:
    out = counters.copy()
    out.start_particle(west_boundary, east_boundary)
    out.add(duration)
    return out
