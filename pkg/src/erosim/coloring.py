"""Two-sided run-length encoded colorings of the integers around the origin.

Colors are small integers: ``BLUE = 1``, ``RED = -1`` and ``UNCOLORED = 0``,
so that the signed potential is just ``sum(x * color(x))``.  The origin is
never colored.  Each side is a list of ``[color, length]`` runs stored
outermost first, so the run touching the origin is the last entry and the
common inner-boundary updates are appends and pops.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum


class Color(IntEnum):
    RED = -1
    UNCOLORED = 0
    BLUE = 1


BLUE = int(Color.BLUE)
RED = int(Color.RED)
UNCOLORED = int(Color.UNCOLORED)


def color_name(c: int) -> str:
    return {BLUE: "B", RED: "R", UNCOLORED: "."}[c]


@dataclass
class RunLengthView:
    east_runs: tuple[int, ...]
    west_runs: tuple[int, ...]
    support_east: int
    support_west: int

    def suffix_support(self, side: str, k: int) -> int:
        """S(k): total length of runs k, k+1, ... (1-based, outermost first)."""
        runs = self.east_runs if side == "E" else self.west_runs
        return sum(runs[k - 1:])


@dataclass
class SiteColoring:
    east: list[list[int]] = field(default_factory=list)
    west: list[list[int]] = field(default_factory=list)

    @classmethod
    def from_sites(cls, east_sites, west_sites) -> "SiteColoring":
        """Build from colors of sites 1, 2, ... and -1, -2, ... (inner first)."""
        obj = cls()
        for side, sites in ((obj.east, east_sites), (obj.west, west_sites)):
            for c in reversed(list(sites)):
                c = int(c)
                if c == UNCOLORED:
                    raise ValueError("colored region must be contiguous from the origin")
                if side and side[-1][0] == c:
                    side[-1][1] += 1
                else:
                    side.append([c, 1])
        return obj

    @classmethod
    def from_string(cls, west: str, east: str) -> "SiteColoring":
        """``west`` lists sites -1, -2, ...; ``east`` lists 1, 2, ...; letters B/R."""
        code = {"B": BLUE, "R": RED}
        return cls.from_sites([code[ch] for ch in east], [code[ch] for ch in west])

    def copy(self) -> "SiteColoring":
        return SiteColoring([r[:] for r in self.east], [r[:] for r in self.west])

    @property
    def support_east(self) -> int:
        return sum(r[1] for r in self.east)

    @property
    def support_west(self) -> int:
        return sum(r[1] for r in self.west)

    @property
    def support(self) -> int:
        return self.support_east + self.support_west

    def side_sites(self, side: str) -> list[int]:
        """Colors of sites 1..S on one side, innermost first."""
        runs = self.east if side == "E" else self.west
        out: list[int] = []
        for c, n in reversed(runs):
            out.extend([c] * n)
        return out

    def color_at(self, x: int) -> int:
        if x == 0:
            return UNCOLORED
        sites = self.side_sites("E" if x > 0 else "W")
        d = abs(x)
        return sites[d - 1] if d <= len(sites) else UNCOLORED

    def count(self, color: int) -> int:
        return sum(n for c, n in self.east + self.west if c == color)

    def signed_sum(self) -> int:
        """Sum of x * color(x) over colored sites."""
        total = 0
        for runs, sign in ((self.east, 1), (self.west, -1)):
            pos = 0
            for c, n in reversed(runs):
                # sites pos+1 .. pos+n
                total += sign * c * (n * (2 * pos + n + 1) // 2)
                pos += n
        return total

    def stop_distance(self, side: str, color: int) -> int:
        """Distance from the origin of the first stopping site on ``side``."""
        runs = self.east if side == "E" else self.west
        if runs and runs[-1][0] == color:
            return runs[-1][1] + 1
        return 1

    def boundaries(self, color: int) -> tuple[int, int]:
        return -self.stop_distance("W", color), self.stop_distance("E", color)

    def settle(self, site: int, color: int) -> bool:
        """Color ``site`` with ``color``; returns True for an exploration.

        ``site`` must be a stopping site for a walker of that color, that is the
        first site on its side that is uncolored or of another color.
        """
        runs = self.east if site > 0 else self.west
        d = abs(site)
        support = sum(r[1] for r in runs)
        if d == support + 1:
            if runs and len(runs) == 1 and runs[0][0] == color:
                runs[0][1] += 1
            elif not runs:
                runs.append([color, 1])
            else:
                raise ValueError(f"site {site} is not a stopping site")
            return True
        inner = runs[-1] if runs else None
        if inner is not None and inner[0] == color:
            if d != inner[1] + 1:
                raise ValueError(f"site {site} is not a stopping site")
            inner[1] += 1
            nxt = runs[-2]
            nxt[1] -= 1
            if nxt[1] == 0:
                del runs[-2]
                if len(runs) >= 2 and runs[-2][0] == color:
                    runs[-2][1] += runs[-1][1]
                    runs.pop()
            return False
        if d != 1:
            raise ValueError(f"site {site} is not a stopping site")
        inner[1] -= 1
        if inner[1] == 0:
            runs.pop()
        if runs and runs[-1][0] == color:
            runs[-1][1] += 1
        else:
            runs.append([color, 1])
        return False

    def run_lengths(self, k: int | None = None) -> RunLengthView:
        east = tuple(n for _, n in self.east)
        west = tuple(n for _, n in self.west)
        if k is not None:
            east, west = east[:k], west[:k]
        return RunLengthView(east, west, self.support_east, self.support_west)

    def is_monochromatic_opposite(self) -> bool:
        """Each side a single run (or empty), and the two colors differ."""
        if len(self.east) > 1 or len(self.west) > 1:
            return False
        if self.east and self.west:
            return self.east[0][0] != self.west[0][0]
        return True

    def __str__(self) -> str:
        west = "".join(color_name(c) for c in reversed(self.side_sites("W")))
        east = "".join(color_name(c) for c in self.side_sites("E"))
        return f"{west}|0|{east}"


def run_lengths(coloring: SiteColoring, k: int | None = None) -> RunLengthView:
    return coloring.run_lengths(k)


def stopping_set_boundaries(coloring: SiteColoring, walker_color: int) -> tuple[int, int]:
    if walker_color not in (BLUE, RED):
        raise ValueError("walker color must be red or blue")
    return coloring.boundaries(walker_color)
