"""Nested layers of the erosion configuration.

A layer is a pair of intervals ``[1, east_len]`` and ``[-west_len, -1]``; the
east part has ``east_color`` and the west part the opposite color.  Layers are
nested, outermost first, and the color of a site is the color given by the
deepest layer covering it.  The stack is maintained online from settle events
and mirrors the order in which overwrites happened.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .coloring import SiteColoring


class LayerInvariantError(AssertionError):
    pass


@dataclass
class LayerStack:
    layers: list[list[int]] = field(default_factory=list)  # [east_len, west_len, east_color]

    def copy(self) -> "LayerStack":
        return LayerStack([l[:] for l in self.layers])

    def __len__(self) -> int:
        return len(self.layers)

    def _deepest_covering(self, side: int, d: int) -> int:
        j = len(self.layers) - 1
        while self.layers[j][side] < d:
            j -= 1
        return j

    def _drop_if_covered(self, j: int) -> None:
        inner, outer = self.layers[j + 1], self.layers[j]
        if inner[0] == outer[0] and inner[1] == outer[1]:
            # layer j is hidden entirely; its neighbours share a color and fuse
            if j == 0:
                del self.layers[0]
            else:
                del self.layers[j:j + 2]

    def apply_settle(self, site: int, color: int, exploration: bool) -> None:
        side = 0 if site > 0 else 1
        d = abs(site)
        east_color = color if site > 0 else -color
        if exploration:
            if not self.layers:
                self.layers.append([0, 0, east_color])
            if len(self.layers) != 1:
                raise LayerInvariantError(f"exploration with {len(self.layers)} layers")
            if self.layers[0][2] != east_color or self.layers[0][side] != d - 1:
                raise LayerInvariantError("exploration does not extend the outer layer")
            self.layers[0][side] = d
            return
        j = self._deepest_covering(side, d)
        if j == len(self.layers) - 1:
            if d != 1:
                raise LayerInvariantError(f"conversion at {site} below the innermost layer")
            fresh = [0, 0, east_color]
            fresh[side] = 1
            self.layers.append(fresh)
        else:
            inner = self.layers[j + 1]
            if inner[2] != east_color or inner[side] != d - 1:
                raise LayerInvariantError(f"conversion at {site} does not extend layer {j + 2}")
            inner[side] = d
        self._drop_if_covered(j)

    def modified_runs(self) -> tuple[list[int], list[int]]:
        east, west = [], []
        for j, (le, lw, _) in enumerate(self.layers):
            ne = self.layers[j + 1][0] if j + 1 < len(self.layers) else 0
            nw = self.layers[j + 1][1] if j + 1 < len(self.layers) else 0
            east.append(le - ne)
            west.append(lw - nw)
        return east, west

    def site_color(self, x: int) -> int:
        side = 0 if x > 0 else 1
        d = abs(x)
        for le_lw_c in reversed(self.layers):
            if le_lw_c[side] >= d:
                return le_lw_c[2] if x > 0 else -le_lw_c[2]
        return 0

    def structural_violations(self, coloring: SiteColoring) -> list[str]:
        """Checks that hold at every settle time of the erosion chain."""
        out = []
        L = self.layers
        if L:
            if L[0][0] != coloring.support_east or L[0][1] != coloring.support_west:
                out.append("outer layer does not span the support")
        elif coloring.support:
            out.append("empty stack for a colored configuration")
        for j, (le, lw, c) in enumerate(L):
            if abs(le - lw) > 1:
                out.append(f"layer {j + 1}: |L_E-L_W| = {abs(le - lw)}")
            if c not in (1, -1):
                out.append(f"layer {j + 1}: bad color {c}")
            if j + 1 < len(L):
                nle, nlw, nc = L[j + 1]
                if nle > le or nlw > lw:
                    out.append(f"layer {j + 2} not nested in layer {j + 1}")
                if nc == c:
                    out.append(f"layers {j + 1},{j + 2} share a color")
                if nle == le and nlw == lw:
                    out.append(f"layer {j + 1} is empty")
        em, wm = self.modified_runs()
        for j, (a, b) in enumerate(zip(em, wm)):
            if abs(a - b) > 2:
                out.append(f"layer {j + 1}: |E_m-W_m| = {abs(a - b)}")
        for side, sites, sign in (("E", coloring.side_sites("E"), 1), ("W", coloring.side_sites("W"), -1)):
            for d, c in enumerate(sites, start=1):
                if self.site_color(sign * d) != c:
                    out.append(f"layer colors disagree with site {sign * d}")
                    break
        return out

    def run_equality_violation(self, coloring: SiteColoring) -> str | None:
        """Nonzero modified runs should list the plain runs in order."""
        em, wm = self.modified_runs()
        east = [n for _, n in coloring.east]
        west = [n for _, n in coloring.west]
        nz_e = [x for x in em if x]
        nz_w = [x for x in wm if x]
        if nz_e != east or nz_w != west:
            return f"modified {nz_e}/{nz_w} vs plain {east}/{west}"
        return None

    def max_modified_gap(self) -> int:
        em, wm = self.modified_runs()
        return max((abs(a - b) for a, b in zip(em, wm)), default=0)


def update_layers(stack: LayerStack, site: int, color: int, exploration: bool) -> LayerStack:
    out = stack.copy()
    out.apply_settle(site, color, exploration)
    return out


def layering_exists(coloring: SiteColoring) -> bool:
    """Whether any alternating layer sequence reproduces the plain runs.

    Searches all ways of pairing east runs with west runs (allowing a zero
    run on one side of a layer) subject to opposite colors within a layer,
    alternating colors between layers and ``|L_E - L_W| <= 1``.
    """
    east, west = coloring.east, coloring.west
    se, sw = coloring.support_east, coloring.support_west
    seen = set()
    todo = [(0, 0, c, se, sw) for c in (1, -1)]
    while todo:
        st = todo.pop()
        if st in seen:
            continue
        seen.add(st)
        i, j, c, le, lw = st
        if abs(le - lw) > 1:
            continue
        if i == len(east) and j == len(west):
            return True
        for di, dj in ((1, 1), (1, 0), (0, 1)):
            if di and (i >= len(east) or east[i][0] != c):
                continue
            if dj and (j >= len(west) or west[j][0] != -c):
                continue
            todo.append((i + di, j + dj, -c,
                         le - (east[i][1] if di else 0),
                         lw - (west[j][1] if dj else 0)))
    return False
