"""Invariants of the erosion chain on arbitrary step sequences."""

import numpy as np
from hypothesis import given, settings, strategies as st

from erosim.acceptance import CombinatorialAudit
from erosim.coloring import BLUE, RED, SiteColoring
from erosim.engine import Engine
from erosim.state import ErosionState, new_state

steps = st.lists(st.sampled_from((1, -1)), min_size=1, max_size=600)
colorings = st.tuples(st.lists(st.sampled_from((BLUE, RED)), max_size=12),
                      st.lists(st.sampled_from((BLUE, RED)), max_size=12))


@given(steps)
def test_chain_invariants_on_forced_histories(seq):
    st_ = new_state(0)
    audit = CombinatorialAudit()
    st_.sink = audit
    for s in seq:
        st_.microstep(s)
    bad = {k: v for k, v in audit.violations.items() if v and k != "layer run equality"}
    assert not bad, audit.examples
    assert st_.microsteps == len(seq)
    assert st_.martingale == st_.coloring.signed_sum() + (
        2 * st_.active.color * st_.active.position if st_.active else 0)


@given(st.integers(0, 2 ** 63), st.integers(1, 400))
@settings(max_examples=25)
def test_engine_reproducible(seed, n):
    a = Engine(seed).run_until_particles(n)
    b = Engine(seed).run_until_particles(n)
    assert a.get_state() == b.get_state()
    assert a.support_east + a.support_west <= n
    assert a.microsteps >= n


@given(colorings)
def test_site_round_trip(sides):
    east, west = sides
    c = SiteColoring.from_sites(east, west)
    assert c.side_sites("E") == east and c.side_sites("W") == west
    assert c.support == len(east) + len(west)
    assert c.signed_sum() == sum((i + 1) * v for i, v in enumerate(east)) - \
        sum((i + 1) * v for i, v in enumerate(west))
    # adjacent runs always differ in color
    for runs in (c.east, c.west):
        assert all(a[0] != b[0] for a, b in zip(runs, runs[1:]))
        assert all(n > 0 for _, n in runs)


@given(colorings, st.sampled_from((BLUE, RED)))
def test_boundaries_are_first_stopping_sites(sides, color):
    east, west = sides
    c = SiteColoring.from_sites(east, west)
    a, b = c.boundaries(color)
    assert a < 0 < b
    assert all(c.color_at(x) == color for x in range(1, b))
    assert all(c.color_at(x) == color for x in range(a + 1, 0))
    assert c.color_at(b) != color and c.color_at(a) != color


@given(colorings, st.sampled_from((BLUE, RED)), st.data())
def test_settle_changes_one_site(sides, color, data):
    east, west = sides
    c = SiteColoring.from_sites(east, west)
    a, b = c.boundaries(color)
    site = data.draw(st.sampled_from((a, b)))
    before = {x: c.color_at(x) for x in range(a - 1, b + 2)}
    explored = c.settle(site, color)
    assert explored == (before[site] == 0)
    for x, v in before.items():
        assert c.color_at(x) == (color if x == site else v)


@given(st.integers(0, 2 ** 32), st.integers(50, 2000))
@settings(max_examples=20)
def test_fast_mode_keeps_invariants(seed, n):
    st_ = ErosionState(seed)
    audit = CombinatorialAudit()
    st_.sink = audit
    st_.run_until_particles(n, "fast")
    for check in ("support balance", "color balance", "color parity",
                  "monochromatic at exploration", "layer structure"):
        assert audit.violations[check] == 0, audit.examples.get(check)
    assert np.isclose(st_.martingale, st_.coloring.signed_sum())
