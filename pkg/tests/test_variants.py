import math
import random

import numpy as np
import pytest

from erosim.coloring import BLUE
from erosim.engine import Engine
from erosim.rng import BitStream, trial_seed
from erosim.variants import (CYCLIC, MUTUAL, Alternating, ColoredSetTooLarge, ColorRule, IidUniform,
                             PeriodicPattern, geometric_checkpoints, loglog_slope,
                             run_variant_line, run_zd, slope_report)


def _engine_sites(eng):
    c = eng.coloring()
    # runs are stored outermost first
    east = [col for col, n in reversed(c.east) for _ in range(n)]
    west = [col for col, n in reversed(c.west) for _ in range(n)]
    return east, west


@pytest.mark.parametrize("i", range(5))
def test_two_color_line_reproduces_fast_engine(i):
    seed = trial_seed(40, i)
    n = 20000
    coloring, _ = run_variant_line(ColorRule(2), n, seed)
    east, west = _engine_sites(Engine(seed).run_until_particles(n, "fast"))
    to_color = lambda idx: BLUE if idx == 0 else -BLUE
    assert [to_color(v) for v in coloring.east] == east
    assert [to_color(v) for v in coloring.west] == west
    assert coloring.origin is None


def test_cyclic_equals_mutual_for_two_colors():
    for i in range(3):
        a, _ = run_variant_line(ColorRule(2, antagonism=MUTUAL), 5000, i)
        b, sb = run_variant_line(ColorRule(2, antagonism=CYCLIC), 5000, i)
        assert np.array_equal(a.east, b.east) and np.array_equal(a.west, b.west)
        assert sb.cyclic_violations == 0


@pytest.mark.parametrize("origin_stops", [False, True])
def test_single_color_colors_one_site_per_particle(origin_stops):
    coloring, st = run_variant_line(ColorRule(1), 3000, 5, origin_stops=origin_stops)
    assert np.array_equal(st.colored, st.checkpoints)
    assert coloring.colored_sites == 3000
    assert abs(coloring.east.size - coloring.west.size) <= 3000
    assert (coloring.origin is not None) == origin_stops


def _slow_line(rule, n, rng, origin_stops):
    """Unit-step walkers on a dict of sites."""
    sites = {}
    palette = rule.palette
    for j in range(n):
        if isinstance(rule.schedule, IidUniform):
            c = rng.randrange(palette)
        else:
            pat = rule.pattern_array()
            c = int(pat[j % pat.size])
        x = 0
        first = True
        while True:
            if not first or origin_stops:
                if x != 0 or (origin_stops and not first):
                    if rule.stops(c, sites.get(x)):
                        sites[x] = c
                        break
            x += rng.choice((1, -1))
            first = False
    return len(sites)


@pytest.mark.parametrize("rule,origin_stops", [
    (ColorRule(3, antagonism=CYCLIC), False),
    (ColorRule(3, IidUniform()), False),
    (ColorRule(2, PeriodicPattern((0, 0, 1))), True),
])
def test_line_kernel_matches_unit_step_walkers(rule, origin_stops):
    n, trials = 60, 300
    rng = random.Random(7)
    slow = np.array([_slow_line(rule, n, rng, origin_stops) for _ in range(trials)], float)
    fast = np.array([run_variant_line(rule, n, trial_seed(9, i), origin_stops)[1].colored[-1]
                     for i in range(trials)], float)
    se = math.sqrt(slow.var(ddof=1) / trials + fast.var(ddof=1) / trials)
    assert abs(slow.mean() - fast.mean()) <= 4 * se


def _slow_zd(d, n, seed):
    """Same bit consumption as the lattice kernel, on a dict."""
    rng = BitStream(seed)
    k = (2 * d - 1).bit_length()
    sites = {}
    origin = (0,) * d
    for j in range(n):
        color = j % 2
        pos = [0] * d
        while True:
            r = rng.bits(k)
            if r >= 2 * d:
                continue
            pos[r >> 1] += 1 if r & 1 else -1
            p = tuple(pos)
            if p != origin and sites.get(p) != color:
                sites[p] = color
                break
    return sites


@pytest.mark.parametrize("d", [2, 3])
def test_lattice_kernel_matches_dict_replay(d):
    for i in range(3):
        seed = trial_seed(50 + d, i)
        coloring, stats = run_zd(d, 400, seed)
        assert coloring.sites == _slow_zd(d, 400, seed)
        assert stats.colored[-1] == len(coloring) and stats.cap_hits == 0


def test_lattice_slice_rows():
    coloring, _, rows = run_zd(2, 500, 3, slice_output=True)
    assert len(rows) == len(coloring)
    assert all(coloring.sites[(x, y)] == c for x, y, c in rows)
    _, _, rows3 = run_zd(3, 500, 3, slice_output=True)
    assert all(c in (0, 1) for _, _, c in rows3)


def test_lattice_grid_limit():
    with pytest.raises(ColoredSetTooLarge):
        run_zd(2, 10 ** 5, 1, max_cells=300)


def test_step_cap_drops_walkers():
    _, stats = run_zd(2, 200, 1, step_cap=3)
    assert stats.cap_hits > 0


def test_rule_validation():
    with pytest.raises(ValueError):
        ColorRule(0)
    with pytest.raises(ValueError):
        ColorRule(2, antagonism="other")
    with pytest.raises(ValueError):
        ColorRule(2, PeriodicPattern((0, 2)))
    with pytest.raises(ValueError):
        PeriodicPattern(())
    with pytest.raises(ValueError):
        run_variant_line(ColorRule(2), 0, 0)
    with pytest.raises(ValueError):
        run_zd(4, 10, 0)


def test_stopping_rules():
    mutual, cyclic = ColorRule(3), ColorRule(3, antagonism=CYCLIC)
    assert mutual.stops(0, None) and cyclic.stops(0, None)
    assert mutual.stops(0, 1) and mutual.stops(0, 2) and not mutual.stops(0, 0)
    assert cyclic.stops(0, 2) and not cyclic.stops(0, 1) and not cyclic.stops(0, 0)


def test_iid_colors_are_balanced():
    coloring, _ = run_variant_line(ColorRule(3, IidUniform()), 30000, 2)
    assert coloring.colored_sites > 0
    assert set(np.unique(np.concatenate([coloring.east, coloring.west]))) <= {0, 1, 2}


def test_geometric_checkpoints():
    assert geometric_checkpoints(100, per_decade=2) == [1, 3, 10, 32, 100]
    assert geometric_checkpoints(1000, per_decade=1, start=10) == [10, 100, 1000]


def test_slopes():
    ns = np.array([10, 100, 1000, 10000])
    assert loglog_slope(ns, 3 * ns ** 0.5) == pytest.approx(0.5)
    rep = slope_report([(ns, ns ** 0.25), (ns, 2 * ns ** 0.35)], n_min=10)
    assert rep.slope == pytest.approx(0.3)
    assert rep.ci_low < 0.3 < rep.ci_high and rep.runs == 2
