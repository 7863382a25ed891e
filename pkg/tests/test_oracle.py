import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from erosim.oracle import (DiscretePath, alternating_extrema, hitting_functional, sample_limit,
                           sample_one, sample_paths, strictly_ordered)
from erosim.rng import trial_seed


def lin(slope):
    return lambda t: slope * t


def test_linear_paths():
    assert hitting_functional(lin(1), lin(1))[0] == pytest.approx(0.5, abs=1e-9)
    assert hitting_functional(lin(1), lin(2))[0] == pytest.approx(2 / 3, abs=1e-9)
    assert hitting_functional(lin(1), None)[0] == pytest.approx(1.0, abs=1e-9)
    assert hitting_functional(lin(1), lin(0))[0] == 0.0


def test_piecewise_example():
    g = lambda t: np.interp(t, [0, .2, .5, .7, 1], [0, 1, .3, .8, .6])
    f = lambda t: np.interp(t, [0, .1, .15, 1], [0, 1, 2, 2])
    s = alternating_extrema(f, g, 2, grid=1 << 14)
    assert s.carrier == "g"
    assert s.x == pytest.approx([1.0, 0.7, 0.5], abs=1e-3)


def test_scale_equivariance():
    g = lambda t: np.interp(t, [0, .2, .5, .7, 1], [0, 1, .3, .8, .6])
    f = lambda t: np.interp(t, [0, .1, .15, 1], [0, 1, 2, 2])
    a = alternating_extrema(f, g, 2, grid=1 << 14)
    b = alternating_extrema(lambda t: 2 * f(t), lambda t: 2 * g(t), 2, grid=1 << 14)
    assert b.x == pytest.approx([2 * v for v in a.x], abs=2e-3)
    assert b.carrier == a.carrier


def test_lattice_example():
    f = DiscretePath(np.array([0, 1, 2, 1, 2, 3, 2, 1, 0]))
    g = DiscretePath(np.array([0, -1, 0, 1, 2, 1, 0, -1, 0]))
    # level 1: 1 + 1 <= 8; level 2: 2 + 4 <= 8; level 3: 5 + never
    x1, tf, tg = hitting_functional(f, g)
    assert x1 == pytest.approx(2 / math.sqrt(8))
    assert (tf, tg) == (2 / 8, 4 / 8)


def _brute(f, g, k):
    """Direct loops over the definitions on lattice paths."""
    m = f.steps
    fv, gv = f.values, g.values

    def hit(v, a):
        for i, y in enumerate(v):
            if abs(y) >= a:
                return i
        return None

    a = 0
    while True:
        tf, tg = hit(fv, a + 1), hit(gv, a + 1)
        if tf is None or tg is None or tf + tg > m:
            break
        a += 1
    if a == 0:
        return None
    tf, tg = hit(fv, a), hit(gv, a)
    fits_g = all(abs(y) <= a for y in gv[tg: m - tf + 1])
    fits_f = all(abs(y) <= a for y in fv[tf: m - tg + 1])
    out = {}
    for name, v, start, end in (("g", gv, tg, m - tf), ("f", fv, tf, m - tg)):
        v = v * (1 if v[start] > 0 else -1)
        ext, i = [a], start
        for j in range(1, k + 1):
            window = list(v[i: end + 1])
            target = min(window) if j % 2 == 1 else max(window)
            i += window.index(target)
            ext.append(int(target))
        out[name] = ext
    return a, fits_g, fits_f, out


def test_kernel_and_reference_agree_with_brute_force():
    k = 3
    disagreements = 0
    for i in range(300):
        seed = trial_seed(8, i)
        m = 64 + 37 * (i % 7)
        f, g = sample_paths(seed, m)
        brute = _brute(f, g, k)
        ref = alternating_extrema(f, g, k)
        ext, meta = sample_one(seed, m, k)
        if brute is None:
            assert meta[0] == 0 and ref.level == 0
            continue
        a, fits_g, fits_f, exts = brute
        assert meta[0] == a == ref.level
        assert (meta[3], meta[4]) == (round(ref.hit_time_f * m), round(ref.hit_time_g * m))
        if fits_g != fits_f:
            carrier = "g" if fits_g else "f"
            assert ref.carrier == carrier and bool(meta[1]) == (carrier == "g")
            assert not meta[2]
        else:
            assert meta[2]
        carrier = "g" if meta[1] else "f"
        assert ext.tolist() == exts[carrier]
        x = [exts[carrier][0]] + [abs(exts[carrier][j] - exts[carrier][j - 1]) for j in range(1, k + 1)]
        if ref.carrier == carrier:
            assert ref.x == pytest.approx([v / math.sqrt(m) for v in x])
        else:
            disagreements += 1
    assert disagreements == 0


def test_batch_matches_single_samples():
    batch = sample_limit(20, 5000, 2, 3)
    for i in range(20):
        ext, meta = sample_one(trial_seed(3, i), 5000, 2)
        assert batch.level[i] == meta[0] and batch.carrier_g[i] == bool(meta[1])
        assert batch.x[i, 0] * math.sqrt(5000) == pytest.approx(ext[0])


def test_carrier_event_has_probability_half():
    b = sample_limit(10 ** 5, 10 ** 4, 1, 12)
    assert (b.level > 0).all()
    p = b.carrier_g.mean()
    assert abs(p - 0.5) <= 3 * math.sqrt(0.25 / len(b))


def test_level_failures_rare_at_small_horizon():
    b = sample_limit(10 ** 5, 100, 1, 13)
    rate = np.mean(b.level == 0)
    print(f"x1 = 0 in {rate:.1e} of samples at m=100")
    assert rate < 1e-4


def test_median_stable_under_refinement():
    a = np.median(sample_limit(50000, 10 ** 5, 0, 21).x[:, 0])
    b = np.median(sample_limit(50000, 4 * 10 ** 5, 0, 22).x[:, 0])
    assert abs(a / b - 1) < 0.01


def test_tie_rate_at_one_million_steps():
    b = sample_limit(10 ** 4, 10 ** 6, 1, 31)
    rate = b.tie.mean()
    print(f"tie rate at m=1e6, k=1: {rate:.2e}")
    assert rate < 1e-3


def test_layer_ordering():
    coarse = sample_limit(20000, 10 ** 4, 3, 40)
    b = sample_limit(20000, 10 ** 5, 3, 41)
    x = b.x
    literal = np.mean(x[:, 0] > x[:, 1])
    bad_coarse = 1 - np.mean([strictly_ordered(r) for r in coarse.x])
    bad = 1 - np.mean([strictly_ordered(r) for r in x])
    print(f"X1 > X2 in {literal:.3f} of samples; corrected ordering violated in "
          f"{bad_coarse:.4f} (m=1e4) and {bad:.4f} (m=1e5)")
    # the first gap can exceed the level when the first minimum is negative
    assert literal < 0.99
    # violations of the corrected ordering are lattice coincidences that thin out
    assert bad < 0.1 and bad < bad_coarse / 1.5
    assert (np.sqrt(x[~b.tie, 0]) > np.sqrt(x[~b.tie, 1] / 2)).all()


def test_strictly_ordered_examples():
    assert strictly_ordered([1.0, 1.5, 1.0, 0.5])
    assert not strictly_ordered([1.0, 2.0])
    assert not strictly_ordered([1.0, 1.5, 1.5])
    assert strictly_ordered([1.0])


paths = st.lists(st.booleans(), min_size=4, max_size=200).map(
    lambda bits: DiscretePath.from_bits(np.array(bits, dtype=np.uint8)))


@given(paths, paths)
def test_level_bounds(f, g):
    if f.steps != g.steps:
        g = DiscretePath(g.values[: min(f.steps, g.steps) + 1])
        f = DiscretePath(f.values[: g.steps + 1])
    x1 = round(hitting_functional(f, g)[0] * math.sqrt(f.steps))
    alone = round(hitting_functional(f, None)[0] * math.sqrt(f.steps))
    assert x1 <= alone == np.abs(f.values).max()
    assert x1 <= np.abs(g.values).max()


@given(paths)
def test_level_monotone_in_horizon(f):
    # extending the horizon never lowers the level reached
    g = DiscretePath(-f.values)
    m = f.steps
    lows = [round(hitting_functional(DiscretePath(f.values[: n + 1]),
                                     DiscretePath(g.values[: n + 1]))[0] * math.sqrt(n))
            for n in range(1, m + 1)]
    assert all(b >= a for a, b in zip(lows, lows[1:]))
