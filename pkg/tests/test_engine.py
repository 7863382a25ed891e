import json

import numpy as np
import pytest

from erosim.engine import Engine
from erosim.goodness import GoodnessCounters, goodness_label, record_goodness
from erosim.rng import trial_seed
from erosim.state import ErosionState


def _snapshot(obj):
    log = obj.exploration_log() if callable(obj.exploration_log) else obj.exploration_log
    good = obj.goodness() if callable(obj.goodness) else obj.goodness
    return (str(obj.coloring() if callable(obj.coloring) else obj.coloring), obj.particles,
            obj.microsteps, obj.martingale, obj.red, obj.blue, list(log), dict(good.counts))


@pytest.mark.parametrize("mode", ["exact", "fast"])
def test_engine_matches_reference_state(mode):
    for i in range(6):
        seed = trial_seed(5, i)
        eng, ref = Engine(seed), ErosionState(seed)
        for n in (1, 7, 100, 1000, 3000):
            eng.run_until_particles(n, mode)
            ref.run_until_particles(n, mode)
            assert _snapshot(eng) == _snapshot(ref)


def test_engine_matches_reference_mid_walk():
    seed = trial_seed(6, 0)
    eng, ref = Engine(seed), ErosionState(seed)
    for t in (1, 2, 50, 999, 20001):
        eng.run_until_microsteps(t)
        ref.run_until_microsteps(t)
        assert eng.active_position() == (ref.active.position if ref.active else 0)
        assert _snapshot(eng) == _snapshot(ref)


def test_runs_match_coloring():
    eng = Engine(3).run_until_particles(5000)
    c = eng.coloring()
    assert eng.east_runs().tolist() == [n for _, n in c.east]
    assert eng.west_runs().tolist() == [n for _, n in c.west]
    assert eng.support_east == c.support_east and eng.support_west == c.support_west


def test_state_round_trip_continues_identically():
    a = Engine(11, record_trajectory=True).run_until_microsteps(123457)
    state = json.loads(json.dumps(a.get_state()))
    b = Engine.from_state(state)
    assert b.get_state() == a.get_state()
    a.run_until_microsteps(400000)
    b.run_until_microsteps(400000)
    assert a.get_state() == b.get_state()
    assert np.array_equal(a.trajectory().increments, b.trajectory().increments)


def test_engine_rejects_targets_behind():
    eng = Engine(1).run_until_particles(10)
    with pytest.raises(ValueError):
        eng.run_until_particles(9)


def test_engine_overflow_guard():
    with pytest.raises(OverflowError):
        Engine(1).run_until_microsteps(2 ** 62 + 1)


def test_goodness_labels():
    assert goodness_label(-1, 4) == ("E", 4)
    assert goodness_label(-3, 1) == ("W", 3)
    # neither side starts with the walker's color
    assert goodness_label(-1, 1) == ("E", 1)


def test_record_goodness_is_pure():
    g = GoodnessCounters()
    h = record_goodness(g, -1, 3, 9)
    h = record_goodness(h, -2, 1, 4)
    assert g.counts == {}
    assert h.counts == {3: [9, 0], 2: [0, 4]}
    assert h.total() == 13 and h.good(3) == 9


def test_goodness_counts_every_microstep():
    for t in (1, 17, 10 ** 5):
        eng = Engine(2).run_until_microsteps(t)
        assert eng.goodness().total() == t
        ref = ErosionState(2).run_until_microsteps(t)
        assert ref.goodness.total() == t
