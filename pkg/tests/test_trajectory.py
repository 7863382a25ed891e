import numpy as np
import pytest

from erosim.engine import Engine
from erosim.excursions import decompose_excursions
from erosim.rng import trial_seed
from erosim.trajectory import Trajectory, TrajectoryFormatError, record_trajectory


@pytest.fixture(scope="module")
def traj():
    return record_trajectory(trial_seed(4, 0), 200003)


def test_round_trip(traj, tmp_path):
    path = tmp_path / "t.traj"
    traj.save(path)
    back = Trajectory.load(path)
    for name in ("increments", "exploration_steps", "exploration_sites", "exploration_colors"):
        assert np.array_equal(getattr(back, name), getattr(traj, name))
    assert back.to_bytes() == traj.to_bytes()


def test_format_errors(traj):
    data = traj.to_bytes()
    with pytest.raises(TrajectoryFormatError):
        Trajectory.from_bytes(b"XX" + data[2:])
    with pytest.raises(TrajectoryFormatError):
        Trajectory.from_bytes(data[:-1])
    with pytest.raises(TrajectoryFormatError):
        Trajectory.from_bytes(data + b"\0")
    with pytest.raises(TrajectoryFormatError):
        Trajectory.from_bytes(data[:20])


def test_potential_matches_engine(traj):
    eng = Engine(trial_seed(4, 0)).run_until_microsteps(200003)
    post, pre = traj.martingale()
    assert post[-1] == eng.martingale
    log = eng.exploration_log()
    assert pre.tolist() == [r.martingale_before_adjustment for r in log]
    assert traj.exploration_steps.tolist() == [r.microstep_index for r in log]
    assert np.all(np.abs(np.diff(post)[np.setdiff1d(np.arange(traj.n_steps),
                                                     traj.exploration_steps - 1)]) == 2)


def test_hitting_time_identity(traj):
    # the larger support after an exploration sits between sqrt(max|M|) - 2 and sqrt(max|M|)
    post, pre = traj.martingale()
    running = np.maximum.accumulate(np.abs(post))
    for step, p in zip(traj.exploration_steps, pre):
        peak = max(int(running[step - 1]), abs(int(p)))
        root = np.sqrt(peak)
        eng_support = np.searchsorted(traj.exploration_steps, step, side="right")
        larger = (eng_support + 1) // 2
        assert larger <= root <= larger + 2


def test_decomposition_boundaries_and_round_trip(traj):
    dec = decompose_excursions(traj)
    assert dec.boundary_violations() == []
    assert all(gap <= k + 1 for k, gap in dec.f_discrepancies())
    inc, steps, drops = dec.reconstruct()
    assert np.array_equal(inc, traj.increments)
    assert np.array_equal(steps, traj.exploration_steps)
    assert np.array_equal(drops, traj.drops())


def test_glued_paths_are_step_two_walks(traj):
    dec = decompose_excursions(traj)
    assert dec.path_e[0] == 0 and dec.path_f[0] == 0
    assert set(np.abs(np.diff(dec.path_e)).tolist()) <= {2}
    assert set(np.abs(np.diff(dec.path_f)).tolist()) <= {2}
    assert dec.path_e.size + dec.path_f.size - 2 == traj.n_steps


def test_segments_alternate(traj):
    dec = decompose_excursions(traj)
    kinds = [s.kind for s in dec.segments]
    assert kinds == ["E", "F"] * (len(kinds) // 2) + (["E"] if len(kinds) % 2 else [])
    assert [s.complete for s in dec.segments[:-1]] == [True] * (len(kinds) - 1)
    assert not dec.segments[-1].complete
