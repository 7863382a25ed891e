import math
from fractions import Fraction

import pytest

from erosim.coloring import BLUE, RED, SiteColoring
from erosim.constants import w_recursion
from erosim.killed import run_killed, run_killed_batch, summarize
from erosim.rng import trial_seed
from erosim.state import ErosionState, SettledExploration


def _reference_killed(L, east_color, first_color, seed):
    """Drive the erosion chain one step at a time until a walker leaves [-L, L]."""
    side = "B" if east_color == BLUE else "R"
    other = "R" if side == "B" else "B"
    st = ErosionState(seed, coloring=SiteColoring.from_string(other * L, side * L),
                      next_color=first_color)
    while True:
        ev = st.microstep()
        if isinstance(ev, SettledExploration):
            return st.particles, st.microsteps


@pytest.mark.parametrize("L", [1, 2, 4])
@pytest.mark.parametrize("east_color", [BLUE, RED])
def test_kernel_coupled_to_erosion_chain(L, east_color):
    for i in range(30):
        seed = trial_seed(L, i)
        out = run_killed(L, east_color, -east_color, seed)
        assert (out.particles, out.microsteps) == _reference_killed(L, east_color, -east_color, seed)


@pytest.mark.parametrize("L", [1, 2, 3, 5])
def test_means_match_exact_values(L):
    trials = 2 * 10 ** 5
    b = run_killed_batch(L, trials, trial_seed(99, L))
    est = summarize(b.particles, b.microsteps)
    w = float(w_recursion(L)[L])
    assert abs(est.mean_microsteps - (L + 1) ** 3) <= 3 * est.se_microsteps
    assert abs(est.mean_particles - w) <= 3 * est.se_particles
    assert b.monochromatic.all()


def test_l1_ratio_five_eighths():
    b = run_killed_batch(1, 10 ** 6, 1)
    est = summarize(b.particles, b.microsteps)
    assert abs(est.ratio - 5 / 8) <= 3 * est.se_ratio


def test_particle_mean_is_not_the_microstep_mean():
    # the recursion counts particles; the microstep mean is (L+1)^3
    w = w_recursion(3)
    assert w[1] == 5 and w[2] == Fraction(29, 2) and w[3] == Fraction(287, 9)
    b = run_killed_batch(3, 10 ** 5, 3)
    est = summarize(b.particles, b.microsteps)
    assert abs(est.mean_particles - float(w[3])) <= 3 * est.se_particles
    assert abs(est.mean_microsteps - float(w[3])) > 10 * est.se_microsteps


def test_l20_ratio_report():
    b = run_killed_batch(20, 20000, 20)
    est = summarize(b.particles, b.microsteps)
    exact = float(w_recursion(20)[20]) / 21 ** 3
    print(f"L=20 ratio {est.ratio:.4f} +- {est.se_ratio:.4f}, exact {exact:.4f}")
    assert abs(est.ratio - exact) <= 4 * est.se_ratio


def test_summarize_delta_method():
    import numpy as np
    r = np.array([1, 2, 3, 4])
    q = np.array([2, 4, 6, 8])
    est = summarize(r, q)
    assert est.ratio == 0.5
    assert est.se_ratio == pytest.approx(0.0, abs=1e-7)
    assert math.isinf(summarize(r[:1], q[:1]).se_ratio)


def test_bad_interval_rejected():
    with pytest.raises(ValueError):
        run_killed_batch(0, 1, 0)
