"""Acceptance criteria as runnable checks.

Each ``criterion_*`` function runs one criterion at full size (or reduced with
``quick=True``) and returns a :class:`CriterionResult`.  Suites group them the
way the ``acceptance --suite`` command exposes them.  Expensive shared data
(trial sets, limit samples) is cached per process so related criteria reuse it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import harness
from .constants import C_constant, alpha, identity_holds, w_recursion
from .engine import Engine
from .excursions import decompose_excursions
from .killed import run_killed_batch, summarize
from .oracle import sample_limit
from .rng import trial_seed
from .state import Emitted, ErosionState, Moved, SettledExploration, martingale_value
from .trajectory import record_trajectory
from .variants import ColorRule, IidUniform, geometric_checkpoints, run_variant_line, run_zd, \
    slope_report


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    blocking: bool = True
    sub_results: dict = field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        if not self.blocking:
            tag = "REPORT"
        return f"[{tag}] criterion {self.number} ({self.name}): {self.detail}"


# ---------------------------------------------------------------- 1

class CombinatorialAudit:
    """Event sink that tallies violations of the per-settle invariants."""

    CHECKS = ("support balance", "color balance", "color parity", "monochromatic at exploration",
              "martingale step", "martingale boundary", "layer structure", "layer run equality",
              "martingale recomputation")

    def __init__(self):
        self.violations = {c: 0 for c in self.CHECKS}
        self.examples: dict[str, str] = {}
        self.prev_m = 0
        self.settles = 0
        self.max_gap = 0

    def _flag(self, check: str, what: str) -> None:
        self.violations[check] += 1
        self.examples.setdefault(check, what)

    def __call__(self, ev, st: ErosionState) -> None:
        if isinstance(ev, Emitted):
            return
        if martingale_value(st) != st.martingale:
            self._flag("martingale recomputation", f"t={st.microsteps}")
        if isinstance(ev, Moved):
            if abs(st.martingale - self.prev_m) != 2:
                self._flag("martingale step", f"t={st.microsteps}")
            self.prev_m = st.martingale
            return
        self.settles += 1
        if isinstance(ev, SettledExploration):
            rec = st.exploration_log[-1]
            k = rec.level
            if abs(rec.martingale_before_adjustment - self.prev_m) != 2:
                self._flag("martingale step", f"t={st.microsteps}")
            post = (k + 1) ** 2 if rec.symmetric_before else (k + 1) * (k + 2)
            if (abs(rec.martingale_before_adjustment) != rec.expected_level_value()
                    or abs(st.martingale) != post):
                self._flag("martingale boundary",
                           f"k={k} pre={rec.martingale_before_adjustment} post={st.martingale}")
            if not st.coloring.is_monochromatic_opposite():
                self._flag("monochromatic at exploration", str(st.coloring))
        elif abs(st.martingale - self.prev_m) != 2:
            self._flag("martingale step", f"t={st.microsteps}")
        self.prev_m = st.martingale
        if abs(st.support_east - st.support_west) > 1:
            self._flag("support balance", str(st.coloring))
        if abs(st.red - st.blue) > 2:
            self._flag("color balance", f"R={st.red} B={st.blue}")
        lead = st.blue - st.red if st.particles % 2 == 1 else st.red - st.blue
        if lead < 0:
            self._flag("color parity", f"n={st.particles} R={st.red} B={st.blue}")
        problems = st.layers.structural_violations(st.coloring)
        if problems:
            self._flag("layer structure", f"{problems[0]} at {st.coloring}")
        bad = st.layers.run_equality_violation(st.coloring)
        if bad:
            self._flag("layer run equality", f"{bad} at {st.coloring}")
        self.max_gap = max(self.max_gap, st.layers.max_modified_gap())


def criterion_1(seeds: int = 100, particles: int = 10 ** 4, seed: int = 0) -> CriterionResult:
    total = {c: 0 for c in CombinatorialAudit.CHECKS}
    examples = {}
    settles = 0
    max_gap = 0
    for i in range(seeds):
        st = ErosionState(trial_seed(seed, i))
        audit = CombinatorialAudit()
        st.sink = audit
        st.run_until_particles(particles)
        for c, v in audit.violations.items():
            total[c] += v
        for c, ex in audit.examples.items():
            examples.setdefault(c, ex)
        settles += audit.settles
        max_gap = max(max_gap, audit.max_gap)
    failing = {c: v for c, v in total.items() if v}
    parts = [f"{seeds} seeds x {particles} particles, {settles} settles"]
    parts.append("zero violations" if not failing else
                 "violations " + ", ".join(f"{c}={v} (e.g. {examples[c]})" for c, v in failing.items()))
    parts.append(f"max |E_m-W_m| = {max_gap}")
    return CriterionResult(1, "combinatorial invariants", not failing, "; ".join(parts),
                           sub_results={"violations": total, "max_gap": max_gap})


# ---------------------------------------------------------------- 2, 3

def criterion_2(trials: int = 10 ** 6, seed: int = 0, Ls=(1, 2, 3, 5, 8)) -> CriterionResult:
    w = w_recursion(max(Ls))
    ok = True
    parts = []
    for L in Ls:
        b = run_killed_batch(L, trials, trial_seed(seed, L))
        est = summarize(b.particles, b.microsteps)
        zq = (est.mean_microsteps - (L + 1) ** 3) / est.se_microsteps
        zr = (est.mean_particles - float(w[L])) / est.se_particles
        good = abs(zq) <= 3 and abs(zr) <= 3 and bool(b.monochromatic.all())
        ok &= good
        parts.append(f"L={L}: Q {est.mean_microsteps:.2f} vs {(L + 1) ** 3} (z={zq:+.2f}), "
                     f"R {est.mean_particles:.3f} vs {float(w[L]):.3f} (z={zr:+.2f})")
    return CriterionResult(2, "killed process means", ok, f"{trials} trials; " + "; ".join(parts))


def inverse_alpha_closed_form() -> float:
    """1/alpha by partial fractions: pi^2/6 - 5/4."""
    return math.pi ** 2 / 6 - 5 / 4


def criterion_3(K: int = 1000, tolerance: float = 1e-10) -> CriterionResult:
    bad = identity_holds(K)
    a = alpha(tolerance)
    c = C_constant(tolerance)
    a_ref = 1 / inverse_alpha_closed_form()
    c_ref = 2 * math.sqrt(2) * a_ref ** 0.25
    w = w_recursion(2)
    ok = (not bad and a.error <= tolerance and c.error <= tolerance
          and abs(a.value - a_ref) <= a.error + 1e-13 and abs(c.value - c_ref) <= c.error + 1e-13
          and w[1] == 5 and w[2] == Fraction(29, 2))
    detail = (f"identity exact for k<={K}" if not bad else f"identity fails at {bad[:5]}")
    detail += (f"; alpha = {a.value:.12f} +- {a.error:.1e} (closed form {a_ref:.12f}); "
               f"C = {c.value:.12f} +- {c.error:.1e} (closed form {c_ref:.12f})")
    return CriterionResult(3, "constants", ok, detail)


# ---------------------------------------------------------------- 4, 9

def criterion_4(seeds: int = 50, particles: int = 10 ** 6, seed: int = 0) -> CriterionResult:
    a = alpha().value
    ratios = np.array([Engine(trial_seed(seed, i)).run_until_particles(particles).microsteps
                       / particles for i in range(seeds)])
    mean_dev = abs(ratios.mean() / a - 1)
    worst = float(np.max(np.abs(ratios / a - 1)))
    ok = mean_dev <= 0.02 and worst <= 0.10
    return CriterionResult(4, "time scale V(n)/n", ok,
                           f"mean {ratios.mean():.4f} vs alpha {a:.4f} ({100 * mean_dev:.2f}%), "
                           f"worst seed {100 * worst:.2f}% off")


def criterion_9(t: int = 10 ** 8, seed: int = 0) -> CriterionResult:
    eng = Engine(trial_seed(seed, 0)).run_until_microsteps(t)
    g = eng.goodness()
    worst_k, worst_ratio = 0, 0.0
    ok = True
    for k in range(5, 31):
        frac = g.good(k) / t
        ratio = frac * k ** 1.5
        if ratio > worst_ratio:
            worst_k, worst_ratio = k, ratio
        ok &= frac <= k ** -1.5
    return CriterionResult(9, "goodness bound", ok,
                           f"t={t}: max_k G(k,t) k^1.5 / t = {worst_ratio:.4f} at k={worst_k}, "
                           f"total counted {g.total()} of {t}")


# ---------------------------------------------------------------- 10, 11

def criterion_10(trajectories: int = 100, t: int = 10 ** 6, seed: int = 0) -> CriterionResult:
    boundary = discrepancy = roundtrip = 0
    worst = 0
    for i in range(trajectories):
        traj = record_trajectory(trial_seed(seed, i), t)
        dec = decompose_excursions(traj)
        boundary += len(dec.boundary_violations())
        for k, gap in dec.f_discrepancies():
            worst = max(worst, gap - (k + 1))
            if gap > k + 1:
                discrepancy += 1
        inc, steps, drops = dec.reconstruct()
        if not (np.array_equal(inc, traj.increments) and np.array_equal(steps, traj.exploration_steps)
                and np.array_equal(drops, traj.drops())):
            roundtrip += 1
    ok = boundary == 0 and discrepancy == 0 and roundtrip == 0
    return CriterionResult(10, "excursion decomposition", ok,
                           f"{trajectories} x t={t}: boundary violations {boundary}, "
                           f"F discrepancies over k+1: {discrepancy} (max excess {worst}), "
                           f"round-trip failures {roundtrip}")


def criterion_11(n_dla: int = 10 ** 4, n_slope: int = 10 ** 7, runs: int = 3, seed: int = 0,
                 n_min: int = 10 ** 4) -> list[CriterionResult]:
    dla_ok = True
    for i in range(5):
        _, st = run_variant_line(ColorRule(1), n_dla, trial_seed(seed, i))
        dla_ok &= bool(np.array_equal(st.colored, st.checkpoints))
    out = [CriterionResult(11, "internal DLA count", dla_ok,
                           f"c=1: colored sites equal n at every checkpoint up to {n_dla}")]
    cps = geometric_checkpoints(n_slope, per_decade=4, start=n_min)
    series = []
    for i in range(runs):
        _, st = run_variant_line(ColorRule(2, IidUniform()), n_slope, trial_seed(seed + 1, i),
                                 checkpoints=cps)
        series.append((st.checkpoints, st.colored))
    rep = slope_report(series, n_min)
    out.append(CriterionResult(11, "random colors slope", True,
                               f"slope {rep.slope:.3f} (95% CI {rep.ci_low:.3f}..{rep.ci_high:.3f}, "
                               f"{rep.runs} runs, n in [{n_min}, {n_slope}]), conjectured 0.5",
                               blocking=False))
    series = []
    for i in range(runs):
        _, st = run_zd(2, n_slope, trial_seed(seed + 2, i), checkpoints=cps)
        series.append((st.checkpoints, st.colored))
    rep = slope_report(series, n_min)
    out.append(CriterionResult(11, "Z^2 slope", True,
                               f"slope {rep.slope:.3f} (95% CI {rep.ci_low:.3f}..{rep.ci_high:.3f}, "
                               f"{rep.runs} runs, n in [{n_min}, {n_slope}]), conjectured 1/3",
                               blocking=False))
    return out


# ---------------------------------------------------------------- limit laws

@lru_cache(maxsize=None)
def particle_trials(trials: int, checkpoints: tuple[int, ...], seed: int, mode: str = "fast",
                    k: int = 2) -> np.ndarray:
    """Array (trials, len(checkpoints), 3 + k): n, S, S_E, E(1..k)."""
    jobs = [(seed, i, list(checkpoints), mode, k) for i in range(trials)]
    rows = harness.map_trials(harness.particle_trial, jobs)
    out = np.zeros((trials, len(checkpoints), 3 + k))
    for i, trial_rows in enumerate(rows):
        for j, r in enumerate(trial_rows):
            out[i, j, 0] = r[2]
            out[i, j, 1] = r[4] + r[5]
            out[i, j, 2] = r[4]
            out[i, j, 3:] = r[6: 6 + k]
    return out


@lru_cache(maxsize=None)
def microstep_trials(trials: int, t: int, seed: int) -> np.ndarray:
    """S_E^t for each trial."""
    jobs = [(seed, i, [t], 1) for i in range(trials)]
    rows = harness.map_trials(harness.microstep_trial, jobs)
    return np.array([r[0][4] for r in rows], dtype=float)


@lru_cache(maxsize=None)
def limit_samples(trials: int, steps: int, seed: int, k: int = 2):
    return sample_limit(trials, steps, k, seed)


def _limit_sizes(quick: bool):
    if quick:
        return dict(trials=200, n=10 ** 5, oracle=5000, steps=10 ** 5)
    return dict(trials=2000, n=10 ** 6, oracle=10 ** 5, steps=10 ** 6)


def criterion_5(quick: bool = False, seed: int = 0) -> CriterionResult:
    sz = _limit_sizes(quick)
    data = particle_trials(sz["trials"], (sz["n"],), seed + 5)
    lim = limit_samples(sz["oracle"], sz["steps"], seed + 50)
    C = C_constant().value
    emp = data[:, 0, 1] / sz["n"] ** 0.25
    cmp = harness.compare_columns(emp, lim.support(C), 0.05, ("S(n)/n^1/4", "C sqrt(X1)"))
    return CriterionResult(5, "limit law of the support", cmp.passed,
                           f"{sz['trials']} trials at n={sz['n']} (fast) vs {sz['oracle']} "
                           f"samples at m={sz['steps']}: {cmp.line()}")


def criterion_6(quick: bool = False, seed: int = 0) -> CriterionResult:
    sz = _limit_sizes(quick)
    data = particle_trials(sz["trials"], (sz["n"],), seed + 5)
    lim = limit_samples(sz["oracle"], sz["steps"], seed + 50)
    C = C_constant().value
    scale = sz["n"] ** 0.25
    lines, ok = [], True
    for i in (1, 2):
        cmp = harness.compare_columns(data[:, 0, 2 + i] / scale, lim.runs(C, i), 0.07,
                                      (f"E(n,{i})/n^1/4", f"run {i} functional"))
        ok &= cmp.passed
        lines.append(cmp.line())
    return CriterionResult(6, "limit law of the outer runs", ok, "; ".join(lines))


def criterion_7(quick: bool = False, seed: int = 0) -> CriterionResult:
    sz = _limit_sizes(quick)
    trials, t = (100, 10 ** 6) if quick else (1000, 10 ** 8)
    se = microstep_trials(trials, t, seed + 7)
    lim = limit_samples(sz["oracle"], sz["steps"], seed + 50)
    cmp = harness.compare_columns(se / t ** 0.25, np.sqrt(2 * lim.x[:, 0]), 0.05,
                                  ("S_E^t/t^1/4", "sqrt(2 X1)"))
    return CriterionResult(7, "microstep limit law", cmp.passed,
                           f"{trials} trials at t={t} (exact): {cmp.line()}")


def criterion_8(quick: bool = False, seed: int = 0) -> CriterionResult:
    trials, ns = (100, (10 ** 3, 10 ** 4, 10 ** 5)) if quick else \
        (500, (10 ** 4, 10 ** 5, 10 ** 6, 10 ** 7))
    data = particle_trials(trials, ns, seed + 8)
    med = np.median(data[:, :, 1], axis=0)
    slope = float(np.polyfit(np.log(ns), np.log(med), 1)[0])
    ok = abs(slope - 0.25) <= 0.02
    return CriterionResult(8, "scaling exponent", ok,
                           f"{trials} trials (fast), medians {med.tolist()} at n={list(ns)}: "
                           f"slope {slope:.4f}")


def oracle_diagnostics(quick: bool = False, seed: int = 0) -> str:
    sz = _limit_sizes(quick)
    lim = limit_samples(sz["oracle"], sz["steps"], seed + 50)
    return (f"oracle: P(A) = {lim.carrier_g.mean():.4f}, tie rate {lim.tie.mean():.2e}, "
            f"x1=0 failures {int((lim.level == 0).sum())}")


# ---------------------------------------------------------------- suites

def run_suite(name: str, quick: bool = False, seed: int = 20240601) -> list[CriterionResult]:
    out: list[CriterionResult] = []
    if name in ("killed", "all"):
        out.append(criterion_2(10 ** 5 if quick else 10 ** 6, seed))
        out.append(criterion_3())
    if name in ("combinatorial", "all"):
        out.append(criterion_1(10 if quick else 100, 10 ** 4, seed))
        out.append(criterion_10(10 if quick else 100, 10 ** 6, seed))
        out.extend(criterion_11(10 ** 4, 10 ** 5 if quick else 10 ** 7, 3, seed,
                                10 ** 3 if quick else 10 ** 4))
    if name in ("timescale", "all"):
        out.append(criterion_4(10 if quick else 50, 10 ** 5 if quick else 10 ** 6, seed))
        out.append(criterion_9(10 ** 7 if quick else 10 ** 8, seed))
    if name in ("limit-law", "all"):
        out.append(criterion_5(quick, seed))
        out.append(criterion_6(quick, seed))
        out.append(criterion_7(quick, seed))
        out.append(criterion_8(quick, seed))
    return out
