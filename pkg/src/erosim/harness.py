"""Experiment plumbing: seeded trials, CSV output, KS comparison, checkpoints.

Every trial derives its own seed from the master seed and its index, so the
output does not depend on how trials are spread over worker processes.  Set
EROSIM_WORKERS to fan trials out to a process pool; rows are merged back in
trial order.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import multiprocessing
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import stats

from .constants import C_constant
from .engine import Engine
from .oracle import sample_limit
from .rng import trial_seed

CHECKPOINT_HEADER = "EROSIM-CKPT v1"


# ---------------------------------------------------------------- config

@dataclass
class ExperimentConfig:
    kind: str = "support"          # support | microsteps | oracle
    particles: int = 0
    microsteps: int = 0
    trials: int = 1
    seed: int = 0
    mode: str = "exact"
    out: str | None = None
    checkpoint_every: int = 0
    steps: int = 10 ** 6           # oracle walk length
    runs: int = 2                  # k: run lengths per side / oracle extrema depth
    checkpoints: list[int] = field(default_factory=list)

    def validate(self) -> None:
        if self.kind not in ("support", "microsteps", "oracle"):
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if self.kind == "support" and self.particles < 1:
            raise ValueError("particles must be positive")
        if self.kind == "microsteps" and self.microsteps < 1:
            raise ValueError("microsteps must be positive")
        if self.mode not in ("exact", "fast"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.runs < 1 or self.steps < 1:
            raise ValueError("runs and steps must be positive")


def worker_count() -> int:
    raw = os.environ.get("EROSIM_WORKERS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def map_trials(func: Callable, jobs: Sequence, workers: int | None = None) -> list:
    """``[func(j) for j in jobs]``, optionally on a process pool; order is kept."""
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(jobs) <= 1:
        return [func(j) for j in jobs]
    ctx = multiprocessing.get_context("fork" if hasattr(os, "fork") else "spawn")
    with ctx.Pool(min(workers, len(jobs))) as pool:
        return pool.map(func, jobs, chunksize=1)


# ---------------------------------------------------------------- trials

def _run_columns(runs: np.ndarray, k: int) -> list[int]:
    return [int(runs[i]) if i < runs.size else 0 for i in range(k)]


def report_header(k: int, scale_by: str) -> list[str]:
    cols = ["trial", "seed", "n", "t", "S_E", "S_W"]
    cols += [f"E{i}" for i in range(1, k + 1)] + [f"W{i}" for i in range(1, k + 1)]
    cols += ["M", "flags", "scaledSupport", "scaledSupportEast"]
    cols += [f"scaledRun{i}" for i in range(1, k + 1)]
    return cols


def _report_row(idx: int, seed: int, eng: Engine, k: int, scale_by: str) -> list:
    n, t = eng.particles, eng.microsteps
    se, sw = eng.support_east, eng.support_west
    east = _run_columns(eng.east_runs(), k)
    west = _run_columns(eng.west_runs(), k)
    clock = n if scale_by == "n" else t
    scale = clock ** 0.25 if clock else 1.0
    flags = "active" if eng.active_position() != 0 else ""
    row = [idx, seed, n, t, se, sw, *east, *west, eng.martingale, flags,
           _fmt((se + sw) / scale), _fmt(se / scale)]
    row += [_fmt(e / scale) for e in east]
    return row


def _fmt(x: float) -> str:
    return repr(float(x))


def particle_trial(job) -> list[list]:
    """Rows at each particle checkpoint for one seeded trial."""
    master, idx, checkpoints, mode, k = job
    seed = trial_seed(master, idx)
    eng = Engine(seed)
    rows = []
    for n in checkpoints:
        eng.run_until_particles(n, mode)
        rows.append(_report_row(idx, seed, eng, k, "n"))
    return rows


def microstep_trial(job) -> list[list]:
    master, idx, checkpoints, k = job
    seed = trial_seed(master, idx)
    eng = Engine(seed)
    rows = []
    for t in checkpoints:
        eng.run_until_microsteps(t)
        rows.append(_report_row(idx, seed, eng, k, "t"))
    return rows


def oracle_header(k: int) -> list[str]:
    cols = ["trial"] + [f"x{i}" for i in range(1, k + 2)] + ["eventFlag", "tieFlag"]
    cols += ["scaledSupport"] + [f"scaledRun{i}" for i in range(1, k + 1)]
    cols += ["microSupportEast"] + [f"microRun{i}" for i in range(1, k + 1)]
    return cols


def oracle_rows(trials: int, steps: int, k: int, master: int, first: int = 0) -> list[list]:
    batch = sample_limit(trials, steps, k, master, first)
    C = C_constant().value
    rows = []
    micro = math.sqrt(2) / (C / 2)  # rescales (C/2)(...) into sqrt(2)(...)
    support = batch.support(C)
    run_cols = [batch.runs(C, i) for i in range(1, k + 1)]
    for i in range(trials):
        row = [first + i] + [_fmt(v) for v in batch.x[i]]
        row += ["A" if batch.carrier_g[i] else "A'", int(batch.tie[i])]
        row += [_fmt(support[i])] + [_fmt(r[i]) for r in run_cols]
        row += [_fmt(math.sqrt(2 * batch.x[i, 0]))] + [_fmt(r[i] * micro) for r in run_cols]
        rows.append(row)
    return rows


def _oracle_chunk(job) -> list[list]:
    trials, steps, k, master, first = job
    return oracle_rows(trials, steps, k, master, first)


# ---------------------------------------------------------------- CSV

def write_csv(path, comment: dict, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    buf = io.StringIO()
    buf.write("# " + json.dumps(comment, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    data = buf.getvalue()
    if path is None or str(path) == "-":
        print(data, end="")
    else:
        Path(path).write_text(data)


def read_csv(path) -> tuple[dict, list[dict]]:
    text = Path(path).read_text()
    lines = text.splitlines()
    comment = {}
    if lines and lines[0].startswith("#"):
        comment = json.loads(lines[0][1:].strip())
        lines = lines[1:]
    return comment, list(csv.DictReader(lines))


def run_experiment(config: ExperimentConfig, workers: int | None = None):
    """Run the configured trials and write the CSV; returns (header, rows)."""
    config.validate()
    k = config.runs
    comment = {"experiment": config.kind, "config": asdict(config)}
    if config.kind == "oracle":
        chunk = 1000
        jobs = [(min(chunk, config.trials - s), config.steps, k, config.seed, s)
                for s in range(0, config.trials, chunk)]
        header = oracle_header(k)
        rows = [r for part in map_trials(_oracle_chunk, jobs, workers) for r in part]
    elif config.kind == "support":
        cps = sorted(set(config.checkpoints or [])) or [config.particles]
        if cps[-1] != config.particles:
            cps = [c for c in cps if c < config.particles] + [config.particles]
        jobs = [(config.seed, i, cps, config.mode, k) for i in range(config.trials)]
        header = report_header(k, "n")
        rows = [r for part in map_trials(particle_trial, jobs, workers) for r in part]
    else:
        cps = sorted(set(config.checkpoints or [])) or [config.microsteps]
        if cps[-1] != config.microsteps:
            cps = [c for c in cps if c < config.microsteps] + [config.microsteps]
        jobs = [(config.seed, i, cps, k) for i in range(config.trials)]
        header = report_header(k, "t")
        rows = [r for part in map_trials(microstep_trial, jobs, workers) for r in part]
    if config.out is not None:
        write_csv(config.out, comment, header, rows)
    return header, rows


# ---------------------------------------------------------------- KS

def ks_statistic(sample_a, sample_b) -> float:
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("KS distance needs two non-empty samples")
    return float(stats.ks_2samp(a, b, method="asymp").statistic)


def ks_band(n_a: int, n_b: int, coefficient: float = 1.36) -> float:
    """Two-sample fluctuation band at the 5% level."""
    return coefficient * math.sqrt((n_a + n_b) / (n_a * n_b))


@dataclass
class PairComparison:
    empirical_column: str
    oracle_column: str
    distance: float
    n_empirical: int
    n_oracle: int
    split_half: float
    split_half_band: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.distance <= self.tolerance

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"{verdict} {self.empirical_column} vs {self.oracle_column}: D={self.distance:.4f} "
                f"(tol {self.tolerance}, n={self.n_empirical}/{self.n_oracle}, "
                f"split-half {self.split_half:.4f}, band {self.split_half_band:.4f})")


def compare_columns(empirical: np.ndarray, oracle: np.ndarray, tolerance: float,
                    names: tuple[str, str] = ("empirical", "oracle")) -> PairComparison:
    half = oracle.size // 2
    split = ks_statistic(oracle[:half], oracle[half:]) if half else math.nan
    band = ks_band(half, oracle.size - half) if half else math.nan
    return PairComparison(names[0], names[1], ks_statistic(empirical, oracle), empirical.size,
                          oracle.size, split, band, tolerance)


def compare_to_limit(empirical_csv, oracle_csv, pairs: Sequence[tuple[str, str]],
                     tolerance: float = 0.05, at: int | None = None) -> list[PairComparison]:
    """KS distance for each (empirical column, oracle column) pair.

    Empirical rows are restricted to one checkpoint (``n`` for particle runs,
    ``t`` for microstep runs), the last one unless ``at`` is given."""
    comment, emp = read_csv(empirical_csv)
    _, orc = read_csv(oracle_csv)
    if not emp or not orc:
        raise ValueError("empty input")
    key = "t" if comment.get("experiment") == "microsteps" else "n"
    if key in emp[0]:
        at = max(int(r[key]) for r in emp) if at is None else at
        emp = [r for r in emp if int(r[key]) == at]
    out = []
    for ec, oc in pairs:
        if ec not in emp[0] or oc not in orc[0]:
            raise KeyError(f"schema mismatch: {ec!r} / {oc!r}")
        a = np.array([float(r[ec]) for r in emp])
        b = np.array([float(r[oc]) for r in orc])
        out.append(compare_columns(a, b, tolerance, (ec, oc)))
    return out


# ---------------------------------------------------------------- checkpoints

class CheckpointError(ValueError):
    pass


def checkpoint_bytes(state: dict) -> bytes:
    body = json.dumps(state, sort_keys=True, separators=(",", ":")).encode()
    digest = hashlib.sha256(body).hexdigest()
    return f"{CHECKPOINT_HEADER}\nsha256 {digest}\n".encode() + body


def save_checkpoint(path, state: dict) -> None:
    tmp = Path(str(path) + ".tmp")
    tmp.write_bytes(checkpoint_bytes(state))
    os.replace(tmp, path)


def parse_checkpoint(data: bytes) -> dict:
    first, _, rest = data.partition(b"\n")
    if not first.startswith(b"EROSIM-CKPT"):
        raise CheckpointError("not a checkpoint file")
    if first.decode(errors="replace") != CHECKPOINT_HEADER:
        raise CheckpointError(f"unsupported checkpoint version {first.decode(errors='replace')!r}")
    second, _, body = rest.partition(b"\n")
    if not second.startswith(b"sha256 "):
        raise CheckpointError("missing checksum line")
    if hashlib.sha256(body).hexdigest() != second[7:].decode(errors="replace"):
        raise CheckpointError("checksum mismatch: file is truncated or corrupted")
    try:
        return json.loads(body)
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"unreadable body: {exc}") from None


def load_checkpoint(path) -> dict:
    return parse_checkpoint(Path(path).read_bytes())


def checkpoint(engine: Engine, path) -> None:
    save_checkpoint(path, {"engine": engine.get_state()})


def resume(path) -> Engine:
    return Engine.from_state(load_checkpoint(path)["engine"])


def run_with_checkpoints(seed: int, particles: int, every: int, path, mode: str = "exact",
                         stop_after: int | None = None) -> Engine:
    """Run one trial to ``particles``, saving a checkpoint every ``every``
    particles.  An existing checkpoint at ``path`` is resumed.  ``stop_after``
    simulates an interruption after that many particles."""
    path = Path(path)
    eng = resume(path) if path.exists() else Engine(seed)
    while eng.particles < particles:
        nxt = min(particles, (eng.particles // every + 1) * every) if every > 0 else particles
        if stop_after is not None:
            nxt = min(nxt, stop_after)
        eng.run_until_particles(nxt, mode)
        if every > 0:
            checkpoint(eng, path)
        if stop_after is not None and eng.particles >= stop_after:
            break
    return eng
