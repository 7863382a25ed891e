"""Command-line entry point (``erosim``)."""

from __future__ import annotations

import argparse
import json
import sys
import tempfile
from pathlib import Path

from . import harness
from .constants import constants_table
from .engine import Engine
from .killed import run_killed_batch, summarize
from .variants import (CYCLIC, MUTUAL, Alternating, ColorRule, IidUniform, PeriodicPattern,
                       run_variant_line, run_zd)


def _int(text: str) -> int:
    # accepts 1e6 style budgets
    value = float(text)
    if value != int(value):
        raise argparse.ArgumentTypeError(f"{text} is not an integer")
    return int(value)


def _int_list(text: str) -> list[int]:
    return [_int(x) for x in text.split(",") if x]


def cmd_simulate(args) -> int:
    if (args.particles is None) == (args.microsteps is None):
        print("give exactly one of --particles / --microsteps", file=sys.stderr)
        return 2
    if args.checkpoint_every and args.particles is not None and args.trials == 1 and args.state:
        eng = harness.run_with_checkpoints(args.seed, args.particles, args.checkpoint_every,
                                           args.state, args.mode)
        print(json.dumps({"particles": eng.particles, "microsteps": eng.microsteps,
                          "S_E": eng.support_east, "S_W": eng.support_west}))
        return 0
    cfg = harness.ExperimentConfig(
        kind="support" if args.particles is not None else "microsteps",
        particles=args.particles or 0, microsteps=args.microsteps or 0, trials=args.trials,
        seed=args.seed, mode=args.mode, out=args.out, runs=args.runs,
        checkpoints=args.at or [], checkpoint_every=args.checkpoint_every)
    if cfg.out is None:
        cfg.out = "-"
    harness.run_experiment(cfg)
    return 0


def cmd_killed(args) -> int:
    from .constants import w_recursion
    rows = []
    Ls = args.L or [1, 2, 3, 5, 8]
    w = w_recursion(max(Ls))
    for L in Ls:
        b = run_killed_batch(L, args.trials, harness.trial_seed(args.seed, L))
        est = summarize(b.particles, b.microsteps)
        rows.append([L, args.trials, repr(est.mean_microsteps), repr(est.se_microsteps),
                     (L + 1) ** 3, repr(est.mean_particles), repr(est.se_particles),
                     repr(float(w[L])), repr(est.ratio), repr(est.se_ratio)])
    header = ["L", "trials", "meanQ", "seQ", "expectedQ", "meanR", "seR", "expectedR",
              "ratio", "seRatio"]
    harness.write_csv(args.out or "-", {"experiment": "killed", "seed": args.seed,
                                        "trials": args.trials, "L": Ls}, header, rows)
    return 0


def cmd_constants(args) -> int:
    table = constants_table(args.K, args.tolerance)
    comment = {"experiment": "constants", "alpha": table.alpha.value,
               "alpha_error": table.alpha.error, "C": table.C.value, "C_error": table.C.error}
    rows = [[k, str(w), repr(float(w) / k ** 3) if k else ""]
            for k, w in enumerate(table.w_values)]
    harness.write_csv(args.out or "-", comment, ["k", "w_k", "w_k/k^3"], rows)
    return 0


def cmd_oracle(args) -> int:
    cfg = harness.ExperimentConfig(kind="oracle", trials=args.trials, seed=args.seed,
                                   steps=args.steps, runs=args.runs, out=args.out or "-")
    harness.run_experiment(cfg)
    return 0


def _rule(args) -> ColorRule:
    if args.schedule == "alternating":
        schedule = Alternating()
    elif args.schedule == "iid":
        schedule = IidUniform()
    else:
        schedule = PeriodicPattern(tuple(_int_list(args.schedule.split(":", 1)[1])))
    return ColorRule(args.colors, schedule, args.antagonism)


def cmd_variant(args) -> int:
    n = args.particles or 10 ** 4
    if args.lattice == "line":
        coloring, st = run_variant_line(_rule(args), n, args.seed, args.origin_stops)
        rows = list(zip(st.checkpoints.tolist(), st.colored.tolist()))
        extra = {"cyclic_violations": st.cyclic_violations}
    else:
        d = 2 if args.lattice == "z2" else 3
        coloring, st, sl = run_zd(d, n, args.seed, True)
        rows = list(zip(st.checkpoints.tolist(), st.colored.tolist()))
        extra = {"cap_hits": st.cap_hits}
        if args.slice_out:
            harness.write_csv(args.slice_out, {"experiment": "variant-slice", "d": d,
                                               "seed": args.seed, "n": n},
                              ["x", "y", "colorIndex"], sl)
    comment = {"experiment": "variant", "lattice": args.lattice, "colors": args.colors,
               "schedule": args.schedule, "antagonism": args.antagonism, "seed": args.seed,
               "n": n, **extra}
    harness.write_csv(args.out or "-", comment, ["n", "coloredSites"], rows)
    return 0


def cmd_compare(args) -> int:
    pairs = [tuple(p.split(":", 1)) for p in args.pairs.split(",")]
    report = harness.compare_to_limit(args.empirical, args.oracle, pairs, args.tolerance)
    for r in report:
        print(r.line())
    return 0 if all(r.passed for r in report) else 1


def cmd_acceptance(args) -> int:
    from .acceptance import run_suite
    results = run_suite(args.suite, quick=args.quick, seed=args.seed)
    for r in results:
        print(r.line(), flush=True)
    return 0 if all(r.passed or not r.blocking for r in results) else 1


def cmd_checkpoint_test(args) -> int:
    n = args.particles or 2 * 10 ** 5
    every = args.checkpoint_every or n // 2
    straight = Engine(args.seed).run_until_particles(n, args.mode)
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "state.ckpt"
        harness.run_with_checkpoints(args.seed, n, every, path, args.mode, stop_after=every)
        resumed = harness.run_with_checkpoints(args.seed, n, every, path, args.mode)
    same = straight.get_state() == resumed.get_state()
    print(f"{'PASS' if same else 'FAIL'} checkpoint at {every}, resumed to {n}: "
          f"{'identical' if same else 'different'} to the uninterrupted run")
    return 0 if same else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="erosim", description="Competitive erosion on the line.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, trials=1):
        sp.add_argument("--seed", type=_int, default=0)
        sp.add_argument("--trials", type=_int, default=trials)
        sp.add_argument("--out", default=None, help="output CSV (stdout when omitted)")

    s = sub.add_parser("simulate", help="run seeded trials and report supports and runs")
    common(s)
    s.add_argument("--particles", type=_int)
    s.add_argument("--microsteps", type=_int)
    s.add_argument("--mode", choices=["exact", "fast"], default="exact")
    s.add_argument("--runs", type=_int, default=2, help="run lengths per side to report")
    s.add_argument("--at", type=_int_list, help="extra comma-separated checkpoints")
    s.add_argument("--checkpoint-every", type=_int, default=0)
    s.add_argument("--state", help="checkpoint file for a single resumable trial")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("killed", help="killed process on [-L, L]")
    common(s, trials=10 ** 5)
    s.add_argument("--L", type=_int_list, help="comma-separated interval half-widths")
    s.set_defaults(func=cmd_killed)

    s = sub.add_parser("constants", help="w_k table, alpha and C")
    s.add_argument("--K", type=_int, default=10)
    s.add_argument("--tolerance", type=float, default=1e-10)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_constants)

    s = sub.add_parser("oracle", help="sample the limit functionals")
    common(s, trials=1000)
    s.add_argument("--steps", type=_int, default=10 ** 6)
    s.add_argument("--runs", type=_int, default=2)
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("variant", help="more colors, random colors, Z^2 and Z^3")
    s.add_argument("--seed", type=_int, default=0)
    s.add_argument("--out", default=None)
    s.add_argument("--particles", type=_int)
    s.add_argument("--lattice", choices=["line", "z2", "z3"], default="line")
    s.add_argument("--colors", type=_int, default=2)
    s.add_argument("--schedule", default="alternating",
                   help="alternating | iid | pattern:0,1,0,1,2")
    s.add_argument("--antagonism", choices=[MUTUAL, CYCLIC], default=MUTUAL)
    s.add_argument("--origin-stops", action="store_true")
    s.add_argument("--slice-out", help="x,y,colorIndex CSV of the plane through the origin")
    s.set_defaults(func=cmd_variant)

    s = sub.add_parser("compare", help="KS distances between empirical and oracle columns")
    s.add_argument("--empirical", required=True)
    s.add_argument("--oracle", required=True)
    s.add_argument("--pairs", default="scaledSupport:scaledSupport")
    s.add_argument("--tolerance", type=float, default=0.05)
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("acceptance", help="run an acceptance suite")
    s.add_argument("--suite", choices=["combinatorial", "timescale", "limit-law", "killed", "all"],
                   default="all")
    s.add_argument("--seed", type=_int, default=20240601)
    s.add_argument("--quick", action="store_true", help="reduced sizes for a smoke run")
    s.set_defaults(func=cmd_acceptance)

    s = sub.add_parser("checkpoint-test", help="checkpoint, resume and compare")
    s.add_argument("--seed", type=_int, default=0)
    s.add_argument("--particles", type=_int)
    s.add_argument("--checkpoint-every", type=_int)
    s.add_argument("--mode", choices=["exact", "fast"], default="exact")
    s.set_defaults(func=cmd_checkpoint_test)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
