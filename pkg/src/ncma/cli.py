"""Command line entry point: ``ncma {sweep,rag-sim,theory,selftest}``."""
from __future__ import annotations

import argparse
import sys

import numpy as np


def _sweep(args) -> int:
    from .harness import ConfigError, emit_results, load_config, run_scenario

    overrides = {"profiles": args.profile, "snr_c": args.snr_c, "slots": args.slots,
                 "seed": args.seed, "trials": args.trials, "out": args.out}
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    log = None if args.quiet else (lambda msg: print(msg, file=sys.stderr))
    rows = run_scenario(cfg, log=log)
    out = cfg.out or "results/sweep.csv"
    csv_path, manifest = emit_results(rows, out, cfg)
    print(f"{'profile':<10} {'snr_c':>5} {'stage':<4} {'th_a':>6} {'th_b':>6} {'th_c':>6} {'th_sys':>6}")
    for r in rows:
        print(f"{r.profile:<10} {r.snr_c_db:>5.1f} {r.stage:<4} {r.th_a:6.3f} {r.th_b:6.3f} "
              f"{r.th_c:6.3f} {r.th_sys:6.3f}")
    print(f"wrote {csv_path} and {manifest}")
    return 0


def _rag_sim(args) -> int:
    from .rag import admission_rounds, expected_rounds, run_rag

    rng = np.random.default_rng(args.seed)
    print(f"{'users':>5} {'simulated':>10} {'analytic':>9} {'rel.err':>8}")
    for k in range(args.min_users, args.max_users + 1):
        sim = admission_rounds(k, args.preambles, args.trials, rng).mean()
        ana = expected_rounds(k, args.preambles)
        print(f"{k:>5} {sim:>10.4f} {ana:>9.4f} {abs(sim - ana) / ana:>8.2%}")
    snrs = rng.uniform(args.snr_low, args.snr_high, args.max_users)
    users = [(f"u{i}", float(s)) for i, s in enumerate(snrs)]
    res = run_rag(users, rng, strong_threshold_db=args.strong_db, weak_first=args.weak_first)
    print(f"signal-level run with {len(users)} users: {res.rounds} rounds, "
          f"collisions per round {res.collisions}")
    print("groups:", res.plan.describe())
    return 0


def _theory(args) -> int:
    from .analysis import theory_table

    print(f"{'snr_db':>7} {'rate_gain':>10} {'sic_sinr_db':>12}")
    for snr, eta, sinr in theory_table(args.snr_db):
        print(f"{snr:>7.2f} {eta:>10.4f} {sinr:>12.3f}")
    return 0


def _selftest(args) -> int:
    from .selftest import run_selftest

    return 0 if run_selftest() else 1


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ncma", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="throughput vs user C SNR for the configured profiles")
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--profile", help="comma-separated profiles (overrides config)")
    p.add_argument("--snr-c", dest="snr_c", help="comma-separated SNR points in dB")
    p.add_argument("--slots", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="CSV path; the manifest is written next to it")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=_sweep)

    p = sub.add_parser("rag-sim", help="random-access admission statistics")
    p.add_argument("--min-users", type=int, default=2)
    p.add_argument("--max-users", type=int, default=10)
    p.add_argument("--preambles", type=int, default=12)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--snr-low", type=float, default=5.0)
    p.add_argument("--snr-high", type=float, default=25.0)
    p.add_argument("--strong-db", type=float, default=15.0)
    p.add_argument("--weak-first", action="store_true")
    p.set_defaults(func=_rag_sim)

    p = sub.add_parser("theory", help="rate gain and SIC SINR tables")
    p.add_argument("--snr-db", type=_floats, default=(0.0, 5.0, 8.5, 10.0, 20.0, 30.0, 40.0))
    p.set_defaults(func=_theory)

    p = sub.add_parser("selftest", help="run the built-in oracle checks")
    p.set_defaults(func=_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
