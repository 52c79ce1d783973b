"""Command line: run the simulated demonstrator, compare trajectories, benchmark workers."""
from __future__ import annotations

import argparse
import sys
import time

from .sim import (
    LEFT_BLIND_SPOT, SOURCES, ScenarioConfig, evaluate, load_config, run_demo, write_ground_truth,
)


def _blind_spot(text: str):
    if text == "left":
        return LEFT_BLIND_SPOT
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("expected x,y,w,h or 'left'")
    if parts[2] <= 0 or parts[3] <= 0:
        raise argparse.ArgumentTypeError("blind spot width and height must be positive")
    return tuple(parts)


def _config(args) -> ScenarioConfig:
    cfg = ScenarioConfig.noiseless() if args.noiseless else ScenarioConfig()
    if args.config:
        cfg = load_config(args.config, cfg)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.blind_spot:
        changes["blind_spots"] = list(cfg.blind_spots) + args.blind_spot
    if args.disable_source:
        changes["disabled_sources"] = list(cfg.disabled_sources) + args.disable_source
    return cfg.replace(**changes)


def cmd_run(args) -> int:
    cfg = _config(args)
    for bx, by, bw, bh in cfg.blind_spots:
        if bx < 0 or by < 0 or bx + bw > cfg.area_width + 1e-9 or by + bh > cfg.area_height + 1e-9:
            print(f"blind spot {(bx, by, bw, bh)} is outside the area", file=sys.stderr)
            return 2
    start = time.perf_counter()
    result = run_demo(cfg, args.output, only=args.only)
    elapsed = time.perf_counter() - start
    if args.ground_truth:
        write_ground_truth(result.truth, args.ground_truth)
    print(f"wrote {result.rows} rows to {args.output} in {elapsed:.1f} s", file=sys.stderr)
    return 0


def cmd_evaluate(args) -> int:
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    avg, worst = evaluate(args.a, args.b, cfg)
    print(f"avg {avg:.2f} cm  max {worst:.2f} cm")
    return 0


def cmd_bench(args) -> int:
    from .workers import benchmark, write_csv

    rows = benchmark(tuple(args.workers), duration=args.duration, prime_count=args.primes)
    if args.output:
        with open(args.output, "w", newline="") as fh:
            write_csv(rows, fh)
    write_csv(rows, sys.stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hybridpos", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate the demonstrator and write fused positions")
    run.add_argument("-o", "--output", default="position.csv")
    run.add_argument("--seed", type=int)
    run.add_argument("--config", help="key=value scenario file")
    run.add_argument("--blind-spot", action="append", type=_blind_spot, metavar="x,y,w,h",
                     help="camera blind spot in cm (repeatable); 'left' for the left third")
    run.add_argument("--disable-source", action="append", choices=SOURCES, metavar="NAME",
                     help=f"leave a source out of the fusion (one of {', '.join(SOURCES)})")
    run.add_argument("--only", choices=SOURCES, help="write a single source's trace, no fusion")
    run.add_argument("--noiseless", action="store_true", help="start from the noise-free scenario")
    run.add_argument("--ground-truth", metavar="FILE", help="also write the true trajectory")
    run.set_defaults(func=cmd_run)

    ev = sub.add_parser("evaluate", help="average and maximum distance between two trajectories")
    ev.add_argument("a")
    ev.add_argument("b")
    ev.add_argument("--config")
    ev.set_defaults(func=cmd_evaluate)

    bench = sub.add_parser("bench", help="worker pool throughput benchmark")
    bench.add_argument("--workers", type=int, nargs="+", default=[1, 2, 4])
    bench.add_argument("--duration", type=float, default=3.0, help="seconds per configuration")
    bench.add_argument("--primes", type=int, default=5000, help="primes computed per frame")
    bench.add_argument("-o", "--output")
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
