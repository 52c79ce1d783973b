"""Compare the compiled kernels with their pure-Python twins.

Usage: python3 benchmarks/bench_kernels.py [--repeat N] [-o results.csv]
"""
import argparse
import csv
import sys
import timeit

from hybridpos import _kernels_py as python
from hybridpos import kernels

H = [1.1, 0.02, 3.0, -0.01, 0.97, -2.0, 1e-5, 2e-5, 1.0]
Q = (0.1, 0.2, 0.3, 0.927361849549570)

CASES = {
    "first_primes(5000)": lambda k: k.first_primes(5000),
    "quat_multiply": lambda k: k.quat_multiply(Q, Q),
    "quat_rotate": lambda k: k.quat_rotate(Q, (1.0, 2.0, 3.0)),
    "quat_from_rotation_vector": lambda k: k.quat_from_rotation_vector(0.1, 0.2, 0.3),
    "apply_homography": lambda k: k.apply_homography(H, 300.0, 200.0),
}


def per_call(fn, impl, repeat):
    timer = timeit.Timer(lambda: fn(impl))
    number, _ = timer.autorange()
    return min(timer.repeat(repeat, number)) / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("-o", "--output")
    args = parser.parse_args(argv)
    if kernels.compiled is None:
        print("compiled kernels are not built; only the Python timings are shown", file=sys.stderr)
    rows = []
    for name, fn in CASES.items():
        py = per_call(fn, python, args.repeat)
        comp = per_call(fn, kernels.compiled, args.repeat) if kernels.compiled is not None else float("nan")
        rows.append({"kernel": name, "python_us": py * 1e6, "compiled_us": comp * 1e6, "speedup": py / comp})
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    writer = csv.DictWriter(out, fieldnames=["kernel", "python_us", "compiled_us", "speedup"], lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: f"{v:.3f}" if isinstance(v, float) else v for k, v in row.items()})
    if out is not sys.stdout:
        out.close()


if __name__ == "__main__":
    main()
