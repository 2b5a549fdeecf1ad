"""Benchmark the tree split kernel backends against each other.

Runs the same presorted (values, gradients) matrices through every
importable backend, checks the outputs agree exactly, and reports the
per-call timing. Usage:

    python3 benchmarks/bench_split_kernel.py [--rows 4096] [--features 152]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from ttpmine.gbdt.kernel import BACKEND, available_backends


def make_case(rows: int, features: int, seed: int):
    rng = np.random.default_rng(seed)
    vals = np.sort(
        rng.integers(0, 32, size=(rows, features)).astype(np.float64), axis=0
    )
    grads = rng.normal(size=(rows, features)).astype(np.float64)
    return np.asfortranarray(vals), np.asfortranarray(grads)


def time_backend(fn, cases, repeats: int) -> tuple[float, list]:
    results = [fn(vals, grads) for vals, grads in cases]
    start = time.perf_counter()
    for _ in range(repeats):
        for vals, grads in cases:
            fn(vals, grads)
    elapsed = time.perf_counter() - start
    per_call = elapsed / (repeats * len(cases))
    return per_call, results


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, default=4096)
    parser.add_argument("--features", type=int, default=152)
    parser.add_argument("--cases", type=int, default=8)
    parser.add_argument("--repeats", type=int, default=20)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    backends = available_backends()
    print(
        f"default backend: {BACKEND}; comparing {', '.join(sorted(backends))} "
        f"on {args.cases} matrices of {args.rows}x{args.features}"
    )

    cases = [
        make_case(args.rows, args.features, args.seed + i) for i in range(args.cases)
    ]

    timings: dict[str, float] = {}
    outputs: dict[str, list] = {}
    for name in sorted(backends):
        per_call, results = time_backend(backends[name], cases, args.repeats)
        timings[name] = per_call
        outputs[name] = results

    names = sorted(backends)
    reference = outputs[names[0]]
    for name in names[1:]:
        if outputs[name] != reference:
            raise SystemExit(
                f"backend outputs differ: {names[0]} vs {name}: "
                f"{reference} vs {outputs[name]}"
            )
    print("outputs identical across backends")

    base = max(timings.values())
    for name in names:
        per_call = timings[name]
        print(
            f"  {name:<8} {per_call * 1e3:8.3f} ms/call   "
            f"({base / per_call:5.2f}x vs slowest)"
        )


if __name__ == "__main__":
    main()
