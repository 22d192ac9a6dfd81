"""Benchmark the pure tree-walking interpreters against the compiled
table-driven machines on the bisimulation grid.

Usage:
    python benchmarks/bench_interp.py [--range A..B] [--fuel N]

The default grid (-3..3, fuel 10000) keeps the pure backend's turn short;
pass --range -5..5 for the full acceptance-sized grid.
"""

from __future__ import annotations

import argparse
import time

from ootp.translate import active_backend, check_equiv, fgh_program
from ootp.translate.interp import _resolve_backend


def run(backend: str, rng: tuple[int, int], fuel: int) -> tuple[float, int, int]:
    p = fgh_program()
    t0 = time.perf_counter()
    report = check_equiv(p, rng, None, fuel, backend=backend)
    elapsed = time.perf_counter() - t0
    if not report.ok:
        raise SystemExit(f"bisimulation disagreement on the {backend} backend!")
    # total executed steps: terminated runs report their step count, each
    # exhausted run burned the whole fuel budget, and three interpreters ran
    steps = (report.exhausted * fuel) * 3
    return elapsed, report.runs, steps


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--range", default="-3..3")
    ap.add_argument("--fuel", type=int, default=10000)
    args = ap.parse_args()
    lo, _, hi = args.range.partition("..")
    rng = (int(lo), int(hi))

    backends = ["pure"]
    try:
        _resolve_backend("compiled")
        backends.append("compiled")
    except ValueError:
        print("compiled backend unavailable; benchmarking pure only")

    results = {}
    for backend in backends:
        elapsed, runs, steps = run(backend, rng, args.fuel)
        results[backend] = elapsed
        rate = steps / elapsed if elapsed else float("inf")
        print(
            f"{backend:>9}: grid {rng} x3 entries = {runs} runs, "
            f"{elapsed:8.2f}s  (~{rate / 1e6:7.1f}M divergent-steps/s)"
        )
    if len(results) == 2:
        print(f"  speedup: {results['pure'] / results['compiled']:.1f}x (active default: {active_backend()})")


if __name__ == "__main__":
    main()
