#!/usr/bin/env python3
"""Benchmark the trellis kernels: compiled extension vs NumPy fallback.

Usage:
    python benchmarks/bench_viterbi.py [--message-len N] [--repeats R]

Reports throughput in samples/s for representative detector sizes, from the
8-state shortened binary detector up to the 6561-state full-complexity
ternary one.
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from shorteq import (  # noqa: E402
    Sequence,
    Trellis,
    available_backends,
    bpsk,
    convolve,
    exp_decay_channel,
    ternary,
    viterbi_detect,
)


def make_case(const, target_len, message_len, seed=0):
    rng = np.random.default_rng(seed)
    g = Sequence(0, np.exp(-0.4 * np.arange(target_len)), trim=False)
    pad = target_len - 1
    idx = rng.integers(0, const.size, size=message_len)
    framed = np.concatenate(
        [np.full(pad, const.points[0]), const.points[idx], np.full(pad, const.points[0])]
    )
    t = message_len + target_len - 1
    clean = convolve(g, Sequence(-pad, framed, trim=False)).window(0, t - 1)
    z = Sequence(0, clean + 0.3 * rng.normal(size=t), trim=False)
    return g, z


def run_case(name, const, target_len, message_len, repeats):
    g, z = make_case(const, target_len, message_len)
    rows = []
    results = {}
    for backend in sorted(available_backends()):
        trellis = Trellis(const, g, 0.0)
        best = np.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            res = viterbi_detect(z, trellis, message_len, backend=backend)
            best = min(best, time.perf_counter() - t0)
        results[backend] = res
        rows.append((backend, message_len / best, best))
    first = next(iter(results.values()))
    for res in results.values():
        assert np.array_equal(res.symbol_indices, first.symbol_indices)
        assert res.path_metric == first.path_metric
    states = const.size ** (target_len - 1)
    print(f"\n{name}  ({states} states x {const.size} symbols, M={message_len})")
    for backend, rate, best in rows:
        print(f"  {backend:>7}: {rate:12,.0f} samples/s   best {best * 1e3:8.2f} ms")
    if len(rows) == 2:
        by_name = {b: r for b, r, _ in rows}
        if "cython" in by_name and "numpy" in by_name:
            print(f"  speedup: {by_name['cython'] / by_name['numpy']:.1f}x (cython over numpy)")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--message-len", type=int, default=20000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    backends = sorted(available_backends())
    print(f"available kernels: {', '.join(backends)}")
    if len(backends) == 1:
        print("note: compiled kernel not built; run `python setup.py build_ext --inplace`")

    h9 = exp_decay_channel(9, 0.5)
    run_case("binary, shortened target L=3", bpsk(), 3, args.message_len, args.repeats)
    run_case("binary, full channel L=9", bpsk(), len(h9), args.message_len, args.repeats)
    run_case("ternary, shortened target L=3", ternary(), 3, args.message_len, args.repeats)
    run_case(
        "ternary, full channel L=9",
        ternary(),
        len(h9),
        max(args.message_len // 10, 1000),
        args.repeats,
    )


if __name__ == "__main__":
    main()
