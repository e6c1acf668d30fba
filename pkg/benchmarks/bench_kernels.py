"""Compare the compiled text kernels with the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Prints per-kernel wall time for both backends on summary-sized inputs drawn
from the shipped corpus, plus the end-to-end time of a small simulation run in
a subprocess with each backend.
"""
import argparse
import os
import random
import subprocess
import sys
import time

from synthcog import kernels
from synthcog.config import SimConfig
from synthcog.domain import CognitiveLabel, build_catalog
from synthcog.textgen import generate_summary
from synthcog.textmetrics import tokenize


def _time(fn, args_list, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for args in args_list:
            fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--pairs", type=int, default=2000)
    args = ap.parse_args(argv)

    if kernels.compiled_impl is None:
        print("compiled kernels not built; only the Python backend is available")
        return 1

    rng = random.Random(0)
    catalog = build_catalog(SimConfig(), 1)
    pairs = []
    for i in range(args.pairs):
        video = catalog[i % len(catalog)]
        label = rng.choice(list(CognitiveLabel))
        s = generate_summary(video, label, None, rng)
        pairs.append((tokenize(s.text), tokenize(video.reference_summary)))

    cases = {
        "hashed_tf": [(a, 256) for a, _ in pairs],
        "lcs_length": pairs,
        "fnv1a64": [(" ".join(a).encode("utf-8"),) for a, _ in pairs],
    }
    print(f"{'kernel':<12} {'python s':>10} {'cython s':>10} {'speedup':>8}")
    for name, inputs in cases.items():
        py = _time(getattr(kernels.python_impl, name), inputs, args.repeat)
        cy = _time(getattr(kernels.compiled_impl, name), inputs, args.repeat)
        print(f"{name:<12} {py:>10.4f} {cy:>10.4f} {py / cy:>7.1f}x")

    code = ("from synthcog.config import SimConfig; from synthcog.dataset import simulate; "
            "simulate(SimConfig(total_users=20, total_days=100))")
    times = {}
    for backend, flag in (("python", "1"), ("cython", "0")):
        env = dict(os.environ, SYNTHCOG_PURE_PYTHON=flag)
        t0 = time.perf_counter()
        subprocess.run([sys.executable, "-c", code], env=env, check=True)
        times[backend] = time.perf_counter() - t0
    print(f"{'simulate':<12} {times['python']:>10.4f} {times['cython']:>10.4f} "
          f"{times['python'] / times['cython']:>7.1f}x   (20 users x 100 days)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
