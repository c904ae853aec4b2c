"""Compare the numba kernels with the pure-Python fallback.

Each backend runs in its own interpreter because the choice is made at
import time (SMLAB_NO_JIT=1 selects the fallback).  Timings exclude the
first call, which pays for JIT compilation or cache loading.

    python benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import json
import os
import subprocess
import sys

# (label, n, mode, count)
WORKLOADS = [
    ("n=3 exhaustive slice", 3, "exhaustive", 4000),
    ("n=4 sampled", 4, "sampled", 2000),
    ("n=6 sampled", 6, "sampled", 500),
]

CHILD = r"""
import json, sys, time
from smlab import kernels
from smlab.census import CensusMode, classify_block

repeat, workloads = json.loads(sys.argv[1])
out = {"jit": kernels.USE_JIT, "results": []}
for label, n, kind, count in workloads:
    mode = CensusMode.exhaustive() if kind == "exhaustive" else CensusMode.sampled(count, 1)
    classify_block(n, mode, 0, min(count, 16), n <= 3, True)  # warm-up
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        classify_block(n, mode, 0, count, n <= 3, True)
        best = min(best, time.perf_counter() - t)
    out["results"].append([label, count, best])
print(json.dumps(out))
"""


def run_backend(no_jit: bool, repeat: int) -> dict:
    env = dict(os.environ, SMLAB_NO_JIT="1" if no_jit else "0")
    proc = subprocess.run(
        [sys.executable, "-c", CHILD, json.dumps([repeat, WORKLOADS])],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(proc.stdout)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    jit = run_backend(False, args.repeat)
    pure = run_backend(True, args.repeat)
    if not jit["jit"]:
        print("numba unavailable: both runs used the fallback")

    print(f"{'workload':<22} {'profiles':>8} {'jit us/prof':>12} {'pure us/prof':>13} {'speedup':>8}")
    for (label, count, t_jit), (_, _, t_pure) in zip(jit["results"], pure["results"]):
        print(f"{label:<22} {count:>8} {t_jit / count * 1e6:>12.2f} {t_pure / count * 1e6:>13.1f} {t_pure / t_jit:>7.0f}x")


if __name__ == "__main__":
    main()
