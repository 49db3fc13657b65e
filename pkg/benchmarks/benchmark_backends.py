#!/usr/bin/env python3
"""Compare the compiled kernel extension against the pure-Python twin.

Runs each measurement in a subprocess (backend selection happens at
import time) and prints per-backend timings plus the speedup: kernel
microbenchmarks first, then a full closed-loop rollout of each bundled
scenario.

Usage: python benchmarks/benchmark_backends.py [--repeats N]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json
import time

import numpy as np

from funnelsim.backend import backend_name, kernels
from funnelsim.mission import list_bundled_scenarios, load_scenario, run_scenario

results = {"backend": backend_name(), "kernels": {}, "rollouts": {}}

rng = np.random.default_rng(0)
N = 200_000

args_filter = [tuple(rng.uniform(-3.0, 3.0, 6)) for _ in range(1000)]
start = time.perf_counter()
for _ in range(N // 1000):
    for ux, uy, uz, x, y, z in args_filter:
        kernels.filter_velocity(ux, uy, uz, x, y, max(abs(z), 0.2), 3.0, 1.0)
results["kernels"]["filter_velocity"] = (time.perf_counter() - start) / N

r9 = (1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0)
kp9 = (0.4, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0)
start = time.perf_counter()
for _ in range(N):
    kernels.control_cascade((3.0, 0.4, 1.75), 3.0, (0.0, 0.0, 1.5), r9, 3.14,
                            kp9, 1.5, 0.6, 1.0, 3.0, 1.0, 1e-4)
results["kernels"]["control_cascade"] = (time.perf_counter() - start) / N

start = time.perf_counter()
p, psi = (3.0, 0.4, 1.75), 3.0
for _ in range(N):
    p0, p1, p2, psi = kernels.step_kinematic(p, psi, (-0.1, 0.0, 0.0), 0.1, 1e-3)
results["kernels"]["step_kinematic"] = (time.perf_counter() - start) / N

for name, path in list_bundled_scenarios().items():
    cfg = load_scenario(path)
    start = time.perf_counter()
    run_scenario(cfg)
    results["rollouts"][name] = time.perf_counter() - start

print(json.dumps(results))
"""


def run_backend(pure: bool) -> dict:
    env = dict(os.environ)
    if pure:
        env["FUNNELSIM_PURE_PYTHON"] = "1"
    else:
        env.pop("FUNNELSIM_PURE_PYTHON", None)
    out = subprocess.run([sys.executable, "-c", WORKER], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=1,
                        help="repeat each measurement and keep the best")
    args = parser.parse_args()

    best = {}
    for pure in (False, True):
        for _ in range(args.repeats):
            res = run_backend(pure)
            key = res["backend"]
            if key not in best:
                best[key] = res
            else:
                for group in ("kernels", "rollouts"):
                    for k, v in res[group].items():
                        best[key][group][k] = min(best[key][group][k], v)

    if "compiled" not in best:
        print("compiled extension not available; showing pure-python only")
        fast = slow = best["pure-python"]
    else:
        fast, slow = best["compiled"], best["pure-python"]

    print(f"{'kernel':<28}{'compiled':>12}{'pure':>12}{'speedup':>9}")
    for k in fast["kernels"]:
        a = fast["kernels"][k] * 1e9
        b = slow["kernels"][k] * 1e9
        print(f"{k:<28}{a:>10.0f}ns{b:>10.0f}ns{b / a:>8.1f}x")
    print()
    print(f"{'closed-loop rollout':<28}{'compiled':>12}{'pure':>12}{'speedup':>9}")
    for k in fast["rollouts"]:
        a = fast["rollouts"][k]
        b = slow["rollouts"][k]
        print(f"{k:<28}{a:>10.3f}s{b:>10.3f}s{b / a:>8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
