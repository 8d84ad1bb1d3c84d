"""Compare the numba and numpy kernel backends.

Each backend runs in its own interpreter (the backend is fixed at import
time by ``DISLOC_ACCEL``). Numba compile time is paid in a warm-up call and
reported separately.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from disloc import _kernels as k
from disloc import DislocationForm, catalog, converge, random_test_forms

repeat = int(sys.argv[1])
rng = np.random.default_rng(0)
x, y = rng.uniform(0, 1, (2, 1_000_000))
args = [rng.uniform(0, 1, 1_000_000) for _ in range(8)]
g = np.linspace(0, 1, 400)
F = np.add.outer(np.sin(7 * g), np.cos(5 * g))
d = DislocationForm(catalog("linear_y"), 0.5)
px, py = rng.uniform(0, 1, (2, 200_000))

cases = {
    "bump 1e6 pts": lambda: k.bump(x, y, 0.5, 0.5, 0.3),
    "bump_grad 1e6 pts": lambda: k.bump_grad(x, y, 0.5, 0.5, 0.3),
    "strip_combine 1e6": lambda: k.strip_combine(2.0, *args),
    "weighted_sum 1e6": lambda: k.weighted_sum(x, y),
    "marching_squares 400^2 x 10 levels": lambda: [k.marching_squares(F, g, g, lev) for lev in np.linspace(-1.5, 1.5, 10)],
    "nu_a eval 2e5 pts": lambda: d(px, py),
    "converge n<=8, 2 forms": lambda: converge(catalog("linear_y"), 0.5, random_test_forms(1, 2), (1, 2, 4, 8)),
}
out = {"backend": k.BACKEND, "warmup": {}, "best": {}}
for name, fn in cases.items():
    t0 = time.perf_counter(); fn(); out["warmup"][name] = time.perf_counter() - t0
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter(); fn(); best = min(best, time.perf_counter() - t0)
    out["best"][name] = best
print(json.dumps(out))
"""


def run(backend: str, repeat: int) -> dict:
    env = dict(os.environ, DISLOC_ACCEL=backend)
    res = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--json", help="also write raw timings here")
    args = p.parse_args(argv)
    nb, npy = run("numba", args.repeat), run("numpy", args.repeat)
    width = max(map(len, nb["best"]))
    print(f"{'case':<{width}}  {'numba [s]':>10}  {'numpy [s]':>10}  {'speedup':>8}  {'nb warm-up [s]':>14}")
    for name in nb["best"]:
        a, b = nb["best"][name], npy["best"][name]
        print(f"{name:<{width}}  {a:10.4f}  {b:10.4f}  {b / a:8.2f}  {nb['warmup'][name]:14.3f}")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump({"numba": nb, "numpy": npy}, fh, indent=2, sort_keys=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
