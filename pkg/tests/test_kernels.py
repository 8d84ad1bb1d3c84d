import json
import os
import subprocess
import sys
import threading

import numpy as np
import pytest

from disloc import _kernels
from disloc._parallel import parallel_map, worker_count

PROBE = r"""
import json, numpy as np
from disloc import _kernels as k
rng = np.random.default_rng(0)
t = np.linspace(-0.7, 0.7, 57)
x, y = rng.uniform(0, 1, (2, 300))
g = np.linspace(0, 1, 30)
F = np.add.outer(np.sin(3 * g), np.cos(2 * g))
args = [rng.uniform(0, 1, 50) for _ in range(8)]
c1, c2 = k.strip_combine(2.0, *args)
gx, gy = k.bump_grad(x, y, 0.5, 0.4, 0.3)
print(json.dumps({
    "backend": k.BACKEND,
    "smoothstep": k.smoothstep(t).tolist(),
    "deriv": k.smoothstep_deriv(t).tolist(),
    "bump": k.bump(x, y, 0.5, 0.4, 0.3).tolist(),
    "grad": (gx.tolist(), gy.tolist()),
    "sum": k.weighted_sum(x, y),
    "strip": (c1.tolist(), c2.tolist()),
    "ms": k.marching_squares(F, g, g, 0.8).tolist(),
}))
"""


def _run(backend):
    env = dict(os.environ, DISLOC_ACCEL=backend)
    out = subprocess.run([sys.executable, "-c", PROBE], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


@pytest.mark.slow
def test_backends_agree():
    a, b = _run("numba"), _run("numpy")
    assert a.pop("backend") == "numba" and b.pop("backend") == "numpy"
    for key in a:
        assert np.allclose(np.asarray(a[key], dtype=float), np.asarray(b[key], dtype=float), rtol=1e-13, atol=1e-14), key


def test_bad_backend_rejected():
    env = dict(os.environ, DISLOC_ACCEL="cuda")
    res = subprocess.run([sys.executable, "-c", "import disloc"], env=env, capture_output=True, text=True)
    assert res.returncode != 0 and "DISLOC_ACCEL" in res.stderr


def test_smoothstep_endpoints():
    v = _kernels.smoothstep(np.array([-1.0, -0.5, 0.0, 0.5, 2.0]))
    assert v == pytest.approx([0, 0, 0.5, 1, 1])


def test_marching_squares_flat_edge():
    g = np.linspace(0, 1, 4)
    field = np.tile(g, (4, 1))
    segs = _kernels.marching_squares(field, g, g, 1 / 3)
    assert len(segs) == 3 and np.allclose(segs[:, [0, 2]], 1 / 3)


def test_parallel_map_ordered(monkeypatch):
    monkeypatch.setenv("DISLOC_THREADS", "4")
    assert worker_count() == 4
    seen = set()

    def work(i):
        seen.add(threading.get_ident())
        return i * i

    assert parallel_map(work, range(50)) == [i * i for i in range(50)]
    monkeypatch.setenv("DISLOC_THREADS", "x")
    with pytest.raises(ValueError):
        worker_count()
