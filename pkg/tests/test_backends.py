import os
import subprocess
import sys

import numpy as np

from ffconsensus import matstack as ms
from ffconsensus.synthesis import synthesize

from conftest import scalar_toy


def test_synthesis_agrees_across_backends(sec4):
    with ms.use_backend("numpy"):
        a = synthesize(sec4, restarts=0, max_evals=3000)
    with ms.use_backend("numba"):
        b = synthesize(sec4, restarts=0, max_evals=3000)
    assert np.allclose(a.P, b.P, atol=1e-10)
    assert np.allclose(a.K, b.K, atol=1e-10)
    assert abs(a.rho_Ac - b.rho_Ac) <= 1e-6
    assert abs(a.sigma_max - b.sigma_max) <= 1e-6


def test_env_flag_selects_fallback():
    env = dict(os.environ, FFCONSENSUS_DISABLE_NUMBA="1")
    code = "from ffconsensus import matstack as ms; print(ms.backend())"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, timeout=300)
    assert out.stdout.strip() == "numpy"


def test_scalar_toy_numpy_backend():
    with ms.use_backend("numpy"):
        r = synthesize(scalar_toy())
    assert r.rho_Abar < 1
