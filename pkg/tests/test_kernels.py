"""Backend equivalence: the jitted loops and the vectorized numpy builds
of every kernel must agree on random inputs.

The public names bind to one build at import time; the private _loop/_np
pairs stay importable, so both routes are compared here directly, plus one
subprocess check that the numpy-only backend selection works end to end.
"""

import os
import subprocess
import sys

import numpy as np
import pytest
from numpy.random import default_rng

from cadlag_rough import kernels
from cadlag_rough._backend import backend
from cadlag_rough.lift import marcus_lift
from util import random_jump_path

PS = [1.0, 2.3, 4.0]


def _vec_case(rng, n=40, d=3):
    return np.cumsum(rng.normal(size=(n, d)), axis=0)


def _g2_case(rng, n=24, d=2):
    rough = marcus_lift(random_jump_path(rng, d, n))
    return rough.vecs, rough.mats


def _monotone_alignment(rng, n, m):
    # random monotone surjective-ish staircase through the index grid
    ai, aj = [0], [0]
    i = j = 0
    while i < n - 1 or j < m - 1:
        step = rng.integers(0, 3)
        if step != 0 and i < n - 1:
            i += 1
        if step != 1 and j < m - 1:
            j += 1
        ai.append(i)
        aj.append(j)
    return np.asarray(ai), np.asarray(aj)


def test_pvar_dp_vec_builds_agree():
    rng = default_rng(0)
    for p in PS:
        for _ in range(10):
            x = _vec_case(rng)
            a = kernels._pvar_dp_vec_loop(x, p)
            b = kernels._pvar_dp_vec_np(x, p)
            assert np.isclose(a, b, rtol=1e-10, atol=1e-12)


def test_pvar_dp_g2_builds_agree():
    rng = default_rng(1)
    for p in PS:
        for _ in range(10):
            v, m = _g2_case(rng)
            a = kernels._pvar_dp_g2_loop(v, m, p)
            b = kernels._pvar_dp_g2_np(v, m, p)
            assert np.allclose(a, b, rtol=1e-10, atol=1e-12)


def test_rho_dp_builds_agree():
    rng = default_rng(2)
    for p in PS:
        for _ in range(10):
            vx, mx = _g2_case(rng)
            vy, my = _g2_case(rng)
            a = kernels._rho_dp_loop(vx, mx, vy, my, p)
            b = kernels._rho_dp_np(vx, mx, vy, my, p)
            assert np.allclose(a, b, rtol=1e-10, atol=1e-12)


def test_homog_dp_builds_agree():
    rng = default_rng(3)
    for p in PS:
        for _ in range(10):
            x, y = _vec_case(rng), _vec_case(rng)
            a = kernels._homog_dp_vec_loop(x, y, p)
            b = kernels._homog_dp_vec_np(x, y, p)
            assert np.isclose(a, b, rtol=1e-10, atol=1e-12)
            vx, mx = _g2_case(rng)
            vy, my = _g2_case(rng)
            a = kernels._homog_dp_g2_loop(vx, mx, vy, my, p)
            b = kernels._homog_dp_g2_np(vx, mx, vy, my, p)
            assert np.isclose(a, b, rtol=1e-10, atol=1e-12)


def test_sigma_dp_builds_agree():
    rng = default_rng(4)
    for _ in range(8):
        tx = np.sort(rng.uniform(0, 1, 25))
        ty = np.sort(rng.uniform(0, 1, 31))
        x = _vec_case(rng, 25)
        y = _vec_case(rng, 31)
        va, la, ca = kernels._sigma_dp_vec_loop(tx, x, ty, y)
        vb, lb, cb = kernels._sigma_dp_vec_np(tx, x, ty, y)
        assert np.isclose(va, vb, rtol=1e-10)
        assert np.isclose(la, lb, rtol=1e-10)
        assert np.array_equal(np.asarray(ca), np.asarray(cb))


def test_sigma_dp_g2_builds_agree():
    rng = default_rng(5)
    for _ in range(8):
        vx, mx = _g2_case(rng, 14)
        vy, my = _g2_case(rng, 17)
        tx = np.linspace(0, 1, vx.shape[0])
        ty = np.linspace(0, 1, vy.shape[0])
        va, la, ca = kernels._sigma_dp_g2_loop(tx, vx, mx, ty, vy, my)
        vb, lb, cb = kernels._sigma_dp_g2_np(tx, vx, mx, ty, vy, my)
        assert np.isclose(va, vb, rtol=1e-10)
        assert np.isclose(la, lb, rtol=1e-10)
        assert np.array_equal(np.asarray(ca), np.asarray(cb))


def test_d0_align_builds_agree():
    rng = default_rng(6)
    for _ in range(8):
        x, y = _vec_case(rng, 20), _vec_case(rng, 26)
        ai, aj = _monotone_alignment(rng, 20, 26)
        a = kernels._d0_align_vec_loop(x, y, ai, aj)
        b = kernels._d0_align_vec_np(x, y, ai, aj)
        assert np.isclose(a, b, rtol=1e-10)
        vx, mx = _g2_case(rng, 13)
        vy, my = _g2_case(rng, 19)
        ai, aj = _monotone_alignment(rng, vx.shape[0], vy.shape[0])
        a = kernels._d0_align_g2_loop(vx, mx, vy, my, ai, aj)
        b = kernels._d0_align_g2_np(vx, mx, vy, my, ai, aj)
        assert np.isclose(a, b, rtol=1e-10)


def test_nu_count_jit_matches_python():
    rng = default_rng(7)
    for _ in range(8):
        x = _vec_case(rng)
        for delta in (0.1, 0.5, 2.0):
            assert kernels.nu_count_vec(x, delta) \
                == kernels._nu_count_vec_loop(x, delta)
        v, m = _g2_case(rng)
        for delta in (0.1, 0.5, 2.0):
            assert kernels.nu_count_g2(v, m, delta) \
                == kernels._nu_count_g2_loop(v, m, delta)


def test_rk4_drives_jit_matches_python():
    rng = default_rng(8)
    d, e = 2, 3
    A = 0.3 * rng.normal(size=(d, e, e))
    bias = 0.2 * rng.normal(size=(d, e))
    a0 = 0.3 * rng.normal(size=(d, e))
    B = 0.7 * rng.normal(size=(d, e, e))
    for _ in range(5):
        u = 0.4 * rng.normal(size=(12, d))
        raw = rng.normal(size=(12, d, d))
        a = 0.2 * (raw - np.transpose(raw, (0, 2, 1)))
        y0 = rng.normal(size=e)
        got = kernels.rk4_linear_drive(u, a, A, bias, y0, 4, 0.25)
        ref = kernels._rk4_linear_drive_loop(u, a, A, bias, y0, 4, 0.25)
        assert np.allclose(got, ref, atol=1e-14)
        got = kernels.rk4_sine_drive(u, a, a0, B, y0, 4, 0.25)
        ref = kernels._rk4_sine_drive_loop(u, a, a0, B, y0, 4, 0.25)
        assert np.allclose(got, ref, atol=1e-14)


@pytest.mark.skipif(backend() != "numba",
                    reason="needs the numba build active for the contrast")
def test_numpy_backend_selection_subprocess():
    code = (
        "import numpy as np\n"
        "from cadlag_rough._backend import backend\n"
        "from cadlag_rough.metrics import pvar\n"
        "from cadlag_rough.cadlag import CadlagPath\n"
        "assert backend() == 'numpy'\n"
        "p = CadlagPath([0., 1., 2.], [[0.], [1.], [-1.]],\n"
        "               jump_mask=[False, True, True])\n"
        "print(repr(pvar(p, 1.5)))\n"
    )
    env = dict(os.environ, CADLAG_ROUGH_NUMBA="0")
    proc = subprocess.run([sys.executable, "-c", code], env=env,
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    from cadlag_rough.metrics import pvar
    from cadlag_rough.cadlag import CadlagPath
    here = pvar(CadlagPath([0., 1., 2.], [[0.], [1.], [-1.]],
                           jump_mask=[False, True, True]), 1.5)
    assert np.isclose(float(proc.stdout.strip()), here, rtol=1e-12)
