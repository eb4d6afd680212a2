import os
import subprocess
import sys

import numpy as np
import pytest

from gmixcurve import _kernels_py, kernels

compiled = pytest.importorskip("gmixcurve._kernels")


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def packed(rng, n):
    L = rng.normal(size=(n, 2, 2)) + 2 * np.eye(2)
    minv = np.ascontiguousarray(np.linalg.inv(L).transpose(0, 2, 1))
    return rng.normal(size=n), minv, rng.normal(scale=2, size=(n, 2)), L


def test_mixture_ft_backends_agree(rng):
    amp, minv, c, _ = packed(rng, 64)
    xi = rng.normal(scale=5, size=(500, 2))
    a = compiled.mixture_ft(amp, minv, c, xi, 0)
    b = _kernels_py.mixture_ft(amp, minv, c, xi)
    assert np.abs(a - b).max() <= 1e-12 * np.abs(b).max()


def test_gram_backends_agree(rng):
    w1, _, c1, L1 = packed(rng, 30)
    w2, _, c2, L2 = packed(rng, 20)
    P = np.ascontiguousarray(L1.transpose(0, 2, 1) @ L1)
    Q = np.ascontiguousarray(L2.transpose(0, 2, 1) @ L2)
    a = compiled.gauss_gram(w1, P, c1, w2, Q, c2, 0)
    b = _kernels_py.gauss_gram(w1, P, c1, w2, Q, c2)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-14)


def test_star_sum_backends_agree(rng):
    r = 2.0 ** rng.uniform(-4, 14, 200)
    th = rng.uniform(-np.pi, np.pi, 200)
    xi = np.ascontiguousarray(np.stack([r * np.cos(th), r * np.sin(th)], 1))
    a = compiled.star_sum(xi, 0, 24, 2.0, 3.0, 0)
    b = _kernels_py.star_sum(xi, 0, 24, 2.0, 3.0)
    assert np.allclose(a, b, rtol=1e-11, atol=0)


def test_lattice_phase_sum_backends_agree(rng):
    eta = np.ascontiguousarray(rng.normal(scale=30, size=(400, 2)))
    k1 = rng.integers(-40, 41, 25).astype(np.int64)
    k2 = rng.integers(-9, 10, 25).astype(np.int64)
    w = rng.normal(size=25) + 1j * rng.normal(size=25)
    a = compiled.lattice_phase_sum(eta, 0.1, 0.4, k1, k2, w, 0)
    b = _kernels_py.lattice_phase_sum(eta, 0.1, 0.4, k1, k2, w)
    direct = np.exp(-1j * (np.outer(eta[:, 0] * 0.1, k1) + np.outer(eta[:, 1] * 0.4, k2))) @ w
    assert np.abs(a - direct).max() <= 1e-11 * np.abs(w).sum()
    assert np.abs(b - direct).max() <= 1e-11 * np.abs(w).sum()


def test_pure_mode_selects_numpy_backend():
    env = dict(os.environ, GMIX_PURE="1")
    out = subprocess.run([sys.executable, "-c", "from gmixcurve import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    assert kernels.BACKEND == "compiled"


def test_thread_setting(monkeypatch):
    monkeypatch.setenv("GMIX_THREADS", "3")
    assert kernels.threads() == 3
    monkeypatch.setenv("GMIX_THREADS", "many")
    assert kernels.threads() == 0
