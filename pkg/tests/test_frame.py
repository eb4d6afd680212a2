import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gmixcurve.frame import (
    PI, CurveletIndex, FrameError, GRIDS, apply_unitary, band_halfwidths, build_windows,
    curvelet_ft, eval_chi, generator_ft, pu_total, rotate_back, rotation, scale_geometry,
    translation_grid,
)
from gmixcurve.gaussmix import GaussianMixture


@pytest.fixture(params=[("exp", 0), ("poly", 6)])
def windows(request):
    return build_windows(*request.param)


def test_window_values(windows):
    assert windows.w0(0.0) == 1.0
    assert windows.w(2 * PI / 3 - 0.01) == 0.0
    assert windows.w(8 * PI / 3 + 0.01) == 0.0
    assert abs(windows.nu(0.4) ** 2 + windows.nu(0.4 - PI) ** 2 - 1) <= 1e-10


def test_radial_partition(windows):
    r = np.linspace(0, 2**9, 20001)
    total = windows.w0(r) ** 2 + sum(windows.w(r / 2**j) ** 2 for j in range(1, 10))
    assert np.abs(total - 1).max() < 1e-12


def test_ramp_rejects_rough_poly():
    with pytest.raises(FrameError):
        build_windows("poly", 2)
    with pytest.raises(FrameError):
        build_windows("cubic")


def test_chi_examples():
    assert eval_chi(4, np.array([10.0, 0.0])) == 0.0
    assert eval_chi(0, np.array([0.0, 0.0])) == 1.0
    assert eval_chi(2, np.array([0.0, 4 * PI])) == 0.0


def test_pu_examples():
    assert pu_total(np.array([0.0, 0.0]), 0) == pytest.approx(1.0)
    assert abs(pu_total(np.array([7.3, -2.1]), 6) - 1) <= 1e-8
    with pytest.raises(FrameError):
        pu_total(np.array([100.0, 0.0]), 2)


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 0.999), st.floats(-PI, PI))
def test_pu_property(frac, theta):
    r = frac * (2 * PI / 3) * 2**7
    xi = np.array([r * np.cos(theta), r * np.sin(theta)])
    assert abs(pu_total(xi, 6) - 1) <= 1e-8


def test_scale_geometry_examples():
    g = scale_geometry(4, "narrow")
    assert g.t == pytest.approx(16 * np.sqrt(2) * PI / 3)
    assert g.eps1 == pytest.approx(13.793, abs=1e-3)
    assert 4 * PI <= g.eps1 <= 16 * PI / 3
    assert scale_geometry(0).Lam == pytest.approx(16 * PI / 3)
    for grid in GRIDS:
        for j in range(41):
            assert min(scale_geometry(j, grid).eps1, scale_geometry(j, grid).eps2) >= 4 * PI - 1e-9


def test_scale_geometry_errors():
    with pytest.raises(FrameError):
        scale_geometry(-1)
    with pytest.raises(FrameError):
        scale_geometry(3, "hex")
    with pytest.raises(FrameError):
        CurveletIndex(4, 4)


def test_translation_grid():
    assert translation_grid(0, 0.1) == [(0, 0)]
    g = scale_geometry(4)
    pts = translation_grid(4, 1.0)
    n1, n2 = int(g.Lam / (2 * PI)) + 2, int(g.lam / (2 * PI)) + 2
    brute = [(a, b) for a in range(-n1, n1 + 1) for b in range(-n2, n2 + 1)
             if np.hypot(2 * PI * a / g.Lam, 2 * PI * b / g.lam) <= 1.0]
    assert sorted(pts) == sorted(brute)
    assert all(np.hypot(*g.lattice_point(*p)) <= 1.0 for p in pts)


def test_generator_support():
    assert generator_ft(5, np.array([1.0, 0.3])) == 0.0
    assert generator_ft(2, np.array([60.0, 0.0])) == 0.0
    A = np.sqrt(2) * PI / 3
    rng = np.random.default_rng(1)
    for j in range(4, 9):
        x = np.stack([rng.uniform(-A, A, 500), rng.uniform(-60, 60, 500)], 1)
        assert np.all(generator_ft(j, x) == 0.0)


def test_band_halfwidths_cover_wedge():
    rng = np.random.default_rng(2)
    for j in range(6):
        b1, b2 = band_halfwidths(j)
        x = rng.uniform(-1.5, 1.5, (4000, 2)) * [b1, b2]
        outside = (np.abs(x[:, 0]) > b1) | (np.abs(x[:, 1]) > b2)
        assert np.all(eval_chi(j, x[outside]) == 0.0)


def test_curvelet_ft_zero_shift_is_real():
    xi = np.random.default_rng(3).normal(scale=40, size=(1000, 2))
    v = curvelet_ft(CurveletIndex(4, 0, 0, 0), xi)
    assert np.all(v.imag == 0) and np.all(v.real >= 0)


def test_coarse_curvelet_energy():
    # curvelet (0,0,(0,0)) has energy int w0^2 / (Lam lam); compare radial and box quadratures
    g = scale_geometry(0)
    r = np.linspace(0, 8 * PI / 3, 200001)
    radial = 2 * PI * np.trapezoid(build_windows().w0(r) ** 2 * r, r) / (g.Lam * g.lam)
    n = 1200
    x = (np.arange(n) + 0.5) / n * 2 - 1
    X = np.stack(np.meshgrid(x, x, indexing="ij"), -1) * 8.5
    box = np.sum(np.abs(curvelet_ft(CurveletIndex(0), X)) ** 2) * (17 / n) ** 2
    assert box == pytest.approx(radial, rel=1e-6)


def test_apply_unitary_identity():
    mix = GaussianMixture([0.3, -1.2], [np.eye(2), [[2, 1], [0, 1]]], [[0, 0], [1, 2]])
    out = apply_unitary(CurveletIndex(0), mix)
    assert np.array_equal(out.weights, mix.weights)
    assert np.allclose(out.L, mix.L) and np.allclose(out.centers, mix.centers)


def test_apply_unitary_matrix_oracle():
    mix = GaussianMixture([1.0, 0.5], [np.eye(2), [[1.5, 0.2], [0, 0.7]]], [[0.1, -0.3], [2, 1]])
    idx = CurveletIndex(4, 1, 3, -2)
    out = apply_unitary(idx, mix)
    g = scale_geometry(4)
    R = rotation(PI / 4)
    k = np.array([2 * PI * 3 / g.Lam, 2 * PI * -2 / g.lam])
    for c_in, c_out in zip(mix.centers, out.centers):
        assert np.allclose(c_out, R @ (k + c_in / np.array([16.0, 4.0])))
    # transforms agree with the curvelet map applied to the mixture transform
    xi = np.random.default_rng(4).normal(scale=20, size=(20, 2))
    eta = rotate_back(xi, PI / 4)
    expected = np.exp(-1j * eta @ k) / 8 * mix.ft(eta / [16.0, 4.0])
    assert np.allclose(out.ft(xi), expected, atol=1e-12)
