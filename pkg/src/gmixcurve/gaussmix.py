"""Gaussian mixtures and the deconvolution schemes that produce them.

A term ``(w, L, x0)`` is ``x -> w exp(-|L(x - x0)|^2)``; its transform is
``w / (2 |det L|) exp(-|L^-T xi|^2 / 4 - i x0.xi)``.

The schemes run on a rescaled copy of the target whose band sits in a box of
half-diagonal ``r0``: with ``S = diag(s1, s2)`` the target ``G`` becomes
``H(y) = G(S^-1 y)``, is approximated by ``sum w phi(y - alpha)`` with
``phi(x) = exp(-|x|^2)``, and every term is mapped back to ``(w, S, S^-1 alpha)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from math import comb

import numpy as np

from . import kernels
from .frame import (
    DEFAULT_GRID, DEFAULT_WINDOWS, PI, SUPPORT_A, Ramp, band_halfwidths,
    generator_ft, scale_geometry,
)

B2_COEFF = 36.0  # lattice-count constant: n(h) <= 36 h^-4
PRUNE = 1e-300


class SchemeError(ValueError):
    """Invalid scheme request (budget too small, singular map, ...)."""


class GuardError(ArithmeticError):
    """A numerical guard tripped (ill-conditioned division, ...)."""


# ---------------------------------------------------------------------------
# mixtures


@dataclass(frozen=True)
class GaussianTerm:
    weight: float
    L: np.ndarray
    center: np.ndarray

    def __post_init__(self):
        L = np.asarray(self.L, dtype=float).reshape(2, 2)
        if abs(np.linalg.det(L)) == 0:
            raise SchemeError("singular linear map")
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(2))


def gaussian_ft(term, xi):
    xi = np.asarray(xi, dtype=float)
    Minv = np.linalg.inv(term.L).T
    u = xi @ Minv.T
    amp = term.weight * 0.5 / abs(np.linalg.det(term.L))
    return amp * np.exp(-0.25 * np.sum(u * u, -1) - 1j * (xi @ term.center))


class GaussianMixture:
    """Finite sum of Gaussian terms stored as arrays."""

    def __init__(self, weights=(), L=None, centers=None):
        self.weights = np.asarray(weights, dtype=float).reshape(-1)
        n = len(self.weights)
        self.L = np.zeros((0, 2, 2)) if L is None else np.asarray(L, dtype=float).reshape(n, 2, 2)
        self.centers = np.zeros((0, 2)) if centers is None else np.asarray(centers, dtype=float).reshape(n, 2)
        if n and np.any(np.abs(np.linalg.det(self.L)) == 0):
            raise SchemeError("singular linear map")

    @classmethod
    def from_terms(cls, terms):
        terms = list(terms)
        if not terms:
            return cls()
        return cls([t.weight for t in terms], [t.L for t in terms], [t.center for t in terms])

    @classmethod
    def concat(cls, mixtures):
        mixtures = [m for m in mixtures if len(m)]
        if not mixtures:
            return cls()
        return cls(np.concatenate([m.weights for m in mixtures]),
                   np.concatenate([m.L for m in mixtures]),
                   np.concatenate([m.centers for m in mixtures]))

    def __len__(self):
        return len(self.weights)

    def __iter__(self):
        for w, L, c in zip(self.weights, self.L, self.centers):
            yield GaussianTerm(w, L, c)

    def merged(self):
        """Combine terms with identical map and center; drop zero weights."""
        if not len(self):
            return self
        keys = np.concatenate([self.L.reshape(-1, 4), self.centers], 1)
        uniq, inv = np.unique(keys, axis=0, return_inverse=True)
        if len(uniq) == len(self):
            return self
        w = np.zeros(len(uniq))
        np.add.at(w, inv.reshape(-1), self.weights)
        keep = w != 0
        return GaussianMixture(w[keep], uniq[keep, :4], uniq[keep, 4:])

    def scaled(self, factor):
        return GaussianMixture(self.weights * factor, self.L, self.centers)

    def _packed(self):
        Minv = np.ascontiguousarray(np.linalg.inv(self.L).transpose(0, 2, 1))
        amp = np.ascontiguousarray(0.5 * self.weights / np.abs(np.linalg.det(self.L)))
        return amp, Minv, np.ascontiguousarray(self.centers)

    def ft(self, xi):
        """Exact transform at points ``xi`` (shape ``(..., 2)``)."""
        xi = np.asarray(xi, dtype=float)
        if not len(self):
            return np.zeros(xi.shape[:-1], dtype=complex)
        amp, Minv, c = self._packed()
        return kernels.mixture_ft(amp, Minv, c, xi.reshape(-1, 2)).reshape(xi.shape[:-1])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        d = x[..., None, :] - self.centers
        u = np.einsum("nij,...nj->...ni", self.L, d)
        return np.exp(-np.sum(u * u, -1)) @ self.weights

    def quadratic_forms(self):
        return np.ascontiguousarray(self.L.transpose(0, 2, 1) @ self.L)

    def inner(self, other):
        """Closed-form ``L2`` inner product of two real mixtures."""
        if not len(self) or not len(other):
            return 0.0
        return kernels.gauss_gram(
            np.ascontiguousarray(self.weights), self.quadratic_forms(),
            np.ascontiguousarray(self.centers),
            np.ascontiguousarray(other.weights), other.quadratic_forms(),
            np.ascontiguousarray(other.centers))

    def norm(self):
        return float(np.sqrt(max(self.inner(self), 0.0)))

    def effective_radius(self, rel=1e-14):
        """Frequency radius beyond which every term is below ``rel`` of its peak."""
        if not len(self):
            return 0.0
        smax = np.linalg.norm(self.L, ord=2, axis=(1, 2))
        return float(2.0 * np.sqrt(np.log(1.0 / rel)) * smax.max())


# ---------------------------------------------------------------------------
# configuration and primitives


@dataclass(frozen=True)
class SchemeConfig:
    """Scheme settings.

    ``r0`` is the half-diagonal of the rescaled band box; ``order`` is the
    stencil order ``J``; ``deconv_min`` is the minimum number of midpoints
    per axis in the deconvolution quadrature.
    """

    r0: float = 6.0
    order: int = 2
    deconv_min: int = 192
    samples_per_period: int = 8
    generator_extent: tuple = (26.0, 8.0)
    grid: str = DEFAULT_GRID
    ramp: Ramp = dc_field(default_factory=Ramp)
    xi_floor: float = 1e-6

    def __post_init__(self):
        if not self.r0 > 0:
            raise SchemeError("r0 must be positive")
        if self.order < 1:
            raise SchemeError("stencil order must be >= 1")


DEFAULT_CONFIG = SchemeConfig()


def phi_hat(xi):
    xi = np.asarray(xi, dtype=float)
    return 0.5 * np.exp(-0.25 * np.sum(xi * xi, -1))


def cutoff(r, ramp=Ramp()):
    """Radial cut-off: 1 up to radius 1, smooth descent to 0 at radius 2."""
    r = np.asarray(r, dtype=float)
    return np.where(r <= 1, 1.0, np.where(r < 2, ramp(2.0 - r), 0.0))


def scheme_lattice(h):
    """Points of ``h Z^2`` strictly inside radius ``2/h``, row-major."""
    if not h > 0:
        raise SchemeError("spacing must be positive")
    n = int(np.ceil(2.0 / h**2))
    k = np.arange(-n, n + 1)
    k1, k2 = np.meshgrid(k, k, indexing="ij")
    pts = np.stack([k1.ravel(), k2.ravel()], 1) * h
    return pts[np.hypot(pts[:, 0], pts[:, 1]) < 2.0 / h]


@dataclass(frozen=True)
class DifferenceStencil:
    order: int
    kappa: float
    coeffs: np.ndarray
    offsets: np.ndarray

    def symbol(self, xi1):
        xi1 = np.asarray(xi1, dtype=float)
        return np.sum(self.coeffs * np.exp(1j * np.multiply.outer(xi1, self.offsets)), -1)


def make_stencil(J, kappa):
    """Taps of ``F -> sum_k c_k F(. + (2k - J) e1 / kappa)`` with symbol ``sin(xi1/kappa)^J``."""
    if J < 1 or not kappa > 0:
        raise SchemeError("stencil needs J >= 1 and kappa > 0")
    k = np.arange(J + 1)
    coeffs = np.array([comb(J, int(i)) * (-1) ** (J - int(i)) for i in k], dtype=complex)
    coeffs /= (2j) ** J
    if J % 2 == 0:
        coeffs = coeffs.real.astype(complex)
    return DifferenceStencil(J, float(kappa), coeffs, (2 * k - J) / kappa)


def budget_to_h(M, j, cfg=DEFAULT_CONFIG):
    taps = cfg.order + 1 if j >= 4 else 1
    if M < taps:
        raise SchemeError(f"budget {M} below the minimum {taps} for scale {j}")
    return (B2_COEFF * taps / M) ** 0.25


# ---------------------------------------------------------------------------
# band-limited targets


@dataclass(frozen=True)
class Band:
    """A transform ``ft`` vanishing outside the box ``[-b1, b1] x [-b2, b2]``."""

    ft: object
    b1: float
    b2: float
    extent: tuple = (1.0, 1.0)


def generator_band(j, cfg=DEFAULT_CONFIG):
    g = scale_geometry(j, cfg.grid)
    h1, h2 = band_halfwidths(j, cfg.grid)
    windows = DEFAULT_WINDOWS if cfg.ramp == Ramp() else type(DEFAULT_WINDOWS)(cfg.ramp)
    return Band(lambda xi: generator_ft(j, xi, cfg.grid, windows),
                h1 / g.dilation[0], h2 / g.dilation[1], cfg.generator_extent)


def normalization(j, cfg=DEFAULT_CONFIG):
    """Diagonal rescale ``(s1, s2)`` mapping the generator band box to half-diagonal ``r0``."""
    band = generator_band(j, cfg)
    return np.sqrt(2.0) * np.array([band.b1, band.b2]) / cfg.r0


def _midpoints(b, n):
    return (np.arange(n) + 0.5) * (2 * b / n) - b


def _deconv_grid(band, scale, reach, cfg):
    """Midpoint axes covering the band, fine enough for phases up to ``reach``."""
    sizes = []
    for b, s, e, r in zip((band.b1, band.b2), scale, band.extent, reach):
        # spatial content of the integrand: target extent plus the phase reach
        span = e + r / s
        step = min(np.pi / span, 2 * np.pi / max(r / s, 1e-300) / cfg.samples_per_period)
        sizes.append(max(cfg.deconv_min, int(np.ceil(2 * b / step))))
    return _midpoints(band.b1, sizes[0]), _midpoints(band.b2, sizes[1])


def _quotient(band, scale, x1, x2, stencil, cfg):
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    xi = np.stack([X1, X2], -1)
    F = band.ft(xi)
    xin = xi / scale
    den = phi_hat(xin).astype(complex)
    if stencil is not None:
        sym = np.sin(xin[..., 0] / stencil.kappa) ** stencil.order
        live = F != 0
        # a zero of the symbol may fall between samples: test the crossing directly
        if live.any() and np.abs(xin[..., 0][live]).max() >= stencil.kappa * np.pi:
            raise GuardError("difference symbol vanishes inside the band; increase kappa")
        if live.any() and np.abs(sym[live]).min() < cfg.xi_floor:
            raise GuardError("difference symbol nearly vanishes on the band; adjust kappa")
        den = den * sym
    q = np.zeros(F.shape, dtype=complex)
    nz = F != 0
    q[nz] = F[nz] / den[nz]
    return q


def _lattice_samples(q, x1, x2, scale, h):
    """``(2 pi)^-1 int q(xi) exp(i alpha.S^-1 xi) dxi`` on the scheme lattice (separable)."""
    n = int(np.ceil(2.0 / h**2))
    a = np.arange(-n, n + 1) * h
    d = (x1[1] - x1[0]) * (x2[1] - x2[0])
    E1 = np.exp(1j * np.outer(a, x1 / scale[0]))
    E2 = np.exp(1j * np.outer(x2 / scale[1], a))
    table = E1 @ q @ E2 * d / (2 * np.pi)
    A1, A2 = np.meshgrid(a, a, indexing="ij")
    keep = np.hypot(A1, A2) < 2.0 / h
    return np.stack([A1[keep], A2[keep]], 1), table[keep]


def deconvolve_samples(F, points, cfg=DEFAULT_CONFIG, scale=(1.0, 1.0)):
    """Samples of the function whose Gaussian blur is ``F``: ``f^ = F^ / phi^``."""
    band = _as_band(F)
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    scale = np.asarray(scale, dtype=float)
    reach = np.abs(points).max(0) if len(points) else np.zeros(2)
    x1, x2 = _deconv_grid(band, scale, reach, cfg)
    q = _quotient(band, scale, x1, x2, None, cfg)
    d = (x1[1] - x1[0]) * (x2[1] - x2[0])
    E1 = np.exp(1j * np.outer(points[:, 0], x1 / scale[0]))
    E2 = np.exp(1j * np.outer(points[:, 1], x2 / scale[1]))
    vals = np.einsum("pa,ab,pb->p", E1, q, E2) * d / (2 * np.pi)
    return vals.real


def _as_band(F):
    if isinstance(F, Band):
        return F
    box = F.band_box()
    if box is None:
        raise SchemeError("deconvolution needs a band-limited input")
    return Band(F.ft, box[0], box[1], (F.spatial_radius(),) * 2)


def _assemble(centers, weights, scale):
    keep = np.abs(weights) >= PRUNE
    n = int(keep.sum())
    L = np.broadcast_to(np.diag(scale), (n, 2, 2)).copy()
    return GaussianMixture(weights[keep], L, centers[keep] / scale)


def _scheme(band, h, scale, stencil, cfg):
    reach = np.full(2, 2.0 / h)
    x1, x2 = _deconv_grid(band, scale, reach, cfg)
    q = _quotient(band, scale, x1, x2, stencil, cfg)
    alpha, f = _lattice_samples(q, x1, x2, scale, h)
    w = h * h * cutoff(np.hypot(alpha[:, 0], alpha[:, 1]) * h, cfg.ramp) * f / (2 * np.pi)
    if stencil is None:
        return _assemble(alpha, _real(w), scale)
    centers, weights = [], []
    for c, off in zip(stencil.coeffs, stencil.offsets):
        centers.append(alpha - np.array([off, 0.0]))
        weights.append(_real(c * w))
    return _assemble(np.concatenate(centers), np.concatenate(weights), scale)


def _real(z):
    z = np.asarray(z)
    if np.iscomplexobj(z):
        mag = np.abs(z).max(initial=0.0)
        if mag and np.abs(z.imag).max() > 1e-8 * mag:
            raise GuardError("scheme weights are not real; input is not Hermitian")
        return z.real.copy()
    return z


def truncated_scheme(F, h, cfg=DEFAULT_CONFIG, scale=(1.0, 1.0)):
    """Truncated semi-discrete quasi-interpolant of a band-limited ``F``."""
    return _scheme(_as_band(F), h, np.asarray(scale, dtype=float), None, cfg)


def kappa_for(band, scale):
    return 2.0 * (band.b1 / scale[0]) / np.pi


def vm_scheme(F, h, cfg=DEFAULT_CONFIG, scale=(1.0, 1.0), kappa=None):
    """Scheme conjugated by a horizontal difference: its transform vanishes on ``xi1 = 0``."""
    band = _as_band(F)
    scale = np.asarray(scale, dtype=float)
    stencil = make_stencil(cfg.order, kappa_for(band, scale) if kappa is None else kappa)
    return _scheme(band, h, scale, stencil, cfg)


# ---------------------------------------------------------------------------
# generators and curvelets


@lru_cache(maxsize=256)
def generator_scheme(j, h, cfg=DEFAULT_CONFIG):
    """Mixture approximating the scale-``j`` generator at lattice spacing ``h``."""
    band = generator_band(j, cfg)
    scale = normalization(j, cfg)
    stencil = make_stencil(cfg.order, kappa_for(band, scale)) if j >= 4 else None
    return _scheme(band, h, scale, stencil, cfg)


def approximate_generator(j, M, cfg=DEFAULT_CONFIG):
    mix = generator_scheme(j, budget_to_h(M, j, cfg), cfg)
    if len(mix) > M:
        raise SchemeError(f"scheme produced {len(mix)} terms for budget {M}")
    return mix


def approximate_curvelet(index, M, cfg=DEFAULT_CONFIG):
    from .frame import apply_unitary

    return apply_unitary(index, approximate_generator(index.j, M, cfg), cfg.grid)


def error_ft(j, mixture, xi, cfg=DEFAULT_CONFIG):
    """Transform of ``generator - mixture`` at generator-frame points ``xi``."""
    return generator_band(j, cfg).ft(xi) - mixture.ft(xi)


def weighted_error(j, mixture, xi, cfg=DEFAULT_CONFIG, K=3):
    """Error transform divided by its expected decay profile in rescaled coordinates.

    For ``j >= 4`` the profile carries the factor ``min(|xi1'|, 1)^J``, so
    points with ``xi1' = 0`` return NaN; use :func:`error_ft` there.
    """
    xi = np.asarray(xi, dtype=float)
    xin = xi / normalization(j, cfg)
    err = np.abs(error_ft(j, mixture, xi, cfg))
    decay = (1.0 + np.hypot(xin[..., 0], xin[..., 1])) ** (-K)
    if j < 4:
        return err / decay
    vm = np.minimum(np.abs(xin[..., 0]), 1.0) ** cfg.order
    with np.errstate(divide="ignore", invalid="ignore"):
        out = err / (vm * decay)
    # the weight vanishes on the axis, where the quotient is undefined
    return np.where(vm == 0, np.nan, out)


def generator_error_weighted(j, M, xi, cfg=DEFAULT_CONFIG, K=3):
    return weighted_error(j, approximate_generator(j, M, cfg), xi, cfg, K)


def sample_box(j, cfg=DEFAULT_CONFIG, n=100, reach=3.0):
    """Midpoint grid of generator-frame points covering ``reach`` times the rescaled band."""
    s = normalization(j, cfg)
    u = _midpoints(reach * cfg.r0, n)
    U1, U2 = np.meshgrid(u, u, indexing="ij")
    return np.stack([U1 * s[0], U2 * s[1]], -1).reshape(-1, 2)


def sup_weighted_error(j, mixture, cfg=DEFAULT_CONFIG, n=100, K=3):
    return float(np.nanmax(weighted_error(j, mixture, sample_box(j, cfg, n), cfg, K)))


__all__ = [
    "GaussianTerm", "GaussianMixture", "SchemeConfig", "DifferenceStencil", "Band",
    "SchemeError", "GuardError", "gaussian_ft", "phi_hat", "cutoff", "scheme_lattice",
    "make_stencil", "budget_to_h", "deconvolve_samples", "truncated_scheme", "vm_scheme",
    "generator_band", "normalization", "generator_scheme", "approximate_generator",
    "approximate_curvelet", "error_ft", "weighted_error", "generator_error_weighted",
    "sample_box", "sup_weighted_error", "SUPPORT_A", "PI",
]
