"""Functions known through their Fourier transforms, and quadrature on them.

Norms are computed on the frequency side.  By default the plane is split
with the frame's own squared partition ``sum |chi_j(R^* xi)|^2 = 1`` and each
wedge is integrated with the midpoint rule in its rotated box, so only the
terms that reach a wedge are evaluated there and the step adapts to their
spatial spread.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .frame import (
    DEFAULT_GRID, DEFAULT_WINDOWS, PI, CurveletIndex, band_halfwidths, eval_chi,
    rotate_back, scale_geometry, wrap_angle,
)
from .gaussmix import GaussianMixture, GaussianTerm

# spatial reach of a generator at 1e-6 of its peak, in generator coordinates
GENERATOR_EXTENT = (26.0, 8.0)
_CHUNK = 1 << 21


class QuadratureError(ValueError):
    """The quadrature setup cannot resolve the integrand."""


@dataclass(frozen=True)
class QuadratureConfig:
    """Quadrature settings.

    ``step`` forces one grid step everywhere (``None`` adapts per wedge);
    ``regions`` is an optional list of rectangles ``(x0, x1, y0, y1)`` that
    replaces the wedge partition; ``oversample`` refines the adaptive step.
    With ``gaussian_closed_form`` the Gaussian energy outside the curvelet
    scales comes from the closed-form Gram sum instead of quadrature.
    """

    step: float | None = None
    regions: tuple | None = None
    oversample: float = 1.0
    samples_per_period: int = 8
    tail: float = 1e-14
    max_points: int = 4_000_000
    gaussian_closed_form: bool = True

    def refined(self, factor=2.0):
        step = None if self.step is None else self.step / factor
        return replace(self, step=step, oversample=self.oversample * factor)


DEFAULT_QUADRATURE = QuadratureConfig()


def _curvelet_reach(j):
    g = scale_geometry(j)
    return max(GENERATOR_EXTENT[0] / g.dilation[0], GENERATOR_EXTENT[1] / g.dilation[1])


class SpectralFunction:
    """Linear combination of curvelets and Gaussian terms.

    ``curvelets`` is a list of ``(weight, CurveletIndex)``; ``gaussians`` a
    :class:`GaussianMixture` with real weights.
    """

    def __init__(self, curvelets=(), gaussians=None, grid=DEFAULT_GRID, windows=DEFAULT_WINDOWS):
        self.curvelets = [(complex(w), idx) for w, idx in curvelets]
        self.gaussians = gaussians if gaussians is not None else GaussianMixture()
        self.grid = grid
        self.windows = windows

    @classmethod
    def from_terms(cls, terms, grid=DEFAULT_GRID):
        curv, gauss = [], []
        for w, atom in terms:
            if isinstance(atom, CurveletIndex):
                curv.append((w, atom))
            elif isinstance(atom, GaussianTerm):
                if np.imag(w) != 0:
                    raise ValueError("Gaussian terms take real weights")
                gauss.append(GaussianTerm(float(np.real(w)) * atom.weight, atom.L, atom.center))
            else:
                raise TypeError(f"unsupported atom {atom!r}")
        return cls(curv, GaussianMixture.from_terms(gauss), grid)

    def __sub__(self, other):
        return SpectralFunction(
            self.curvelets + [(-w, i) for w, i in other.curvelets],
            GaussianMixture.concat([self.gaussians, other.gaussians.scaled(-1.0)]),
            self.grid, self.windows)

    def __add__(self, other):
        return SpectralFunction(self.curvelets + other.curvelets,
                                GaussianMixture.concat([self.gaussians, other.gaussians]),
                                self.grid, self.windows)

    def merged(self):
        """Same function with repeated atoms combined and zero weights dropped."""
        acc = {}
        for w, idx in self.curvelets:
            acc[idx] = acc.get(idx, 0) + w
        curv = [(w, idx) for idx, w in acc.items() if w != 0]
        return SpectralFunction(curv, self.gaussians.merged(), self.grid, self.windows)

    def is_empty(self):
        return not self.curvelets and not len(self.gaussians)

    # -- evaluation -------------------------------------------------------

    def groups(self):
        out = defaultdict(list)
        for w, idx in self.curvelets:
            out[(idx.j, idx.l)].append((w, idx.k1, idx.k2))
        return out

    def ft(self, xi, groups=None, gaussians=None):
        xi = np.asarray(xi, dtype=float)
        flat = xi.reshape(-1, 2)
        out = np.zeros(len(flat), dtype=complex)
        groups = self.groups() if groups is None else groups
        for (j, ell), items in sorted(groups.items()):
            out += _group_ft(j, ell, items, flat, self.grid, self.windows)
        mix = self.gaussians if gaussians is None else gaussians
        if len(mix):
            out += mix.ft(flat)
        return out.reshape(xi.shape[:-1])

    # -- descriptors ------------------------------------------------------

    def band_box(self):
        """Half-widths of an axis-aligned box holding the spectrum, ``None`` if unbounded."""
        if len(self.gaussians):
            return None
        if not self.curvelets:
            return (0.0, 0.0)
        r = max(8 * PI / 3 * 2**idx.j for _, idx in self.curvelets)
        return (r, r)

    def spatial_radius(self):
        r = 0.0
        for _, idx in self.curvelets:
            g = scale_geometry(idx.j, self.grid)
            r = max(r, np.hypot(*g.lattice_point(idx.k1, idx.k2)) + _curvelet_reach(idx.j))
        if len(self.gaussians):
            r = max(r, float(np.max(_gauss_reach(self.gaussians))))
        return r

    def max_translation(self):
        m = 0.0
        for _, idx in self.curvelets:
            m = max(m, np.hypot(*scale_geometry(idx.j, self.grid).lattice_point(idx.k1, idx.k2)))
        if len(self.gaussians):
            m = max(m, float(np.hypot(*self.gaussians.centers.T).max()))
        return m


def _gauss_reach(mix):
    smin = np.linalg.svd(mix.L, compute_uv=False)[:, -1]
    return np.hypot(*mix.centers.T) + np.sqrt(np.log(1e16)) / smin


def _group_ft(j, ell, items, flat, grid, windows):
    g = scale_geometry(j, grid)
    eta = rotate_back(flat, g.angle(ell))
    chi = eval_chi(j, eta, windows)
    out = np.zeros(len(flat), dtype=complex)
    live = np.nonzero(chi)[0]
    if not len(live):
        return out
    w = np.array([it[0] for it in items], dtype=complex)
    k1 = np.array([it[1] for it in items])
    k2 = np.array([it[2] for it in items])
    vals = kernels.lattice_phase_sum(eta[live], 2 * PI / g.Lam, 2 * PI / g.lam, k1, k2, w)
    out[live] = chi[live] * vals / np.sqrt(g.Lam * g.lam)
    return out


def eval_ft(f, xi):
    return f.ft(xi)


# ---------------------------------------------------------------------------
# quadrature


def _midpoints(lo, hi, n):
    return lo + (np.arange(n) + 0.5) * ((hi - lo) / n)


def _pick_step(q, reach, translation):
    if q.step is not None:
        if translation > 0 and q.step > 2 * PI / translation / q.samples_per_period:
            raise QuadratureError("grid step too coarse for the translations present")
        return q.step
    step = PI / (max(reach, 1e-12) * q.oversample)
    if translation > 0:
        step = min(step, 2 * PI / translation / q.samples_per_period)
    return step


def _sector_min(Q, phi, half):
    """Minimum of ``u(t)^T Q u(t)`` over unit vectors with angle ``t`` in ``[phi - half, phi + half]``."""
    mean = 0.5 * (Q[:, 0, 0] + Q[:, 1, 1])
    dev = 0.5 * (Q[:, 0, 0] - Q[:, 1, 1])
    rad = np.hypot(dev, Q[:, 0, 1])
    if half >= PI / 2:
        return mean - rad
    # q(t) = mean + rad cos(2 (t - t_max)); the minimum sits a quarter turn away
    t_min = 0.5 * np.arctan2(Q[:, 0, 1], dev) + PI / 2
    off = np.abs(wrap_angle(2 * (t_min - phi))) / 2
    ends = [mean + rad * np.cos(2 * (phi + s * half - t_min + PI / 2)) for s in (-1, 1)]
    return np.where(off <= half, mean - rad, np.minimum(*ends))


def _wedge_terms(f, j, q, ell=None):
    """Curvelet groups and Gaussian terms that can be non-negligible on scale ``j``.

    With ``ell`` the Gaussian bound also uses the angular extent of that wedge.
    """
    groups = {key: v for key, v in f.groups().items() if abs(key[0] - j) <= 1}
    mix = f.gaussians
    if len(mix):
        r_lo = 0.0 if j == 0 else 2 * PI / 3 * 2**j
        amp, minv, _ = mix._packed()
        amp = np.abs(amp)
        Q = minv.transpose(0, 2, 1) @ minv
        g = scale_geometry(j, f.grid)
        if ell is None or j < 2:
            low = _sector_min(Q, 0.0, PI)
        else:
            # both lobes give the same bound since the forms are even
            low = _sector_min(Q, g.angle(ell), PI / 2**g.a)
        bound = amp * np.exp(-0.25 * r_lo**2 * np.maximum(low, 0.0))
        keep = bound > q.tail * max(amp.max(), 1e-300)
        mix = GaussianMixture(mix.weights[keep], mix.L[keep], mix.centers[keep])
    return groups, mix


def _reach_of(f, groups, mix):
    reach, trans = 0.0, 0.0
    for (j, ell), items in groups.items():
        g = scale_geometry(j, f.grid)
        for _, k1, k2 in items:
            t = np.hypot(*g.lattice_point(k1, k2))
            trans = max(trans, t)
            reach = max(reach, t + _curvelet_reach(j))
    if len(mix):
        reach = max(reach, float(_gauss_reach(mix).max()))
        trans = max(trans, float(np.hypot(*mix.centers.T).max()))
    return reach, trans


def _top_scale(f, q):
    top = max([idx.j + 1 for _, idx in f.curvelets], default=0)
    if len(f.gaussians):
        R = f.gaussians.effective_radius(q.tail)
        while 2 * PI / 3 * 2 ** (top + 1) < R:
            top += 1
    return top


def _wedge_integral(f, j, ell, q, integrand):
    """``int integrand(F(xi)) chi_j(R^* xi)^2 dxi`` over one wedge by the midpoint rule."""
    g = scale_geometry(j, f.grid)
    groups, mix = _wedge_terms(f, j, q, ell)
    if not groups and not len(mix):
        return 0.0
    reach, trans = _reach_of(f, groups, mix)
    step = _pick_step(q, reach, trans)
    b1, b2 = band_halfwidths(j, f.grid)
    n1, n2 = max(2, int(np.ceil(2 * b1 / step))), max(2, int(np.ceil(2 * b2 / step)))
    x1 = _midpoints(-b1, b1, n1)
    total = 0.0
    rows = max(1, q.max_points // n2)
    x2 = _midpoints(-b2, b2, n2)
    for lo in range(0, n1, rows):
        E1, E2 = np.meshgrid(x1[lo:lo + rows], x2, indexing="ij")
        eta = np.stack([E1.ravel(), E2.ravel()], 1)
        chi = eval_chi(j, eta, f.windows)
        live = chi > 0
        if not live.any():
            continue
        xi = rotate_back(eta[live], -g.angle(ell))
        vals = f.ft(xi, groups, mix)
        total += float(np.sum(integrand(vals) * chi[live] ** 2))
    return total * (2 * b1 / n1) * (2 * b2 / n2)


def _region_integral(f, q, integrand):
    step = _pick_step(q, f.spatial_radius(), f.max_translation())
    box = f.band_box()
    if box is not None:
        b1, b2 = box
        covered = any(r[0] <= -b1 and r[1] >= b1 and r[2] <= -b2 and r[3] >= b2 for r in q.regions)
        if not covered:
            raise QuadratureError("quadrature regions do not cover the spectrum")
    total = 0.0
    for x0, x1, y0, y1 in q.regions:
        n1, n2 = int(np.ceil((x1 - x0) / step)), int(np.ceil((y1 - y0) / step))
        u, v = _midpoints(x0, x1, n1), _midpoints(y0, y1, n2)
        U, V = np.meshgrid(u, v, indexing="ij")
        vals = f.ft(np.stack([U, V], -1))
        total += float(np.sum(integrand(vals))) * ((x1 - x0) / n1) * ((y1 - y0) / n2)
    return total


def _shared_wedge(fs, gauss, j, ell, q):
    """``int |F_k^ - G^|^2 chi^2`` for each curvelet function ``F_k`` and ``int |G^|^2 chi^2``
    on one wedge; ``G^`` and the window are evaluated once for all ``k``."""
    g = scale_geometry(j, gauss.grid)
    _, mix = _wedge_terms(gauss, j, q, ell)
    groups = [_wedge_terms(f, j, q)[0] for f in fs]
    acc = np.zeros(len(fs) + 1)
    if not len(mix) and not any(groups):
        return acc
    reach, trans = 0.0, 0.0
    for f, gr in zip(fs, groups):
        r, t = _reach_of(f, gr, mix)
        reach, trans = max(reach, r), max(trans, t)
    step = _pick_step(q, reach, trans)
    b1, b2 = band_halfwidths(j, gauss.grid)
    n1, n2 = max(2, int(np.ceil(2 * b1 / step))), max(2, int(np.ceil(2 * b2 / step)))
    x1, x2 = _midpoints(-b1, b1, n1), _midpoints(-b2, b2, n2)
    rows = max(1, q.max_points // n2)
    empty = GaussianMixture()
    for lo in range(0, n1, rows):
        E1, E2 = np.meshgrid(x1[lo:lo + rows], x2, indexing="ij")
        eta = np.stack([E1.ravel(), E2.ravel()], 1)
        chi = eval_chi(j, eta, gauss.windows)
        live = chi > 0
        if not live.any():
            continue
        xi = rotate_back(eta[live], -g.angle(ell))
        w = chi[live] ** 2
        gv = mix.ft(xi) if len(mix) else np.zeros(len(xi), dtype=complex)
        for k, (f, gr) in enumerate(zip(fs, groups)):
            fv = f.ft(xi, gr, empty) - gv if gr else -gv
            acc[k] += float(np.sum((fv.real**2 + fv.imag**2) * w))
        acc[-1] += float(np.sum((gv.real**2 + gv.imag**2) * w))
    return acc * (2 * b1 / n1) * (2 * b2 / n2)


def _shared_energies(fs, mixture, q):
    """``|F_k - G|^2`` for curvelet-only ``F_k``.

    Past the curvelet scales only ``G`` is left, and the squared partition sums
    to one, so that share is ``|G|^2`` minus what the inner wedges hold.
    """
    gauss = SpectralFunction(gaussians=mixture, grid=fs[0].grid, windows=fs[0].windows)
    inner_top = max([idx.j + 1 for f in fs for _, idx in f.curvelets], default=-1)
    parts = []
    for j in range(inner_top + 1):
        for ell in range(scale_geometry(j, gauss.grid).n_rot):
            parts.append(_shared_wedge(fs, gauss, j, ell, q))
    parts = np.sort(np.array(parts).reshape(-1, len(fs) + 1), axis=0)
    inner = parts.sum(0)
    outer = max(mixture.inner(mixture) - inner[-1], 0.0)
    return [float(e) + outer for e in inner[:-1]]


def _energy(f, q):
    f = f.merged()
    if f.is_empty():
        return 0.0
    sq = lambda v: v.real**2 + v.imag**2
    if q.regions is not None:
        return _region_integral(f, q, sq)
    if len(f.gaussians) and q.gaussian_closed_form:
        curv = SpectralFunction(f.curvelets, grid=f.grid, windows=f.windows)
        return _shared_energies([curv], f.gaussians.scaled(-1.0), q)[0]
    parts = []
    for j in range(_top_scale(f, q) + 1):
        for ell in range(scale_geometry(j, f.grid).n_rot):
            parts.append(_wedge_integral(f, j, ell, q, sq))
    return float(np.sum(np.sort(parts)))


def l2_norm(f, q=DEFAULT_QUADRATURE):
    """``(int |f^|^2)^(1/2)``; equals the spatial norm since the transform is unitary."""
    return float(np.sqrt(_energy(f, q)))


def l2_distance(f, g, q=DEFAULT_QUADRATURE):
    return l2_norm(f - g, q)


def distances_to_mixture(fs, mixture, q=DEFAULT_QUADRATURE):
    """``[|f_k - G|]`` for curvelet-only functions ``f_k`` and one mixture ``G``.

    Same values as :func:`l2_distance` term by term, but ``G^`` is evaluated
    once per quadrature point for the whole list.
    """
    fs = [f.merged() for f in fs]
    if any(len(f.gaussians) for f in fs):
        raise ValueError("functions must not carry Gaussian terms")
    mixture = mixture.merged()
    if not len(mixture) or not q.gaussian_closed_form or q.regions is not None:
        g = SpectralFunction(gaussians=mixture, grid=fs[0].grid, windows=fs[0].windows)
        return [l2_distance(f, g, q) for f in fs]
    return [float(np.sqrt(e)) for e in _shared_energies(fs, mixture, q)]


def inner_product(f, index, q=DEFAULT_QUADRATURE):
    """``<f, gamma>`` as ``int f^ conj(gamma^)`` over the wedge of ``gamma``."""
    g = scale_geometry(index.j, f.grid)
    target = SpectralFunction([(1.0, index)], grid=f.grid, windows=f.windows)
    groups = {k: v for k, v in f.groups().items() if abs(k[0] - index.j) <= 1}
    _, mix = _wedge_terms(f, index.j, q, index.l)
    if not groups and not len(mix):
        return 0j
    reach, trans = _reach_of(f, groups, mix)
    t = np.hypot(*g.lattice_point(index.k1, index.k2))
    step = _pick_step(q, max(reach, t + _curvelet_reach(index.j)), max(trans, t))
    b1, b2 = band_halfwidths(index.j, f.grid)
    n1, n2 = int(np.ceil(2 * b1 / step)), int(np.ceil(2 * b2 / step))
    if n1 * n2 > 50 * q.max_points:
        raise QuadratureError("inner product grid too large")
    E1, E2 = np.meshgrid(_midpoints(-b1, b1, n1), _midpoints(-b2, b2, n2), indexing="ij")
    eta = np.stack([E1.ravel(), E2.ravel()], 1)
    live = eval_chi(index.j, eta, f.windows) > 0
    xi = rotate_back(eta[live], -g.angle(index.l))
    vals = f.ft(xi, groups, mix) * np.conj(target.ft(xi))
    return complex(np.sum(vals) * (2 * b1 / n1) * (2 * b2 / n2))


# ---------------------------------------------------------------------------
# frame coefficients by FFT


def wedge_coefficients(f, j, ell, radius=64.0, q=DEFAULT_QUADRATURE):
    """All ``<f, gamma_(j, ell, k)>`` with ``|k| <= radius`` (space units).

    The coefficients over ``k`` are the Fourier-series coefficients of
    ``f^(R eta) chi_j(eta)`` on the rotated period cell; they come from one FFT
    after folding the wedge into the cell.  Returns ``(k1, k2, values)``.
    """
    g = scale_geometry(j, f.grid)
    b1, b2 = band_halfwidths(j, f.grid)
    groups = {k: v for k, v in f.groups().items() if abs(k[0] - j) <= 1}
    _, mix = _wedge_terms(f, j, q, ell)
    reach, _ = _reach_of(f, groups, mix)
    # the FFT period in space must hold the spatial content of f
    span = 2 * (reach + 1.0) * q.oversample
    n1 = _fft_size(max(span * g.Lam / (2 * PI), 2 * b1 / (PI / max(reach, 1e-12))))
    n2 = _fft_size(max(span * g.lam / (2 * PI), 2 * b2 / (PI / max(reach, 1e-12))))
    u1 = (np.arange(n1) + 0.5) * (g.Lam / n1) - g.Lam / 2
    u2 = (np.arange(n2) + 0.5) * (g.lam / n2) - g.lam / 2
    folds1 = range(-int(np.ceil(b1 / g.Lam - 0.5)), int(np.ceil(b1 / g.Lam - 0.5)) + 1)
    folds2 = range(-int(np.ceil(b2 / g.lam - 0.5)), int(np.ceil(b2 / g.lam - 0.5)) + 1)
    cell = np.zeros((n1, n2), dtype=complex)
    for m1 in folds1:
        for m2 in folds2:
            E1, E2 = np.meshgrid(u1 + m1 * g.Lam, u2 + m2 * g.lam, indexing="ij")
            eta = np.stack([E1.ravel(), E2.ravel()], 1)
            chi = eval_chi(j, eta, f.windows)
            live = chi > 0
            if not live.any():
                continue
            vals = np.zeros(len(eta), dtype=complex)
            vals[live] = f.ft(rotate_back(eta[live], -g.angle(ell)), groups, mix) * chi[live]
            cell += vals.reshape(n1, n2)
    # sum_p cell_p exp(i k.eta_p) with eta_p on the midpoint grid
    raw = np.fft.ifft2(cell) * (n1 * n2)
    k1 = np.fft.fftfreq(n1, 1.0 / n1).astype(int)
    k2 = np.fft.fftfreq(n2, 1.0 / n2).astype(int)
    K1, K2 = np.meshgrid(k1, k2, indexing="ij")
    shift = np.exp(1j * PI * (K1 * (1.0 / n1 - 1.0) + K2 * (1.0 / n2 - 1.0)))
    coef = raw * shift * np.sqrt(g.Lam * g.lam) / (n1 * n2)
    keep = np.hypot(2 * PI * K1 / g.Lam, 2 * PI * K2 / g.lam) <= radius
    return K1[keep], K2[keep], coef[keep]


def _fft_size(n):
    n = int(np.ceil(n))
    size = 16
    while size < n:
        size *= 2
    return size


def frame_energy(f, radius=64.0, q=DEFAULT_QUADRATURE, scales=None):
    """Truncated ``sum |<f, gamma>|^2`` over the wedges touching the spectrum of ``f``."""
    if scales is None:
        js = sorted({idx.j for _, idx in f.curvelets})
        scales = range(max(0, js[0] - 1), js[-1] + 2) if js else ()
    total = 0.0
    for j in scales:
        for ell in range(scale_geometry(j, f.grid).n_rot):
            _, _, c = wedge_coefficients(f, j, ell, radius, q)
            total += float(np.sum(np.abs(c) ** 2))
    return total
