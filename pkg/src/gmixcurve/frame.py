"""Curvelet tight frame evaluated analytically in frequency.

Windows are built from a smooth ramp ``m`` with ``m(t) + m(1 - t) = 1``;
every partition identity then holds exactly.  Curvelets are indexed by
``(j, l, k1, k2)``: scale, orientation and an integer pair addressing the
scale lattice.  The Fourier transform is unitary,
``f^(xi) = (2 pi)^-1 int f(x) exp(-i x.xi) dx``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

PI = np.pi
GRIDS = ("tight", "narrow")
DEFAULT_GRID = "tight"

# support constants of the generator transforms
SUPPORT_A = np.sqrt(2.0) * PI / 3.0
SUPPORT_B = 16.0 * PI**2 / 3.0


class FrameError(ValueError):
    """Invalid frame request (bad scale, cutoff too small, ...)."""


# ---------------------------------------------------------------------------
# windows


def _exp_bump(t):
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


@dataclass(frozen=True)
class Ramp:
    """Smooth transition ``m`` from 0 on ``t <= 0`` to 1 on ``t >= 1``.

    ``kind="exp"`` is infinitely smooth; ``kind="poly"`` uses
    ``t^p / (t^p + (1 - t)^p)`` which is ``C^(p-1)`` at the endpoints.
    """

    kind: str = "exp"
    order: int = 0

    def __post_init__(self):
        if self.kind not in ("exp", "poly"):
            raise FrameError(f"unknown ramp kind {self.kind!r}")
        if self.kind == "poly" and self.order < 4:
            raise FrameError("polynomial ramp needs order >= 4")

    def __call__(self, t):
        t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
        if self.kind == "exp":
            a, b = _exp_bump(t), _exp_bump(1.0 - t)
        else:
            a, b = t**self.order, (1.0 - t) ** self.order
        return a / (a + b)


@dataclass(frozen=True)
class WindowSet:
    """Coarse radial window ``w0``, radial window ``w`` and angular window ``nu``."""

    ramp: Ramp = Ramp()

    def w(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        rise = (r >= 2 * PI / 3) & (r <= 4 * PI / 3)
        fall = (r > 4 * PI / 3) & (r <= 8 * PI / 3)
        out[rise] = np.sin(0.5 * PI * self.ramp(3 * r[rise] / (2 * PI) - 1))
        out[fall] = np.sin(0.5 * PI * (1.0 - self.ramp(3 * r[fall] / (4 * PI) - 1)))
        return out

    def w0(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r <= 4 * PI / 3, 1.0, self.w(r))

    def nu(self, theta):
        th = np.abs(np.asarray(theta, dtype=float))
        out = np.zeros_like(th)
        inside = th <= PI
        out[inside] = np.sin(0.5 * PI * (1.0 - self.ramp(th[inside] / PI)))
        return out


def build_windows(kind="exp", order=0):
    return WindowSet(Ramp(kind, order))


DEFAULT_WINDOWS = WindowSet()


def wrap_angle(theta):
    """Map angles to ``(-pi, pi]``."""
    out = np.mod(np.asarray(theta, dtype=float) + PI, 2 * PI) - PI
    return np.where(out == -PI, PI, out)


def _split(xi):
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1] != 2:
        raise FrameError("frequency points must have a trailing axis of length 2")
    return xi[..., 0], xi[..., 1]


def eval_chi(j, xi, windows=DEFAULT_WINDOWS):
    """Wedge multiplier ``chi_j`` at frequency points ``xi`` (shape ``(..., 2)``)."""
    if j < 0:
        raise FrameError("scale must be non-negative")
    x, y = _split(xi)
    r = np.hypot(x, y)
    if j == 0:
        return windows.w0(r)
    if j == 1:
        return windows.w(r / 2)
    a = 2 ** (j // 2)
    th = np.arctan2(y, x)
    ang = windows.nu(a * wrap_angle(th)) + windows.nu(a * wrap_angle(th - PI))
    return windows.w(r / 2**j) * ang


# ---------------------------------------------------------------------------
# geometry


@dataclass(frozen=True)
class ScaleGeometry:
    """Per-scale constants.

    ``Lam`` and ``lam`` are the lattice periods actually used (width and
    height of the rotated frequency cell); ``eps1 = Lam 2^-j`` and
    ``eps2 = lam 2^-a`` with ``a = j // 2``.
    """

    j: int
    grid: str
    Lam: float
    lam: float
    t: float

    @property
    def a(self):
        return self.j // 2

    @property
    def n_rot(self):
        return 1 if self.j < 2 else 2**self.a

    @property
    def eps1(self):
        return self.Lam / 2.0**self.j

    @property
    def eps2(self):
        return self.lam / 2.0**self.a

    @property
    def dilation(self):
        return np.array([2.0**self.j, 2.0**self.a])

    @property
    def D(self):
        return np.diag(self.dilation)

    def angle(self, ell):
        return 0.0 if self.j < 2 else PI * ell / 2.0**self.a

    def rotation(self, ell):
        return rotation(self.angle(ell))

    def lattice_point(self, k1, k2):
        return np.array([2 * PI * k1 / self.Lam, 2 * PI * k2 / self.lam])


def rotation(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


@lru_cache(maxsize=None)
def scale_geometry(j, grid=DEFAULT_GRID):
    if j < 0:
        raise FrameError("scale must be non-negative")
    if grid not in GRIDS:
        raise FrameError(f"unknown grid {grid!r}")
    if j < 2:
        size = 16 * PI / 3 * 2**j
        return ScaleGeometry(j, grid, size, size, 0.0)
    turn = PI / 2 ** (j // 2)
    lam = 16 * PI / 3 * 2**j * np.sin(turn)
    t = 2**j * 2 * PI / 3 * np.cos(turn)
    if grid == "narrow":
        Lam = 2 * (8 * PI / 3 * 2**j - t)
    else:
        # full diameter of the two-lobe wedge: the period cell covers it
        Lam = 16 * PI / 3 * 2**j
    return ScaleGeometry(j, grid, Lam, lam, t)


# ---------------------------------------------------------------------------
# indices and evaluation


@dataclass(frozen=True, order=True)
class CurveletIndex:
    j: int
    l: int = 0
    k1: int = 0
    k2: int = 0

    def __post_init__(self):
        if self.j < 0:
            raise FrameError("scale must be non-negative")
        n_rot = 1 if self.j < 2 else 2 ** (self.j // 2)
        if not 0 <= self.l < n_rot:
            raise FrameError(f"orientation {self.l} out of range for scale {self.j}")

    def key(self):
        return (self.j, self.l, self.k1, self.k2)


def pu_total(xi, j_max, windows=DEFAULT_WINDOWS):
    """Sum of squared multipliers over all scales ``<= j_max`` and rotations."""
    xi = np.asarray(xi, dtype=float)
    r = np.hypot(xi[..., 0], xi[..., 1])
    if np.any(r >= 2 * PI / 3 * 2 ** (j_max + 1)):
        raise FrameError("cutoff too small: scale j_max + 1 still reaches these points")
    total = np.zeros(r.shape)
    for j in range(j_max + 1):
        g = scale_geometry(j)
        for ell in range(g.n_rot):
            total += eval_chi(j, rotate_back(xi, g.angle(ell)), windows) ** 2
    return total


def rotate_back(xi, angle):
    """Apply ``R^*`` (clockwise rotation by ``angle``) to points ``xi``."""
    xi = np.asarray(xi, dtype=float)
    c, s = np.cos(angle), np.sin(angle)
    x, y = xi[..., 0], xi[..., 1]
    return np.stack([c * x + s * y, -s * x + c * y], axis=-1)


def translation_grid(j, radius, grid=DEFAULT_GRID):
    """Integer pairs ``(k1, k2)`` of lattice points within ``radius``, row-major."""
    if radius <= 0:
        raise FrameError("radius must be positive")
    g = scale_geometry(j, grid)
    s1, s2 = 2 * PI / g.Lam, 2 * PI / g.lam
    n1, n2 = int(np.floor(radius / s1)), int(np.floor(radius / s2))
    k1, k2 = np.meshgrid(np.arange(-n1, n1 + 1), np.arange(-n2, n2 + 1), indexing="ij")
    keep = np.hypot(k1 * s1, k2 * s2) <= radius
    return list(zip(k1[keep].tolist(), k2[keep].tolist()))


def generator_ft(j, xi, grid=DEFAULT_GRID, windows=DEFAULT_WINDOWS):
    g = scale_geometry(j, grid)
    xi = np.asarray(xi, dtype=float)
    return eval_chi(j, xi * g.dilation, windows) / np.sqrt(g.eps1 * g.eps2)


def curvelet_ft(index, xi, grid=DEFAULT_GRID, windows=DEFAULT_WINDOWS):
    g = scale_geometry(index.j, grid)
    eta = rotate_back(xi, g.angle(index.l))
    k = g.lattice_point(index.k1, index.k2)
    phase = np.exp(-1j * (eta[..., 0] * k[0] + eta[..., 1] * k[1]))
    return eval_chi(index.j, eta, windows) * phase / np.sqrt(g.Lam * g.lam)


def band_halfwidths(j, grid=DEFAULT_GRID):
    """Half-extents of the wedge of scale ``j`` in its rotated frame."""
    g = scale_geometry(j, grid)
    rmax = 8 * PI / 3 * 2**j
    if j < 2:
        return rmax, rmax
    return rmax, rmax * np.sin(PI / 2**g.a)


def apply_unitary(index, mixture, grid=DEFAULT_GRID):
    """Push a Gaussian mixture through ``F -> |D|^(1/2) F(D(R^* x - k))``."""
    from .gaussmix import GaussianMixture

    g = scale_geometry(index.j, grid)
    R = g.rotation(index.l)
    D = g.D
    k = g.lattice_point(index.k1, index.k2)
    Dinv = np.diag(1.0 / g.dilation)
    weights = mixture.weights * np.sqrt(np.prod(g.dilation))
    L = mixture.L @ D @ R.T
    centers = (k + mixture.centers @ Dinv) @ R.T
    return GaussianMixture(weights, L, centers)
