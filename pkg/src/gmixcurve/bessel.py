"""Finite-sample audits of the quantities behind the frame-stability argument.

Every routine is a truncated evaluation: scale sums stop at ``j_max`` and
lattice sums at a radius, and the reports record both.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .frame import DEFAULT_GRID, PI, rotate_back, scale_geometry


class AuditError(ValueError):
    pass


@dataclass(frozen=True)
class EtaParams:
    J: float = 2.0
    K: float = 3.0

    def __post_init__(self):
        if not (self.J > 1 and self.K > 2):
            raise AuditError("need J > 1 and K > 2")


def eta(x, p=EtaParams()):
    """``min(|x1|^J, 1) (1 + |x|)^-K``."""
    x = np.asarray(x, dtype=float)
    return np.minimum(np.abs(x[..., 0]) ** p.J, 1.0) * (1 + np.hypot(x[..., 0], x[..., 1])) ** (-p.K)


def rho(alpha, j):
    alpha = np.asarray(alpha, dtype=float)
    if np.any((alpha <= 0) | (alpha > 1)) or np.any(np.asarray(j) < 0):
        raise AuditError("rho needs 0 < alpha <= 1 and j >= 0")
    j = np.asarray(j)
    return np.sqrt(alpha**2 * 4.0**j + (1 - alpha**2) * 4.0 ** (j // 2))


def star_norm_partial(xi, j_max, p=EtaParams()):
    """``sum_(j <= j_max) sum_l eta(D_j^-1 R_(j,l)^* xi)`` for each point."""
    if j_max < 0:
        raise AuditError("j_max must be non-negative")
    xi = np.asarray(xi, dtype=float)
    return kernels.star_sum(xi.reshape(-1, 2), 0, j_max, p.J, p.K).reshape(xi.shape[:-1])


def star_increment(xi, j_lo, j_hi, p=EtaParams()):
    """Contribution of scales ``j_lo < j <= j_hi`` alone."""
    xi = np.asarray(xi, dtype=float)
    return kernels.star_sum(xi.reshape(-1, 2), j_lo + 1, j_hi, p.J, p.K).reshape(xi.shape[:-1])


# ---------------------------------------------------------------------------
# sectors

_REFLECT = np.array([[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]])


@dataclass(frozen=True)
class SectorSpec:
    s: int
    t: int
    k: int = 0

    def __post_init__(self):
        if self.t < 0 or self.k not in (0, 1, 2, 3):
            raise AuditError("sector needs t >= 0 and quadrant 0..3")

    def contains(self, x):
        """Membership of points ``x`` (shape ``(..., 2)``)."""
        y = np.asarray(x, dtype=float) * _REFLECT[self.k]
        r = np.hypot(y[..., 0], y[..., 1])
        with np.errstate(invalid="ignore", divide="ignore"):
            cos = np.where(r > 0, y[..., 0] / np.where(r > 0, r, 1.0), 0.0)
        return ((r >= 2.0**self.s) & (r <= 2.0 ** (self.s + 1))
                & (y[..., 0] >= 0) & (y[..., 1] >= 0)
                & (cos >= 2.0 ** (-self.t - 1)) & (cos <= 2.0 ** (-self.t)))


def _angle_windows(cl, ch, c2):
    """Intervals in ``[0, pi)`` where ``|cos| in [cl, ch]`` and ``|sin| <= c2``."""
    if cl > 1:
        return []
    lo, hi = np.arccos(min(ch, 1.0)), np.arccos(cl)
    spans = [(lo, hi), (PI - hi, PI - lo)]
    if c2 < 1:
        cap = np.arcsin(c2)
        spans = [(max(a, 0.0), min(b, cap)) for a, b in spans] + \
                [(max(a, PI - cap), min(b, PI)) for a, b in spans]
    return [(a, b) for a, b in spans if a <= b]


def sector_count(spec, xi, j_max):
    """Number of ``(j, l)``, ``j <= j_max``, mapping ``xi`` into the sector."""
    xi = np.asarray(xi, dtype=float)
    r = float(np.hypot(*xi))
    if r == 0:
        return 0
    theta = float(np.arctan2(xi[1], xi[0]))
    count = 0
    for j in range(j_max + 1):
        g = scale_geometry(j)
        d1, d2 = g.dilation
        # mapped point is (r cos phi / d1, r sin phi / d2)
        if max(r / d1, r / d2) < 2.0**spec.s or r / d1 < 2.0 ** (spec.s - spec.t - 1):
            continue
        n = g.n_rot
        spans = _angle_windows(2.0 ** (spec.s - spec.t - 1) * d1 / r,
                               2.0 ** (spec.s + 1 - spec.t) * d1 / r,
                               2.0 ** (spec.s + 1) * d2 / r)
        cand = set()
        for a, b in spans:
            lo = int(np.floor((theta - b) * n / PI)) - 1
            hi = int(np.ceil((theta - a) * n / PI)) + 1
            if hi - lo >= n:
                cand.update(range(n))
                break
            cand.update(ell % n for ell in range(lo, hi + 1))
        if not cand:
            continue
        ells = np.array(sorted(cand))
        ang = PI * ells / n if j >= 2 else np.zeros(1)
        c, s = np.cos(ang), np.sin(ang)
        pts = np.stack([(c * xi[0] + s * xi[1]) / d1, (-s * xi[0] + c * xi[1]) / d2], -1)
        count += int(spec.contains(pts).sum())
    return count


# ---------------------------------------------------------------------------
# lattices and Gramian rows


def lattice_separation(j, grid=DEFAULT_GRID):
    g = scale_geometry(j, grid)
    return float(min(g.eps1, g.eps2))


def brute_separation(j, grid=DEFAULT_GRID, box=2):
    g = scale_geometry(j, grid)
    k = np.arange(-box, box + 1)
    K1, K2 = np.meshgrid(k, k, indexing="ij")
    pts = np.stack([K1.ravel() * g.eps1, K2.ravel() * g.eps2], 1)
    d = np.hypot(*(pts[:, None] - pts[None]).transpose(2, 0, 1))
    return float(d[d > 0].min())


def gramian_row_sum(xi, j_max, radius=40.0, psi=None, grid=DEFAULT_GRID, drop=1e-13):
    """Truncated dual-Gramian row sum at one frequency.

    ``psi(j, x)`` returns non-negative magnitudes at points ``x`` in the
    scale-``j`` generator frame (default: ``eta`` with ``(J, K) = (2, 3)``).
    Rotations whose outer factor falls below ``drop`` times the running
    maximum skip the lattice sum; their share is bounded by
    ``inner_bound * sum(dropped outer)`` and returned as ``dropped``.
    Returns ``(value, dropped, edge)`` where ``edge`` is the largest relative
    contribution of the outermost lattice shell.
    """
    psi = psi or (lambda j, x: eta(x))
    xi = np.asarray(xi, dtype=float)
    total, dropped_outer, edge, peak = 0.0, 0.0, 0.0, 0.0
    inner_bound = 0.0
    for j in range(j_max + 1):
        g = scale_geometry(j, grid)
        n = g.n_rot
        ang = PI * np.arange(n) / n if j >= 2 else np.zeros(1)
        c, s = np.cos(ang), np.sin(ang)
        x = np.stack([(c * xi[0] + s * xi[1]) / g.dilation[0],
                      (-s * xi[0] + c * xi[1]) / g.dilation[1]], -1)
        outer = psi(j, x)
        peak = max(peak, float(outer.max(initial=0.0)))
        keep = outer > drop * peak
        dropped_outer += float(outer[~keep].sum())
        if not keep.any():
            continue
        n1, n2 = int(radius // g.eps1), int(radius // g.eps2)
        k1, k2 = np.meshgrid(np.arange(-n1, n1 + 1), np.arange(-n2, n2 + 1), indexing="ij")
        lat = np.stack([k1.ravel() * g.eps1, k2.ravel() * g.eps2], 1)
        inside = np.hypot(lat[:, 0], lat[:, 1]) <= radius
        lat, shell = lat[inside], np.hypot(lat[inside, 0], lat[inside, 1]) > radius - max(g.eps1, g.eps2)
        vals = psi(j, (x[keep][:, None, :] - lat[None]).reshape(-1, 2)).reshape(int(keep.sum()), len(lat))
        inner = vals.sum(1)
        inner_bound = max(inner_bound, float(inner.max()))
        total += float(outer[keep] @ inner)
        if inner.max() > 0:
            edge = max(edge, float((vals[:, shell].sum(1) / np.maximum(inner, 1e-300)).max()))
    return total, inner_bound * dropped_outer, edge


# ---------------------------------------------------------------------------
# reports


@dataclass
class AuditReport:
    check: str
    samples: int
    j_max: int
    max_value: float
    bound: float
    passed: bool

    def to_dict(self):
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


def random_frequencies(rng, n, log2_lo=-4.0, log2_hi=12.0):
    """Points with log-uniform radius and uniform angle."""
    r = 2.0 ** rng.uniform(log2_lo, log2_hi, n)
    th = rng.uniform(-PI, PI, n)
    return np.stack([r * np.cos(th), r * np.sin(th)], -1)


def audit_star(samples=1000, j_lo=20, j_hi=40, seed=0, p=EtaParams()):
    rng = np.random.default_rng(seed)
    xi = random_frequencies(rng, samples)
    base = star_norm_partial(xi, j_lo, p)
    inc = star_increment(xi, j_lo, j_hi, p)
    ratio = float(np.max(inc / base))
    return AuditReport("star_norm_increment", samples, j_hi, ratio, 1e-3, ratio <= 1e-3)


def audit_sectors(samples=10000, j_max=40, seed=0):
    rng = np.random.default_rng(seed)
    worst, ok = -np.inf, True
    for _ in range(samples):
        s, t, k = int(rng.integers(-10, 11)), int(rng.integers(0, 9)), int(rng.integers(0, 4))
        xi = random_frequencies(rng, 1, -12.0, 52.0)[0]
        c = sector_count(SectorSpec(s, t, k), xi, j_max)
        worst = max(worst, c / (9 * 2**t))
        ok &= c <= 9 * 2**t
    return AuditReport("sector_count_ratio", samples, j_max, float(worst), 1.0, bool(ok))


def audit_separation(j_max=40, grid=DEFAULT_GRID):
    q = min(lattice_separation(j, grid) for j in range(j_max + 1))
    return AuditReport("lattice_separation_min", j_max + 1, j_max, q, 4 * PI, q >= 4 * PI)


def audit_rho(samples=10000, j_max=40, seed=0):
    rng = np.random.default_rng(seed)
    alpha = rng.uniform(1e-6, 1.0, samples)
    j = rng.integers(0, j_max + 1, samples)
    ratio = np.sqrt(2) * rho(alpha, j) / rho(alpha / 2, j + 2)
    worst = float(ratio.max())
    return AuditReport("rho_growth_ratio", samples, j_max, worst, 1.0, worst <= 1.0 + 1e-12)


def audit_rowsum(samples=100, j_max=20, radius=40.0, seed=0):
    rng = np.random.default_rng(seed)
    xi = random_frequencies(rng, samples, -2.0, 10.0)
    vals = np.array([gramian_row_sum(x, j_max, radius)[0] for x in xi])
    med = float(np.median(vals))
    return AuditReport("gramian_row_sum_max_over_median", samples, j_max,
                       float(vals.max() / med), 2.0, bool(vals.max() <= 2 * med))
