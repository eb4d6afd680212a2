"""N-term Gaussian approximation of finite curvelet expansions, and rate studies."""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from .budget import sub_budgets
from .field import DEFAULT_QUADRATURE, SpectralFunction, distances_to_mixture, l2_distance
from .frame import CurveletIndex, apply_unitary, scale_geometry
from .gaussmix import DEFAULT_CONFIG, GaussianMixture, approximate_generator


class SequenceError(ValueError):
    pass


class CoefficientSeq:
    """Coefficients sorted by decreasing magnitude, ties broken by ``(j, l, k1, k2)``."""

    def __init__(self, entries):
        self.entries = list(entries)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def values(self):
        return np.array([w for w, _ in self.entries], dtype=float)

    def head(self, m):
        return CoefficientSeq(self.entries[:m])

    def tail(self, m):
        return CoefficientSeq(self.entries[m:])

    def function(self, grid=None):
        kw = {} if grid is None else {"grid": grid}
        return SpectralFunction([(w, idx) for w, idx in self.entries], **kw)


def rearrange(raw):
    raw = [(float(w), idx) for w, idx in raw]
    keys = [idx.key() for _, idx in raw]
    if len(set(keys)) != len(keys):
        raise SequenceError("duplicate curvelet index")
    return CoefficientSeq(sorted(raw, key=lambda e: (-abs(e[0]), e[1].key())))


def class_norm(seq, alpha):
    if not len(seq):
        return 0.0
    n = np.arange(1, len(seq) + 1)
    return float(np.max(n**alpha * np.abs(seq.values)))


@dataclass
class ApproxReport:
    n_budget: int
    m_star: int
    block_terms: list
    terms_used: int
    generators_built: int
    i_plus: float = float("nan")
    i_minus: float = float("nan")
    total_error: float = float("nan")
    seconds: float = 0.0

    def to_dict(self):
        return asdict(self)


def approximate(seq, N, beta=0.5, cfg=DEFAULT_CONFIG, n0=None):
    """Gaussian approximation of the leading coefficients under budget ``N``.

    Each of the first ``m*`` curvelets receives its sub-budget; generator
    approximations are shared by all curvelets with the same scale and
    sub-budget.  Returns ``(mixture, plan, report)``.
    """
    t0 = time.perf_counter()
    n0 = cfg.order + 1 if n0 is None else n0
    plan = sub_budgets(N, beta, n0)
    cache = {}
    parts, block_terms = [], {}
    for n, (w, idx) in enumerate(seq.entries[:plan.m_star], start=1):
        M = plan.sub_budget(n)
        key = (idx.j, M)
        if key not in cache:
            cache[key] = approximate_generator(idx.j, M, cfg)
        mix = apply_unitary(idx, cache[key], cfg.grid).scaled(w)
        parts.append(mix)
        nu = (n - 1).bit_length()
        block_terms[nu] = block_terms.get(nu, 0) + len(mix)
    mixture = GaussianMixture.concat(parts)
    if len(mixture) > N:
        raise SequenceError(f"used {len(mixture)} Gaussians for budget {N}")
    report = ApproxReport(N, plan.m_star, [block_terms[k] for k in sorted(block_terms)],
                          len(mixture), len(cache), seconds=time.perf_counter() - t0)
    return mixture, plan, report


def error_split(seq, mixture, plan, q=DEFAULT_QUADRATURE, grid=None):
    """``(I+, I-)``: head approximation error and coefficient tail norm."""
    i_minus = float(np.sqrt(np.sum(seq.tail(plan.m_star).values ** 2)))
    head = seq.head(plan.m_star).function(grid)
    i_plus = l2_distance(head, SpectralFunction(gaussians=mixture, grid=head.grid), q)
    return i_plus, i_minus


def total_error(seq, mixture, q=DEFAULT_QUADRATURE, grid=None):
    f = seq.function(grid)
    return l2_distance(f, SpectralFunction(gaussians=mixture, grid=f.grid), q)


def all_errors(seq, mixture, plan, q=DEFAULT_QUADRATURE, grid=None):
    """``(I+, I-, total)`` with one shared pass over the mixture transform."""
    i_minus = float(np.sqrt(np.sum(seq.tail(plan.m_star).values ** 2)))
    i_plus, total = distances_to_mixture(
        [seq.head(plan.m_star).function(grid), seq.function(grid)], mixture, q)
    return i_plus, i_minus, total


# ---------------------------------------------------------------------------
# synthetic profiles and rate studies


def power_profile(n, alpha):
    return np.arange(1, n + 1, dtype=float) ** (-alpha)


def cartoon_profile(n):
    m = np.arange(1, n + 1, dtype=float)
    return m**-1.5 * (1 + np.log(m)) ** 1.5


def draw_indices(count, seed=0, j_cap=6, k_max=16):
    """Distinct indices: scale with probability proportional to its rotation count,
    uniform orientation, integer translation pair with ``|k| <= k_max``."""
    rng = np.random.default_rng(seed)
    scales = np.arange(j_cap + 1)
    p = np.array([scale_geometry(int(j)).n_rot for j in scales], dtype=float)
    p /= p.sum()
    seen, out = set(), []
    while len(out) < count:
        j = int(rng.choice(scales, p=p))
        ell = int(rng.integers(scale_geometry(j).n_rot))
        k1, k2 = (int(v) for v in rng.integers(-k_max, k_max + 1, 2))
        if k1 * k1 + k2 * k2 > k_max * k_max or (j, ell, k1, k2) in seen:
            continue
        seen.add((j, ell, k1, k2))
        out.append(CurveletIndex(j, ell, k1, k2))
    return out


def synthetic_sequence(values, seed=0, j_cap=6, k_max=16):
    idx = draw_indices(len(values), seed, j_cap, k_max)
    return rearrange(zip(values, idx))


def ideal_tail(values, m_star):
    """Error of exact thresholding: norm of the discarded coefficients."""
    return float(np.sqrt(np.sum(np.asarray(values)[m_star:] ** 2)))


def fit_slope(Ns, errors, log_power=0.0, floor=0.0):
    """Least-squares slope of ``log(error / log(N)^log_power)`` against ``log N``."""
    Ns, errors = np.asarray(Ns, dtype=float), np.asarray(errors, dtype=float)
    keep = errors > floor
    y = np.log(errors[keep]) - log_power * np.log(np.log(Ns[keep]))
    return float(np.polyfit(np.log(Ns[keep]), y, 1)[0])


@dataclass
class RateRow:
    n_budget: int
    terms_used: int
    m_star: int
    i_plus: float
    i_minus: float
    total_error: float
    seconds: float


def rate_study(profile, Ns, beta=0.5, seed=0, cfg=DEFAULT_CONFIG, alpha=1.5,
               j_cap=6, k_max=16, length=None, q=DEFAULT_QUADRATURE, n0=None):
    """Run the approximation for each budget and fit the error slope.

    Returns ``(rows, slope, ideal_slope)``; the ideal slope is the one of
    exact thresholding on the same sequence.
    """
    Ns = sorted(int(n) for n in Ns)
    n0 = cfg.order + 1 if n0 is None else n0
    if length is None:
        length = 8 * sub_budgets(Ns[-1], beta, n0).m_star
    values = power_profile(length, alpha) if profile == "power" else cartoon_profile(length)
    seq = synthetic_sequence(values, seed, j_cap, k_max)
    rows = []
    for N in Ns:
        t0 = time.perf_counter()
        mixture, plan, rep = approximate(seq, N, beta, cfg, n0)
        i_plus, i_minus, total = all_errors(seq, mixture, plan, q, cfg.grid)
        rows.append(RateRow(N, rep.terms_used, plan.m_star, i_plus, i_minus, total,
                            time.perf_counter() - t0))
    power = 1.5 if profile == "cartoon" else 0.0
    slope = fit_slope(Ns, [r.total_error for r in rows], power)
    ideal = fit_slope(Ns, [ideal_tail(seq.values, r.m_star) for r in rows], power)
    return rows, slope, ideal
