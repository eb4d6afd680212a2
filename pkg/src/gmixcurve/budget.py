"""Dyadic allocation of a total Gaussian budget over ranked coefficients."""
from __future__ import annotations

import json
from dataclasses import dataclass
from math import floor


class BudgetError(ValueError):
    pass


def cost(m, N, beta):
    """``(1 - beta)^beta (N / m)^beta``: sub-budget for the ``m``-th coefficient."""
    if m < 1 or N < 1 or not 0 < beta < 1:
        raise BudgetError("cost needs m >= 1, N >= 1 and 0 < beta < 1")
    return (1 - beta) ** beta * (N / m) ** beta


@dataclass(frozen=True)
class BudgetPlan:
    n_total: int
    beta: float
    n0: int
    m_star: int
    blocks: tuple  # ((nu, m_nu), ...), block nu covers n in (2^(nu-1), 2^nu]

    def sub_budget(self, n):
        if not 1 <= n <= self.m_star:
            raise BudgetError(f"index {n} outside 1..{self.m_star}")
        nu = (n - 1).bit_length()
        return dict(self.blocks)[nu]

    def sequence(self):
        out = []
        for nu, m in self.blocks:
            width = 1 if nu == 0 else 2 ** (nu - 1)
            out.extend([m] * min(width, self.m_star - len(out)))
        return out

    def spend(self):
        return sum(self.sequence())

    def to_dict(self):
        return {"n_total": self.n_total, "beta": self.beta, "n0": self.n0,
                "m_star": self.m_star,
                "blocks": [{"nu": nu, "m_nu": m} for nu, m in self.blocks]}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


def terminal_index(N, beta, n0):
    bound = (1 - beta) * N / n0 ** (1 / beta)
    if bound < 1:
        raise BudgetError(f"budget {N} too small: no coefficient can receive {n0} Gaussians")
    m = 1
    while 2 * m <= bound:
        m *= 2
    return m


def sub_budgets(N, beta=0.5, n0=3):
    if N < 1 or not 0 < beta < 1 or n0 < 1:
        raise BudgetError("need N >= 1, 0 < beta < 1, n0 >= 1")
    m_star = terminal_index(N, beta, n0)
    blocks = tuple((nu, floor(cost(2**nu, N, beta))) for nu in range(m_star.bit_length()))
    return BudgetPlan(int(N), float(beta), int(n0), m_star, blocks)


def validate_plan(plan):
    """Check every plan invariant; returns ``(ok, reason)``."""
    seq = plan.sequence()
    if plan.m_star < 1 or plan.m_star & (plan.m_star - 1):
        return False, "terminal index is not a power of two"
    if plan.m_star > (1 - plan.beta) * plan.n_total / plan.n0 ** (1 / plan.beta):
        return False, "terminal index exceeds its bound"
    if any(b > a for a, b in zip(seq, seq[1:])):
        return False, "monotonicity: sub-budgets increase"
    if min(seq) < plan.n0:
        return False, "sub-budget below the minimum"
    if sum(seq) > plan.n_total:
        return False, "overspend"
    return True, "ok"


def plan_from_dict(data):
    blocks = tuple((int(b["nu"]), int(b["m_nu"])) for b in data["blocks"])
    return BudgetPlan(int(data["n_total"]), float(data["beta"]), int(data["n0"]),
                      int(data["m_star"]), blocks)
