import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gmixcurve.frame import CurveletIndex
from gmixcurve.scheme import (
    SequenceError, all_errors, approximate, cartoon_profile, class_norm, draw_indices, error_split,
    fit_slope, ideal_tail, power_profile, rearrange, synthetic_sequence, total_error,
)


def test_rearrange_orders_by_magnitude():
    a, b, c = CurveletIndex(2), CurveletIndex(3, 1), CurveletIndex(1, 0, 1, 1)
    seq = rearrange([(0.5, a), (0.9, b), (-0.7, c)])
    assert [idx for _, idx in seq] == [b, c, a]


def test_rearrange_tie_break_and_duplicates():
    a, b = CurveletIndex(3, 1, 0, 0), CurveletIndex(2, 0, 5, 5)
    seq = rearrange([(1.0, a), (-1.0, b)])
    assert [idx for _, idx in seq] == [b, a]
    with pytest.raises(SequenceError):
        rearrange([(1.0, a), (2.0, a)])


def test_class_norm():
    idx = draw_indices(50, seed=1)
    seq = rearrange(zip(1.0 / np.arange(1, 51), idx))
    assert class_norm(seq, 1.0) == pytest.approx(1.0)
    assert class_norm(seq, 1.5) == pytest.approx(np.sqrt(50))
    assert class_norm(rearrange([]), 1.0) == 0.0


def test_empty_sequence():
    mix, plan, rep = approximate(rearrange([]), 256)
    assert len(mix) == 0 and rep.terms_used == 0
    assert total_error(rearrange([]), mix) == 0.0


def test_plan_drives_selection():
    seq = synthetic_sequence(power_profile(40, 1.5), seed=3, j_cap=4)
    mix, plan, rep = approximate(seq, 256)
    assert plan.m_star == 8 and plan.sequence() == [11, 8, 5, 5, 4, 4, 4, 4]
    assert rep.terms_used == len(mix) <= 256
    # per-coefficient mixtures come from the first m* entries only
    other = synthetic_sequence(power_profile(40, 1.5) * 2, seed=9, j_cap=4)
    assert approximate(other, 256)[1] == plan


def test_generator_reuse_bound():
    seq = synthetic_sequence(power_profile(300, 1.5), seed=4, j_cap=5)
    _, plan, rep = approximate(seq, 2048)
    scales = {idx.j for _, idx in list(seq)[:plan.m_star]}
    assert rep.generators_built <= len(scales) * (1 + int(np.log2(2048)))


@settings(max_examples=10, deadline=None)
@given(st.sampled_from([128, 256, 512, 1024, 2048, 4096]))
def test_budget_never_exceeded(N):
    seq = synthetic_sequence(power_profile(1000, 1.5), seed=5)
    assert approximate(seq, N)[2].terms_used <= N


def test_error_split_small_case():
    seq = rearrange([(1.0, CurveletIndex(1)), (0.5, CurveletIndex(2, 1, 1, 0)),
                     (0.2, CurveletIndex(0, 0, 1, 0))])
    mix, plan, _ = approximate(seq, 256)
    assert plan.m_star >= len(seq)
    i_plus, i_minus = error_split(seq, mix, plan)
    assert i_minus == 0.0
    assert total_error(seq, mix) == pytest.approx(i_plus, rel=1e-12)


def test_error_triangle():
    seq = synthetic_sequence(power_profile(40, 1.5), seed=6, j_cap=3, k_max=4)
    mix, plan, _ = approximate(seq, 128)
    i_plus, i_minus = error_split(seq, mix, plan)
    total = total_error(seq, mix)
    assert i_minus == pytest.approx(ideal_tail(seq.values, plan.m_star))
    assert total <= i_plus + i_minus + 1e-9
    assert total >= abs(i_plus - i_minus) - 1e-9


def test_draw_indices_reproducible_and_distinct():
    a, b = draw_indices(500, seed=11), draw_indices(500, seed=11)
    assert a == b
    assert len(set(a)) == 500
    assert all(idx.j <= 6 and idx.k1**2 + idx.k2**2 <= 256 for idx in a)


def test_ideal_tail_oracle():
    v = power_profile(5000, 1.5)
    m = 64
    assert ideal_tail(v, m) == pytest.approx(np.sqrt(sum(n**-3.0 for n in range(m + 1, 5001))))


def test_fit_slope_recovers_power_law():
    Ns = np.array([256, 512, 1024, 2048])
    assert fit_slope(Ns, 3.0 * Ns**-1.0) == pytest.approx(-1.0)
    assert fit_slope(Ns, Ns**-1.0 * np.log(Ns) ** 1.5, 1.5) == pytest.approx(-1.0)


def test_cartoon_profile_shape():
    v = cartoon_profile(10)
    assert v[0] == 1.0
    assert np.all(np.diff(v[1:]) < 0)


def test_shared_pass_matches_separate_errors():
    seq = synthetic_sequence(power_profile(60, 1.5), seed=7, j_cap=4, k_max=6)
    mix, plan, _ = approximate(seq, 256)
    i_plus, i_minus = error_split(seq, mix, plan)
    total = total_error(seq, mix)
    assert all_errors(seq, mix, plan) == pytest.approx((i_plus, i_minus, total), rel=1e-10)
