import math
from fractions import Fraction

import numpy as np
import pytest

from dilutefermi.asymptotics import (
    DegenerateTilingError,
    RegimeError,
    ScalingContext,
    beta_l_window,
    box_estimate,
    error_budget,
    make_context,
    predict_energy,
    write_boxes_csv,
    write_budget_csv,
    write_prediction_csv,
)
from dilutefermi.potentials import harmonic_trap
from dilutefermi.scattering import square_barrier
from dilutefermi.thomas_fermi import C_TF, tf_solve, two_spin_minimize

LAMBDA = 24.0 ** (1.0 / 3.0)
INTER_EXACT = (64.0 / 2835.0) * 24.0**1.5 / math.pi**3
A_W_EXACT = 1.0 - math.tanh(1.0)


@pytest.fixture(scope="module")
def bare():
    return tf_solve(harmonic_trap(0.0))


def test_context_validation():
    w = square_barrier(2.0)
    with pytest.raises(ValueError):
        ScalingContext(N=1, beta=0.4, interaction=w, a_w=0.2, R_w=1.0)
    with pytest.raises(RegimeError):
        ScalingContext(N=10, beta=0.3, interaction=w, a_w=0.2, R_w=1.0)
    ctx = make_context(1000, 0.4, w)
    assert ctx.hbar == pytest.approx(0.1)
    assert ctx.gap == pytest.approx(1000.0 ** (-0.4))
    assert ctx.coupling == pytest.approx(8.0 * math.pi * ctx.a_w * 1000.0 ** (1.0 / 3.0 - 0.4))


def test_prediction_against_independent_factors(bare):
    # every factor recomputed from its own closed form
    ctx = make_context(10**6, 0.40, square_barrier(2.0))
    pred = predict_energy(harmonic_trap(0.0), ctx, bare)
    main_oracle = 10**6 * 0.75 * LAMBDA
    corr_oracle = 2.0 * math.pi * A_W_EXACT * (10**6) ** (4.0 / 3.0 - 0.40) * INTER_EXACT
    assert abs(pred.main - main_oracle) / main_oracle < 1e-8
    assert abs(pred.correction - corr_oracle) / corr_oracle < 1e-5
    assert pred.total == pred.main + pred.correction
    assert abs(pred.correction - 5.105e4) / 5.105e4 < 1e-3


def test_prediction_zero_length_interaction(bare):
    ctx = make_context(10**4, 0.40, square_barrier(0.0))
    pred = predict_energy(harmonic_trap(0.0), ctx, bare)
    assert pred.correction == 0.0
    assert pred.total == pred.main


def test_prediction_monotone_in_beta(bare):
    w = square_barrier(2.0)
    c1 = predict_energy(harmonic_trap(0.0), make_context(10**5, 0.40, w), bare).correction
    c2 = predict_energy(harmonic_trap(0.0), make_context(10**5, 0.45, w), bare).correction
    assert c2 < c1


def test_perturbed_functional_consistency(bare):
    # the coupled minimizer agrees with the first-order expansion at the
    # physical coupling, improving as N grows
    w = square_barrier(2.0)
    ratios = []
    for N in (10**2, 10**3, 10**4):
        ctx = make_context(N, 0.40, w)
        st = two_spin_minimize(harmonic_trap(0.0), ctx.coupling)
        first_order = bare.E_TF + ctx.coupling / 4.0 * bare.interaction_integral
        scale = float(N) ** (1.0 / 3.0 - 0.40)
        ratios.append(abs(st.energy - first_order) / scale)
    assert all(b < a for a, b in zip(ratios, ratios[1:]))


def test_window_exponents_and_feasibility():
    win = beta_l_window(0.40, 10**6)
    assert win.e_hi == pytest.approx(1.0 / 3.0 - 0.40)
    assert win.e_lo1 == pytest.approx(-27.0 / 21.0 * (1.0 - 1.2) - 0.40)
    assert win.e_lo2 == pytest.approx(0.40 / 3.0 - 4.0 / 9.0)
    assert win.feasible
    assert win.chosen_l == pytest.approx((10.0**6) ** ((win.e_hi + max(win.e_lo1, win.e_lo2)) / 2.0))


def test_window_boundary_exact_rational():
    at = beta_l_window(Fraction(34, 81), 10**4)
    assert not at.feasible
    assert at.e_hi == at.e_lo1  # exact tie at the threshold
    below = beta_l_window(Fraction(34, 81) - Fraction(1, 10**9), 10**4)
    assert below.feasible


def test_window_above_threshold_keeps_lower_regime():
    win = beta_l_window(0.45, 10**6)
    assert not win.feasible
    assert win.lower_bound_regime
    assert win.chosen_l is None


def test_lower_regime_flips_at_half():
    assert not beta_l_window(Fraction(1, 2), 100).lower_bound_regime
    assert beta_l_window(Fraction(1, 2) - Fraction(1, 10**9), 100).lower_bound_regime


def test_second_exponent_crossing_at_seven_twelfths():
    at = beta_l_window(Fraction(7, 12), 100)
    assert at.e_hi == at.e_lo2


def test_single_box_degenerate_formula(bare):
    # one box over the whole support with M = N/2: the one-term sum equals
    # the direct homogeneous-formula evaluation
    from dilutefermi.asymptotics import box_kinetic_interaction_sum

    N, beta = 10**6, 0.40
    l = 2.0 * bare.support_radius
    L = float(N) ** beta * l
    M = N / 2.0
    a_w = A_W_EXACT
    direct = float(N) ** (2.0 * beta - 2.0 / 3.0) * (
        2.0 * C_TF * M ** (5.0 / 3.0) / L**2 + 8.0 * math.pi * a_w * M**2 / L**3
    )
    summed = box_kinetic_interaction_sum([M], L, N, beta, a_w)
    assert summed == pytest.approx(direct, rel=1e-14)
    # at average density rho = 1/l^3 the kinetic part is the bulk term
    # N * 2^(-2/3) c_tf rho^(2/3) of the trapped functional
    bulk = float(N) * 2.0 ** (-2.0 / 3.0) * C_TF * (1.0 / l**3) ** (2.0 / 3.0)
    kinetic_only = box_kinetic_interaction_sum([M], L, N, beta, 0.0)
    assert kinetic_only == pytest.approx(bulk, rel=1e-12)


def test_box_estimate_headline(bare):
    ctx = make_context(10**6, 0.40, square_barrier(2.0))
    l = beta_l_window(0.40, 10**6).chosen_l
    est = box_estimate(harmonic_trap(0.0), ctx, l, bare)
    assert 0.9 <= est.ratio <= 1.3
    assert est.mass_sum_doubled >= 10**6
    assert np.all(est.masses >= 0)
    finer = box_estimate(harmonic_trap(0.0), ctx, l / 2.0, bare)
    assert finer.rho53_defect < est.rho53_defect
    assert finer.rho2_defect < est.rho2_defect


def test_box_gap_ratio_small_at_large_N(bare):
    ctx = make_context(10**8, 0.40, square_barrier(2.0))
    win = beta_l_window(0.40, 10**8)
    assert ctx.gap / win.chosen_l <= 1e-2


def test_box_degenerate_tiling_error(bare):
    ctx = make_context(10**6, 0.40, square_barrier(2.0))
    with pytest.raises(DegenerateTilingError):
        box_estimate(harmonic_trap(0.0), ctx, 10.0, bare)


def test_budget_ratio_strictly_decreasing():
    for beta in (0.40, 0.45, 0.49):
        ratios = [error_budget(N, beta).ratio for N in (10**4, 10**6, 10**8)]
        assert all(b < a for a, b in zip(ratios, ratios[1:])), (beta, ratios)


def test_budget_bulk_term_subcritical_at_large_beta():
    # N^(5/6) stays below the target order whenever beta < 1/2
    vals = [
        error_budget(N, 0.49).bulk_term / float(N) ** (4.0 / 3.0 - 0.49)
        for N in (10**4, 10**6, 10**8)
    ]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_budget_explicit_epsilon_bookkeeping():
    b = error_budget(10**4, 0.45, epsilon=0.5)
    parts = (b.bulk_term, b.cutoff_term, b.softening_term, b.remainder_term)
    assert all(x >= 0.0 for x in parts)
    assert b.total == pytest.approx(sum(parts))
    assert b.epsilon == 0.5
    assert b.delta == 0.5
    assert b.s**2 == pytest.approx(b.epsilon**2 * (10.0**4) ** (1.0 / 3.0 - 0.45))
    assert b.p_F**-2 == pytest.approx(b.epsilon * (10.0**4) ** (1.0 / 3.0 - 0.45))
    assert b.R == pytest.approx(b.epsilon * (10.0**4) ** (-1.0 / 3.0))


def test_budget_default_epsilon_in_corridor():
    for N in (10**4, 10**8):
        for beta in (0.40, 0.49):
            b = error_budget(N, beta)
            A = float(N) ** (-1.0 / 18.0) + float(N) ** (1.0 / 6.0 - beta / 2.0)
            assert b.epsilon == pytest.approx(A ** (1.0 / 8.0))
            assert b.epsilon > A ** 0.25 or A >= 1.0


def test_budget_regime_errors():
    with pytest.raises(RegimeError):
        error_budget(10**4, 0.30)
    with pytest.raises(RegimeError):
        error_budget(10**4, 0.55)


def test_csv_emitters(tmp_path, bare):
    ctx = make_context(10**4, 0.40, square_barrier(2.0))
    pred = predict_energy(harmonic_trap(0.0), ctx, bare)
    p1 = tmp_path / "pred.csv"
    write_prediction_csv(p1, [pred], ["h"])
    assert p1.read_text().splitlines()[1] == "N,beta,main,correction,total"

    est = box_estimate(harmonic_trap(0.0), make_context(10**6, 0.40, square_barrier(2.0)),
                       beta_l_window(0.40, 10**6).chosen_l, bare)
    p2 = tmp_path / "boxes.csv"
    write_boxes_csv(p2, est, ["h"])
    lines = p2.read_text().splitlines()
    assert lines[2] == "cx,cy,cz,M_i,kinetic_interaction,potential"

    p3 = tmp_path / "budget.csv"
    write_budget_csv(p3, [error_budget(10**4, 0.45)], ["h"])
    header = p3.read_text().splitlines()[1]
    assert header.startswith("N,beta,epsilon")
