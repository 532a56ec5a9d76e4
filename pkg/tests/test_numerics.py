import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dilutefermi.numerics import (
    BracketError,
    DomainMismatchError,
    PowerTail,
    RadialProfile,
    RefinementError,
    Tolerance,
    find_root_monotone,
    find_sign_changes,
    integrate_radial,
    lp_distance,
)

LAMBDA = 24.0 ** (1.0 / 3.0)


def test_tolerance_validation():
    Tolerance(abs=0.0, rel=1e-9)
    with pytest.raises(ValueError):
        Tolerance(abs=0.0, rel=0.0)
    with pytest.raises(ValueError):
        Tolerance(abs=-1e-3)
    with pytest.raises(ValueError):
        Tolerance(max_refinements=0)


def test_profile_validation():
    nodes = np.linspace(0, 1, 16)
    RadialProfile(nodes, np.ones(16))
    with pytest.raises(ValueError):
        RadialProfile(nodes[:8], np.ones(8))  # too few nodes
    with pytest.raises(ValueError):
        RadialProfile(nodes[::-1], np.ones(16))  # not increasing
    with pytest.raises(ValueError):
        RadialProfile(nodes, np.full(16, np.nan))


def test_unit_ball_volume():
    val = integrate_radial(lambda r: np.ones_like(r), 1.0)
    assert abs(val - 4.0 * math.pi / 3.0) < 1e-12


def test_monomial_integral():
    val = integrate_radial(lambda r: r**2, 1.0)
    assert abs(val - 4.0 * math.pi / 5.0) < 1e-12


def test_minimizer_normalization_integral():
    # int (lam - r^2)_+^{3/2} 4 pi r^2 dr = pi^2 lam^3 / 8, so dividing by
    # 3 pi^2 gives lam^3 / 24 = 1 at lam = 24^(1/3)
    def f(r):
        return np.maximum(LAMBDA - r * r, 0.0) ** 1.5 / (3.0 * math.pi**2)

    val = integrate_radial(f, math.sqrt(LAMBDA), breakpoints=[math.sqrt(LAMBDA)])
    assert abs(val - 1.0) < 1e-8


def test_quadrature_linearity_and_monotonicity():
    tol = Tolerance(abs=1e-11, rel=1e-11)
    f = lambda r: np.exp(-r)
    g = lambda r: np.exp(-r) + 0.3 * r
    i_f = integrate_radial(f, 2.0, tol)
    i_g = integrate_radial(g, 2.0, tol)
    i_sum = integrate_radial(lambda r: 2.0 * f(r) + g(r), 2.0, tol)
    assert abs(i_sum - (2.0 * i_f + i_g)) < 1e-9
    assert i_f <= i_g + 2.0 * tol.abs  # f <= g pointwise on [0, 2]


def test_refinement_failure_carries_estimates():
    tol = Tolerance(abs=1e-300, rel=1e-300, max_refinements=3)
    with pytest.raises(RefinementError) as exc:
        integrate_radial(lambda r: np.sqrt(np.abs(np.sin(40.0 * r))), 3.0, tol)
    assert math.isfinite(exc.value.last_estimate)
    assert math.isfinite(exc.value.previous_estimate)


def test_root_trivial_and_cube():
    assert abs(find_root_monotone(lambda x: x - 2.0, 0.0, 5.0).root - 2.0) < 1e-9
    res = find_root_monotone(lambda x: x**3 - 24.0, 1.0, 5.0)
    assert abs(res.root - LAMBDA) < 1e-9
    assert res.monotone


def test_root_of_mass_defect_matches_cube_root():
    # unit-mass defect of the scaled density profile has the same root
    def defect(lam):
        if lam <= 0:
            return -1.0
        val = integrate_radial(
            lambda r: np.maximum(lam - r * r, 0.0) ** 1.5 / (3.0 * math.pi**2),
            math.sqrt(lam),
            breakpoints=[math.sqrt(lam)],
        )
        return val - 1.0

    res = find_root_monotone(defect, 1.0, 5.0, Tolerance(abs=1e-12, rel=1e-14))
    assert abs(res.root - LAMBDA) < 1e-8


def test_root_bracket_certificate():
    res = find_root_monotone(lambda x: math.tanh(x) - 0.3, -4.0, 4.0)
    lo, hi = res.bracket
    flo, fhi = res.bracket_values
    assert lo <= res.root <= hi
    assert flo == 0 or fhi == 0 or np.sign(flo) != np.sign(fhi)


def test_root_invalid_bracket():
    with pytest.raises(BracketError):
        find_root_monotone(lambda x: x * x + 1.0, -1.0, 1.0)


def test_root_non_monotone_warning():
    res = find_root_monotone(lambda x: x + 0.5 * math.sin(8.0 * x), -2.0, 3.0)
    assert abs(res.root) < 1e-6
    assert not res.monotone
    assert res.warnings


def test_sign_change_scan():
    roots = find_sign_changes(lambda r: np.cos(r), 0.0, 8.0)
    assert len(roots) == 3
    assert abs(roots[0] - math.pi / 2.0) < 1e-9
    assert abs(roots[2] - 5.0 * math.pi / 2.0) < 1e-9


def test_lp_identity_is_zero():
    nodes = np.linspace(0.0, 2.0, 33)
    prof = RadialProfile(nodes, np.sin(nodes) + 1.5)
    assert lp_distance(prof, prof, 5.0 / 3.0) == 0.0


def test_lp_indicator_against_zero():
    nodes = np.linspace(0.0, 1.0, 17)
    ones = RadialProfile(nodes, np.ones(17))
    zero = RadialProfile(nodes, np.zeros(17))
    d1 = lp_distance(ones, zero, 1.0)
    assert abs(d1 - 4.0 * math.pi / 3.0) < 1e-12
    d53 = lp_distance(ones, zero, 5.0 / 3.0)
    assert abs(d53 - (4.0 * math.pi / 3.0) ** 0.6) < 1e-12


def test_lp_union_domain_with_zero_tails():
    short = RadialProfile(np.linspace(0.0, 1.0, 17), np.ones(17))
    longer = RadialProfile(np.linspace(0.0, 2.0, 33), np.zeros(33))
    # difference is 1 on [0, 1] and 0 beyond
    assert abs(lp_distance(short, longer, 1.0) - 4.0 * math.pi / 3.0) < 1e-12


def test_lp_incompatible_tails():
    nodes = np.linspace(0.0, 1.0, 17)
    a = RadialProfile(nodes, np.ones(17), tail=PowerTail(1.0, 4.0))
    b = RadialProfile(np.linspace(0.0, 2.0, 17), np.ones(17))
    with pytest.raises(DomainMismatchError):
        lp_distance(a, b, 2.0)


_values = st.lists(
    st.floats(min_value=-3.0, max_value=3.0, allow_nan=False), min_size=20, max_size=20
)


@settings(max_examples=60, deadline=None, derandomize=True)
@given(_values, _values, _values, st.sampled_from([1.0, 5.0 / 3.0, 2.0, 5.0 / 2.0]))
def test_lp_triangle_inequality(fv, gv, hv, p):
    nodes = np.linspace(0.0, 1.5, 20)
    f = RadialProfile(nodes, np.array(fv))
    g = RadialProfile(nodes, np.array(gv))
    h = RadialProfile(nodes, np.array(hv))
    assert lp_distance(f, h, p) <= lp_distance(f, g, p) + lp_distance(g, h, p) + 1e-10
