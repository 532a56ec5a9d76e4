import math

import numpy as np
import pytest

from dilutefermi.numerics import Tolerance
from dilutefermi.scattering import (
    GeometryError,
    InteractionSpec,
    StiffnessError,
    dilated_interaction,
    dyson_parts,
    hardcore,
    hardcore_limit,
    scaled_identity_check,
    scaled_interaction,
    scattering_energy,
    square_barrier,
    write_scattering_csv,
    zero_energy_solve,
)


def barrier_length(A, R=1.0):
    kappa = math.sqrt(A / 2.0)
    return R - math.tanh(kappa * R) / kappa


def test_free_equation():
    sol = zero_energy_solve(square_barrier(0.0))
    assert sol.a == 0.0
    assert np.max(np.abs(sol.f.values - 1.0)) == 0.0


def test_square_barrier_closed_forms():
    for A in (2.0, 200.0):
        sol = zero_energy_solve(square_barrier(A))
        assert abs(sol.a - barrier_length(A)) < 1e-6


def test_length_stays_in_physical_window():
    for A in (0.5, 2.0, 50.0, 5000.0):
        sol = zero_energy_solve(square_barrier(A))
        assert 0.0 <= sol.a <= 1.0
        assert np.all(sol.f.values <= 1.0 + 1e-12)
        r = sol.f.nodes
        outer = r >= 1.0
        lower = 1.0 - sol.a / r[outer]
        assert np.all(sol.f.values[outer] >= lower - 1e-8)


def test_exterior_exactness():
    sol = zero_energy_solve(square_barrier(2.0), r_max=3.0)
    assert sol.fit_residual <= 1e-8 * 3.0


def test_variational_energy_matches_length():
    for spec in (square_barrier(2.0), square_barrier(200.0), hardcore(0.7)):
        sol = zero_energy_solve(spec)
        energy = scattering_energy(sol)
        assert abs(energy / (4.0 * math.pi) - sol.a) <= 1e-6 * max(sol.a, 1e-3)


def test_hardcore_object_is_exact():
    sol = zero_energy_solve(hardcore(0.35))
    assert sol.a == 0.35


def test_hardcore_limit_sweep():
    rows = hardcore_limit(square_barrier(1.0), [2.0, 20.0, 200.0])
    expected = [barrier_length(a) for a in (2.0, 20.0, 200.0)]
    for (_, got), ref in zip(rows, expected):
        assert abs(got - ref) < 1e-6
    lengths = [a for _, a in rows]
    assert lengths == sorted(lengths)
    assert all(a <= 1.0 for a in lengths)


def test_hardcore_limit_extreme_amplitude():
    (_, a), = hardcore_limit(square_barrier(1.0), [1e6])
    assert abs(a - 1.0) < 0.002


def test_monotone_in_amplitude():
    lo = zero_energy_solve(square_barrier(3.0)).a
    hi = zero_energy_solve(scaled_interaction(square_barrier(3.0), 2.0)).a
    assert hi > lo


def test_sweep_validation():
    with pytest.raises(ValueError):
        hardcore_limit(square_barrier(1.0), [2.0, 1.0])
    with pytest.raises(ValueError):
        hardcore_limit(square_barrier(1.0), [-1.0, 2.0])


def test_unbounded_interaction_rejected():
    def diverging(r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            return 1.0 / np.maximum(r, 0.0)

    spec = InteractionSpec(fn=diverging, range_=1.0)
    with pytest.raises(StiffnessError):
        zero_energy_solve(spec)


def test_dilation_identity_exact():
    rep = scaled_identity_check(square_barrier(2.0), 1000, 0.4)
    assert rep.rel_err <= 1e-8


@pytest.mark.parametrize("N", [100, 10000])
@pytest.mark.parametrize("beta", [0.35, 0.45])
def test_dilation_identity_grid(N, beta):
    rep = scaled_identity_check(square_barrier(2.0), N, beta)
    assert rep.rel_err <= 1e-8


def test_dilation_identity_trivial_cases():
    rep0 = scaled_identity_check(square_barrier(0.0), 1000, 0.4)
    assert rep0.lhs == 0.0 and rep0.rhs == 0.0
    rep1 = scaled_identity_check(square_barrier(2.0), 1, 0.4)
    assert abs(rep1.lhs - rep1.a_w) < 1e-12
    assert rep1.rhs == rep1.a_w


def test_intense_scaling_recovers_the_range():
    # amplitude exponent above the reference scaling: the rescaled length
    # approaches the range from below as N grows
    beta = 0.4
    alpha = 2.0 * beta - 2.0 / 3.0 + 0.6
    w = square_barrier(2.0)
    vals = []
    for N in (100, 1000, 10000):
        b = float(N) ** beta
        spec = dilated_interaction(w, float(N) ** (alpha + 2.0 / 3.0), b)
        vals.append(zero_energy_solve(spec).a * b)
    assert all(v < 1.0 for v in vals)
    assert all(y > x for x, y in zip(vals, vals[1:]))
    assert vals[-1] > 0.9


def test_dyson_bump_normalization():
    kit = dyson_parts(0.0, 1.0, 0.2, 2.0)
    assert abs(kit.U_integral_check - 1.0) <= 1e-10
    assert kit.U_R(np.array([0.5]))[0] == pytest.approx(3.0 / (4.0 * math.pi))
    assert kit.U_R(np.array([1.5]))[0] == 0.0
    shell = dyson_parts(0.5, 1.0, 0.2, 2.0)
    assert abs(shell.U_integral_check - 1.0) <= 1e-10


def test_dyson_chi_piecewise():
    kit = dyson_parts(0.0, 1.0, 1.0, 0.5)
    vals = kit.chi_s(np.array([0.5, 1.5, 3.0]))
    assert np.allclose(vals, [0.0, 0.5, 1.0])
    assert np.all(kit.chi_s(np.linspace(0, 10, 100)) <= 1.0)
    assert np.all(kit.chi_s(np.linspace(0, 10, 100)) >= 0.0)


def test_dyson_kinetic_split_inequality():
    p_F = 3.0
    kit = dyson_parts(0.0, 0.05, 1.0 / (2.0 * p_F), p_F)
    p = np.linspace(1e-6, 8.0 * p_F, 10**4)
    margin = kit.high_frequency_margin(p)
    assert int(np.sum(margin < 0)) == 0


def test_dyson_geometry_error():
    with pytest.raises(GeometryError):
        dyson_parts(1.0, 1.0, 0.1, 1.0)
    with pytest.raises(GeometryError):
        dyson_parts(2.0, 1.0, 0.1, 1.0)


def test_scattering_csv_columns(tmp_path):
    sol = zero_energy_solve(square_barrier(2.0))
    path = tmp_path / "scatter.csv"
    write_scattering_csv(path, sol, header_lines=["probe"])
    lines = path.read_text().splitlines()
    assert lines[0] == "# probe"
    assert lines[1] == "r,u,f,v"
    cells = np.array([[float(c) for c in ln.split(",")] for ln in lines[2:]])
    assert np.all(np.isfinite(cells))


def test_richardson_estimate_is_tight():
    sol = zero_energy_solve(square_barrier(200.0))
    truth = barrier_length(200.0)
    assert abs(sol.a - truth) <= max(10.0 * sol.step_error_estimate, 1e-9)
