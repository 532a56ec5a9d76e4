import math

import numpy as np
import pytest

from dilutefermi import semiclassics as scl
from dilutefermi.numerics import RadialProfile, Tolerance, lp_distance
from dilutefermi.potentials import Potential, harmonic_trap, power_trap
from dilutefermi.thomas_fermi import (
    C_TF,
    KAPPA,
    ConvergenceError,
    DomainError,
    TFConstants,
    cutoff_gap_scan,
    cutoff_tf_solve,
    tf_functional,
    tf_solve,
    two_spin_minimize,
    write_density_csv,
)

LAMBDA = 24.0 ** (1.0 / 3.0)
E_EXACT = 0.75 * LAMBDA
INTER_EXACT = (64.0 / 2835.0) * 24.0**1.5 / math.pi**3


@pytest.fixture(scope="module")
def bare_solution():
    return tf_solve(harmonic_trap(0.0))


def test_constants_reproducible():
    c = TFConstants()
    assert abs(c.c_tf - 0.6 * (6.0 * math.pi**2) ** (2.0 / 3.0)) < 1e-10
    assert abs(c.kappa - (3.0 * math.pi**2) ** (2.0 / 3.0)) < 1e-10
    # four-digit landmarks (the closed forms above are the authority)
    assert abs(c.c_tf - 9.1156) < 5e-4
    assert abs(c.kappa - 9.5708) < 5e-4
    # kappa = (5/3) 2^(-2/3) c_tf
    assert abs(KAPPA - (5.0 / 3.0) * 2.0 ** (-2.0 / 3.0) * C_TF) < 1e-12


def test_bare_harmonic_multiplier_and_energy(bare_solution):
    assert abs(bare_solution.lambda_TF - LAMBDA) < 1e-6
    assert abs(bare_solution.E_TF - E_EXACT) < 1e-5
    assert abs(bare_solution.potential_integral - LAMBDA**4 / 64.0) < 1e-8
    assert abs(bare_solution.interaction_integral - INTER_EXACT) < 1e-4
    assert abs(bare_solution.mass - 1.0) < 1e-9


def test_offset_shifts_multiplier_only(bare_solution):
    shifted = tf_solve(harmonic_trap(1.0))
    assert abs(shifted.lambda_TF - (1.0 + LAMBDA)) < 1e-8
    # same density: compare the profiles on shared nodes
    r = np.linspace(0.0, 1.6, 64)
    assert np.max(np.abs(shifted.rho_fn(r) - bare_solution.rho_fn(r))) < 1e-9


def test_density_vanishes_outside_support_exactly(bare_solution):
    r = np.linspace(bare_solution.support_radius, 5.0, 64)
    assert np.all(bare_solution.rho_fn(r[1:]) == 0.0)
    v = harmonic_trap(0.0)
    outside = np.linspace(bare_solution.support_radius * 1.0001, 6.0, 97)
    assert np.all(v.radial_fn(outside) >= bare_solution.lambda_TF)


def test_multiplier_equality_on_support(bare_solution):
    assert bare_solution.lagrange_residual <= 1e-8 * bare_solution.lambda_TF
    quartic = tf_solve(power_trap(4.0))
    assert quartic.lagrange_residual <= 1e-8 * quartic.lambda_TF


def test_functional_at_minimizer(bare_solution):
    val = tf_functional(harmonic_trap(0.0), bare_solution.rho)
    assert abs(val - E_EXACT) < 5e-5


def test_functional_zero_density():
    nodes = np.linspace(0.0, 1.0, 16)
    assert tf_functional(harmonic_trap(0.0), RadialProfile(nodes, np.zeros(16))) == 0.0


def test_functional_rejects_negative_samples():
    nodes = np.linspace(0.0, 1.0, 16)
    with pytest.raises(DomainError):
        tf_functional(harmonic_trap(0.0), RadialProfile(nodes, np.linspace(-0.1, 1.0, 16)))


def test_dilated_minimizer_costs_more(bare_solution):
    # mass-preserving dilation rho(x/2)/8 strictly raises the energy
    r = np.linspace(0.0, 2.0 * bare_solution.support_radius * 1.02, 2049)
    dil = RadialProfile(r, bare_solution.rho_fn(r / 2.0) / 8.0)
    assert tf_functional(harmonic_trap(0.0), dil) > bare_solution.E_TF + 1e-3


def test_variational_property_random_trials(bare_solution):
    # any nonnegative unit-mass trial stays above the minimum
    rng_nodes = np.linspace(0.0, 3.0, 257)
    w = np.gradient(rng_nodes) * 4.0 * math.pi * rng_nodes**2
    for shape in (
        np.exp(-rng_nodes**2),
        np.exp(-2.0 * rng_nodes),
        np.maximum(1.5 - rng_nodes, 0.0) ** 2,
    ):
        mass = float(w @ shape)
        prof = RadialProfile(rng_nodes, shape / mass)
        assert tf_functional(harmonic_trap(0.0), prof) >= bare_solution.E_TF - 1e-6


def test_bathtub_occupations_stay_above_minimum(bare_solution):
    # phase-space trials at unit mass never undercut the minimum energy;
    # grid normalization followed by capping keeps 0 <= m <= 2 exactly
    v = harmonic_trap(0.0)
    r = np.linspace(0.0, 2.6, 513)
    p = np.linspace(0.0, 2.6, 513)

    def normalized(mfun):
        raw = np.asarray(mfun(r[:, None], p[None, :]), dtype=float)
        _, mass = scl.vlasov_energy(v, raw, r, p)
        return np.minimum(raw / mass, 2.0)

    lam = bare_solution.lambda_TF
    trials = [
        normalized(lambda rr, pp: 2.0 * ((rr**2 + pp**2) <= lam)),
        normalized(lambda rr, pp: 1.6 * ((rr**2 + 1.4 * pp**2) <= 1.5 * lam)),
        normalized(lambda rr, pp: 1.5 * np.exp(-(rr**2 + pp**2) / 2.5)),
    ]
    for m in trials:
        energy, mass = scl.vlasov_energy(v, m, r, p)
        assert abs(mass - 1.0) < 1e-3
        assert energy >= bare_solution.E_TF - 2e-3


def test_minimizing_sequence_diagnostic(bare_solution):
    # mass-preserving bumps of shrinking amplitude: energies and distances
    # decrease monotonically toward the minimizer
    r = np.linspace(0.0, bare_solution.support_radius * 1.02, 2049)
    w = np.gradient(r) * 4.0 * math.pi * r**2
    base_vals = bare_solution.rho_fn(r)
    bump = np.exp(-((r - 0.8) ** 2) / 0.02) - np.exp(-((r - 0.3) ** 2) / 0.02)
    # project along the base density: exact zero net mass on the grid and
    # positivity without clipping (the bump lives deep inside the support)
    bump -= base_vals * (w @ bump) / (w @ base_vals)
    base_prof = RadialProfile(r, base_vals)
    energies = []
    dists = []
    for eps in (0.02, 0.01, 0.005, 0.0025):
        trial_vals = base_vals + eps * bump
        assert np.min(trial_vals) >= 0.0
        assert abs(w @ trial_vals - w @ base_vals) < 1e-12
        prof = RadialProfile(r, trial_vals)
        energies.append(tf_functional(harmonic_trap(0.0), prof))
        dists.append(lp_distance(prof, base_prof, 5.0 / 3.0))
    assert all(b < a for a, b in zip(energies, energies[1:]))
    assert all(b < a for a, b in zip(dists, dists[1:]))
    assert energies[-1] - bare_solution.E_TF < 1e-4
    assert energies[0] > bare_solution.E_TF


def test_two_spin_zero_coupling_splits_the_minimizer(bare_solution):
    st = two_spin_minimize(harmonic_trap(0.0), 0.0)
    assert st.energy == bare_solution.E_TF
    r = st.rho_up.nodes
    assert np.max(np.abs(st.rho_up.values - bare_solution.rho_fn(r) / 2.0)) < 1e-12


def test_two_spin_upper_bound_by_equal_split(bare_solution):
    g = 0.1
    st = two_spin_minimize(harmonic_trap(0.0), g)
    bound = bare_solution.E_TF + g / 4.0 * bare_solution.interaction_integral
    assert st.energy <= bound + 1e-10
    assert st.energy >= bare_solution.E_TF


def test_two_spin_small_coupling_slope(bare_solution):
    quarter = bare_solution.interaction_integral / 4.0
    devs = []
    for g in (0.2, 0.1, 0.05):
        st = two_spin_minimize(harmonic_trap(0.0), g)
        devs.append(abs((st.energy - bare_solution.E_TF) / g - quarter) / quarter)
        assert np.array_equal(st.rho_up.values, st.rho_down.values)
    assert all(b < a for a, b in zip(devs, devs[1:]))
    assert devs[-1] <= 0.05


def test_two_spin_convergence_error_carries_history():
    with pytest.raises(ConvergenceError) as exc:
        two_spin_minimize(harmonic_trap(0.0), 0.5, max_iterations=2, tol=Tolerance(rel=1e-14))
    assert len(exc.value.residual_history) == 2


def test_cutoff_inactive_at_large_momentum(bare_solution):
    sol = cutoff_tf_solve(harmonic_trap(0.0), 1e3)
    assert sol.E_TF_pF == bare_solution.E_TF
    assert sol.overflow_mass == 0.0


def test_cutoff_never_exceeds_unrestricted(bare_solution):
    for p_F in (0.5, 0.9, 1.3, 2.0, 4.0):
        sol = cutoff_tf_solve(harmonic_trap(0.0), p_F)
        assert sol.E_TF_pF <= bare_solution.E_TF + 1e-12
        assert 0.0 <= sol.overflow_mass <= 1.0


def test_cutoff_gap_scan_inactive_grid(bare_solution):
    scan = cutoff_gap_scan(harmonic_trap(0.0), [4.0, 8.0, 16.0, 32.0])
    assert all(g >= 0.0 for g in scan.gaps)
    assert all(b <= a for a, b in zip(scan.gaps, scan.gaps[1:]))
    assert scan.fitted_exponent >= 1.8  # +inf once every gap underflows


def test_cutoff_gap_active_regime_decreasing(bare_solution):
    # below sqrt(lambda) the cap binds: positive, strictly shrinking gaps
    scan = cutoff_gap_scan(harmonic_trap(0.0), [0.6, 0.9, 1.2, 1.5])
    assert all(g > 0.0 for g in scan.gaps)
    assert all(b < a for a, b in zip(scan.gaps, scan.gaps[1:]))
    sol = cutoff_tf_solve(harmonic_trap(0.0), 0.9)
    assert sol.active
    assert abs(sol.regular_mass + sol.overflow_mass - 1.0) < 1e-9


def test_nonradial_grid_path_anisotropic_quadratic():
    # V = x^2 + 2 y^2 + 3 z^2: mass(lam) = lam^3 / (24 sqrt(6))
    def eval3d(x):
        return x[..., 0] ** 2 + 2.0 * x[..., 1] ** 2 + 3.0 * x[..., 2] ** 2

    v = Potential(kind="anisotropic", radial=False, growth=2.0, radial_fn=None, eval_3d=eval3d)
    sol = tf_solve(v)
    exact = (24.0 * math.sqrt(6.0)) ** (1.0 / 3.0)
    assert abs(sol.lambda_TF - exact) / exact < 2e-3
    assert abs(sol.mass - 1.0) < 1e-9


def test_density_csv_columns(tmp_path, bare_solution):
    path = tmp_path / "tf.csv"
    write_density_csv(path, bare_solution, header_lines=["check"])
    lines = path.read_text().splitlines()
    assert lines[0] == "# check"
    assert lines[1] == "r,rho,V,lagrange_residual"
    cells = np.array([[float(c) for c in ln.split(",")] for ln in lines[2:]])
    assert np.all(np.isfinite(cells))
    assert cells[0, 1] == pytest.approx((bare_solution.lambda_TF / KAPPA) ** 1.5)
