"""Thomas-Fermi density functionals for a trapped two-spin gas.

The single-spin (total density) minimizer is the closed-form inversion
rho = ((lam - V)_+ / kappa)^{3/2} with the multiplier lam fixed by unit
mass; the coupled two-spin problem is solved by damped alternating
inversion; the momentum-cutoff variant caps the kinetic energy density
at the Fermi level and is solved exactly through its saturation
structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import (
    RadialProfile,
    Tolerance,
    find_root_monotone,
    find_sign_changes,
    integrate_radial,
)

__all__ = [
    "C_TF",
    "KAPPA",
    "KAPPA_SPIN",
    "TFConstants",
    "TFSolution",
    "TwoSpinState",
    "CutoffTFSolution",
    "GridField",
    "DomainError",
    "NormalizationError",
    "ConvergenceError",
    "tf_solve",
    "tf_functional",
    "two_spin_minimize",
    "cutoff_tf_solve",
    "cutoff_gap_scan",
    "write_density_csv",
]

#: kinetic coefficient of the per-spin functional, (3/5)(6 pi^2)^(2/3)
C_TF = 0.6 * (6.0 * math.pi**2) ** (2.0 / 3.0)
#: multiplier constant of the total-density Euler-Lagrange equation, (3 pi^2)^(2/3)
KAPPA = (3.0 * math.pi**2) ** (2.0 / 3.0)
#: per-spin Euler-Lagrange constant, (5/3) c_TF = (6 pi^2)^(2/3)
KAPPA_SPIN = (6.0 * math.pi**2) ** (2.0 / 3.0)


@dataclass(frozen=True)
class TFConstants:
    c_tf: float = C_TF
    kappa: float = KAPPA


class DomainError(ValueError):
    """Density input leaves the admissible domain (negative samples)."""


class NormalizationError(RuntimeError):
    """No chemical potential bracket normalizes the density to unit mass."""


class ConvergenceError(RuntimeError):
    """Fixed-point iteration exhausted its cap; carries the residual history."""

    def __init__(self, message, residual_history):
        super().__init__(message)
        self.residual_history = residual_history


@dataclass(frozen=True)
class GridField:
    """Scalar field sampled on a tensor grid (non-radial fallback)."""

    axes: tuple
    values: np.ndarray

    def integrate(self, integrand=None):
        w = 1.0
        vals = self.values if integrand is None else integrand
        for ax in reversed(self.axes):
            vals = np.tensordot(vals, _simpson_weights(ax), axes=([-1], [0]))
        return float(vals * w)


def _simpson_weights(x):
    n = len(x)
    if n < 3 or n % 2 == 0:
        raise ValueError("Simpson weights need an odd number of nodes >= 3")
    h = x[1] - x[0]
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * h / 3.0


@dataclass
class TFSolution:
    """Minimizer of the total-density functional at unit mass."""

    lambda_TF: float
    rho: object  # RadialProfile, or GridField for non-radial traps
    support_radius: float
    E_TF: float
    kinetic_integral: float  # integral of rho^{5/3}
    potential_integral: float  # integral of V rho
    interaction_integral: float  # integral of rho^2
    mass: float
    lagrange_residual: float
    rho_fn: object = field(repr=False, default=None)
    potential: object = field(repr=False, default=None)


@dataclass
class TwoSpinState:
    """Symmetric minimizer of the coupled two-spin functional."""

    rho_up: RadialProfile
    rho_down: RadialProfile
    coupling: float
    energy: float
    lambda_two_spin: float
    iterations: int
    residual_history: list = field(repr=False, default_factory=list)
    grid: np.ndarray = field(repr=False, default=None)
    rho_up_values: np.ndarray = field(repr=False, default=None)
    rho_down_values: np.ndarray = field(repr=False, default=None)


@dataclass
class CutoffTFSolution:
    """Minimizer data of the Fermi-momentum-capped functional."""

    p_F: float
    E_TF_pF: float
    overflow_mass: float
    lambda_used: float
    regular_mass: float
    active: bool
    E_TF: float


_QUAD_TOL = Tolerance(abs=1e-12, rel=1e-12)


def _support_radius(vr, lam, r_seed=1.0):
    """Largest radius with V <= lam, found by doubling plus a sign scan."""
    hi = r_seed
    for _ in range(200):
        if float(vr(np.array([hi]))[0]) > lam:
            break
        hi *= 2.0
    else:
        raise NormalizationError("potential does not exceed the multiplier; not confining?")
    roots = find_sign_changes(lambda r: lam - vr(np.asarray(r)), 0.0, hi, scan_points=1024)
    if not roots:
        return 0.0, []
    return roots[-1], roots


def _radial_mass(vr, lam, kappa, tol=_QUAD_TOL):
    r_last, roots = _support_radius(vr, lam)
    if r_last <= 0.0:
        return 0.0, 0.0, []

    def rho(r):
        gap = lam - vr(np.asarray(r, dtype=float))
        return np.where(gap > 0.0, (np.maximum(gap, 0.0) / kappa) ** 1.5, 0.0)

    return (
        integrate_radial(rho, r_last, tol, breakpoints=roots),
        r_last,
        roots,
    )


def tf_solve(v, tol=Tolerance(abs=1e-10, rel=1e-10)) -> TFSolution:
    """Solve the unit-mass Thomas-Fermi problem for a confining trap.

    The density is the closed-form inversion of the Euler-Lagrange
    equation, so the only unknown is the scalar multiplier, found by
    bracketed root finding on the mass defect.  All four reported
    integrals are evaluated by adaptive quadrature with breakpoints at
    the support boundary.
    """
    if not getattr(v, "radial", True):
        return _tf_solve_grid(v, tol)
    vr = v.radial_fn
    vmin = v.min_value()

    def mass_defect(lam):
        return _radial_mass(vr, lam, KAPPA)[0] - 1.0

    lo = vmin + 1e-9
    hi = vmin + 1.0
    for _ in range(200):
        if mass_defect(hi) > 0:
            break
        hi = vmin + 2.0 * (hi - vmin)
    else:
        raise NormalizationError("could not bracket the chemical potential")
    res = find_root_monotone(
        mass_defect, lo, hi, Tolerance(abs=max(tol.abs, 1e-12), rel=1e-14)
    )
    lam = res.root

    mass, r_support, roots = _radial_mass(vr, lam, KAPPA)

    def rho_fn(r):
        gap = lam - vr(np.asarray(r, dtype=float))
        return np.where(gap > 0.0, (np.maximum(gap, 0.0) / KAPPA) ** 1.5, 0.0)

    quad = _QUAD_TOL
    kin = integrate_radial(lambda r: rho_fn(r) ** (5.0 / 3.0), r_support, quad, breakpoints=roots)
    pot = integrate_radial(lambda r: vr(r) * rho_fn(r), r_support, quad, breakpoints=roots)
    inter = integrate_radial(lambda r: rho_fn(r) ** 2, r_support, quad, breakpoints=roots)
    e_tf = 2.0 ** (-2.0 / 3.0) * C_TF * kin + pot

    nodes = np.linspace(0.0, r_support * 1.02, 1537)
    profile = RadialProfile(nodes, rho_fn(nodes))

    inner = np.linspace(0.0, r_support * (1.0 - 1e-9), 2048)
    dens = rho_fn(inner)
    on = dens > 0
    residual = float(np.max(np.abs(KAPPA * dens[on] ** (2.0 / 3.0) + vr(inner[on]) - lam)))

    return TFSolution(
        lambda_TF=lam,
        rho=profile,
        support_radius=r_support,
        E_TF=e_tf,
        kinetic_integral=kin,
        potential_integral=pot,
        interaction_integral=inter,
        mass=mass,
        lagrange_residual=residual,
        rho_fn=rho_fn,
        potential=v,
    )


def _tf_solve_grid(v, tol, points=161):
    """Tensor-grid fallback for non-radial traps (same pointwise inversion)."""
    lam_probe = 1.0
    extents = None
    for _ in range(60):
        extents = []
        ok = True
        for axis in range(3):
            t = 1.0
            for _ in range(60):
                x = np.zeros((1, 3))
                x[0, axis] = t
                if float(v(x)[0]) > lam_probe:
                    break
                t *= 2.0
            else:
                ok = False
                break
            extents.append(t)
        if not ok:
            raise NormalizationError("trap not confining along a coordinate axis")
        axes = tuple(np.linspace(-1.5 * e, 1.5 * e, points) for e in extents)
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        vals = v(grid.reshape(-1, 3)).reshape(grid.shape[:-1])

        def mass(lam):
            gap = np.maximum(lam - vals, 0.0)
            return GridField(axes, (gap / KAPPA) ** 1.5).integrate()

        if mass(lam_probe) >= 1.0:
            break
        lam_probe *= 2.0
    else:
        raise NormalizationError("could not bracket the chemical potential on the grid")

    res = find_root_monotone(
        lambda lam: mass(lam) - 1.0,
        float(np.min(vals)) + 1e-9,
        lam_probe,
        Tolerance(abs=max(tol.abs, 1e-12), rel=1e-14),
    )
    lam = res.root
    gap = np.maximum(lam - vals, 0.0)
    rho = np.where(lam - vals > 0.0, (gap / KAPPA) ** 1.5, 0.0)
    fld = GridField(axes, rho)
    kin = GridField(axes, rho ** (5.0 / 3.0)).integrate()
    pot = GridField(axes, vals * rho).integrate()
    inter = GridField(axes, rho**2).integrate()
    on = rho > 0
    residual = float(np.max(np.abs(KAPPA * rho[on] ** (2.0 / 3.0) + vals[on] - lam)))
    radius = 0.0
    if np.any(on):
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)[on]
        radius = float(np.max(np.linalg.norm(pts, axis=-1)))
    return TFSolution(
        lambda_TF=lam,
        rho=fld,
        support_radius=radius,
        E_TF=2.0 ** (-2.0 / 3.0) * C_TF * kin + pot,
        kinetic_integral=kin,
        potential_integral=pot,
        interaction_integral=inter,
        mass=mass(lam),
        lagrange_residual=residual,
        rho_fn=None,
        potential=v,
    )


def tf_functional(v, rho, tol=_QUAD_TOL):
    """Energy of a trial total density (no normalization enforced).

    ``rho`` is a RadialProfile or a GridField; negative samples are a
    domain error.
    """
    if isinstance(rho, GridField):
        if np.min(rho.values) < -1e-13:
            raise DomainError("trial density has negative samples")
        vals = np.maximum(rho.values, 0.0)
        grid = np.stack(np.meshgrid(*rho.axes, indexing="ij"), axis=-1)
        vv = v(grid.reshape(-1, 3)).reshape(vals.shape)
        kin = GridField(rho.axes, vals ** (5.0 / 3.0)).integrate()
        pot = GridField(rho.axes, vv * vals).integrate()
        return 2.0 ** (-2.0 / 3.0) * C_TF * kin + pot
    if not isinstance(rho, RadialProfile):
        raise TypeError("rho must be a RadialProfile or GridField")
    if np.min(rho.values) < -1e-13:
        raise DomainError("trial density has negative samples")
    vr = v.radial_fn
    bps = rho.nodes if rho.nodes.size <= 128 else ()
    kin = integrate_radial(lambda r: np.maximum(rho(r), 0.0) ** (5.0 / 3.0), rho.r_max, tol, bps)
    pot = integrate_radial(lambda r: vr(r) * np.maximum(rho(r), 0.0), rho.r_max, tol, bps)
    return 2.0 ** (-2.0 / 3.0) * C_TF * kin + pot


def _two_spin_grid(v, base: TFSolution, g):
    lam_cap = base.lambda_TF + g * float(np.max(base.rho.values)) + 1.0
    r_max, _ = _support_radius(v.radial_fn, lam_cap)
    r = np.linspace(0.0, r_max * 1.05, 32769)
    w = _simpson_weights(r) * 4.0 * np.pi * r * r
    return r, w


def two_spin_minimize(v, g, tol=Tolerance(abs=1e-10, rel=1e-9), max_iterations=500, damping=0.5):
    """Minimize the coupled two-spin functional at unit total mass.

    Each spin sees the effective trap V + g * rho_other; the shared
    multiplier is re-solved every sweep so the pair stays normalized.
    Symmetric initialization keeps rho_up == rho_down identically, which
    is the minimizing branch for repulsive coupling.
    """
    if g < 0:
        raise ValueError("coupling must be nonnegative")
    base = tf_solve(v, tol)
    if g == 0.0:
        r = np.linspace(0.0, base.support_radius * 1.02, 1537)
        half = base.rho_fn(r) / 2.0
        prof = RadialProfile(r, half)
        return TwoSpinState(
            rho_up=prof,
            rho_down=prof,
            coupling=0.0,
            energy=base.E_TF,
            lambda_two_spin=base.lambda_TF,
            iterations=0,
            grid=r,
            rho_up_values=half,
            rho_down_values=half,
        )

    r, w = _two_spin_grid(v, base, g)
    vv = v.radial_fn(r)
    rho_s = base.rho_fn(r) / 2.0
    history = []
    lam = base.lambda_TF

    for it in range(1, max_iterations + 1):
        eff = vv + g * rho_s

        def mass_defect(mu):
            gap = np.maximum(mu - eff, 0.0)
            return 2.0 * float(w @ (gap / KAPPA_SPIN) ** 1.5) - 1.0

        lo = float(np.min(eff)) + 1e-12
        hi = max(lam, lo + 1.0)
        for _ in range(100):
            if mass_defect(hi) > 0:
                break
            hi = lo + 2.0 * (hi - lo)
        res = find_root_monotone(mass_defect, lo, hi, Tolerance(abs=1e-13, rel=1e-14))
        lam = res.root
        fresh = (np.maximum(lam - eff, 0.0) / KAPPA_SPIN) ** 1.5
        resid = float(w @ np.abs(fresh - rho_s))
        history.append(resid)
        rho_s = (1.0 - damping) * rho_s + damping * fresh
        if resid <= tol.rel:
            break
    else:
        raise ConvergenceError(
            f"two-spin fixed point did not reach {tol.rel} in {max_iterations} sweeps",
            history,
        )

    energy = float(w @ (2.0 * C_TF * rho_s ** (5.0 / 3.0) + 2.0 * vv * rho_s + g * rho_s**2))
    prof = RadialProfile(r, rho_s)
    return TwoSpinState(
        rho_up=prof,
        rho_down=prof,
        coupling=g,
        energy=energy,
        lambda_two_spin=lam,
        iterations=it,
        residual_history=history,
        grid=r,
        rho_up_values=rho_s,
        rho_down_values=rho_s.copy(),
    )


def cutoff_tf_solve(v, p_F, tol=Tolerance(abs=1e-10, rel=1e-10)) -> CutoffTFSolution:
    """Minimize the Fermi-momentum-capped functional (radial traps).

    The per-spin kinetic energy density follows the usual 5/3 power up
    to the local Fermi momentum and continues linearly with slope p_F^2
    beyond it (the continuous completion of the capped phase-space
    filling).  The capped density is pointwise below the uncapped one,
    so E_TF_pF <= E_TF always.  Whenever the uncapped multiplier exceeds
    min V + p_F^2 the minimizing sequence concentrates: the multiplier
    saturates there and the excess mass sits in a vanishing-volume spike
    at the trap bottom with energy (min V + p_F^2) per unit mass, which
    is also exactly the reported overflow mass.
    """
    if p_F <= 0:
        raise ValueError("p_F must be positive")
    if not getattr(v, "radial", True):
        raise NotImplementedError("cutoff functional is implemented for radial traps")
    base = tf_solve(v, tol)
    vmin = v.min_value()
    lam_sat = vmin + p_F * p_F
    if base.lambda_TF <= lam_sat:
        return CutoffTFSolution(
            p_F=float(p_F),
            E_TF_pF=base.E_TF,
            overflow_mass=0.0,
            lambda_used=base.lambda_TF,
            regular_mass=base.mass,
            active=False,
            E_TF=base.E_TF,
        )
    vr = v.radial_fn

    def spin_density(r):
        gap = lam_sat - vr(np.asarray(r, dtype=float))
        return np.where(gap > 0.0, (np.maximum(gap, 0.0) / KAPPA_SPIN) ** 1.5, 0.0)

    r_last, roots = _support_radius(vr, lam_sat)
    quad = _QUAD_TOL
    regular_mass = 2.0 * integrate_radial(spin_density, r_last, quad, breakpoints=roots)
    spike = max(0.0, 1.0 - regular_mass)
    kin = integrate_radial(lambda r: spin_density(r) ** (5.0 / 3.0), r_last, quad, breakpoints=roots)
    pot = integrate_radial(lambda r: vr(r) * spin_density(r), r_last, quad, breakpoints=roots)
    energy = 2.0 * C_TF * kin + 2.0 * pot + spike * lam_sat
    return CutoffTFSolution(
        p_F=float(p_F),
        E_TF_pF=energy,
        overflow_mass=spike,
        lambda_used=lam_sat,
        regular_mass=regular_mass,
        active=True,
        E_TF=base.E_TF,
    )


@dataclass
class CutoffScan:
    p_F: list
    gaps: list
    fitted_exponent: float
    resolution_floor: float


def cutoff_gap_scan(v, p_F_list, tol=Tolerance(abs=1e-10, rel=1e-10)) -> CutoffScan:
    """Gap E_TF - E_TF_pF over a p_F grid with a fitted decay exponent.

    Once every cap in the grid is inactive the gaps are exactly zero;
    the exponent is then reported as +inf ("decays faster than any
    fitted power"), since a log-log fit on values below the quadrature
    resolution floor would only fit noise.
    """
    base = tf_solve(v, tol)
    gaps = []
    for p in p_F_list:
        sol = cutoff_tf_solve(v, p, tol)
        gaps.append(base.E_TF - sol.E_TF_pF)
    floor = 1e-12 * max(1.0, abs(base.E_TF))
    usable = [(p, gap) for p, gap in zip(p_F_list, gaps) if gap > floor]
    if len(usable) >= 2:
        xs = np.log([p for p, _ in usable])
        ys = np.log([gap for _, gap in usable])
        slope = float(np.polyfit(xs, ys, 1)[0])
        exponent = -slope
    else:
        exponent = math.inf
    return CutoffScan(list(p_F_list), gaps, exponent, floor)


def write_density_csv(path, solution: TFSolution, header_lines=()):
    """Emit columns r, rho, V, lagrange_residual for a radial solution."""
    if not isinstance(solution.rho, RadialProfile):
        raise TypeError("CSV emission needs a radial solution")
    r = solution.rho.nodes
    rho = solution.rho.values
    vv = solution.potential.radial_fn(r)
    resid = np.where(
        rho > 0.0,
        np.abs(KAPPA * rho ** (2.0 / 3.0) + vv - solution.lambda_TF),
        0.0,
    )
    with open(path, "w", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write("r,rho,V,lagrange_residual\n")
        for row in zip(r, rho, vv, resid):
            fh.write(",".join(repr(float(c)) for c in row) + "\n")
