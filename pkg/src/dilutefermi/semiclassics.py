"""Phase-space counting functions and filling-level solving.

The momentum integrals are eliminated analytically, so the particle
count at level L reduces to (1/(6 pi^2)) int (L - V)_+^{3/2} and the
energy to (1/(2 pi^2)) int [(1/5)(L - V)_+^{5/2} + (V/3)(L - V)_+^{3/2}],
one-dimensional integrals for radial traps.  Also houses the shifted
variational energy, a finite-difference differentiability probe for the
count, and the phase-space (Vlasov) energy of explicit trial
occupations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import Tolerance, find_root_monotone, find_sign_changes, integrate_radial
from .thomas_fermi import GridField, NormalizationError, _simpson_weights, _support_radius

__all__ = [
    "PhaseSpaceBudget",
    "H2Report",
    "DivergenceError",
    "phase_space_counts",
    "lambda_for_filling",
    "h2_probe",
    "vlasov_energy",
    "write_counts_csv",
]


class DivergenceError(RuntimeError):
    """The phase-space integral does not converge (trap not confining)."""


@dataclass(frozen=True)
class PhaseSpaceBudget:
    """Counting data at one energy level."""

    Lambda: float
    n_cl: float
    e_cl: float

    @property
    def e_tilde(self):
        return self.e_cl - self.Lambda * self.n_cl


def phase_space_counts(v, Lambda, tol=Tolerance(abs=1e-12, rel=1e-12)) -> PhaseSpaceBudget:
    """Particle and energy counts of the filled phase-space region below Lambda."""
    if not math.isfinite(Lambda):
        raise ValueError("Lambda must be finite")
    if not getattr(v, "radial", True):
        return _grid_counts(v, Lambda)
    vr = v.radial_fn
    if Lambda <= v.min_value():
        return PhaseSpaceBudget(float(Lambda), 0.0, 0.0)
    try:
        r_last, roots = _support_radius(vr, Lambda)
    except NormalizationError as exc:
        raise DivergenceError(str(exc)) from exc

    def gap(r):
        return np.maximum(Lambda - vr(np.asarray(r, dtype=float)), 0.0)

    n_cl = integrate_radial(lambda r: gap(r) ** 1.5, r_last, tol, breakpoints=roots) / (
        6.0 * math.pi**2
    )
    e_cl = integrate_radial(
        lambda r: 0.2 * gap(r) ** 2.5 + vr(np.asarray(r, dtype=float)) / 3.0 * gap(r) ** 1.5,
        r_last,
        tol,
        breakpoints=roots,
    ) / (2.0 * math.pi**2)
    return PhaseSpaceBudget(float(Lambda), n_cl, e_cl)


def _grid_counts(v, Lambda, points=161):
    extents = []
    for axis in range(3):
        t = 1.0
        for _ in range(60):
            x = np.zeros((1, 3))
            x[0, axis] = t
            if float(v(x)[0]) > Lambda:
                break
            t *= 2.0
        else:
            raise DivergenceError("trap not confining along a coordinate axis")
        extents.append(t)
    axes = tuple(np.linspace(-1.5 * e, 1.5 * e, points) for e in extents)
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    vals = v(grid.reshape(-1, 3)).reshape(grid.shape[:-1])
    gap = np.maximum(Lambda - vals, 0.0)
    n_cl = GridField(axes, gap**1.5).integrate() / (6.0 * math.pi**2)
    e_cl = GridField(axes, 0.2 * gap**2.5 + vals / 3.0 * gap**1.5).integrate() / (
        2.0 * math.pi**2
    )
    return PhaseSpaceBudget(float(Lambda), n_cl, e_cl)


def lambda_for_filling(v, target, tol=Tolerance(abs=1e-11, rel=1e-13)):
    """Level Lambda with n_cl(Lambda) = target, by monotone root finding."""
    if not target > 0:
        raise NormalizationError("filling target must be positive (bracket degenerates)")
    vmin = v.min_value() if getattr(v, "radial", True) else 0.0
    lo = vmin + 1e-9
    hi = vmin + 1.0
    for _ in range(200):
        if phase_space_counts(v, hi).n_cl > target:
            break
        hi = vmin + 2.0 * (hi - vmin)
    else:
        raise NormalizationError("could not bracket the filling level")
    res = find_root_monotone(
        lambda lam: phase_space_counts(v, lam).n_cl - target, lo, hi, tol
    )
    return res.root


@dataclass
class H2Report:
    """Finite-difference evidence for differentiability of the count.

    ``derivatives`` are central estimates of d n_cl / d Lambda at the
    interior grid points; ``score`` is the largest second difference of
    those estimates relative to the local derivative size, which stays
    O(spacing^2) for a smooth count and spikes at cusps.  The grid-based
    probe certifies smoothness only at the probed levels.
    """

    lambdas: np.ndarray
    derivatives: np.ndarray
    score: float
    flagged: bool
    threshold: float
    counts: np.ndarray = field(repr=False, default=None)


def h2_probe(v, lambda_grid, threshold=0.1) -> H2Report:
    """Probe smoothness of Lambda -> n_cl on an increasing grid of levels."""
    grid = np.asarray(lambda_grid, dtype=float)
    if grid.size < 8 or np.any(np.diff(grid) <= 0):
        raise ValueError("need an increasing grid of at least 8 levels")
    counts = np.array([phase_space_counts(v, lam).n_cl for lam in grid])
    mids = grid[1:-1]
    derivs = (counts[2:] - counts[:-2]) / (grid[2:] - grid[:-2])
    if derivs.size >= 3:
        second = np.abs(derivs[2:] - 2.0 * derivs[1:-1] + derivs[:-2])
        scale = np.maximum(np.abs(derivs[1:-1]), 1e-300)
        score = float(np.max(second / scale))
    else:
        score = 0.0
    return H2Report(
        lambdas=mids,
        derivatives=derivs,
        score=score,
        flagged=bool(score > threshold),
        threshold=float(threshold),
        counts=counts,
    )


def vlasov_energy(v, occupation, r_nodes, p_nodes):
    """Phase-space energy and mass of a radial trial occupation.

    ``occupation`` is either a callable m(r, p) or an array of shape
    (len(r_nodes), len(p_nodes)) with values in [0, 2]; the measure is
    dx dp / (2 pi)^3 with both factors radial.  Returns (energy, mass).
    """
    r = np.asarray(r_nodes, dtype=float)
    p = np.asarray(p_nodes, dtype=float)
    if callable(occupation):
        m = np.asarray(occupation(r[:, None], p[None, :]), dtype=float)
    else:
        m = np.asarray(occupation, dtype=float)
    if m.shape != (r.size, p.size):
        raise ValueError("occupation shape must be (len(r), len(p))")
    if np.min(m) < -1e-12 or np.max(m) > 2.0 + 1e-12:
        raise ValueError("occupation must take values in [0, 2]")
    wr = _simpson_weights(r) * 4.0 * np.pi * r * r
    wp = _simpson_weights(p) * 4.0 * np.pi * p * p
    vv = v.radial_fn(r)
    norm = (2.0 * math.pi) ** 3
    mass = float(wr @ m @ wp) / norm
    energy = float(wr @ (m * (vv[:, None] + p[None, :] ** 2)) @ wp) / norm
    return energy, mass


def write_counts_csv(path, v, lambda_grid, header_lines=()):
    """Emit columns Lambda, n_cl, e_cl, e_tilde, d_n_cl over a level grid."""
    grid = np.asarray(lambda_grid, dtype=float)
    budgets = [phase_space_counts(v, lam) for lam in grid]
    n = np.array([b.n_cl for b in budgets])
    d_n = np.gradient(n, grid)
    with open(path, "w", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write("Lambda,n_cl,e_cl,e_tilde,d_n_cl\n")
        for b, dn in zip(budgets, d_n):
            row = (b.Lambda, b.n_cl, b.e_cl, b.e_tilde, dn)
            fh.write(",".join(repr(float(c)) for c in row) + "\n")
