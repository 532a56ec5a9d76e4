"""Headline assembly: the two-term energy prediction, admissible box
scales, the box-decomposition upper-bound estimator, and the lower-bound
error budget.

Scaling conventions: hbar = N^(-1/3); the pair interaction is
w_N = N^(2 beta - 2/3) w(N^beta .) with range r = N^(-beta) R_w; the
dilute regime is beta > 1/3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .numerics import Tolerance
from .scattering import InteractionSpec, zero_energy_solve
from .thomas_fermi import C_TF, TFSolution, tf_solve

__all__ = [
    "ScalingContext",
    "EnergyPrediction",
    "WindowReport",
    "BoxEstimate",
    "ErrorBudget",
    "RegimeError",
    "DegenerateTilingError",
    "make_context",
    "predict_energy",
    "beta_l_window",
    "box_estimate",
    "box_kinetic_interaction_sum",
    "error_budget",
    "write_prediction_csv",
    "write_boxes_csv",
    "write_budget_csv",
]


class RegimeError(ValueError):
    """Exponent beta outside the regime the construction needs."""


class DegenerateTilingError(ValueError):
    """Box side exceeds the support diameter; the tiling is degenerate."""


@dataclass(frozen=True)
class ScalingContext:
    """Particle number, dilute exponent and the solved interaction data."""

    N: int
    beta: float
    interaction: InteractionSpec
    a_w: float
    R_w: float

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("N must be >= 2")
        if not self.beta > 1.0 / 3.0:
            raise RegimeError("dilute regime needs beta > 1/3")

    @property
    def hbar(self):
        return float(self.N) ** (-1.0 / 3.0)

    @property
    def gap(self):
        """Inter-box gap r = N^(-beta) R_w."""
        return float(self.N) ** (-self.beta) * self.R_w

    @property
    def coupling(self):
        """Contact coupling g = 8 pi a_w N^(1/3 - beta) of the perturbed functional."""
        return 8.0 * math.pi * self.a_w * float(self.N) ** (1.0 / 3.0 - self.beta)


def make_context(N, beta, interaction: InteractionSpec, tol=Tolerance()) -> ScalingContext:
    """Solve the interaction's scattering problem once and freeze the context."""
    sol = zero_energy_solve(interaction, tol=tol)
    return ScalingContext(
        N=int(N), beta=float(beta), interaction=interaction, a_w=sol.a, R_w=interaction.range_
    )


@dataclass
class EnergyPrediction:
    """Two-term expansion N E_TF + 2 pi a_w N^(4/3 - beta) int rho_TF^2."""

    N: int
    beta: float
    main: float
    correction: float

    @property
    def total(self):
        return self.main + self.correction

    @property
    def relative_correction(self):
        return self.correction / self.main


def predict_energy(v, ctx: ScalingContext, tf: TFSolution = None) -> EnergyPrediction:
    """Assemble the two-term prediction from the trap's minimizer data."""
    if tf is None:
        tf = tf_solve(v)
    main = ctx.N * tf.E_TF
    correction = (
        2.0
        * math.pi
        * ctx.a_w
        * float(ctx.N) ** (4.0 / 3.0 - ctx.beta)
        * tf.interaction_integral
    )
    return EnergyPrediction(N=ctx.N, beta=ctx.beta, main=main, correction=correction)


@dataclass
class WindowReport:
    """Admissible exponent window for the box side l = N^e.

    The box construction needs N^(1/3 - beta) >> l >> N^(-27/21 (1 - 3 beta) - beta)
    and l >> N^(beta/3 - 4/9); feasibility is the strict ordering of the
    exponents, decided in exact rational arithmetic when beta is given as
    a Fraction.
    """

    beta: object
    N: int
    e_hi: object
    e_lo1: object
    e_lo2: object
    feasible: bool
    lower_bound_regime: bool  # beta < 1/2, the lower-bound proof window
    chosen_exponent: float = None
    chosen_l: float = None


def beta_l_window(beta, N) -> WindowReport:
    """Exponent window and midpoint box side for the given (beta, N)."""
    exact = isinstance(beta, Fraction)
    b = beta if exact else float(beta)
    one = Fraction(1) if exact else 1.0
    e_hi = one / 3 - b
    e_lo1 = -Fraction(27, 21) * (1 - 3 * b) - b if exact else -27.0 / 21.0 * (1.0 - 3.0 * b) - b
    e_lo2 = b / 3 - one * 4 / 9
    e_lo = max(e_lo1, e_lo2)
    feasible = e_hi > e_lo
    lower_flag = b < one / 2
    chosen_exponent = None
    chosen_l = None
    if feasible:
        chosen_exponent = float(e_hi + e_lo) / 2.0
        chosen_l = float(N) ** chosen_exponent
    return WindowReport(
        beta=beta,
        N=int(N),
        e_hi=e_hi,
        e_lo1=e_lo1,
        e_lo2=e_lo2,
        feasible=bool(feasible),
        lower_bound_regime=bool(lower_flag),
        chosen_exponent=chosen_exponent,
        chosen_l=chosen_l,
    )


@dataclass
class BoxEstimate:
    """Box-decomposition sums against the continuum prediction.

    Cells of pitch l + r tile the bounding cube of the minimizer's
    support; each cell's occupied box has side l.  Cell masses M_i
    follow the ceiling rule M_i = ceil((N/2) int_cell rho_TF).  The
    kinetic+interaction sum applies the homogeneous energy-density
    formula per box at side L = N^beta l; the potential sum charges
    2 M_i sup_box V.  The Riemann-sum diagnostics use the exact cell
    masses (no ceiling), since the ceiling is an integrality device of
    the trial state, not part of the Riemann sums.
    """

    l: float
    gap: float
    L: float
    n_cells: int
    occupied_cells: int
    masses: np.ndarray = field(repr=False)
    centers: np.ndarray = field(repr=False)
    kin_per_box: np.ndarray = field(repr=False, default=None)
    pot_per_box: np.ndarray = field(repr=False, default=None)
    kinetic_interaction_sum: float = 0.0
    potential_sum: float = 0.0
    prediction_total: float = 0.0
    riemann_rho53: float = 0.0
    riemann_rho2: float = 0.0
    continuum_rho53: float = 0.0
    continuum_rho2: float = 0.0

    @property
    def total(self):
        return self.kinetic_interaction_sum + self.potential_sum

    @property
    def ratio(self):
        return self.total / self.prediction_total

    @property
    def r_over_l(self):
        return self.gap / self.l

    @property
    def mass_sum_doubled(self):
        return int(2 * np.sum(self.masses))

    @property
    def rho53_defect(self):
        return abs(self.riemann_rho53 - self.continuum_rho53)

    @property
    def rho2_defect(self):
        return abs(self.riemann_rho2 - self.continuum_rho2)


def box_kinetic_interaction_sum(masses, L, N, beta, a_w):
    """Homogeneous-formula sum over boxes of side L holding 2 M_i particles.

    N^(2 beta - 2/3) sum_i [2 c_tf L^-2 M_i^(5/3) + 8 pi a_w L^-3 M_i^2].
    """
    Mf = np.asarray(masses, dtype=float)
    return float(N) ** (2.0 * beta - 2.0 / 3.0) * float(
        np.sum(2.0 * C_TF * Mf ** (5.0 / 3.0) / L**2 + 8.0 * math.pi * a_w * Mf**2 / L**3)
    )


_GL5_X, _GL5_W = np.polynomial.legendre.leggauss(5)


def _cell_masses(rho_fn, centers, pitch, chunk=8192):
    """Per-cell integrals of the density by tensor 5-point Gauss, chunked."""
    half = 0.5 * pitch
    offs = half * _GL5_X
    wts = half * _GL5_W
    ox, oy, oz = np.meshgrid(offs, offs, offs, indexing="ij")
    ww = (wts[:, None, None] * wts[None, :, None] * wts[None, None, :]).ravel()
    pts = np.stack([ox, oy, oz], axis=-1).reshape(-1, 3)
    out = np.empty(centers.shape[0])
    for i in range(0, centers.shape[0], chunk):
        block = centers[i : i + chunk]
        all_pts = block[:, None, :] + pts[None, :, :]
        radii = np.sqrt(np.sum(all_pts**2, axis=-1))
        vals = rho_fn(radii.ravel()).reshape(radii.shape)
        out[i : i + chunk] = vals @ ww
    return out


def box_estimate(v, ctx: ScalingContext, l, tf: TFSolution = None) -> BoxEstimate:
    """Evaluate the box-decomposition sums for box side l."""
    if tf is None:
        tf = tf_solve(v)
    if l <= 0:
        raise ValueError("box side must be positive")
    R = tf.support_radius
    if l >= 2.0 * R:
        raise DegenerateTilingError(
            f"box side {l} does not tile the support diameter {2 * R:.3g}"
        )
    r = ctx.gap
    pitch = l + r
    n_side = int(math.ceil(2.0 * R / pitch))
    start = -0.5 * n_side * pitch + 0.5 * pitch
    ax = start + pitch * np.arange(n_side)
    cx, cy, cz = np.meshgrid(ax, ax, ax, indexing="ij")
    centers = np.stack([cx, cy, cz], axis=-1).reshape(-1, 3)
    # only cells that can intersect the support ball contribute
    near = np.sqrt(np.sum(centers**2, axis=-1)) <= R + pitch
    centers = centers[near]

    masses = _cell_masses(tf.rho_fn, centers, pitch)
    M = np.ceil(ctx.N / 2.0 * masses).astype(np.int64)
    occupied = M > 0

    L = float(ctx.N) ** ctx.beta * l
    Mf = M.astype(float)
    kin_per_box = float(ctx.N) ** (2.0 * ctx.beta - 2.0 / 3.0) * (
        2.0 * C_TF * Mf ** (5.0 / 3.0) / L**2
        + 8.0 * math.pi * ctx.a_w * Mf**2 / L**3
    )
    kin_int = box_kinetic_interaction_sum(Mf, L, ctx.N, ctx.beta, ctx.a_w)

    # sup of a convex radial trap over an axis-aligned box sits at a corner
    half_l = 0.5 * l
    corner_offsets = np.array(
        [[sx * half_l, sy * half_l, sz * half_l] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)]
        + [[0.0, 0.0, 0.0]]
    )
    corner_pts = centers[:, None, :] + corner_offsets[None, :, :]
    corner_radii = np.sqrt(np.sum(corner_pts**2, axis=-1))
    sup_v = np.max(v.radial_fn(corner_radii.ravel()).reshape(corner_radii.shape), axis=1)
    pot_per_box = 2.0 * Mf * sup_v
    pot = float(np.sum(pot_per_box))

    pred = predict_energy(v, ctx, tf)

    cell_vol = pitch**3
    riemann53 = float(np.sum((masses / cell_vol) ** (5.0 / 3.0))) * cell_vol
    riemann2 = float(np.sum((masses / cell_vol) ** 2)) * cell_vol

    return BoxEstimate(
        l=float(l),
        gap=r,
        L=L,
        n_cells=int(centers.shape[0]),
        occupied_cells=int(np.sum(occupied)),
        masses=M,
        centers=centers,
        kin_per_box=kin_per_box,
        pot_per_box=pot_per_box,
        kinetic_interaction_sum=kin_int,
        potential_sum=pot,
        prediction_total=pred.total,
        riemann_rho53=riemann53,
        riemann_rho2=riemann2,
        continuum_rho53=tf.kinetic_integral,
        continuum_rho2=tf.interaction_integral,
    )


@dataclass
class ErrorBudget:
    """Lower-bound error budget f(N) under the coupled parameter rules.

    With delta = eps, p_F^-2 = eps N^(1/3 - beta), s^2 = eps^2 N^(1/3 - beta)
    and R = eps hbar, the budget reads
    f(N) = N^(5/6) + p_F^-2 N
         + delta^-1 N^(1/3 - beta) (N^(-1/18) + N^(1/6 - beta/2)) (R^-3 + 1/(eps s^2 R))
         + N^(1/3 - beta) / (eps s^2 R).
    The default eps = (N^(-1/18) + N^(1/6 - beta/2))^(1/8) sits strictly
    inside the corridor 1 >> eps >> (...)^(1/4).
    """

    N: int
    beta: float
    epsilon: float
    delta: float
    p_F: float
    s: float
    R: float
    bulk_term: float  # N^(5/6)
    cutoff_term: float  # p_F^-2 N
    softening_term: float  # the delta^-1 (...) combination
    remainder_term: float  # N^(1/3-beta) / (eps s^2 R)

    @property
    def total(self):
        return self.bulk_term + self.cutoff_term + self.softening_term + self.remainder_term

    @property
    def ratio(self):
        """f(N) / N^(4/3 - beta); vanishing ratio is the budget's whole point."""
        return self.total / float(self.N) ** (4.0 / 3.0 - self.beta)


def error_budget(N, beta, epsilon=None) -> ErrorBudget:
    """Evaluate the error budget at (N, beta) with the default or explicit eps."""
    N = int(N)
    beta = float(beta)
    if not (1.0 / 3.0 < beta < 0.5):
        raise RegimeError("error budget needs 1/3 < beta < 1/2")
    A = float(N) ** (-1.0 / 18.0) + float(N) ** (1.0 / 6.0 - beta / 2.0)
    eps = A ** (1.0 / 8.0) if epsilon is None else float(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    hbar = float(N) ** (-1.0 / 3.0)
    delta = eps
    p_F = (eps * float(N) ** (1.0 / 3.0 - beta)) ** (-0.5)
    s = eps * float(N) ** ((1.0 / 3.0 - beta) / 2.0)
    R = eps * hbar
    bulk = float(N) ** (5.0 / 6.0)
    cutoff = N / p_F**2
    softening = (
        (1.0 / delta)
        * float(N) ** (1.0 / 3.0 - beta)
        * A
        * (R**-3 + 1.0 / (eps * s**2 * R))
    )
    remainder = float(N) ** (1.0 / 3.0 - beta) / (eps * s**2 * R)
    return ErrorBudget(
        N=N,
        beta=beta,
        epsilon=eps,
        delta=delta,
        p_F=p_F,
        s=s,
        R=R,
        bulk_term=bulk,
        cutoff_term=cutoff,
        softening_term=softening,
        remainder_term=remainder,
    )


def write_prediction_csv(path, rows, header_lines=()):
    """Emit prediction rows (N, beta, main, correction, total)."""
    with open(path, "w", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write("N,beta,main,correction,total\n")
        for p in rows:
            fh.write(f"{p.N},{p.beta!r},{p.main!r},{p.correction!r},{p.total!r}\n")


def write_boxes_csv(path, est: BoxEstimate, header_lines=()):
    """Emit per-box rows (center, M_i, contributions) plus summary comments."""
    with open(path, "w", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(f"# l={est.l!r} gap={est.gap!r} L={est.L!r} ratio={est.ratio!r}\n")
        fh.write("cx,cy,cz,M_i,kinetic_interaction,potential\n")
        for (c, m, k, p) in zip(est.centers, est.masses, est.kin_per_box, est.pot_per_box):
            fh.write(f"{c[0]!r},{c[1]!r},{c[2]!r},{int(m)},{k!r},{p!r}\n")


def write_budget_csv(path, budgets, header_lines=()):
    """Emit budget rows (N, beta, component columns, total, ratio)."""
    with open(path, "w", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(
            "N,beta,epsilon,p_F,s,R,bulk_term,cutoff_term,softening_term,"
            "remainder_term,total,ratio\n"
        )
        for b in budgets:
            fh.write(
                f"{b.N},{b.beta!r},{b.epsilon!r},{b.p_F!r},{b.s!r},{b.R!r},"
                f"{b.bulk_term!r},{b.cutoff_term!r},{b.softening_term!r},"
                f"{b.remainder_term!r},{b.total!r},{b.ratio!r}\n"
            )
