"""Quantum side of the semiclassical comparison.

Eigenvalue catalogs come from two oracles: the analytic 3d isotropic
harmonic spectrum and a one-dimensional symmetric finite-difference
discretization (dense 3d eigensolvers exceed desk scale, and the
phase-space identities are dimension-agnostic).  On top of the catalogs
sit spectral counting, Weyl-error exponent scans, the radial density of
the filled free ground state, and coherent-state (Husimi) identity
checks.

The one-dimensional analog of the bulk scaling hbar = N^(-1/3) is
hbar = N^(-1), so the number of bound states below a fixed level again
grows like N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .numerics import RadialProfile, Tolerance, find_sign_changes, integrate_radial
from .semiclassics import phase_space_counts
from .potentials import harmonic_trap

__all__ = [
    "SpectralCatalog",
    "HusimiReport",
    "WeylScan",
    "TruncationError",
    "DomainTooSmallError",
    "DepthError",
    "ResolutionError",
    "harmonic_catalog",
    "fd_catalog_1d",
    "spectral_counts",
    "weyl_error_scan",
    "free_ground_state_density",
    "free_ground_state_density_fn",
    "coherent_identity_check_1d",
    "hermite_functions",
    "write_catalog_csv",
    "write_scan_csv",
    "write_profile_csv",
]


class TruncationError(ValueError):
    """Requested level lies beyond the catalog truncation."""


class DomainTooSmallError(RuntimeError):
    """Eigenfunctions reach the grid boundary; enlarge the domain."""


class DepthError(ValueError):
    """Shell index beyond the validated recurrence depth."""


class ResolutionError(RuntimeError):
    """Grid too coarse for the coherent-state width."""


@dataclass
class SpectralCatalog:
    """Sorted eigenvalue list with degeneracies, complete below lambda_max."""

    hbar: float
    energies: np.ndarray
    degeneracies: np.ndarray
    provenance: str
    lambda_max: float
    grid: np.ndarray = field(repr=False, default=None)
    vectors: np.ndarray = field(repr=False, default=None)  # columns, unit h-weighted norm
    potential_1d: object = field(repr=False, default=None)
    discretization_error: float = None
    sturm_certified: bool = None

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        d = np.asarray(self.degeneracies, dtype=int)
        if np.any(np.diff(e) <= 0):
            raise ValueError("catalog energies must be strictly increasing")
        if np.any(d < 1):
            raise ValueError("degeneracies must be >= 1")
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "degeneracies", d)


def harmonic_catalog(hbar, lambda_max, offset=0.0) -> SpectralCatalog:
    """Analytic catalog of -hbar^2 Lap + |x|^2 + offset up to lambda_max.

    Shell n carries energy offset + hbar (2n + 3) and degeneracy
    (n + 1)(n + 2) / 2.
    """
    if hbar <= 0:
        raise ValueError("hbar must be positive")
    if lambda_max <= offset:
        raise ValueError("lambda_max must exceed the offset")
    n_max = int(math.floor(((lambda_max - offset) / hbar - 3.0) / 2.0))
    ns = np.arange(0, n_max + 1) if n_max >= 0 else np.arange(0)
    energies = offset + hbar * (2.0 * ns + 3.0)
    degs = ((ns + 1) * (ns + 2) // 2) if ns.size else np.ones(0, dtype=int)
    return SpectralCatalog(
        hbar=float(hbar),
        energies=energies,
        degeneracies=degs,
        provenance="analytic_harmonic_3d",
        lambda_max=float(lambda_max),
    )


def _sturm_count(diag, off, x):
    """Number of eigenvalues of the symmetric tridiagonal matrix below x."""
    count = 0
    d = diag[0] - x
    if d < 0:
        count += 1
    tiny = 1e-300
    for i in range(1, len(diag)):
        denom = d if abs(d) > tiny else math.copysign(tiny, d if d != 0 else 1.0)
        d = (diag[i] - x) - off[i - 1] ** 2 / denom
        if d < 0:
            count += 1
    return count


def fd_catalog_1d(
    v, hbar, halfwidth, points, lambda_max, keep_vectors=True
) -> SpectralCatalog:
    """Eigenvalues of -hbar^2 d^2/dx^2 + v on [-halfwidth, halfwidth].

    Symmetric second differences with homogeneous Dirichlet boundary
    conditions.  Completeness below lambda_max is certified by a Sturm
    count; a one-step grid refinement provides the discretization-error
    estimate; eigenfunction mass at the boundary above 1e-8 raises a
    domain error.
    """
    if points < 200:
        raise ValueError("need at least 200 grid points")
    # classically allowed region must fit with >= 20% margin
    xs = np.linspace(0.0, halfwidth, 4096)
    vx = np.asarray(v(xs), dtype=float)
    allowed = xs[vx <= lambda_max]
    turning = float(allowed[-1]) if allowed.size else 0.0
    if turning * 1.2 > halfwidth:
        raise DomainTooSmallError(
            f"classically allowed region |x| <= {turning:.3g} needs a 20% margin "
            f"inside halfwidth {halfwidth}"
        )

    def solve(n):
        x = np.linspace(-halfwidth, halfwidth, n + 2)[1:-1]
        h = x[1] - x[0]
        diag = hbar**2 * 2.0 / h**2 + np.asarray(v(x), dtype=float)
        off = np.full(n - 1, -(hbar**2) / h**2)
        lo = float(np.min(diag) - 3.0 * hbar**2 / h**2)
        w, vecs = eigh_tridiagonal(diag, off, select="v", select_range=(lo, lambda_max))
        return x, h, diag, off, w, vecs

    x, h, diag, off, w, vecs = solve(points)
    if w.size == 0:
        raise ValueError("no eigenvalues below lambda_max; raise it or shrink hbar")
    sturm_ok = _sturm_count(diag, off, lambda_max) == w.size

    # vecs columns are unit-norm in plain l2, so entry^2 is already a mass fraction
    boundary_mass = float(np.max(vecs[0, :] ** 2 + vecs[-1, :] ** 2))
    if boundary_mass > 1e-8:
        raise DomainTooSmallError(
            f"eigenfunction boundary mass {boundary_mass:.3e} exceeds 1e-8"
        )

    _, _, _, _, w_fine, _ = solve(2 * points)
    k = min(w.size, w_fine.size)
    disc_err = float(np.max(np.abs(w[:k] - w_fine[:k]))) if k else math.inf

    return SpectralCatalog(
        hbar=float(hbar),
        energies=w,
        degeneracies=np.ones(w.size, dtype=int),
        provenance="finite_difference_1d",
        lambda_max=float(lambda_max),
        grid=x,
        vectors=vecs / math.sqrt(h) if keep_vectors else None,
        potential_1d=v,
        discretization_error=disc_err,
        sturm_certified=bool(sturm_ok),
    )


def spectral_counts(catalog: SpectralCatalog, Lambda):
    """(number, energy) of catalog levels at or below Lambda."""
    if Lambda > catalog.lambda_max:
        raise TruncationError(
            f"Lambda={Lambda} beyond catalog truncation {catalog.lambda_max}"
        )
    mask = catalog.energies <= Lambda
    n_q = int(np.sum(catalog.degeneracies[mask]))
    e_q = float(np.sum(catalog.energies[mask] * catalog.degeneracies[mask]))
    return n_q, e_q


@dataclass
class WeylScan:
    """Quantum-vs-semiclassical counting errors along an N sweep."""

    N: list
    hbar: list
    n_q: list
    e_q: list
    n_cl: float
    e_cl: float
    n_err: list
    e_err: list
    n_exponent: float
    e_exponent: float

    @property
    def n_err_over_N(self):
        return [e / n for e, n in zip(self.n_err, self.N)]

    @property
    def e_err_over_N(self):
        return [e / n for e, n in zip(self.e_err, self.N)]


def _fit_exponent(Ns, errs):
    pts = [(n, e) for n, e in zip(Ns, errs) if e > 0]
    if len(pts) < 2:
        return math.inf
    xs = np.log10([p for p, _ in pts])
    ys = np.log10([e for _, e in pts])
    return float(np.polyfit(xs, ys, 1)[0])


def _counts_cl_1d(v, Lambda, halfwidth):
    xs = np.linspace(-halfwidth, halfwidth, 65537)
    gap = np.maximum(Lambda - np.asarray(v(xs), dtype=float), 0.0)
    n_cl = float(np.trapezoid(np.sqrt(gap), xs)) / math.pi
    e_cl = float(
        np.trapezoid(gap ** 1.5 / 3.0 + np.asarray(v(xs), dtype=float) * np.sqrt(gap), xs)
    ) / math.pi
    return n_cl, e_cl


def weyl_error_scan(trap, N_list, Lambda) -> WeylScan:
    """Scan |n_q - N n_cl| and |e_q - N e_cl| over N with hbar tied to N.

    ``trap`` is "harmonic" (optionally {"kind": "harmonic", "offset": c})
    for the 3d analytic oracle with hbar = N^(-1/3), or
    {"kind": "fd_1d", "v": ..., "halfwidth": ..., "points": ...} for the
    one-dimensional oracle with hbar = N^(-1).  Least-squares slopes of
    log-error against log N are reported alongside the raw errors.
    """
    Ns = [int(n) for n in N_list]
    if len(Ns) < 2 or any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ValueError("N_list must be increasing with at least two entries")
    if max(Ns) < 100 * min(Ns):
        raise ValueError("N_list must span at least two decades")

    if trap == "harmonic" or (isinstance(trap, dict) and trap.get("kind") == "harmonic"):
        offset = float(trap.get("offset", 0.0)) if isinstance(trap, dict) else 0.0
        budget = phase_space_counts(harmonic_trap(offset=offset), Lambda)
        n_cl, e_cl = budget.n_cl, budget.e_cl
        hbars = [n ** (-1.0 / 3.0) for n in Ns]
        counts = []
        for hb in hbars:
            cat = harmonic_catalog(hb, Lambda + 1e-12, offset=offset)
            counts.append(spectral_counts(cat, Lambda))
    elif isinstance(trap, dict) and trap.get("kind") == "fd_1d":
        v = trap["v"]
        halfwidth = float(trap["halfwidth"])
        points = int(trap.get("points", 2000))
        n_cl, e_cl = _counts_cl_1d(v, Lambda, halfwidth)
        hbars = [1.0 / n for n in Ns]
        counts = []
        for hb in hbars:
            cat = fd_catalog_1d(v, hb, halfwidth, points, Lambda + 1e-12, keep_vectors=False)
            counts.append(spectral_counts(cat, Lambda))
    else:
        raise ValueError("trap must be 'harmonic' or an fd_1d spec")

    n_err = [abs(nq - n * n_cl) for (nq, _), n in zip(counts, Ns)]
    e_err = [abs(eq - n * e_cl) for (_, eq), n in zip(counts, Ns)]
    return WeylScan(
        N=Ns,
        hbar=hbars,
        n_q=[c[0] for c in counts],
        e_q=[c[1] for c in counts],
        n_cl=n_cl,
        e_cl=e_cl,
        n_err=n_err,
        e_err=e_err,
        n_exponent=_fit_exponent(Ns, n_err),
        e_exponent=_fit_exponent(Ns, e_err),
    )


def hermite_functions(n_max, x):
    """Orthonormal oscillator eigenfunctions psi_0..psi_n_max at x.

    Stable three-term recurrence on the normalized functions, so no
    factorials or overflow up to the validated depth of 200 shells.
    """
    if n_max > 200:
        raise DepthError("shell index beyond validated recurrence depth 200")
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1, x.size))
    out[0] = math.pi ** (-0.25) * np.exp(-0.5 * x * x)
    if n_max >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for n in range(1, n_max):
        out[n + 1] = (
            math.sqrt(2.0 / (n + 1.0)) * x * out[n]
            - math.sqrt(n / (n + 1.0)) * out[n - 1]
        )
    return out


def _shell_occupations(M):
    """Occupancy weight per shell for the M lowest 3d oscillator states.

    Full shells carry weight 1; the topmost shell is filled uniformly
    (fractionally), the unique spectral filling with a radial density.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    weights = []
    left = float(M)
    n = 0
    while left > 0:
        if n > 200:
            raise DepthError("shell index beyond validated recurrence depth 200")
        deg = (n + 1) * (n + 2) // 2
        take = min(1.0, left / deg)
        weights.append(take)
        left -= take * deg
        n += 1
    return np.array(weights)


def free_ground_state_density_fn(hbar, M):
    """Radial density (as a callable) of the filled free oscillator ground state."""
    w_shell = _shell_occupations(M)
    n_top = w_shell.size - 1
    z = hermite_functions(n_top, np.array([0.0]))[:, 0]
    z2 = z * z
    pair = np.convolve(z2, z2)[: n_top + 1]  # sum_{j+k=m} psi_j(0)^2 psi_k(0)^2
    # coefficient of psi_i(x)^2: sum over occupied shells n >= i of w_n pair[n-i]
    coef = np.array(
        [float(np.sum(w_shell[i:] * pair[: n_top - i + 1])) for i in range(n_top + 1)]
    )
    scale = hbar ** (-1.5)

    def rho(r):
        r = np.asarray(r, dtype=float)
        tab = hermite_functions(n_top, r.ravel() / math.sqrt(hbar)) ** 2
        return scale * (coef @ tab).reshape(r.shape)

    return rho


def free_ground_state_density(hbar, M, nodes) -> RadialProfile:
    """Radial density of the projector on the M lowest oscillator states."""
    fn = free_ground_state_density_fn(hbar, M)
    nodes = np.asarray(nodes, dtype=float)
    return RadialProfile(nodes, fn(nodes))


@dataclass
class HusimiReport:
    """Residuals of the coherent-state identities on a 1d catalog."""

    hbar: float
    hbar_x: float
    hbar_p: float
    fill: int
    resolution_residual: float
    kinetic_identity_residual: float
    kinetic_reference: float
    potential_identity_residual: float
    lowfreq_identity_residual: float
    lowfreq_reference: float
    m_min: float
    m_max: float
    grad_window_sq: float


def coherent_identity_check_1d(
    catalog: SpectralCatalog, fill, hbar_x=None, hbar_p=None, p_F=1.0
) -> HusimiReport:
    """Husimi-transform identity residuals for a filled 1d projector.

    Builds m(x, p) by testing the rank-``fill`` projector against
    Gaussian coherent states with widths (hbar_x, hbar_p), default split
    sqrt(hbar_x) = hbar_p = hbar^(2/3).  Reports residuals of (a) the
    resolution of identity, (b) the exact kinetic convolution identity
    tr(-hbar^2 Lap gamma) + hbar_p tr(gamma) |grad f|^2, (c) the
    potential smearing of order hbar_x, and (d) the low-frequency
    kinetic identity weighted by 1 - Gamma(p).  The coherent vectors are
    normalized in the discrete norm, so m lies in [0, 1] up to roundoff
    by Bessel's inequality.
    """
    if catalog.vectors is None or catalog.grid is None:
        raise ValueError("catalog must carry grid and eigenvectors (fd provenance)")
    n_levels = catalog.vectors.shape[1]
    if not 1 <= fill <= n_levels:
        raise ValueError(f"fill must be in 1..{n_levels}")
    hbar = catalog.hbar
    if hbar_x is None and hbar_p is None:
        hbar_p = hbar ** (2.0 / 3.0)
        hbar_x = hbar ** (4.0 / 3.0)
    if hbar_x is None or hbar_p is None:
        raise ValueError("give both hbar_x and hbar_p or neither")
    if abs(hbar_x * hbar_p - hbar**2) > 1e-10 * hbar**2:
        raise ValueError("need hbar_x * hbar_p = hbar^2")

    x = catalog.grid
    h = float(x[1] - x[0])
    sigma = math.sqrt(hbar_x)
    if h > sigma / 8.0:
        raise ResolutionError(
            f"grid spacing {h:.3g} too coarse for coherent width {sigma:.3g} "
            "(need >= 8 nodes per width)"
        )
    psi = catalog.vectors[:, :fill]  # physical normalization: h * sum psi^2 = 1

    # Husimi x-nodes: stride the catalog grid down to ~8 nodes per width
    stride = max(1, int(sigma / (8.0 * h)))
    xm = x[::stride]
    dx = h * stride

    # momentum content via discrete Fourier transform of the eigenvectors
    n_grid = x.size
    k = 2.0 * math.pi * np.fft.fftfreq(n_grid, d=h)
    p_spec = hbar * k
    psi_hat = np.fft.fft(psi, axis=0) * h / math.sqrt(2.0 * math.pi)
    dk = 2.0 * math.pi / (n_grid * h)
    t_spec = np.sum(np.abs(psi_hat) ** 2, axis=1) * dk  # integrates to ~fill over dp

    kinetic_spec = float(np.sum(p_spec**2 * t_spec))
    with np.errstate(divide="ignore", over="ignore"):
        weight_lf = np.minimum(1.0, (p_F / np.maximum(np.abs(p_spec), 1e-300)) ** 2)
    lowfreq_spec = float(np.sum(p_spec**2 * weight_lf * t_spec))

    p_occ = float(np.max(np.abs(p_spec)[t_spec > 1e-14 * np.max(t_spec)]))
    sp = math.sqrt(hbar_p)
    p_max = p_occ + 10.0 * sp
    n_p = max(64, int(math.ceil(2.0 * p_max / (sp / 8.0))) + 1)
    p = np.linspace(-p_max, p_max, n_p)
    dp = p[1] - p[0]

    # Gaussian windows, normalized in the same discrete norm as psi;
    # the unit Gaussian has |grad f|^2 = 1/2 exactly
    w = np.exp(-((xm[:, None] - x[None, :]) ** 2) / (2.0 * hbar_x))
    w /= np.sqrt(h * np.sum(w * w, axis=1))[:, None]
    grad_window_sq = 0.5

    phases = np.exp(-1j * np.outer(p, x) / hbar) * h  # quadrature weight folded in
    m = np.zeros((xm.size, p.size))
    for j in range(fill):
        overlap = (w * psi[:, j][None, :]) @ phases.T
        m += np.abs(overlap) ** 2

    mass = float(np.sum(m)) * dx * dp / (2.0 * math.pi * hbar)
    resolution_residual = abs(mass - fill) / fill

    kin_husimi = float(np.sum(m * p[None, :] ** 2)) * dx * dp / (2.0 * math.pi * hbar)
    kin_expected = kinetic_spec + hbar_p * fill * grad_window_sq
    kinetic_residual = abs(kin_husimi - kin_expected)

    vv = np.asarray(catalog.potential_1d(x), dtype=float)
    pot_trace = float(np.sum(vv[:, None] * psi**2)) * h
    vm = np.asarray(catalog.potential_1d(xm), dtype=float)
    pot_husimi = float(np.sum(m * vm[:, None])) * dx * dp / (2.0 * math.pi * hbar)
    potential_residual = abs(pot_husimi - pot_trace)

    with np.errstate(divide="ignore", over="ignore"):
        lf_weight = np.minimum(1.0, (p_F / np.maximum(np.abs(p), 1e-300)) ** 2)
    lf_husimi = float(np.sum(m * (p**2 * lf_weight)[None, :])) * dx * dp / (
        2.0 * math.pi * hbar
    )
    lowfreq_residual = abs(lf_husimi - lowfreq_spec)

    return HusimiReport(
        hbar=hbar,
        hbar_x=float(hbar_x),
        hbar_p=float(hbar_p),
        fill=int(fill),
        resolution_residual=resolution_residual,
        kinetic_identity_residual=kinetic_residual,
        kinetic_reference=kin_expected,
        potential_identity_residual=potential_residual,
        lowfreq_identity_residual=lowfreq_residual,
        lowfreq_reference=lowfreq_spec,
        m_min=float(np.min(m)),
        m_max=float(np.max(m)),
        grad_window_sq=grad_window_sq,
    )


def write_catalog_csv(path, catalog: SpectralCatalog, header_lines=()):
    """Emit columns level, degeneracy."""
    with open(path, "w", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write("level,degeneracy\n")
        for e, d in zip(catalog.energies, catalog.degeneracies):
            fh.write(f"{e!r},{int(d)}\n")


def write_scan_csv(path, scan: WeylScan, header_lines=()):
    """Emit columns N, hbar, n_q, e_q, n_err, e_err."""
    with open(path, "w", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write("N,hbar,n_q,e_q,n_err,e_err\n")
        for row in zip(scan.N, scan.hbar, scan.n_q, scan.e_q, scan.n_err, scan.e_err):
            fh.write(",".join(repr(c) if isinstance(c, float) else str(c) for c in row) + "\n")


def write_profile_csv(path, profile: RadialProfile, header_lines=()):
    """Emit a radial density profile with columns r, rho."""
    with open(path, "w", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write("r,rho\n")
        for r, rho in zip(profile.nodes, profile.values):
            fh.write(f"{float(r)!r},{float(rho)!r}\n")
