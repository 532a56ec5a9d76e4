"""Shared deterministic numeric kernel.

Adaptive radial quadrature, bracketed monotone root finding and L^p
distances between radial profiles.  Everything here is pure: no global
mutable state, no randomness, identical inputs give identical outputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Tolerance",
    "RadialProfile",
    "PowerTail",
    "RootResult",
    "BracketError",
    "RefinementError",
    "DomainMismatchError",
    "integrate_radial",
    "find_root_monotone",
    "find_sign_changes",
    "lp_distance",
]


class BracketError(ValueError):
    """The supplied interval does not bracket a sign change."""


class DomainMismatchError(ValueError):
    """Two radial profiles cannot be compared on a common domain."""


class RefinementError(RuntimeError):
    """Adaptive refinement hit its cap before reaching the tolerance.

    Carries the last two global estimates so callers can judge how far
    the refinement got.
    """

    def __init__(self, message, previous_estimate, last_estimate):
        super().__init__(message)
        self.previous_estimate = previous_estimate
        self.last_estimate = last_estimate


@dataclass(frozen=True)
class Tolerance:
    """Absolute/relative tolerance pair plus a refinement cap."""

    abs: float = 1e-10
    rel: float = 1e-10
    max_refinements: int = 48

    def __post_init__(self):
        if self.abs < 0 or self.rel < 0:
            raise ValueError("tolerances must be nonnegative")
        if self.abs + self.rel <= 0:
            raise ValueError("abs + rel must be positive")
        if self.max_refinements < 1:
            raise ValueError("max_refinements must be >= 1")


@dataclass(frozen=True)
class PowerTail:
    """Declared analytic tail value(r) = coefficient * r**(-power) beyond the last node."""

    coefficient: float
    power: float


@dataclass(frozen=True)
class RadialProfile:
    """Sampled radial function with a declared extrapolation rule.

    ``tail`` is either the string ``"zero"`` or a :class:`PowerTail`.
    Inside the node range values are linearly interpolated; below the
    first node the first value is held constant.
    """

    nodes: np.ndarray
    values: np.ndarray
    tail: object = "zero"

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)
        if nodes.ndim != 1 or nodes.size < 16:
            raise ValueError("a radial profile needs at least 16 nodes")
        if values.shape != nodes.shape:
            raise ValueError("nodes and values must have matching shapes")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("nodes must be strictly increasing")
        if not (np.all(np.isfinite(nodes)) and np.all(np.isfinite(values))):
            raise ValueError("nodes and values must be finite")
        if self.tail != "zero" and not isinstance(self.tail, PowerTail):
            raise ValueError("tail must be 'zero' or a PowerTail")

    @property
    def r_max(self):
        return float(self.nodes[-1])

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.interp(r, self.nodes, self.values)
        beyond = r > self.nodes[-1]
        if np.any(beyond):
            if self.tail == "zero":
                out = np.where(beyond, 0.0, out)
            else:
                out = np.where(beyond, self.tail.coefficient * r ** (-self.tail.power), out)
        return out


@dataclass
class RootResult:
    """Root of a monotone function with its final sign-change bracket."""

    root: float
    bracket: tuple
    bracket_values: tuple
    residual: float
    iterations: int
    monotone: bool = True
    warnings: list = field(default_factory=list)

    def __float__(self):
        return self.root


# 10-point Gauss-Legendre rule on [-1, 1], the workhorse panel rule.
_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)


def _panel_values(f, a, b):
    """Gauss-Legendre estimates of ``f`` over many panels at once.

    a, b: arrays of panel edges.  Returns the per-panel integrals using
    a single vectorized call to ``f``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    pts = mid[:, None] + half[:, None] * _GL_X[None, :]
    vals = np.asarray(f(pts.ravel()), dtype=float).reshape(pts.shape)
    return half * (vals @ _GL_W)


def integrate_radial(f, r_max, tol=Tolerance(), breakpoints=()):
    """Integrate f(r) * 4*pi*r^2 over [0, r_max] adaptively.

    ``f`` must accept ndarray input.  ``breakpoints`` are radii inserted
    as initial panel edges (e.g. support boundaries of (lam - V)_+
    integrands) so the refinement never straddles a known kink.  The
    panel error estimate is the difference between one Gauss panel and
    its two halves; panels are bisected until the estimate passes.
    """
    if r_max <= 0:
        raise ValueError("r_max must be positive")

    def weighted(r):
        r = np.asarray(r, dtype=float)
        return 4.0 * np.pi * r * r * np.asarray(f(r), dtype=float)

    edges = [0.0]
    for b in sorted(set(float(x) for x in breakpoints)):
        if 0.0 < b < r_max:
            edges.append(b)
    edges.append(float(r_max))
    a = np.array(edges[:-1])
    b = np.array(edges[1:])
    coarse = _panel_values(weighted, a, b)

    total = 0.0
    err_accum = 0.0
    depth = 0
    while a.size:
        if depth > tol.max_refinements:
            prev = total + float(np.sum(coarse))
            mids = 0.5 * (a + b)
            fine = _panel_values(weighted, np.concatenate([a, mids]), np.concatenate([mids, b]))
            raise RefinementError(
                "radial quadrature did not converge within "
                f"{tol.max_refinements} refinements",
                previous_estimate=prev,
                last_estimate=total + float(np.sum(fine)),
            )
        mids = 0.5 * (a + b)
        left = _panel_values(weighted, a, mids)
        right = _panel_values(weighted, mids, b)
        fine = left + right
        err = np.abs(fine - coarse)
        budget = np.maximum(tol.abs * (b - a) / r_max, tol.rel * np.abs(fine))
        ok = (err <= budget) | ((b - a) <= 1e-15 * r_max)
        total += float(np.sum(fine[ok]))
        err_accum += float(np.sum(err[ok]))
        keep = ~ok
        a = np.concatenate([a[keep], mids[keep]])
        b = np.concatenate([mids[keep], b[keep]])
        coarse = np.concatenate([left[keep], right[keep]])
        depth += 1
    return total


def find_sign_changes(g, lo, hi, scan_points=512, refine_tol=1e-13):
    """Locate sign changes of ``g`` on [lo, hi] by a uniform pre-pass scan.

    Returns the bisected roots in increasing order.  Used to turn
    support boundaries such as {V = lam} into quadrature breakpoints.
    """
    xs = np.linspace(lo, hi, scan_points)
    vals = np.asarray(g(xs), dtype=float)
    roots = []
    sgn = np.sign(vals)
    for i in np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]:
        a, b = xs[i], xs[i + 1]
        fa = vals[i]
        for _ in range(200):
            m = 0.5 * (a + b)
            fm = float(g(m))
            if fa * fm <= 0:
                b = m
            else:
                a, fa = m, fm
            if b - a <= refine_tol * max(1.0, abs(m)):
                break
        roots.append(0.5 * (a + b))
    exact = np.nonzero(sgn == 0)[0]
    roots.extend(float(xs[i]) for i in exact)
    return sorted(roots)


def find_root_monotone(g, lo, hi, tol=Tolerance(), max_iterations=200, scan_points=17):
    """Bracketed root of a continuous monotone function.

    Bisection with a secant acceleration step whenever the secant
    candidate stays strictly inside the bracket.  Convergence is
    declared once |g(x)| <= tol.abs or the bracket width drops below
    tol.rel * |x|.  Non-monotone behaviour among the evaluated points
    (the iterates plus a uniform scan of ``scan_points`` values, 0 to
    disable) is reported through a warning attached to the result,
    never an exception.
    """
    lo = float(lo)
    hi = float(hi)
    if not lo < hi:
        raise BracketError("need lo < hi")
    evals = []

    def geval(x):
        y = float(g(x))
        evals.append((x, y))
        return y

    fa = geval(lo)
    fb = geval(hi)
    if fa == 0.0:
        return RootResult(lo, (lo, hi), (fa, fb), 0.0, 0)
    if fb == 0.0:
        return RootResult(hi, (lo, hi), (fa, fb), 0.0, 0)
    if np.sign(fa) == np.sign(fb):
        raise BracketError(f"g has the same sign at both ends: g({lo})={fa}, g({hi})={fb}")

    a, b = lo, hi
    x, fx = (a, fa) if abs(fa) < abs(fb) else (b, fb)
    it = 0
    force_bisect = False
    while it < max_iterations:
        it += 1
        width = b - a
        if fb != fa and not force_bisect:
            cand = b - fb * (b - a) / (fb - fa)
        else:
            cand = 0.5 * (a + b)
        if not (a < cand < b) or not np.isfinite(cand):
            cand = 0.5 * (a + b)
        fc = geval(cand)
        if abs(fc) < abs(fx):
            x, fx = cand, fc
        if fc == 0.0:
            a = b = cand
            x, fx = cand, 0.0
            break
        if np.sign(fc) == np.sign(fa):
            a, fa = cand, fc
        else:
            b, fb = cand, fc
        # insist on real bracket shrinkage; otherwise bisect next round
        force_bisect = (b - a) > 0.5 * width
        if abs(fx) <= tol.abs or (b - a) <= tol.rel * max(abs(a), abs(b), 1e-300):
            break

    if scan_points >= 2:
        for xs in np.linspace(lo, hi, scan_points)[1:-1]:
            geval(float(xs))
    pts = sorted(evals)
    ys = np.array([y for _, y in pts])
    rising = fb >= fa
    diffs = np.diff(ys)
    slack = 1e-12 * (np.abs(ys[:-1]) + np.abs(ys[1:]) + 1.0)
    bad = np.any(diffs < -slack) if rising else np.any(diffs > slack)
    result = RootResult(
        root=x,
        bracket=(a, b),
        bracket_values=(fa, fb),
        residual=abs(fx),
        iterations=it,
        monotone=not bool(bad),
    )
    if bad:
        result.warnings.append("sampled values of g are not monotone on the bracket")
    return result


def _abs_power_moment(u, p, k):
    """Antiderivative of |t|^p t^k evaluated from 0 to u (p > -1)."""
    q = p + k + 1.0
    if u >= 0.0:
        return u**q / q
    return (-1.0) ** (k + 1) * (-u) ** q / q


def _segment_lp_mass(d0, d1, r0, r1, p):
    """Integral of |delta(r)|^p 4 pi r^2 on [r0, r1] to machine accuracy.

    delta is the linear interpolant through (r0, d0), (r1, d1).  When
    the difference varies strongly across the segment (including every
    zero crossing, split exactly) the closed form via u = delta(r) is
    well conditioned and exact.  When it varies weakly the closed form
    cancels catastrophically, but then |delta|^p is analytic with
    geometrically small derivatives and a fixed Gauss panel is exact to
    machine precision.
    """
    length = r1 - r0
    if length <= 0:
        return 0.0
    scale = max(abs(d0), abs(d1))
    if scale == 0.0:
        return 0.0
    if scale < 1e-100:
        dm = 0.5 * (abs(d0) + abs(d1))
        return dm**p * (4.0 * np.pi / 3.0) * (r1**3 - r0**3)
    s = (d1 - d0) / length
    if d0 * d1 < 0:
        rc = r0 - d0 / s
        return _segment_lp_mass(d0, 0.0, r0, rc, p) + _segment_lp_mass(0.0, d1, rc, r1, p)
    if abs(d1 - d0) <= 0.5 * scale:
        # same sign, mild variation: |d0 + s (r - r0)|^p has Taylor
        # coefficients decaying like 2^-n, so GL10 is exact in floats
        mid = 0.5 * (r0 + r1)
        half = 0.5 * length
        pts = mid + half * _GL_X
        vals = np.abs(d0 + s * (pts - r0)) ** p * 4.0 * np.pi * pts * pts
        return float(half * (vals @ _GL_W))
    alpha = r0 - d0 / s

    def moments(u):
        return (
            _abs_power_moment(u, p, 0),
            _abs_power_moment(u, p, 1),
            _abs_power_moment(u, p, 2),
        )

    m1 = moments(d1)
    m0 = moments(d0)
    f0 = m1[0] - m0[0]
    f1 = m1[1] - m0[1]
    f2 = m1[2] - m0[2]
    return 4.0 * np.pi / s * (alpha * alpha * f0 + 2.0 * alpha / s * f1 + f2 / (s * s))


def _compatible_tails(f, g):
    if f.tail == "zero" and g.tail == "zero":
        return True
    if f.tail == g.tail and abs(f.r_max - g.r_max) <= 1e-15 * max(f.r_max, g.r_max):
        # identical declared tails cancel exactly beyond the shared domain
        return True
    return False


def lp_distance(f, g, p):
    """L^p distance (weight 4 pi r^2) between two radial profiles.

    The union of both node sets defines segments on which both
    interpolants are linear; each segment is integrated in closed form,
    so the only approximation is the interpolants themselves.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if not isinstance(f, RadialProfile) or not isinstance(g, RadialProfile):
        raise TypeError("lp_distance expects RadialProfile inputs")
    if not _compatible_tails(f, g):
        raise DomainMismatchError(
            "profiles carry incompatible extrapolation rules; "
            "declare matching tails before comparing"
        )
    r_hi = max(f.r_max, g.r_max)
    nodes = np.union1d(np.concatenate([[0.0], f.nodes, g.nodes]), [r_hi])
    nodes = nodes[(nodes >= 0.0) & (nodes <= r_hi)]

    def endpoint_values(prof, a, b):
        # one-sided values on [a, b]; beyond the profile domain a zero
        # tail contributes exactly 0, an identical tail cancels anyway
        if a >= prof.r_max and prof.tail == "zero":
            return 0.0, 0.0
        if a >= prof.r_max:
            return 0.0, 0.0  # identical tails: difference vanishes
        return float(prof(a)), float(prof(b))

    total = 0.0
    for a, b in zip(nodes[:-1], nodes[1:]):
        fa, fb = endpoint_values(f, a, b)
        ga, gb = endpoint_values(g, a, b)
        total += _segment_lp_mass(fa - ga, fb - gb, a, b, p)
    return max(total, 0.0) ** (1.0 / p)
