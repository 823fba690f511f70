"""Radial lifts of profiles to R^n and the exact integral functionals.

A radial function u(x) = v(|x - center|) built from a convex increasing
profile v is where all three functionals have closed or certified forms:

* z0 reads the minimum directly,
* z1 integrates zeta1(v(r)) against the surface measure segment by segment,
  with a certified truncation of the tail,
* z2 uses the annulus decomposition: the Legendre value of the conjugate,
  grad u*(x).x - u*(x), is exactly the knot level t_{k-1} on the annulus
  b_{k-1} < |x| < b_k cut out by consecutive slopes of v.

Everything is computed from the profile alone; the center is metadata, so
translation invariance is structural rather than numerical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence, Tuple

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, NonTerminatingError, UnboundedError
from .profiles import INF, PLProfile, conjugate_1d
from .zetas import Finite, moment_check

#: supported dimensions on the exact path
MAX_DIM = 10

#: segment budget before concluding a lazy profile is not progressing
MAX_SEGMENTS = 100_000


def unit_ball_volume(n: int) -> float:
    """Volume of the Euclidean unit ball, pi^{n/2} / Gamma(n/2 + 1)."""
    if not 1 <= n <= MAX_DIM:
        raise DomainError(f"dimension must be in [1, {MAX_DIM}]")
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def _segments(p: PLProfile) -> Iterator[Tuple[float, float, float, float]]:
    """Yield (r0, t0, r1, slope) per linear segment, materializing lazily.

    r1 is the next knot radius, or the domain bound for the last segment
    (INF when the last slope continues forever).  t0 = v(r0) is exact from
    the stored knot values.
    """
    i = 0
    count = 0
    while True:
        count += 1
        if count > MAX_SEGMENTS:
            raise NonTerminatingError("profile segment budget exhausted")
        while i + 1 >= len(p._radii) and p._pull_tail():
            pass
        r0 = p._radii[i]
        t0 = p._values[i]
        s = p._slopes[i]
        if i + 1 < len(p._radii):
            r1 = p._radii[i + 1]
        else:
            r1 = p.domain_bound
        yield (r0, t0, r1, s)
        if i + 1 >= len(p._radii):
            return
        i += 1


@dataclass(frozen=True)
class RadialFn:
    """u(x) = v(|x - center|)."""

    profile: PLProfile
    n: int
    center: Tuple[float, ...] = ()

    def __post_init__(self):
        if not 1 <= self.n <= MAX_DIM:
            raise DomainError(f"dimension must be in [1, {MAX_DIM}]")
        if self.center and len(self.center) != self.n:
            raise DomainError("center dimension mismatch")

    def eval(self, x: Sequence[float]) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise DomainError("point dimension mismatch")
        c = np.asarray(self.center, dtype=float) if self.center else np.zeros(self.n)
        return self.profile.eval(float(np.linalg.norm(x - c)))

    def scale(self, lam: float) -> "RadialFn":
        """u_lam(x) = u(x / lam): radii scale by lam, slopes by 1/lam."""
        if lam <= 0:
            raise DomainError("scale factor must be positive")
        p = self.profile
        if p.is_lazy:
            raise DomainError("scaling lazy profiles is not supported; take a prefix first")
        segs = [(r * lam, s / lam) for r, s in zip(p._radii, p._slopes)]
        db = p.domain_bound * lam if p.domain_bound < INF else INF
        return RadialFn(PLProfile(p.base, segs, domain_bound=db), self.n, self.center)

    def translate(self, tau: Sequence[float]) -> "RadialFn":
        c = np.asarray(self.center, dtype=float) if self.center else np.zeros(self.n)
        return RadialFn(self.profile, self.n, tuple(c + np.asarray(tau, dtype=float)))

    def conjugate(self) -> "RadialFn":
        """Conjugate of the centered lift; only valid for center = 0."""
        if self.center and any(abs(c) > 0 for c in self.center):
            raise DomainError("conjugate of an off-center radial lift is not radial")
        return RadialFn(conjugate_1d(self.profile), self.n)


def z0(zeta0, u: RadialFn) -> float:
    """zeta0(min u) = zeta0(v(0))."""
    return zeta0.eval(u.profile.min_value())


def _segment_level_integral(zeta, rho0, t0, t1, b, n: int) -> float:
    """Integral of r^{n-1} zeta(v(r)) dr over one rising segment.

    Substituting the level t = v(r), r = rho0 + (t - t0)/b, makes the
    integration variable scale-free: rescaling u multiplies the integrand
    pointwise by lam^n, so homogeneity survives quadrature up to rounding.
    """
    if t1 <= t0:
        return 0.0
    inv_b = 1.0 / b

    def integrand(t):
        r = rho0 + (t - t0) * inv_b
        return r ** (n - 1) * zeta.eval(t) * inv_b

    # kinks of zeta inside the level range would defeat the adaptive rule
    kinks = [t for t, _ in getattr(zeta, "knots", ()) if t0 < t < t1]
    val, _ = quad(
        integrand, t0, t1, epsabs=0.0, epsrel=1e-13, limit=200,
        points=kinks if kinks else None,
    )
    return val


def _piece(zeta, r0, t0, r1, slope, n: int) -> float:
    """Integral of r^{n-1} zeta(v(r)) dr over [r0, r1] within one segment."""
    if r1 <= r0:
        return 0.0
    if slope == 0:
        return zeta.eval(t0) * (r1**n - r0**n) / n
    return _segment_level_integral(zeta, r0, t0, t0 + slope * (r1 - r0), slope, n)


def _exp_tail_bound(c, alpha, t_b, r_b, b, n: int) -> float:
    """Bound integral_{r_b}^inf r^{n-1} c e^{-alpha v(r)} dr when v' >= b > 0.

    Convexity gives v(r) >= t_b + b (r - r_b); with beta = alpha b the bound
    is c e^{-alpha t_b} sum_i C(n-1, i) r_b^{n-1-i} i! / beta^{i+1}.
    """
    beta = alpha * b
    total = 0.0
    for i in range(n):
        total += math.comb(n - 1, i) * r_b ** (n - 1 - i) * math.factorial(i) / beta ** (i + 1)
    return c * math.exp(-alpha * t_b) * total


def _final_ray(zeta, r0, t0, slope, n: int, tol: float, outer: float) -> float:
    """Integral of r^{n-1} zeta(v(r)) dr over [r0, inf) with constant slope."""
    kind = zeta.tail[0]
    if slope == 0:
        if zeta.sup_beyond(t0) == 0.0:
            return 0.0
        raise UnboundedError("constant profile tail with non-vanishing zeta: integral diverges")
    if kind == "zero":
        return _segment_level_integral(zeta, r0, t0, max(t0, zeta.support_bound()), slope, n)
    if kind == "harmonic":
        raise UnboundedError("zeta has no certified decay (harmonic tail) on an unbounded domain")
    _, c, alpha = zeta.tail
    total = 0.0
    t_knot = zeta.knots[-1][0]
    if t0 < t_knot:
        total += _segment_level_integral(zeta, r0, t0, t_knot, slope, n)
        r0 += (t_knot - t0) / slope
        t0 = t_knot
    t_entry = t0
    # the second clause keeps the cutoff scale-free: 32 e-foldings past the
    # entry level make the remainder negligible relative to the integral, so
    # u and its dilates truncate after identical level chunks
    while (
        outer * _exp_tail_bound(c, alpha, t0, r0, slope, n) > tol
        or alpha * (t0 - t_entry) < 32.0
    ):
        # fixed step in the (scale-invariant) level variable
        t1 = t0 + 1.0
        total += _segment_level_integral(zeta, r0, t0, t1, slope, n)
        r0 += (t1 - t0) / slope
        t0 = t1
    return total


def z1(zeta1, u: RadialFn, tol: float = 1e-9) -> float:
    """n v_n * integral of r^{n-1} zeta1(v(r)) dr, absolute error <= tol.

    Plateaus contribute in closed form; rising segments go through adaptive
    quadrature in the level variable.  The sum truncates once a certified
    bound on the remaining tail (cleared support for the zero tail, the
    closed-form exponential envelope otherwise) drops below tol; profiles
    without such a certificate raise UnboundedError.
    """
    n = u.n
    outer = n * unit_ball_volume(n)
    kind = zeta1.tail[0]
    support = zeta1.support_bound()
    t_knot = zeta1.knots[-1][0]

    total = 0.0
    for r0, t0, r1, s in _segments(u.profile):
        if kind == "zero" and t0 >= support:
            break
        if kind == "exp" and s > 0 and t0 >= t_knot:
            _, c, alpha = zeta1.tail
            if (
                outer * _exp_tail_bound(c, alpha, t0, r0, s, n) <= tol
                and alpha * (t0 - t_knot) >= 32.0
            ):
                break
        if r1 == INF:
            total += _final_ray(zeta1, r0, t0, s, n, tol, outer)
            break
        total += _piece(zeta1, r0, t0, r1, s, n)
    return outer * total


def z1_partial(zeta1, u: RadialFn, r_max: float) -> float:
    """n v_n * integral of r^{n-1} zeta1(v(r)) dr over [0, r_max] only.

    No tail certificate required; used to exhibit divergence through
    monotone partial integrals.
    """
    n = u.n
    total = 0.0
    for r0, t0, r1, s in _segments(u.profile):
        hi = min(r1, r_max)
        total += _piece(zeta1, r0, t0, hi, s, n)
        if hi >= r_max:
            break
    return n * unit_ball_volume(n) * total


@dataclass(frozen=True)
class AnnulusDecomposition:
    """Annuli (inner, outer, value) of x -> grad u*(x).x - u*(x), a.e."""

    annuli: Tuple[Tuple[float, float, float], ...]


def iter_annuli(u: RadialFn, level_cap: float) -> Iterator[Tuple[float, float, float]]:
    """Yield (b_{k-1}, b_k, t_{k-1}) while the value stays below level_cap.

    The segment of v with slope b_k starting at radius rho_{k-1}, level
    t_{k-1}, produces the annulus b_{k-1} < |x| < b_k carrying the value
    t_{k-1}.  A bounded domain adds a final unbounded annulus at the
    terminal level; a merely coercive profile simply stops at the largest
    slope (the boundary of dom u*).
    """
    p = u.profile
    prev_b = 0.0
    for r0, t0, r1, s in _segments(p):
        if t0 >= level_cap:
            return
        if s > prev_b:
            yield (prev_b, s, t0)
            prev_b = s
        if r1 == INF:
            return  # dom u* = ball of radius s; fully covered
    if p.domain_bound < INF:
        t_end = p.eval(p.domain_bound)
        if t_end < level_cap:
            yield (prev_b, INF, t_end)


def annulus_decomposition(u: RadialFn, level_cap: float) -> AnnulusDecomposition:
    """Materialized annuli with values below level_cap."""
    return AnnulusDecomposition(tuple(iter_annuli(u, level_cap)))


def z2_exact(zeta2, u: RadialFn) -> float:
    """Sum of zeta2(t_k) v_n (b_k^n - b_{k-1}^n) over annuli until t_k >= T.

    Requires zeta2 to vanish beyond a finite threshold T; super-coercivity
    (or a bounded dual domain) makes the sum finite.
    """
    T = zeta2.support_bound()
    if not math.isfinite(T):
        raise DomainError("z2 requires a zeta2 vanishing beyond a finite threshold")
    vn = unit_ball_volume(u.n)
    total = 0.0
    for b_in, b_out, t in iter_annuli(u, T):
        w = zeta2.eval(t)
        if b_out == INF:
            if w != 0.0:
                raise UnboundedError(
                    "terminal level below the zeta2 threshold on an unbounded annulus"
                )
            continue
        total += w * vn * (b_out**u.n - b_in**u.n)
    return total


def z2_dual_exact(zeta2, u: RadialFn) -> float:
    """Dual form: grad u(x).x - u(x) equals b_k rho_{k-1} - t_{k-1} per segment.

    Summed as zeta2(value) v_n (rho_k^n - rho_{k-1}^n) until the value
    clears the threshold (the values are the conjugate's knot levels, hence
    non-decreasing).  Matches z2_exact of the conjugate exactly.
    """
    T = zeta2.support_bound()
    if not math.isfinite(T):
        raise DomainError("z2_dual requires a zeta2 vanishing beyond a finite threshold")
    vn = unit_ball_volume(u.n)
    total = 0.0
    for r0, t0, r1, s in _segments(u.profile):
        value = s * r0 - t0
        if value >= T:
            break
        w = zeta2.eval(value)
        if r1 == INF:
            if w != 0.0:
                raise UnboundedError(
                    "constant final slope keeps the dual value below the threshold forever"
                )
            break
        total += w * vn * (r1**u.n - r0**u.n)
    return total


def certify_z1_finiteness(zeta1, u: RadialFn, budget: float = 1e6):
    """Moment certificate for finiteness of z1 on super-coercive u."""
    if u.profile.domain_bound < INF:
        return Finite(0.0)  # bounded support: always finite
    return moment_check(zeta1, u.n, budget)


@dataclass(frozen=True)
class RadialPlusLinear:
    """u(x) = v(|x|) + l . x; closed forms for the dual functionals.

    Adding a linear functional translates the conjugate:
    (v(|.|) + l.x)*(y) = v*(|y - l|), and the dual Legendre value
    grad u(x).x - u(x) = grad v(|x|).x - v(|x|) loses the l term exactly.
    Every dual functional of u therefore equals that of the centered lift.
    """

    profile: PLProfile
    n: int
    l: Tuple[float, ...]

    def eval(self, x: Sequence[float]) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise DomainError("point dimension mismatch")
        return self.profile.eval(float(np.linalg.norm(x))) + float(
            np.dot(np.asarray(self.l, dtype=float), x)
        )

    def conjugate_radial(self) -> RadialFn:
        """The conjugate as a radial function centered at l."""
        return RadialFn(conjugate_1d(self.profile), self.n, tuple(float(c) for c in self.l))

    def centered(self) -> RadialFn:
        return RadialFn(self.profile, self.n)

    def value_at_origin(self) -> float:
        return self.profile.eval(0.0)
