"""Finite maxima of affine pieces, gauges of polytopes, and the exact 1-D path.

AffineMax carries coercive-but-not-super-coercive test inputs in dimensions
1 and 2.  Sublevel sets are convex polytopes obtained by halfplane clipping,
which gives exact Hausdorff distances.  In one dimension the whole valuation
calculus (integrals of zeta(u), the dual Legendre value, composition with
the factorial embedding) is closed-form; that is the path the valuation
identity tests run on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .embed import gk_eval, _gk_bands, sf
from .errors import DomainError, InputError, NotConvexError, UnboundedError
from .profiles import INF

# clipping box half-width for sublevel polytopes; modest so that the
# intersection arithmetic keeps ~1e-10 absolute accuracy
_BIG = 1e6


@dataclass(frozen=True)
class AffineMax:
    """u(x) = max_i (a_i . x + c_i) on R^n, n in {1, 2}."""

    pieces: Tuple[Tuple[Tuple[float, ...], float], ...]
    n: int

    @classmethod
    def make(cls, pieces, n: int) -> "AffineMax":
        if n not in (1, 2):
            raise DomainError("AffineMax supports n in {1, 2}")
        norm = []
        for a, c in pieces:
            a = tuple(float(x) for x in (a if isinstance(a, (tuple, list, np.ndarray)) else (a,)))
            if len(a) != n:
                raise InputError("piece dimension mismatch")
            norm.append((a, float(c)))
        if not norm:
            raise InputError("at least one affine piece required")
        return cls(tuple(norm), n)

    def eval(self, x) -> float:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return max(float(np.dot(a, x)) + c for a, c in self.pieces)

    __call__ = eval

    def eval_grid(self, xs: np.ndarray) -> np.ndarray:
        """Vectorized evaluation; xs has shape (..., n)."""
        vals = [xs @ np.asarray(a) + c for a, c in self.pieces]
        return np.maximum.reduce(vals)

    def is_coercive(self) -> bool:
        """True iff 0 lies in the interior of conv{a_i} (u then grows in every direction)."""
        grads = [np.asarray(a) for a, _ in self.pieces if any(abs(x) > 0 for x in a)]
        if self.n == 1:
            return any(g[0] < 0 for g in grads) and any(g[0] > 0 for g in grads)
        if len(grads) < 3:
            return False
        angles = sorted(math.atan2(g[1], g[0]) for g in grads)
        gaps = [b - a for a, b in zip(angles, angles[1:])]
        gaps.append(angles[0] + 2 * math.pi - angles[-1])
        return max(gaps) < math.pi - 1e-12

    def translate(self, tau) -> "AffineMax":
        """u(. - tau): the pull-back under the translation by tau."""
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        return AffineMax(
            tuple((a, c - float(np.dot(a, tau))) for a, c in self.pieces), self.n
        )

    def compose_inverse_linear(self, phi: np.ndarray) -> "AffineMax":
        """u(phi^{-1} x): pieces map exactly by a -> phi^{-T} a."""
        phi = np.asarray(phi, dtype=float)
        m = np.linalg.inv(phi).T
        return AffineMax(
            tuple((tuple(m @ np.asarray(a)), c) for a, c in self.pieces), self.n
        )

    def max_with(self, other: "AffineMax") -> "AffineMax":
        if self.n != other.n:
            raise DomainError("dimension mismatch")
        return AffineMax(tuple(set(self.pieces) | set(other.pieces)), self.n)

    def min_value(self) -> float:
        """min over R^n, by LP on the epigraph (coercive inputs only)."""
        if not self.is_coercive():
            raise UnboundedError("minimum of a non-coercive AffineMax")
        from scipy.optimize import linprog

        # minimize z subject to a_i.x + c_i <= z
        A = np.array([list(a) + [-1.0] for a, _ in self.pieces])
        b = np.array([-c for _, c in self.pieces])
        cvec = np.zeros(self.n + 1)
        cvec[-1] = 1.0
        res = linprog(cvec, A_ub=A, b_ub=b, bounds=[(None, None)] * (self.n + 1))
        if not res.success:
            raise UnboundedError("LP for the minimum failed")
        return float(res.x[-1])


# -- gauges ------------------------------------------------------------------------


def _convex_hull_2d(points: List[Tuple[float, float]]) -> List[Tuple[float, float]]:
    """Monotone-chain hull, counter-clockwise, no repeated endpoint."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def gauge_of_polytope(vertices: Sequence[Sequence[float]], n: int = 2) -> AffineMax:
    """The gauge l_K of the polytope K = conv(vertices); {l_K <= t} = tK.

    Requires 0 in the interior of K; each facet with outward normal nu and
    offset h (nu.x = h on the facet, h > 0) contributes the piece nu/h.
    """
    if n == 1:
        lo = min(v[0] for v in vertices)
        hi = max(v[0] for v in vertices)
        if not lo < 0 < hi:
            raise DomainError("gauge requires 0 in the interior of K")
        return AffineMax.make([((1.0 / hi,), 0.0), ((1.0 / lo,), 0.0)], 1)
    hull = _convex_hull_2d([(float(v[0]), float(v[1])) for v in vertices])
    if len(hull) < 3:
        raise DomainError("polytope has empty interior")
    pieces = []
    for p, q in zip(hull, hull[1:] + hull[:1]):
        ex, ey = q[0] - p[0], q[1] - p[1]
        nu = (ey, -ex)  # outward for ccw order
        h = nu[0] * p[0] + nu[1] * p[1]
        if h <= 0:
            raise DomainError("gauge requires 0 in the interior of K")
        pieces.append(((nu[0] / h, nu[1] / h), 0.0))
    return AffineMax.make(pieces, 2)


# -- sublevel polytopes and Hausdorff distance ---------------------------------------


def _clip_halfplane(poly, a, b):
    """Sutherland-Hodgman clip of a convex polygon against a.x <= b."""
    if not poly:
        return []
    out = []
    m = len(poly)
    for i in range(m):
        p, q = poly[i], poly[(i + 1) % m]
        fp = a[0] * p[0] + a[1] * p[1] - b
        fq = a[0] * q[0] + a[1] * q[1] - b
        if fp <= 0:
            out.append(p)
        if (fp < 0 < fq) or (fq < 0 < fp):
            t = fp / (fp - fq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


def sublevel_polytope(u: AffineMax, t: float):
    """{u <= t} as interval endpoints (1-D) or ccw polygon vertices (2-D); None if empty."""
    if u.n == 1:
        lo, hi = -_BIG, _BIG
        for (a,), c in u.pieces:
            if a > 0:
                hi = min(hi, (t - c) / a)
            elif a < 0:
                lo = max(lo, (t - c) / a)
            elif c > t:
                return None
        if lo > hi:
            return None
        return (lo, hi)
    poly = [(-_BIG, -_BIG), (_BIG, -_BIG), (_BIG, _BIG), (-_BIG, _BIG)]
    for a, c in u.pieces:
        if abs(a[0]) + abs(a[1]) == 0:
            if c > t:
                return None
            continue
        poly = _clip_halfplane(poly, a, t - c)
        if not poly:
            return None
    return _convex_hull_2d(poly)


def _support(poly, d) -> float:
    return max(d[0] * x + d[1] * y for x, y in poly)


def _edge_normals(poly):
    out = []
    m = len(poly)
    for i in range(m):
        p, q = poly[i], poly[(i + 1) % m]
        out.append((q[1] - p[1], p[0] - q[0]))  # outward for ccw order
    return out


def hausdorff_polygons(P, Q) -> float:
    """Max-norm Hausdorff distance of two convex polygons (ccw vertex lists).

    P sits inside Q + eps*B_inf iff h_P(d) <= h_Q(d) + eps*(|d1|+|d2|) for
    every direction d; the worst ratio over directions is attained on the
    extreme rays of the refined normal fan, i.e. the edge normals of both
    polygons plus the diagonal normals of the max-norm ball.  The dilation
    of a square therefore measures exactly the side growth.
    """
    if len(P) < 3 or len(Q) < 3:
        raise DomainError("polygons need at least 3 vertices")
    P = _convex_hull_2d([tuple(p) for p in P])
    Q = _convex_hull_2d([tuple(q) for q in Q])
    dirs = _edge_normals(P) + _edge_normals(Q) + [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    eps = 0.0
    for d in dirs:
        norm1 = abs(d[0]) + abs(d[1])
        if norm1 == 0:
            continue
        eps = max(eps, abs(_support(P, d) - _support(Q, d)) / norm1)
    return eps


def hausdorff_intervals(I, J) -> float:
    return max(abs(I[0] - J[0]), abs(I[1] - J[1]))


# -- disjoint-bump pair generation ----------------------------------------------------


def pair_generator_disjoint_bump(w: AffineMax, l1, l2) -> Tuple[AffineMax, AffineMax]:
    """(u, v) = (w v l1, w v l2) with u ^ v = w whenever {l1 > w}, {l2 > w} are disjoint.

    The bump regions are checked exactly in 1-D (interval intersection) and
    by dense sampling in 2-D; overlap raises NotConvexError since u ^ v
    would then fail to be convex in general.
    """
    b1 = AffineMax.make([l1], w.n)
    b2 = AffineMax.make([l2], w.n)
    if w.n == 1:
        r1 = _excess_interval(w, l1)
        r2 = _excess_interval(w, l2)
        if r1 is not None and r2 is not None and r1[0] < r2[1] and r2[0] < r1[1]:
            raise NotConvexError("bump regions overlap; the minimum would not be w")
    else:
        xs = np.linspace(-20, 20, 201)
        X, Y = np.meshgrid(xs, xs)
        pts = np.stack([X.ravel(), Y.ravel()], axis=1)
        wv = w.eval_grid(pts)
        e1 = b1.eval_grid(pts) > wv + 1e-12
        e2 = b2.eval_grid(pts) > wv + 1e-12
        if bool(np.any(e1 & e2)):
            raise NotConvexError("bump regions overlap; the minimum would not be w")
    return w.max_with(b1), w.max_with(b2)


def _excess_interval(w: AffineMax, piece):
    """Open interval where the affine piece exceeds w (1-D); None if empty."""
    (a,), c = (tuple(piece[0]) if isinstance(piece[0], (tuple, list)) else (piece[0],)), piece[1]
    a = float(a)
    c = float(c)
    lo, hi = -INF, INF
    for (aw,), cw in w.pieces:
        d = a - aw
        e = cw - c
        # need d*x > e
        if d > 0:
            lo = max(lo, e / d)
        elif d < 0:
            hi = min(hi, e / d)
        elif e >= 0:
            return None
    if lo >= hi:
        return None
    return (lo, hi)


# -- the exact 1-D path -----------------------------------------------------------------


class PL1D:
    """Canonical piecewise-linear convex function on R.

    Stored as strictly increasing slopes s_0 < ... < s_m with breakpoints
    x_1 < ... < x_m (slope s_j active on [x_j, x_{j+1}]) and the value at
    the first breakpoint.  Coercive iff s_0 < 0 < s_m.
    """

    __slots__ = ("breaks", "slopes", "v1")

    def __init__(self, breaks, slopes, v1):
        breaks = [float(b) for b in breaks]
        slopes = [float(s) for s in slopes]
        if len(slopes) != len(breaks) + 1:
            raise InputError("need one more slope than breakpoints")
        if any(b >= c for b, c in zip(breaks, breaks[1:])):
            raise InputError("breakpoints must be strictly increasing")
        if any(s >= t for s, t in zip(slopes, slopes[1:])):
            raise NotConvexError("slopes must be strictly increasing")
        if not breaks:
            raise InputError("a PL1D needs at least one breakpoint")
        self.breaks = breaks
        self.slopes = slopes
        self.v1 = float(v1)

    @classmethod
    def from_affine_max(cls, u: AffineMax) -> "PL1D":
        if u.n != 1:
            raise DomainError("PL1D is one-dimensional")
        # upper envelope of lines, classic slope sort
        pieces = sorted(((a[0], c) for a, c in u.pieces), key=lambda p: (p[0], p[1]))
        dedup = {}
        for a, c in pieces:
            dedup[a] = max(dedup.get(a, -INF), c)
        lines = sorted(dedup.items())
        kept: List[Tuple[float, float]] = []
        xs: List[float] = []
        for a, c in lines:
            while kept:
                a0, c0 = kept[-1]
                x = (c0 - c) / (a - a0)  # crossing with the previous kept line
                if xs and x <= xs[-1]:
                    kept.pop()
                    xs.pop()
                    continue
                xs.append(x)
                break
            kept.append((a, c))
        if len(kept) == 1:
            raise DomainError("a single affine piece has no breakpoints")
        slopes = [a for a, _ in kept]
        a1, c1 = kept[0]
        v1 = a1 * xs[0] + c1
        return cls(xs, slopes, v1)

    def values(self) -> List[float]:
        vals = [self.v1]
        for j in range(1, len(self.breaks)):
            vals.append(vals[-1] + self.slopes[j] * (self.breaks[j] - self.breaks[j - 1]))
        return vals

    def eval(self, x: float) -> float:
        vals = self.values()
        if x <= self.breaks[0]:
            return self.v1 + self.slopes[0] * (x - self.breaks[0])
        for j in range(len(self.breaks) - 1, -1, -1):
            if x >= self.breaks[j]:
                return vals[j] + self.slopes[j + 1] * (x - self.breaks[j])
        raise AssertionError

    __call__ = eval

    def is_coercive(self) -> bool:
        return self.slopes[0] < 0 < self.slopes[-1]

    def min_value(self) -> float:
        vals = self.values()
        if self.slopes[0] >= 0:
            raise UnboundedError("not coercive on the left")
        if self.slopes[-1] <= 0:
            raise UnboundedError("not coercive on the right")
        for j, s in enumerate(self.slopes):
            if s >= 0:
                # slope s_j is active right of breaks[j-1]; the minimum sits there
                return vals[j - 1]
        raise AssertionError

    def lattice(self, other: "PL1D", take_max: bool) -> "PL1D":
        """Pointwise max (always convex) or min (checked) of two PL1Ds."""
        xs = sorted(set(self.breaks) | set(other.breaks))
        # crossing points refine the grid
        cands = set(xs)
        for a, b in zip([xs[0] - 1.0] + xs, xs + [xs[-1] + 1.0]):
            mid = (a + b) / 2
            sa = self._slope_at(mid)
            sb = other._slope_at(mid)
            if sa != sb:
                fa, fb = self.eval(mid), other.eval(mid)
                xc = mid + (fb - fa) / (sa - sb)
                if a < xc < b:
                    cands.add(xc)
        # also crossings on the two unbounded rays
        for ray in (-1, 1):
            x0 = xs[0] if ray < 0 else xs[-1]
            sa = self._slope_at(x0 + ray)
            sb = other._slope_at(x0 + ray)
            if sa != sb:
                fa, fb = self.eval(x0), other.eval(x0)
                xc = x0 + (fb - fa) / (sa - sb)
                if (ray < 0 and xc < x0) or (ray > 0 and xc > x0):
                    cands.add(xc)
        # merge near-coincident candidates (crossings recovered next to an
        # existing breakpoint are accumulation noise and create slivers)
        grid = []
        for x in sorted(cands):
            if grid and x - grid[-1] <= 1e-9 * (1.0 + abs(x)):
                continue
            grid.append(x)
        op = max if take_max else min
        mids = [grid[0] - 1.0] + [(a + b) / 2 for a, b in zip(grid, grid[1:])] + [grid[-1] + 1.0]
        seg_slopes = []
        for m in mids:
            fa, fb = self.eval(m), other.eval(m)
            if abs(fa - fb) <= 1e-9 * (1.0 + abs(fa) + abs(fb)):
                # values tie up to accumulation noise: decide by slope
                pick = self if ((self._slope_at(m) >= other._slope_at(m)) == take_max) else other
            else:
                pick = self if ((fa > fb) == take_max) else other
            seg_slopes.append(pick._slope_at(m))
        # collapse equal neighbouring slopes
        breaks, slopes = [], [seg_slopes[0]]
        for x, s in zip(grid, seg_slopes[1:]):
            if s < slopes[-1] - 1e-12:
                raise NotConvexError("pointwise minimum is not convex")
            if s > slopes[-1] + 1e-12:
                breaks.append(x)
                slopes.append(s)
        if not breaks:
            raise DomainError("degenerate lattice result (single piece)")
        v1 = op(self.eval(breaks[0]), other.eval(breaks[0]))
        return PL1D(breaks, slopes, v1)

    def _slope_at(self, x: float) -> float:
        for j in range(len(self.breaks) - 1, -1, -1):
            if x >= self.breaks[j]:
                return self.slopes[j + 1]
        return self.slopes[0]

    def compose_monotone(self, knots: List[Tuple[float, float, float]], final_slope: float) -> "PL1D":
        """h(u) for an increasing convex PL map h given as (level, value, right_slope).

        `knots` lists h's breakpoints in the level variable, sorted; below the
        first level h is the identity anchored there; beyond the last knot h
        has `final_slope`.  Breakpoints of the composition are the original
        ones plus the preimages of h's levels on each monotone branch.
        """
        levels = [k[0] for k in knots]

        def h(t):
            if t <= levels[0]:
                return knots[0][1] + (t - levels[0])
            for lv, val, sl in reversed(knots):
                if t >= lv:
                    return val + sl * (t - lv)
            raise AssertionError

        def h_slope(t):
            if t < levels[0]:
                return 1.0
            for lv, val, sl in reversed(knots):
                if t >= lv:
                    return sl
            raise AssertionError

        vals = self.values()
        xs = set(self.breaks)
        # preimages of h's levels on both monotone branches of u
        for lv in levels:
            for branch in ("left", "right"):
                x = self._preimage(lv, branch)
                if x is not None:
                    xs.add(x)
        grid = sorted(xs)
        mids = [grid[0] - 1.0] + [(a + b) / 2 for a, b in zip(grid, grid[1:])] + [grid[-1] + 1.0]
        seg_slopes = [h_slope(self.eval(m)) * self._slope_at(m) for m in mids]
        breaks, slopes = [], [seg_slopes[0]]
        for x, s in zip(grid, seg_slopes[1:]):
            if s <= slopes[-1]:
                if s < slopes[-1] - 1e-12:
                    raise NotConvexError("composition lost convexity")
                continue
            breaks.append(x)
            slopes.append(s)
        v1 = h(self.eval(breaks[0]))
        return PL1D(breaks, slopes, v1)

    def _preimage(self, level: float, branch: str) -> Optional[float]:
        """x with u(x) = level on the decreasing (left) or increasing (right) branch."""
        vals = self.values()
        if branch == "left":
            if self.slopes[0] >= 0:
                return None
            if level >= vals[0]:
                # the left ray carries all levels above the first knot value
                return self.breaks[0] + (level - vals[0]) / self.slopes[0]
            for j in range(len(self.breaks) - 1):
                if self.slopes[j + 1] < 0 and vals[j + 1] <= level <= vals[j]:
                    return self.breaks[j] + (level - vals[j]) / self.slopes[j + 1]
            return None
        if self.slopes[-1] <= 0:
            return None
        if level >= vals[-1]:
            return self.breaks[-1] + (level - vals[-1]) / self.slopes[-1]
        for j in range(len(self.breaks) - 1):
            if self.slopes[j + 1] > 0 and vals[j] <= level <= vals[j + 1]:
                return self.breaks[j] + (level - vals[j]) / self.slopes[j + 1]
        return None


def gk_map_knots(k: int, level_cap: float) -> Tuple[List[Tuple[float, float, float]], float]:
    """The factorial embedding as monotone-map knots up to level_cap.

    Returns ([(level, g_k(level), right_slope), ...], final_slope) suitable
    for PL1D.compose_monotone; beyond the cap the last band slope continues,
    which leaves every functional with weights supported below the cap
    unchanged.
    """
    knots = [(float(sf(k)), float(sf(k)), float(k + 1))]
    for start, slope in _gk_bands(k):
        if start <= sf(k):
            continue
        if start > level_cap:
            break
        knots.append((float(start), float(gk_eval(k, start)), float(slope)))
    return knots, knots[-1][2]


def compose_gk_1d(k: int, u: PL1D, level_cap: float) -> PL1D:
    """g_k(u) for 1-D inputs, exact below level_cap (last band slope beyond)."""
    knots, _ = gk_map_knots(k, level_cap)
    return u.compose_monotone(knots, knots[-1][2])


# -- exact 1-D functionals ----------------------------------------------------------


def z1_1d(zeta, u: PL1D) -> float:
    """Integral of zeta(u(x)) dx over R, closed form per monotone piece.

    Each linear piece with slope s maps to (1/|s|) * integral of zeta over
    its level range; the two unbounded rays use the closed-form tail
    integrals of the zeta family (which require decay: zero or exp tails).
    """
    if not u.is_coercive():
        raise UnboundedError("1-D integral needs a coercive input")
    if zeta.tail[0] == "harmonic":
        raise UnboundedError("zeta has no certified decay (harmonic tail)")
    vals = u.values()
    total = 0.0
    # left ray: slope s0 < 0, levels from vals[0] to +inf
    m = zeta.moment(1, lower=vals[0])
    total += m / (-u.slopes[0])
    # right ray
    total += zeta.moment(1, lower=vals[-1]) / u.slopes[-1]
    for j in range(len(u.breaks) - 1):
        s = u.slopes[j + 1]
        t0, t1 = vals[j], vals[j + 1]
        if s == 0:
            total += zeta.eval(t0) * (u.breaks[j + 1] - u.breaks[j])
        else:
            total += abs(zeta.integral(min(t0, t1), max(t0, t1)) / s)
    return total


def z2_1d(zeta2, u: PL1D) -> float:
    """Integral of zeta2(grad u*(y) y - u*(y)) dy, exact.

    The conjugate of a PL1D is PL with breakpoints at the slopes of u; on
    the dual segment (s_j, s_{j+1}) the Legendre value is u(x_{j+1}), so the
    integral is a finite sum of zeta2(u(x_j)) (s_j - s_{j-1}) terms (dom u*
    = [s_0, s_m] is bounded: u is never super-coercive).
    """
    vals = u.values()
    total = 0.0
    for j in range(len(u.breaks)):
        total += zeta2.eval(vals[j]) * (u.slopes[j + 1] - u.slopes[j])
    return total


def z0_1d(zeta0, u: PL1D) -> float:
    return zeta0.eval(u.min_value())
