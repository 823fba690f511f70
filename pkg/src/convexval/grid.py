"""Grid-sampled convex functions and the numeric oracle in dimensions 1 and 2.

The discrete Legendre transform runs in linear time per axis: the conjugate
of a sampled function equals the conjugate of the lower convex hull of its
samples, and the argmax index is monotone in the dual variable, so a hull
sweep plus a merge over sorted slopes does everything.  Two dimensions
factor into per-axis passes (partial conjugation preserves convexity in the
remaining variable).

+inf is first class: it encodes indicator-like inputs and out-of-box
points.  All reductions treat it as absorbing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .affine import AffineMax, _convex_hull_2d, hausdorff_intervals, hausdorff_polygons, sublevel_polytope
from .errors import DomainError, InputError, SlopeRangeExceededError, SupportExceededError

INF = np.inf


@dataclass(frozen=True)
class GridFn:
    """Samples of an extended-real function on a box, n in {1, 2}.

    values[i] (or values[i, j]) is the function at lo + i*step per axis;
    np.inf marks points outside the domain.
    """

    lo: Tuple[float, ...]
    hi: Tuple[float, ...]
    values: np.ndarray

    def __post_init__(self):
        v = self.values
        if v.ndim not in (1, 2):
            raise DomainError("grids support n in {1, 2}")
        if len(self.lo) != v.ndim or len(self.hi) != v.ndim:
            raise InputError("box/values dimension mismatch")
        if any(h <= l for l, h in zip(self.lo, self.hi)):
            raise InputError("box must have positive extent per axis")
        v.setflags(write=False)

    @property
    def n(self) -> int:
        return self.values.ndim

    @property
    def resolution(self) -> Tuple[int, ...]:
        return self.values.shape

    def axis(self, i: int) -> np.ndarray:
        return np.linspace(self.lo[i], self.hi[i], self.values.shape[i])

    def step(self, i: int) -> float:
        return (self.hi[i] - self.lo[i]) / (self.values.shape[i] - 1)

    @classmethod
    def from_callable(cls, f: Callable, lo, hi, resolution) -> "GridFn":
        lo = tuple(float(x) for x in np.atleast_1d(lo))
        hi = tuple(float(x) for x in np.atleast_1d(hi))
        res = tuple(int(r) for r in np.atleast_1d(resolution))
        axes = [np.linspace(l, h, r) for l, h, r in zip(lo, hi, res)]
        if len(res) == 1:
            vals = np.array([f(x) for x in axes[0]], dtype=float)
        else:
            X, Y = np.meshgrid(axes[0], axes[1], indexing="ij")
            pts = np.stack([X, Y], axis=-1)
            try:
                vals = np.asarray(f(pts), dtype=float)
                if vals.shape != X.shape:
                    raise TypeError
            except TypeError:
                vals = np.array(
                    [[f(np.array([x, y])) for y in axes[1]] for x in axes[0]], dtype=float
                )
        return cls(lo, hi, vals)

    @classmethod
    def from_affine_max(cls, u: AffineMax, lo, hi, resolution) -> "GridFn":
        if u.n == 1:
            return cls.from_callable(lambda x: u.eval((x,)), lo, hi, resolution)
        return cls.from_callable(lambda pts: u.eval_grid(pts), lo, hi, resolution)

    def eval(self, x) -> float:
        """Multilinear interpolation; +inf outside the box or next to inf samples."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if len(x) != self.n:
            raise DomainError("point dimension mismatch")
        idx = []
        frac = []
        for i, xi in enumerate(x):
            if xi < self.lo[i] - 1e-12 or xi > self.hi[i] + 1e-12:
                return INF
            t = (xi - self.lo[i]) / self.step(i)
            j = int(min(max(math.floor(t), 0), self.values.shape[i] - 2))
            idx.append(j)
            frac.append(t - j)
        if self.n == 1:
            a, b = self.values[idx[0]], self.values[idx[0] + 1]
            if not (np.isfinite(a) and np.isfinite(b)):
                return INF
            return float(a + frac[0] * (b - a))
        i, j = idx
        fx, fy = frac
        q = self.values[i : i + 2, j : j + 2]
        if not np.all(np.isfinite(q)):
            return INF
        return float(
            q[0, 0] * (1 - fx) * (1 - fy)
            + q[1, 0] * fx * (1 - fy)
            + q[0, 1] * (1 - fx) * fy
            + q[1, 1] * fx * fy
        )

    def eval_batch(self, pts: np.ndarray) -> np.ndarray:
        """Vectorized multilinear interpolation; pts has shape (m, n)."""
        pts = np.asarray(pts, dtype=float)
        m = pts.shape[0]
        out = np.full(m, INF)
        inside = np.ones(m, dtype=bool)
        for i in range(self.n):
            inside &= (pts[:, i] >= self.lo[i] - 1e-12) & (pts[:, i] <= self.hi[i] + 1e-12)
        if not np.any(inside):
            return out
        p = pts[inside]
        js, fr = [], []
        for i in range(self.n):
            t = (p[:, i] - self.lo[i]) / self.step(i)
            j = np.clip(np.floor(t).astype(int), 0, self.values.shape[i] - 2)
            js.append(j)
            fr.append(t - j)
        if self.n == 1:
            a = self.values[js[0]]
            b = self.values[js[0] + 1]
            res = a + fr[0] * (b - a)
        else:
            i0, j0 = js
            fx, fy = fr
            q00 = self.values[i0, j0]
            q10 = self.values[i0 + 1, j0]
            q01 = self.values[i0, j0 + 1]
            q11 = self.values[i0 + 1, j0 + 1]
            ok = np.isfinite(q00) & np.isfinite(q10) & np.isfinite(q01) & np.isfinite(q11)
            res = np.where(
                ok,
                q00 * (1 - fx) * (1 - fy)
                + q10 * fx * (1 - fy)
                + q01 * (1 - fx) * fy
                + q11 * fx * fy,
                INF,
            )
        out[inside] = res
        return out


# -- the 1-D discrete Legendre transform ---------------------------------------------


def _llt_1d_core(xs: np.ndarray, fs: np.ndarray, ys: np.ndarray):
    """Conjugate samples sup_i (xs[i] * y - fs[i]) for each y, via the lower hull.

    Returns (conj values, argmax xs, hull slope range).  Linear time after
    the hull sweep because hull edge slopes are sorted.
    """
    finite = np.isfinite(fs)
    if not np.any(finite):
        raise DomainError("function is identically +inf")
    x = xs[finite]
    f = fs[finite]
    # lower convex hull of (x, f), monotone chain over sorted x
    hx, hf = [], []
    for xi, fi in zip(x, f):
        while len(hx) >= 2 and (hf[-1] - hf[-2]) * (xi - hx[-1]) >= (fi - hf[-1]) * (
            hx[-1] - hx[-2]
        ):
            hx.pop()
            hf.pop()
        hx.append(xi)
        hf.append(fi)
    hx = np.asarray(hx)
    hf = np.asarray(hf)
    edge_slopes = np.diff(hf) / np.diff(hx) if len(hx) > 1 else np.empty(0)
    # vertex k is the argmax for y in [edge_slopes[k-1], edge_slopes[k]]
    k = np.searchsorted(edge_slopes, ys, side="left")
    arg = hx[k]
    conj = arg * ys - hf[k]
    lo_s = edge_slopes[0] if len(edge_slopes) else -INF
    hi_s = edge_slopes[-1] if len(edge_slopes) else INF
    return conj, arg, (lo_s, hi_s), (hx[0], hx[-1])


def llt_axis(xs: np.ndarray, fs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Box-restricted 1-D conjugate samples (always finite for proper input)."""
    conj, _, _, _ = _llt_1d_core(xs, fs, ys)
    return conj


def _axis_slope_span(u: GridFn, ax: int) -> Optional[Tuple[float, float]]:
    with np.errstate(invalid="ignore"):
        d = np.diff(u.values, axis=ax) / u.step(ax)
    d = d[np.isfinite(d)]
    if d.size == 0:
        return None
    return (float(d.min()), float(d.max()))


def _axis_touch(u: GridFn, ax: int) -> Tuple[bool, bool]:
    """Does the finite region of u touch the box faces orthogonal to axis ax?"""
    finite = np.isfinite(u.values)
    first = [slice(None)] * u.n
    first[ax] = 0
    last = [slice(None)] * u.n
    last[ax] = -1
    return (bool(np.any(finite[tuple(first)])), bool(np.any(finite[tuple(last)])))


def auto_dual_range(u: GridFn, margin_steps: float = 1.0) -> Tuple[Tuple[float, float], ...]:
    """Per-axis [min slope - margin, max slope + margin] of the sampled input."""
    out = []
    for ax in range(u.n):
        span = _axis_slope_span(u, ax)
        if span is None:
            out.append((-1.0, 1.0))
            continue
        m = margin_steps * u.step(ax)
        out.append((span[0] - m, span[1] + m))
    return tuple(out)


def llt(u: GridFn, dual_range=None, dual_resolution=None, check: bool = True) -> GridFn:
    """Discrete Legendre transform; exact on the lattice for convex inputs.

    dual_range gives per-axis (lo, hi) dual boxes (None: automatic slope
    cover with a one-step margin).  Where the finite samples touch a box
    face, the function is completed by letting the boundary slope continue;
    the conjugate is then +inf beyond the sampled slope span on that side
    and the sentinel is written accordingly.  With check=True a dual range
    failing to cover the slope span of such a side raises
    SlopeRangeExceeded, because the conjugate would be silently truncated.
    """
    if dual_range is None:
        dual_range = auto_dual_range(u)
    if dual_resolution is None:
        dual_resolution = u.resolution
    spans = [_axis_slope_span(u, ax) for ax in range(u.n)]
    touches = [_axis_touch(u, ax) for ax in range(u.n)]
    if check:
        for ax in range(u.n):
            span, touch = spans[ax], touches[ax]
            if span is None:
                continue
            lo_req, hi_req = dual_range[ax]
            if (touch[0] and lo_req > span[0]) or (touch[1] and hi_req < span[1]):
                raise SlopeRangeExceededError(
                    f"dual range on axis {ax} does not cover the slope span of the input",
                    required_range=(span[0], span[1]),
                )
    if u.n == 1:
        ys = np.linspace(dual_range[0][0], dual_range[0][1], dual_resolution[0])
        conj = llt_axis(u.axis(0), u.values, ys)
        conj = _apply_sentinels_1d(conj, ys, spans[0], touches[0])
        return GridFn((ys[0],), (ys[-1],), conj)
    xs0, xs1 = u.axis(0), u.axis(1)
    ys0 = np.linspace(dual_range[0][0], dual_range[0][1], dual_resolution[0])
    ys1 = np.linspace(dual_range[1][0], dual_range[1][1], dual_resolution[1])
    # pass 1: conjugate in x1 for every fixed x2 (box-restricted, no sentinels)
    g = np.empty((len(ys0), len(xs1)))
    alive = np.zeros(len(xs1), dtype=bool)
    for j in range(len(xs1)):
        col = u.values[:, j]
        if np.any(np.isfinite(col)):
            g[:, j] = llt_axis(xs0, col, ys0)
            alive[j] = True
    # pass 2: conjugate the remaining variable of -g (convex in x2)
    out = np.empty((len(ys0), len(ys1)))
    for i in range(len(ys0)):
        row = np.where(alive, -g[i, :], INF)
        out[i, :] = llt_axis(xs1, row, ys1)
    # sentinel masking from the input's own slope spans
    for ax, ys in ((0, ys0), (1, ys1)):
        span, touch = spans[ax], touches[ax]
        if span is None:
            continue
        eps = 1e-12 * (1.0 + abs(span[0]) + abs(span[1]))
        mask = np.zeros(len(ys), dtype=bool)
        if touch[0]:
            mask |= ys < span[0] - eps
        if touch[1]:
            mask |= ys > span[1] + eps
        if ax == 0:
            out[mask, :] = INF
        else:
            out[:, mask] = INF
    return GridFn((ys0[0], ys1[0]), (ys0[-1], ys1[-1]), out)


def _apply_sentinels_1d(conj, ys, span, touch):
    if span is None:
        return conj
    eps = 1e-12 * (1.0 + abs(span[0]) + abs(span[1]))
    conj = conj.copy()
    if touch[0]:
        conj[ys < span[0] - eps] = INF
    if touch[1]:
        conj[ys > span[1] + eps] = INF
    return conj


def gradient_via_conjugate(u_star: GridFn, x) -> np.ndarray:
    """argmax_y (x . y - u*(y)) on the dual grid: a subgradient selection.

    Ties break to the lexicographically smallest dual index (np.argmax on
    the row-major flattened array).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if u_star.n == 1:
        ys = u_star.axis(0)
        obj = x[0] * ys - u_star.values
        return np.array([ys[int(np.argmax(obj))]])
    y0 = u_star.axis(0)[:, None]
    y1 = u_star.axis(1)[None, :]
    obj = x[0] * y0 + x[1] * y1 - u_star.values
    flat = int(np.argmax(obj))
    i, j = np.unravel_index(flat, obj.shape)
    return np.array([u_star.axis(0)[i], u_star.axis(1)[j]])


# -- numeric valuation path ------------------------------------------------------------


@dataclass(frozen=True)
class ZNumericReport:
    z0: float
    z1: float
    z2: float
    grid_step: float
    z1_boundary: float
    z2_boundary_value: float


def z_numeric(triple, u: GridFn, tol: float = 1e-6, dual_range=None) -> ZNumericReport:
    """Riemann-sum (z0, z1, z2) for a grid-sampled convex function.

    z2 integrates zeta2(grad u*(x).x - u*(x)) on the dual grid with central
    finite differences.  Raises SupportExceeded when zeta1(u) has not
    decayed below tol at the box boundary, or when the dual Legendre values
    at the dual boundary stay below the zeta2 threshold.
    """
    zeta0, zeta1, zeta2 = triple.zeta0, triple.zeta1, triple.zeta2
    v = u.values
    finite = np.isfinite(v)
    cell = float(np.prod([u.step(i) for i in range(u.n)]))

    z0_val = zeta0.eval(float(v[finite].min()))

    zv = np.zeros_like(v)
    zv[finite] = zeta1.eval_array(v[finite])
    boundary = np.zeros_like(v, dtype=bool)
    for ax in range(u.n):
        sl = [slice(None)] * u.n
        sl[ax] = 0
        boundary[tuple(sl)] = True
        sl[ax] = -1
        boundary[tuple(sl)] = True
    z1_boundary = float(zv[boundary & finite].max()) if np.any(boundary & finite) else 0.0
    if z1_boundary > tol:
        raise SupportExceededError(
            f"zeta1(u) = {z1_boundary:.3g} at the box boundary exceeds tol={tol:.3g}"
        )
    z1_val = float(zv[finite].sum()) * cell

    us = llt(u, dual_range=dual_range, check=False)
    w = us.values
    T = zeta2.support_bound()
    if u.n == 1:
        ys = us.axis(0)
        with np.errstate(invalid="ignore"):
            grad = np.gradient(w, us.step(0))
        with np.errstate(invalid="ignore"):
            val = grad * ys - w
        interior = np.ones_like(val, dtype=bool)
        interior[[0, -1]] = False
        bvals = val[[0, -1]]
    else:
        with np.errstate(invalid="ignore"):
            g0, g1 = np.gradient(w, us.step(0), us.step(1))
        y0 = us.axis(0)[:, None]
        y1 = us.axis(1)[None, :]
        with np.errstate(invalid="ignore"):
            val = g0 * y0 + g1 * y1 - w
        interior = np.ones_like(val, dtype=bool)
        interior[0, :] = interior[-1, :] = False
        interior[:, 0] = interior[:, -1] = False
        bvals = np.concatenate([val[0, :], val[-1, :], val[:, 0], val[:, -1]])
    bvals = bvals[np.isfinite(bvals)]
    z2_boundary_value = float(bvals.min()) if bvals.size else INF
    if math.isfinite(T) and z2_boundary_value < T:
        raise SupportExceededError(
            f"dual Legendre value {z2_boundary_value:.3g} at the dual boundary is below the "
            f"zeta2 threshold {T:.3g}; enlarge the dual range"
        )
    mask = interior & np.isfinite(val)
    dual_cell = float(np.prod([us.step(i) for i in range(us.n)]))
    z2_val = float(zeta2.eval_array(val[mask]).sum()) * dual_cell
    return ZNumericReport(
        z0=z0_val,
        z1=z1_val,
        z2=z2_val,
        grid_step=max(u.step(i) for i in range(u.n)),
        z1_boundary=z1_boundary,
        z2_boundary_value=z2_boundary_value,
    )


def z_dual_numeric(triple, u: GridFn, tol: float = 1e-6, dual_range=None) -> ZNumericReport:
    """Riemann-sum dual components: zeta0(u(0)) + int zeta1(u*) + int zeta2(grad u.x - u).

    The roles of the primal and dual grids swap relative to z_numeric: zeta1
    integrates the conjugate on the dual grid, zeta2 integrates the Legendre
    values of u itself on the primal grid.
    """
    zeta0, zeta1, zeta2 = triple.zeta0, triple.zeta1, triple.zeta2
    us = llt(u, dual_range=dual_range, check=False)
    w = us.values
    finite_w = np.isfinite(w)
    # u(0) = u**(0) = -min u*, exact for convex u
    z0_val = zeta0.eval(-float(w[finite_w].min()))

    zv = np.zeros_like(w)
    zv[finite_w] = zeta1.eval_array(w[finite_w])
    boundary = np.zeros_like(w, dtype=bool)
    for ax in range(us.n):
        sl = [slice(None)] * us.n
        sl[ax] = 0
        boundary[tuple(sl)] = True
        sl[ax] = -1
        boundary[tuple(sl)] = True
    z1_boundary = float(zv[boundary & finite_w].max()) if np.any(boundary & finite_w) else 0.0
    if z1_boundary > tol:
        raise SupportExceededError(
            f"zeta1(u*) = {z1_boundary:.3g} at the dual box boundary exceeds tol={tol:.3g}"
        )
    dual_cell = float(np.prod([us.step(i) for i in range(us.n)]))
    z1_val = float(zv[finite_w].sum()) * dual_cell

    v = u.values
    T = zeta2.support_bound()
    if u.n == 1:
        xs = u.axis(0)
        with np.errstate(invalid="ignore"):
            grad = np.gradient(v, u.step(0))
        with np.errstate(invalid="ignore"):
            val = grad * xs - v
        interior = np.ones_like(val, dtype=bool)
        interior[[0, -1]] = False
        bvals = val[[0, -1]]
    else:
        with np.errstate(invalid="ignore"):
            g0, g1 = np.gradient(v, u.step(0), u.step(1))
        x0 = u.axis(0)[:, None]
        x1 = u.axis(1)[None, :]
        with np.errstate(invalid="ignore"):
            val = g0 * x0 + g1 * x1 - v
        interior = np.ones_like(val, dtype=bool)
        interior[0, :] = interior[-1, :] = False
        interior[:, 0] = interior[:, -1] = False
        bvals = np.concatenate([val[0, :], val[-1, :], val[:, 0], val[:, -1]])
    bvals = bvals[np.isfinite(bvals)]
    z2_boundary_value = float(bvals.min()) if bvals.size else INF
    if math.isfinite(T) and z2_boundary_value < T:
        raise SupportExceededError(
            f"Legendre value {z2_boundary_value:.3g} at the box boundary is below the "
            f"zeta2 threshold {T:.3g}; enlarge the box"
        )
    mask = interior & np.isfinite(val)
    cell = float(np.prod([u.step(i) for i in range(u.n)]))
    z2_val = float(zeta2.eval_array(val[mask]).sum()) * cell
    return ZNumericReport(
        z0=z0_val,
        z1=z1_val,
        z2=z2_val,
        grid_step=max(u.step(i) for i in range(u.n)),
        z1_boundary=z1_boundary,
        z2_boundary_value=z2_boundary_value,
    )


# -- SL(n) actions -----------------------------------------------------------------------


@dataclass(frozen=True)
class UnimodularMap:
    """phi in SL(n), optional translation; |det - 1| <= 1e-12 enforced."""

    matrix: np.ndarray
    translation: Optional[np.ndarray] = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if abs(np.linalg.det(m) - 1.0) > 1e-12:
            raise InputError("map must have determinant 1")
        object.__setattr__(self, "matrix", m)
        if self.translation is not None:
            object.__setattr__(self, "translation", np.asarray(self.translation, dtype=float))

    def apply(self, x):
        y = self.matrix @ np.asarray(x, dtype=float)
        if self.translation is not None:
            y = y + self.translation
        return y

    def inverse_apply(self, y):
        x = np.asarray(y, dtype=float)
        if self.translation is not None:
            x = x - self.translation
        return np.linalg.solve(self.matrix, x)


def sample_unimodular(seed: int, shear_count: int = 4, magnitude: float = 0.75) -> UnimodularMap:
    """Product of alternating axis shears; each factor has determinant exactly 1."""
    rng = np.random.default_rng(seed)
    m = np.eye(2)
    for i in range(shear_count):
        s = float(rng.uniform(-magnitude, magnitude))
        shear = np.array([[1.0, s], [0.0, 1.0]]) if i % 2 == 0 else np.array(
            [[1.0, 0.0], [s, 1.0]]
        )
        m = shear @ m
    return UnimodularMap(m)


def apply_map(u, phi: UnimodularMap):
    """u . phi^{-1}: exact for AffineMax, backward-warp resampling for grids."""
    if isinstance(u, AffineMax):
        out = u.compose_inverse_linear(phi.matrix)
        if phi.translation is not None:
            out = out.translate(phi.translation)
        return out
    if not isinstance(u, GridFn):
        raise DomainError("apply_map supports AffineMax and GridFn")
    if u.n == 1:
        raise DomainError("1-D grids have no nontrivial unimodular maps")
    axes = [u.axis(0), u.axis(1)]
    X, Y = np.meshgrid(axes[0], axes[1], indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=0)
    if phi.translation is not None:
        pts = pts - phi.translation[:, None]
    src = np.linalg.solve(phi.matrix, pts)
    vals = u.eval_batch(src.T)
    return GridFn(u.lo, u.hi, vals.reshape(X.shape))


# -- sublevel Hausdorff ---------------------------------------------------------------------


def _grid_sublevel_polygon(u: GridFn, t: float):
    from skimage import measure

    mask = np.where(np.isfinite(u.values), u.values, t + 1.0)
    contours = measure.find_contours(mask, t)
    pts = []
    for c in contours:
        for i0, i1 in c:
            pts.append((u.lo[0] + i0 * u.step(0), u.lo[1] + i1 * u.step(1)))
    if not pts:
        if bool(np.any(u.values <= t)):
            # sublevel set exists but is smaller than a cell; collapse to points
            idx = np.argwhere(u.values <= t)
            pts = [
                (u.lo[0] + i * u.step(0), u.lo[1] + j * u.step(1)) for i, j in idx
            ]
        else:
            return None
    hull = _convex_hull_2d(pts)
    return hull if len(hull) >= 3 else None


def hausdorff_sublevel(u, v, t: float) -> Optional[float]:
    """Max-norm Hausdorff distance of {u <= t} and {v <= t}; None if either is empty."""

    def extract(f):
        if isinstance(f, AffineMax):
            return sublevel_polytope(f, t)
        if isinstance(f, GridFn):
            if f.n == 1:
                xs = f.axis(0)
                sel = np.isfinite(f.values) & (f.values <= t)
                if not np.any(sel):
                    return None
                return (float(xs[sel].min()), float(xs[sel].max()))
            return _grid_sublevel_polygon(f, t)
        raise DomainError("hausdorff_sublevel supports AffineMax and GridFn")

    A, B = extract(u), extract(v)
    if A is None or B is None:
        return None
    if isinstance(A, tuple) and isinstance(B, tuple):
        return hausdorff_intervals(A, B)
    return hausdorff_polygons(A, B)
