import math

import numpy as np
import pytest

from convexval.errors import SlopeRangeExceededError
from convexval.grid import (
    GridFn,
    UnimodularMap,
    apply_map,
    auto_dual_range,
    gradient_via_conjugate,
    hausdorff_sublevel,
    llt,
    sample_unimodular,
    z_dual_numeric,
    z_numeric,
)
from convexval.affine import AffineMax, gauge_of_polytope
from convexval.profiles import INF, PLProfile
from convexval.radial import RadialFn, z1, z2_exact
from convexval.valuations import ZetaTriple
from convexval.zetas import ScalarZeta


def quad_grid(lo=-3.0, hi=3.0, res=601):
    return GridFn.from_callable(lambda x: 0.5 * x * x, (lo,), (hi,), (res,))


class TestGridFn:
    def test_interpolation(self):
        g = quad_grid()
        assert g.eval((1.0,)) == pytest.approx(0.5, abs=1e-4)
        assert g.eval((10.0,)) == INF

    def test_inf_neighborhood(self):
        vals = np.array([0.0, 1.0, np.inf])
        g = GridFn((0.0,), (2.0,), vals)
        assert g.eval((1.5,)) == INF
        assert g.eval((0.5,)) == pytest.approx(0.5)

    def test_eval_batch_matches_eval(self):
        rng = np.random.default_rng(0)
        g = GridFn.from_callable(
            lambda p: abs(p[..., 0]) + 0.5 * p[..., 1] ** 2, (-2.0, -2.0), (2.0, 2.0), (65, 65)
        )
        pts = rng.uniform(-2.5, 2.5, size=(50, 2))
        batch = g.eval_batch(pts)
        for p, v in zip(pts, batch):
            assert v == pytest.approx(g.eval(p), abs=1e-12) or (v == INF and g.eval(p) == INF)


class TestLLT:
    def test_quadratic_self_conjugate(self):
        g = quad_grid()
        gs = llt(g)
        step = gs.step(0)
        xs = gs.axis(0)
        sel = np.isfinite(gs.values)
        err = np.max(np.abs(gs.values[sel] - 0.5 * xs[sel] ** 2))
        assert err <= 2 * step**2 + 2 * g.step(0) ** 2

    def test_involution(self):
        g = quad_grid()
        back = llt(llt(g), dual_range=((-3.0, 3.0),), dual_resolution=(601,))
        sel = np.isfinite(back.values) & np.isfinite(g.values)
        # interior only; quantization allows one-step slop
        inner = slice(5, -5)
        diff = np.abs(back.values[inner] - g.values[inner])
        assert np.max(diff[np.isfinite(diff)]) <= 1e-9 + 2 * g.step(0) ** 2

    def test_cone_conjugates_to_indicator(self):
        # |x| on a box conjugates to the indicator of [-1, 1]
        g = GridFn.from_callable(lambda x: abs(x), (-4.0,), (4.0,), (801,))
        gs = llt(g, dual_range=((-3.0, 3.0),), dual_resolution=(601,))
        ys = gs.axis(0)
        inside = np.abs(ys) <= 0.99
        outside = np.abs(ys) >= 1.01
        assert np.max(np.abs(gs.values[inside])) <= 1e-9
        assert np.all(np.isinf(gs.values[outside]))

    def test_slope_range_check(self):
        g = quad_grid()  # slopes span [-3, 3] and touch the box faces
        with pytest.raises(SlopeRangeExceededError):
            llt(g, dual_range=((-1.0, 1.0),), dual_resolution=(101,))

    def test_auto_dual_range_covers_span(self):
        g = quad_grid()
        (lo, hi), = auto_dual_range(g)
        assert lo < -3.0 < 3.0 < hi
        llt(g)  # must not raise with the auto range

    def test_2d_paraboloid(self):
        g = GridFn.from_callable(
            lambda p: 0.5 * (p[..., 0] ** 2 + p[..., 1] ** 2),
            (-3.0, -3.0),
            (3.0, 3.0),
            (301, 301),
        )
        gs = llt(g)
        xs, ys = gs.axis(0), gs.axis(1)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        want = 0.5 * (X**2 + Y**2)
        sel = np.isfinite(gs.values) & (np.abs(X) < 2.5) & (np.abs(Y) < 2.5)
        assert np.max(np.abs(gs.values[sel] - want[sel])) <= 4 * gs.step(0) ** 2 + 4 * g.step(0) ** 2


class TestGradient:
    def test_gradient_of_quadratic(self):
        gs = llt(quad_grid())
        grad = gradient_via_conjugate(gs, (1.0,))
        # conjugate of x^2/2 is y^2/2, gradient at 1 is 1
        assert grad[0] == pytest.approx(1.0, abs=2e-2)


class TestZNumeric:
    def triple(self):
        return ZetaTriple.make(
            ScalarZeta.identity_like(),
            ScalarZeta.exp_decay(1.0, 1.0),
            ScalarZeta.hat(1.0, 1.0),
            n=2,
        )

    def cone_grid(self, res=321):
        return GridFn.from_callable(
            lambda p: np.hypot(p[..., 0], p[..., 1]), (-16.0, -16.0), (16.0, 16.0), (res, res)
        )

    def test_against_radial_closed_forms(self):
        t = self.triple()
        rep = z_numeric(t, self.cone_grid())
        u = RadialFn(PLProfile(0.0, [(0.0, 1.0)]), 2)
        assert rep.z1 == pytest.approx(2.0 * math.pi, rel=0.01)
        assert rep.z2 == pytest.approx(z2_exact(t.zeta2, u), rel=0.02)
        assert rep.z0 == pytest.approx(t.zeta0.eval(0.0), abs=1e-9)

    def test_dual_against_exact_forms(self):
        from convexval.profiles import conjugate_1d
        from convexval.radial import z2_dual_exact

        t = self.triple()
        p = PLProfile(0.0, [(0.0, 1.0), (1.0, 2.0), (2.0, 4.0)])
        u = RadialFn(p, 2)
        pv = np.vectorize(p.eval)
        g = GridFn.from_callable(
            lambda pts: pv(np.hypot(pts[..., 0], pts[..., 1])),
            (-6.0, -6.0),
            (6.0, 6.0),
            (321, 321),
        )
        dual = z_dual_numeric(t, g)
        assert dual.z2 == pytest.approx(z2_dual_exact(t.zeta2, u), rel=0.02)
        us = RadialFn(conjugate_1d(p), 2)
        assert dual.z1 == pytest.approx(z1(t.zeta1, us), rel=0.02)
        assert dual.z0 == pytest.approx(t.zeta0.eval(p.eval(0.0)), abs=1e-6)


class TestMaps:
    def test_unimodular_det_enforced(self):
        with pytest.raises(Exception):
            UnimodularMap(np.array([[2.0, 0.0], [0.0, 1.0]]))

    def test_sample_unimodular_det_one(self):
        for seed in range(5):
            m = sample_unimodular(seed).matrix
            assert np.linalg.det(m) == pytest.approx(1.0, abs=1e-12)

    def test_apply_map_affine_exact(self):
        u = gauge_of_polytope([(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)])
        phi = sample_unimodular(3)
        v = apply_map(u, phi)
        x = np.array([0.4, -0.9])
        assert v.eval(phi.apply(x)) == pytest.approx(u.eval(x), rel=1e-12)

    def test_apply_map_grid_resamples(self):
        g = GridFn.from_callable(
            lambda p: 0.5 * (p[..., 0] ** 2 + p[..., 1] ** 2),
            (-4.0, -4.0),
            (4.0, 4.0),
            (201, 201),
        )
        phi = UnimodularMap(np.array([[1.0, 0.3], [0.0, 1.0]]))
        v = apply_map(g, phi)
        x = np.array([0.5, 0.5])
        assert v.eval(phi.apply(x)) == pytest.approx(g.eval(x), abs=1e-2)


class TestHausdorff:
    def test_translated_gauge_sublevels(self):
        sq = [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)]
        u = gauge_of_polytope(sq)
        v = u.translate((0.25, 0.0))
        assert hausdorff_sublevel(u, v, 1.0) == pytest.approx(0.25, abs=1e-9)

    def test_grid_vs_affine(self):
        sq = [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)]
        u = gauge_of_polytope(sq)
        g = GridFn.from_affine_max(u, (-3.0, -3.0), (3.0, 3.0), (301, 301))
        d = hausdorff_sublevel(g, u, 1.0)
        assert d is not None and d <= 0.05

    def test_empty_sublevel(self):
        u = AffineMax.make([((1.0, 0.0), 5.0), ((-1.0, 0.0), 5.0), ((0.0, 1.0), 5.0), ((0.0, -1.0), 5.0)], 2)
        assert hausdorff_sublevel(u, u, 1.0) is None
