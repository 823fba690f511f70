import math

import numpy as np
import pytest

from convexval.affine import (
    PL1D,
    AffineMax,
    compose_gk_1d,
    gauge_of_polytope,
    hausdorff_intervals,
    hausdorff_polygons,
    pair_generator_disjoint_bump,
    sublevel_polytope,
    z0_1d,
    z1_1d,
    z2_1d,
)
from convexval.embed import gk_eval
from convexval.errors import DomainError, NotConvexError, UnboundedError
from convexval.zetas import ScalarZeta


class TestAffineMax:
    def test_eval_is_upper_envelope(self):
        u = AffineMax.make([((1.0, 0.0), 0.0), ((-1.0, 0.0), 0.0), ((0.0, 2.0), -1.0)], 2)
        assert u.eval((3.0, 0.0)) == 3.0
        assert u.eval((0.0, 3.0)) == 5.0

    def test_coercivity(self):
        assert AffineMax.make([((1.0,), 0.0), ((-1.0,), 0.0)], 1).is_coercive()
        assert not AffineMax.make([((1.0,), 0.0), ((2.0,), 0.0)], 1).is_coercive()
        tri = AffineMax.make([((1.0, 0.0), 0.0), ((-1.0, 1.0), 0.0), ((-1.0, -1.0), 0.0)], 2)
        assert tri.is_coercive()

    def test_min_value_lp(self):
        u = AffineMax.make([((1.0, 0.0), -1.0), ((-1.0, 0.0), -1.0), ((0.0, 1.0), -1.0), ((0.0, -1.0), -1.0)], 2)
        assert u.min_value() == pytest.approx(-1.0, abs=1e-9)

    def test_translate(self):
        u = AffineMax.make([((1.0,), 0.0), ((-1.0,), 0.0)], 1)
        v = u.translate((2.0,))
        assert v.eval((2.0,)) == pytest.approx(0.0)
        assert v.eval((3.0,)) == pytest.approx(u.eval((1.0,)))

    def test_compose_inverse_linear_shear(self):
        u = AffineMax.make([((1.0, 0.0), 0.0), ((-1.0, 0.0), 0.0), ((0.0, 1.0), 0.0), ((0.0, -1.0), 0.0)], 2)
        phi = np.array([[1.0, 0.5], [0.0, 1.0]])
        v = u.compose_inverse_linear(phi)
        x = np.array([0.3, -0.7])
        assert v.eval(phi @ x) == pytest.approx(u.eval(x), rel=1e-12)


class TestGaugeAndSublevel:
    def test_square_gauge(self):
        K = [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)]
        g = gauge_of_polytope(K)
        assert g.eval((0.5, 0.0)) == pytest.approx(0.5)
        assert g.eval((2.0, 2.0)) == pytest.approx(2.0)

    def test_sublevel_scales_gauge(self):
        K = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)]
        g = gauge_of_polytope(K)
        P = sublevel_polytope(g, 3.0)
        assert hausdorff_polygons(P, [(3.0, 0.0), (0.0, 3.0), (-3.0, 0.0), (0.0, -3.0)]) <= 1e-9

    def test_gauge_needs_interior_origin(self):
        with pytest.raises(DomainError):
            gauge_of_polytope([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])

    def test_hausdorff_unit_translate(self):
        sq = [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)]
        moved = [(x + 1.0, y) for x, y in sq]
        assert hausdorff_polygons(sq, moved) == pytest.approx(1.0)
        assert hausdorff_polygons(sq, sq) == 0.0

    def test_hausdorff_intervals(self):
        assert hausdorff_intervals((0.0, 1.0), (0.5, 3.0)) == 2.0


class TestPairGenerator:
    def test_disjoint_bumps_accepted(self):
        w = AffineMax.make([((-1.0,), 0.0), ((1.0,), 0.0)], 1)
        # bumps exceeding w near x = -3 and x = +3 only
        u, v = pair_generator_disjoint_bump(w, ((-2.0,), -2.5), ((2.0,), -2.5))
        assert u.eval((-3.0,)) > w.eval((-3.0,))
        assert v.eval((3.0,)) > w.eval((3.0,))
        assert u.eval((3.0,)) == w.eval((3.0,))

    def test_overlapping_bumps_rejected(self):
        w = AffineMax.make([((-1.0,), 0.0), ((1.0,), 0.0)], 1)
        with pytest.raises(NotConvexError):
            pair_generator_disjoint_bump(w, ((0.5,), 1.0), ((-0.5,), 1.0))


class TestPL1D:
    def test_from_affine_max(self):
        u = AffineMax.make([((-1.0,), 0.0), ((1.0,), -1.0), ((3.0,), -5.0)], 1)
        p = PL1D.from_affine_max(u)
        for x in np.linspace(-4.0, 4.0, 61):
            assert p.eval(float(x)) == pytest.approx(u.eval((float(x),)), abs=1e-12)

    def test_min_value(self):
        p = PL1D([-1.0, 2.0], [-2.0, 0.5, 3.0], 1.0)
        assert p.min_value() == 1.0

    def test_lattice_max(self):
        p = PL1D([0.0], [-1.0, 1.0], 0.0)
        q = PL1D([1.0], [-1.0, 1.0], 0.0)
        mx = p.lattice(q, take_max=True)
        for x in (-3.0, 0.2, 0.8, 3.0):
            assert mx.eval(x) == pytest.approx(max(p.eval(x), q.eval(x)), abs=1e-12)

    def test_lattice_min_convex_pair(self):
        # min(max(-x, 2x), max(-2x, x)) = |x|, which stays convex
        p = PL1D([0.0], [-1.0, 2.0], 0.0)
        q = PL1D([0.0], [-2.0, 1.0], 0.0)
        mn = p.lattice(q, take_max=False)
        for x in (-3.0, -0.5, 0.5, 3.0):
            assert mn.eval(x) == pytest.approx(abs(x), abs=1e-12)

    def test_lattice_min_rejects_nonconvex(self):
        p = PL1D([-2.0], [-1.0, 1.0], 0.0)
        q = PL1D([2.0], [-1.0, 1.0], 0.0)
        with pytest.raises(NotConvexError):
            p.lattice(q, take_max=False)


class TestComposeGk1D:
    def test_matches_scalar_map(self):
        p = PL1D([0.0], [-2.0, 1.5], 0.0)
        g = compose_gk_1d(2, p, level_cap=200.0)
        for x in np.linspace(-20.0, 25.0, 91):
            lv = p.eval(float(x))
            if lv > 150.0:
                continue
            assert g.eval(float(x)) == pytest.approx(gk_eval(2, lv), rel=1e-12)

    def test_identity_below_sf_k(self):
        p = PL1D([0.0], [-1.0, 1.0], 0.0)
        g = compose_gk_1d(3, p, level_cap=100.0)
        # sf_3 = 1 + 2 + 6 = 9: below it nothing changes
        for x in (-5.0, 0.0, 7.0):
            assert g.eval(float(x)) == pytest.approx(p.eval(float(x)))


class TestFunctionals1D:
    def test_z1_triangle_closed_form(self):
        # u(x) = |x|, zeta1 = max(0, 1 - t): integral of zeta1(|x|) dx = 1
        p = PL1D([0.0], [-1.0, 1.0], 0.0)
        assert z1_1d(ScalarZeta.hat(1.0, 1.0), p) == pytest.approx(1.0, rel=1e-12)

    def test_z1_exp_closed_form(self):
        # integral of e^{-|x|} dx = 2
        p = PL1D([0.0], [-1.0, 1.0], 0.0)
        assert z1_1d(ScalarZeta.exp_decay(1.0, 1.0), p) == pytest.approx(2.0, rel=1e-10)

    def test_z2_abs_closed_form(self):
        # u = |x|: u* = indicator of [-1,1], Legendre value 0 there, so
        # z2 = zeta2(0) * 2
        p = PL1D([0.0], [-1.0, 1.0], 0.0)
        assert z2_1d(ScalarZeta.hat(1.0, 1.0), p) == pytest.approx(2.0, rel=1e-12)

    def test_z0_weighted_min(self):
        zeta0 = ScalarZeta.identity_like()
        p = PL1D([0.0], [-1.0, 1.0], 2.0)
        assert z0_1d(zeta0, p) == pytest.approx(zeta0.eval(2.0))

    def test_z1_needs_decay(self):
        p = PL1D([0.0], [-1.0, 1.0], 0.0)
        with pytest.raises(UnboundedError):
            z1_1d(ScalarZeta.harmonic(1.0), p)

    def test_z1_needs_coercive(self):
        p = PL1D([0.0], [0.0, 1.0], 0.0)
        with pytest.raises(UnboundedError):
            z1_1d(ScalarZeta.hat(1.0, 1.0), p)
