"""End-to-end acceptance checks, one printed pass/fail line per criterion.

Each test exercises a published tolerance of the library: exact involutions,
closed-form integrals, grid-path agreement, and the documented negative
test.  Run with `pytest -s` to see the summary lines inline.
"""

import math
import time

import numpy as np
import pytest

from convexval.affine import PL1D, AffineMax, hausdorff_polygons, sublevel_polytope
from convexval.embed import build_uzeta, build_vlt, gk_eval, gk_inverse_of_vlt, sf
from convexval.grid import GridFn, llt, z_numeric
from convexval.profiles import PLProfile, conjugate_1d
from convexval.radial import RadialFn, z0, z1, z1_partial, z2_exact
from convexval.valuations import ZetaTriple, check_valuation_identity, evaluate_Z, growth_probe
from convexval.verify import _grid_shear_residual, _random_profile, random_bump_pair, remark33_sequence, run_suite
from convexval.zetas import ScalarZeta


def _report(num: int, name: str, ok: bool, detail: str = "") -> None:
    tag = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[PRIMARY {num:02d}] {name}: {tag}{suffix}", flush=True)
    assert ok, f"criterion {num} ({name}) failed {suffix}"


def _default_triple(n: int) -> ZetaTriple:
    return ZetaTriple.make(
        ScalarZeta.identity_like(),
        ScalarZeta.exp_decay(1.0, 1.0),
        ScalarZeta.hat(1.0, 1.0),
        n,
    )


def test_01_conjugation_involution():
    rng = np.random.default_rng(0)
    profiles = [_random_profile(rng) for _ in range(1000)]
    t0 = time.perf_counter()
    ok = all(conjugate_1d(conjugate_1d(p)).equals(p) for p in profiles)
    elapsed = time.perf_counter() - t0
    _report(1, "conjugation involution on 1000 random profiles", ok and elapsed < 1.0,
            f"{elapsed:.3f}s")


def test_02_llt_oracle():
    t0 = time.perf_counter()
    g = GridFn.from_callable(lambda x: 0.5 * x * x, (-3.0,), (3.0,), (601,))
    h = g.step(0)
    gs = llt(g, dual_range=((-3.0, 3.0),), dual_resolution=(601,))
    ys = gs.axis(0)
    sel = np.isfinite(gs.values)
    err = float(np.max(np.abs(gs.values[sel] - 0.5 * ys[sel] ** 2)))
    back = llt(gs, dual_range=((-3.0, 3.0),), dual_resolution=(601,))
    sel2 = np.isfinite(back.values) & np.isfinite(g.values)
    ierr = float(np.max(np.abs(back.values[sel2] - g.values[sel2])))
    elapsed = time.perf_counter() - t0
    ok = err <= 2 * h * h and ierr <= 1e-9 + 2 * h * h and elapsed < 1.0
    _report(2, "discrete conjugate of x^2/2 and involution", ok,
            f"err={err:.2e}, involution={ierr:.2e}, {elapsed:.3f}s")


def test_03_z2_annulus_cross_validation():
    t0 = time.perf_counter()
    p = PLProfile(
        0.0, [(0.0, 1.0), (1.0, 2.0), (1.5, 3.0), (11.0 / 6.0, 4.0), (25.0 / 12.0, 5.0)]
    )
    u = RadialFn(p, 2)
    triple = _default_triple(2)
    exact = z2_exact(triple.zeta2, u)
    exact_ok = abs(exact - math.pi) <= 1e-12 * math.pi
    pv = np.vectorize(p.eval)
    g = GridFn.from_callable(
        lambda pts: pv(np.hypot(pts[..., 0], pts[..., 1])), (-6.0, -6.0), (6.0, 6.0), (513, 513)
    )
    rel = abs(z_numeric(triple, g, tol=1e-3).z2 - exact) / exact
    elapsed = time.perf_counter() - t0
    ok = exact_ok and rel <= 0.02 and elapsed < 30.0
    _report(3, "annulus z2 = pi exactly, grid path within 2% at 512^2", ok,
            f"exact={exact:.12f}, grid_rel={rel:.2e}, {elapsed:.1f}s")


def test_04_z1_analytic_check():
    triple = _default_triple(2)
    cone = RadialFn(PLProfile(0.0, [(0.0, 1.0)]), 2)
    val = z1(triple.zeta1, cone)
    exact_ok = abs(val - 2.0 * math.pi) <= 1e-6
    g = GridFn.from_callable(
        lambda pts: np.hypot(pts[..., 0], pts[..., 1]), (-16.0, -16.0), (16.0, 16.0), (513, 513)
    )
    rel = abs(z_numeric(triple, g, tol=1e-5).z1 - 2.0 * math.pi) / (2.0 * math.pi)
    ok = exact_ok and rel <= 0.01
    _report(4, "z1 of the unit cone = 2 pi, grid path within 1%", ok,
            f"abs_err={abs(val - 2 * math.pi):.2e}, grid_rel={rel:.2e}")


def test_05_homogeneity():
    zeta0 = ScalarZeta.identity_like()
    zeta1_w = ScalarZeta.exp_decay(1.0, 1.0)
    zeta2_w = ScalarZeta.hat(1.0, 2.0)
    worst = 0.0
    for n in (2, 3):
        p = PLProfile(0.5, [(0.0, 1.0), (1.0, 2.5), (2.0, 4.0)])
        u = RadialFn(p, n)
        a0, a1, a2 = z0(zeta0, u), z1(zeta1_w, u), z2_exact(zeta2_w, u)
        for lam in (0.5, 2.0, 3.0):
            ul = u.scale(lam)
            b0, b1, b2 = z0(zeta0, ul), z1(zeta1_w, ul), z2_exact(zeta2_w, ul)
            worst = max(
                worst,
                abs(b0 - a0),
                abs(b1 - lam**n * a1) / max(1.0, abs(b1)),
                abs(b2 - lam ** (-n) * a2) / max(1.0, abs(a2)),
            )
    _report(5, "component homogeneity (1, lam^n, lam^-n)", worst <= 1e-12,
            f"worst={worst:.2e}")


def test_06_valuation_identity():
    # closed form: int e^{-u} for max(-2x, x) and max(-x, 2x) gives
    # 3/2 + 3/2 = 2 + 1 across the lattice pair
    t1 = ZetaTriple.make(ScalarZeta.zero(), ScalarZeta.exp_decay(1.0, 1.0), ScalarZeta.zero(), 1)
    u0 = PL1D.from_affine_max(AffineMax.make([((-2.0,), 0.0), ((1.0,), 0.0)], 1))
    v0 = PL1D.from_affine_max(AffineMax.make([((-1.0,), 0.0), ((2.0,), 0.0)], 1))
    zu = evaluate_Z(t1, u0).total
    zv = evaluate_Z(t1, v0).total
    zmin = evaluate_Z(t1, u0.lattice(v0, take_max=False)).total
    zmax = evaluate_Z(t1, u0.lattice(v0, take_max=True)).total
    closed_ok = (
        abs(zu - 1.5) <= 1e-12
        and abs(zv - 1.5) <= 1e-12
        and abs(zmin - 2.0) <= 1e-12
        and abs(zmax - 1.0) <= 1e-12
        and abs(zu + zv - zmax - zmin) == 0.0
    )
    triple = _default_triple(1)
    worst = 0.0
    for i in range(200):
        rng = np.random.default_rng((97, i))
        k = 1 + i % 4
        u, v = random_bump_pair(rng, k)
        worst = max(worst, check_valuation_identity(triple, u, v))
    ok = closed_ok and worst <= 1e-9
    _report(6, "valuation identity: closed form exact, 200 bump pairs", ok,
            f"closed=({zu:.1f},{zv:.1f},{zmax:.1f},{zmin:.1f}), worst={worst:.2e}")


def test_07_gk_table_and_probes():
    table_ok = True
    for k in range(1, 6):
        for j in range(1, 6):
            prev = sf(k + j - 1)
            if gk_eval(k, prev + math.factorial(k)) != sf(k + j):
                table_ok = False
    rng = np.random.default_rng(7)
    probes_ok = True
    for _ in range(1000):
        k = int(rng.integers(1, 8))
        a, b = sorted(rng.uniform(-5.0, 200.0, 2))
        if not gk_eval(k, b) >= gk_eval(k, a):
            probes_ok = False  # monotone
        mid = gk_eval(k, (a + b) / 2)
        if mid > (gk_eval(k, a) + gk_eval(k, b)) / 2 + 1e-9:
            probes_ok = False  # convex
        if gk_eval(k, max(a, b)) != max(gk_eval(k, a), gk_eval(k, b)):
            probes_ok = False  # lattice commutation (max)
        if gk_eval(k, min(a, b)) != min(gk_eval(k, a), gk_eval(k, b)):
            probes_ok = False  # lattice commutation (min)
    _report(7, "factorial embedding table and 1000 random probes", table_ok and probes_ok)


def test_08_vlt_grid():
    spacing_ok = True
    value_ok = True
    from fractions import Fraction

    for t, l in ((0.0, 10), (1.0, 7), (3.0, 25)):
        v = build_vlt(t, l)
        v.materialize_to_radius(float(v.grid_point(v.m_t + 6)))
        pts = [v.grid_point(m) for m in range(v.m_t, v.m_t + 6)]
        if any(Fraction(b) - Fraction(a) != Fraction(1, l) for a, b in zip(pts, pts[1:])):
            spacing_ok = False
        knot_values = dict(zip(v._radii, v._values))
        for m, r in enumerate(pts, start=v.m_t):
            if knot_values.get(r) != sf(m):
                value_ok = False
    # composed slope: g_k^{-1} of the vlt profile climbs at k! * l just below A(k)
    k, l = 3, 10
    v = build_vlt(0.0, l)
    v.materialize_to_radius(2.0)
    a, b = float(v.grid_point(k - 1)), float(v.grid_point(k))
    mid, eps = 0.5 * (a + b), (b - a) / 8.0
    fd = (gk_inverse_of_vlt(k, v, mid + eps) - gk_inverse_of_vlt(k, v, mid - eps)) / (2 * eps)
    slope_ok = abs(fd - math.factorial(k) * l) <= 1e-9
    _report(8, "vlt grid spacing 1/l, factorial-sum values, composed slope k!*l",
            spacing_ok and value_ok and slope_ok, f"fd={fd:.12g}")


def test_09_uzeta_divergence():
    zeta = ScalarZeta.harmonic(1.0)
    profile = build_uzeta(lambda t: 1.0 / (1.0 + t) if t >= 0 else 1.0, 2)
    profile.materialize_to_level(21.0)
    u = RadialFn(profile, 2)
    radii = [r for r in profile._radii if r > 0.0][:20]
    partials = [z1_partial(zeta, u, r) for r in radii]
    monotone = all(b >= a for a, b in zip(partials, partials[1:]))
    exceeded_at = next((i + 1 for i, val in enumerate(partials) if val > 10.0), None)
    ok = monotone and exceeded_at is not None and exceeded_at <= 20
    _report(9, "divergence witness pushes partial integrals past 10", ok,
            f"exceeded at prefix {exceeded_at}")


def test_10_growth_probe_decomposition():
    triple = ZetaTriple.make(
        ScalarZeta.identity_like(), ScalarZeta.hat(1.0, 2.0), ScalarZeta.hat(1.0, 1.0), 2
    )
    k0 = triple.k0()
    rng = np.random.default_rng(10)
    worst01 = 0.0
    exact2 = True
    for _ in range(30):
        u = RadialFn(_random_profile(rng, bounded=False), 2)  # coercive, not super-coercive
        for k in range(k0, k0 + 3):
            r0, r1, r2 = growth_probe(triple, u, k).residuals
            worst01 = max(worst01, r0, r1)
            if r2 is None or r2 != 0.0:
                exact2 = False
    ok = exact2 and worst01 <= 1e-9
    _report(10, "growth decomposition: zeta2 part exact for k >= k0", ok,
            f"k0={k0}, zeta0/zeta1 worst={worst01:.2e}")


def test_11_epi_convergence_negative_test():
    zeta = ScalarZeta([(-2.0, 3.0), (0.0, 1.0), (1.0, 0.0)], ("zero",))
    limit_body = [(0.0, -1.0), (1.0, -1.0), (1.0, 1.0), (0.0, 1.0)]
    hds, gaps = [], []
    for k in range(1, 13):
        uk = remark33_sequence(k)
        hds.append(hausdorff_polygons(sublevel_polytope(uk, 1.0), limit_body))
        gaps.append(abs(zeta.eval(-uk.eval((0.0, 0.0))) - zeta.eval(0.0)))
    converging = all(abs(h - 1.0 / (i + 1)) <= 1e-6 for i, h in enumerate(hds))
    gap = abs(zeta.eval(-1.0) - zeta.eval(0.0))
    persists = min(gaps) >= gap - 1e-9
    suite = run_suite("remark33")
    ok = converging and persists and suite["pass"] and suite["discontinuity_reproduced"]
    _report(11, "epi-convergent sequence with persistent weight gap is reported", ok,
            f"hausdorff->{hds[-1]:.3f}, gap={min(gaps):.1f}")


def test_12_sl2_invariance_refinement():
    residuals = [_grid_shear_residual(res, seed=0) for res in (128, 256, 512)]
    decreasing = residuals[0] > residuals[1] > residuals[2]
    ok = decreasing and residuals[2] <= 0.02
    _report(12, "shear invariance residual <= 2% at 512^2 and refining", ok,
            "residuals=" + ", ".join(f"{r:.2e}" for r in residuals))
