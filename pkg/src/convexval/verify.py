"""Verification suites: randomized and closed-form checks for every module.

Each suite returns a report dict {suite, cases, residuals, tolerances, pass}
suitable for JSON serialization; `run_suite` dispatches by name.  Independent
trials run in a thread pool capped by the CONVEXVAL_THREADS environment
variable.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional

import numpy as np

from .affine import (
    PL1D,
    AffineMax,
    compose_gk_1d,
    gauge_of_polytope,
    hausdorff_intervals,
    hausdorff_polygons,
    pair_generator_disjoint_bump,
    sublevel_polytope,
)
from .embed import build_uzeta, compose_gk, gk_eval, gk_inverse, sf
from .errors import NotConvexError, UnboundedError
from .grid import GridFn, hausdorff_sublevel, sample_unimodular
from .profiles import PLProfile, conjugate_1d, fenchel_young_gap, pl_max, pl_min
from .radial import INF, RadialFn, z1_partial
from .valuations import (
    ZetaTriple,
    check_continuity,
    check_invariance,
    check_valuation_identity,
    evaluate_Z,
    growth_probe,
)
from .zetas import ScalarZeta

SUITES = (
    "g_k",
    "conjugate",
    "valuation",
    "invariance",
    "continuity",
    "growth",
    "remark33",
    "uzeta",
)

EXACT_TOL = 1e-9


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("CONVEXVAL_THREADS", "4")))
    except ValueError:
        return 4


def _map(fn, items):
    if _threads() == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        return list(pool.map(fn, items))


def _report(suite: str, cases: int, residuals: List[float], tolerances: Dict[str, float],
            passed: bool, extra: Optional[dict] = None) -> dict:
    out = {
        "suite": suite,
        "cases": cases,
        "residuals": [float(r) for r in residuals],
        "tolerances": tolerances,
        "pass": bool(passed),
    }
    if extra:
        out.update(extra)
    return out


def _random_profile(rng, bounded: Optional[bool] = None, max_knots: int = 5) -> PLProfile:
    m = int(rng.integers(1, max_knots))
    radii = np.concatenate([[0.0], np.sort(rng.uniform(0.1, 3.0, m))])
    slopes = np.sort(rng.uniform(0.05, 4.0, m + 1))
    base = float(rng.uniform(-1.0, 1.0))
    if bounded is None:
        bounded = bool(rng.integers(0, 2))
    db = float(radii[-1] + rng.uniform(0.2, 2.0)) if bounded else INF
    return PLProfile(base, list(zip(radii, slopes)), domain_bound=db)


def _default_triple(n: int) -> ZetaTriple:
    return ZetaTriple.make(
        ScalarZeta.identity_like(),
        ScalarZeta.exp_decay(1.0, 1.0),
        ScalarZeta.hat(1.0, 1.0),
        n,
    )


# -- suites -----------------------------------------------------------------------------


def suite_g_k(seed: int = 0, trials: int = 1000, **_) -> dict:
    rng = np.random.default_rng(seed)
    residuals = []
    # band-edge table: g_k(sf_{k+j-1} + k!) = sf_{k+j}, exact integers
    table_err = 0.0
    for k in range(1, 6):
        for j in range(0, 6):
            sf_prev = sf(k + j - 1) if k + j - 1 >= 1 else 0
            lhs = gk_eval(k, sf_prev + math.factorial(k))
            table_err = max(table_err, abs(lhs - sf(k + j)))
    residuals.append(table_err)

    def probe(i: int) -> float:
        r = np.random.default_rng((seed, i))
        k = int(r.integers(1, 8))
        a, b = sorted(r.uniform(-5.0, sf(k) + 40.0, 2))
        worst = 0.0
        ga, gb = gk_eval(k, a), gk_eval(k, b)
        if b > a and not gb > ga:  # strictly increasing
            worst = max(worst, ga - gb + 1.0)
        worst = max(worst, max(0.0, a - ga), max(0.0, b - gb))  # g_k >= id
        mid = gk_eval(k, (a + b) / 2.0)
        worst = max(worst, max(0.0, mid - (ga + gb) / 2.0))  # convexity
        if a <= sf(k):
            worst = max(worst, abs(ga - a))  # identity below sf_k
        worst = max(worst, abs(gk_inverse(k, ga) - a) / (1.0 + abs(a)))  # inversion
        # lattice commutation of the scalar map
        worst = max(worst, abs(gk_eval(k, max(a, b)) - max(ga, gb)))
        worst = max(worst, abs(gk_eval(k, min(a, b)) - min(ga, gb)))
        return worst

    probe_res = _map(probe, list(range(trials)))
    residuals.append(max(probe_res))

    # profile-level lattice commutation on a few random pairs
    comm = 0.0
    for _ in range(10):
        p, q = _random_profile(rng, bounded=False), _random_profile(rng, bounded=False)
        k = int(rng.integers(1, 4))
        lhs = compose_gk(k, pl_max(p, q))
        gp, gq = compose_gk(k, p), compose_gk(k, q)
        for r in np.linspace(0.0, 4.0, 41):
            rhs = max(gp.eval(float(r)), gq.eval(float(r)))
            comm = max(comm, abs(lhs.eval(float(r)) - rhs))
    residuals.append(comm)

    tol = {"table": 0.0, "probes": EXACT_TOL, "lattice": EXACT_TOL}
    passed = residuals[0] == 0.0 and residuals[1] <= EXACT_TOL and residuals[2] <= EXACT_TOL
    return _report("g_k", trials + 40, residuals, tol, passed)


def suite_conjugate(seed: int = 0, trials: int = 1000, **_) -> dict:
    def one(i: int) -> float:
        rng = np.random.default_rng((seed, i))
        p = _random_profile(rng)
        pp = conjugate_1d(conjugate_1d(p))
        worst = 0.0
        horizon = p.domain_bound if p.domain_bound < INF else 6.0
        for r in np.linspace(0.0, horizon * 0.999, 17):
            worst = max(worst, abs(pp.eval(float(r)) - p.eval(float(r))))
        if not pp.equals(p, horizon=horizon):
            worst = max(worst, 1.0)
        # Fenchel-Young gap stays non-negative on samples
        q = conjugate_1d(p)
        for _ in range(4):
            r = float(rng.uniform(0.0, horizon))
            s = float(rng.uniform(0.0, 5.0))
            worst = max(worst, max(0.0, -fenchel_young_gap(p, r, s, conjugate=q)))
        return worst

    res = _map(one, list(range(trials)))
    worst = max(res)
    return _report("conjugate", trials, [worst], {"involution": EXACT_TOL}, worst <= EXACT_TOL)


def random_bump_pair(rng, k: int):
    """1-D pair (u, v) with u min v = w convex by construction.

    The base w is a 5-line upper envelope; the bumps raise each of the two
    non-adjacent interior segments by a small amount, so the excess regions
    sit in separate pockets and stay disjoint.  The pair is then pushed to
    super-coercive functions with the factorial embedding.
    """
    slopes = np.cumsum(rng.uniform(0.3, 1.5, 5))
    slopes -= slopes[2] - float(rng.uniform(-0.1, 0.1))  # middle slope near 0
    breaks = np.cumsum(rng.uniform(0.8, 2.0, 4))
    breaks -= breaks[1]  # kinks straddle the origin
    vals = [0.0]
    for j in range(1, 4):
        vals.append(vals[-1] + slopes[j] * (breaks[j] - breaks[j - 1]))
    lines = [(float(slopes[j]), float(vals[j] - slopes[j] * breaks[j])) for j in range(4)]
    lines.append((float(slopes[4]), float(vals[3] - slopes[4] * breaks[3])))
    w = AffineMax.make([((a,), c) for a, c in lines], 1)
    h = float(rng.uniform(0.02, 0.2))
    for _ in range(8):
        l1 = ((lines[1][0],), lines[1][1] + h)
        l2 = ((lines[3][0],), lines[3][1] + h)
        try:
            u, v = pair_generator_disjoint_bump(w, l1, l2)
        except NotConvexError:
            h *= 0.5
            continue
        cap = sf(k) + 30.0
        return (
            compose_gk_1d(k, PL1D.from_affine_max(u), cap),
            compose_gk_1d(k, PL1D.from_affine_max(v), cap),
        )
    raise NotConvexError("could not sample a disjoint-bump pair")


def suite_valuation(seed: int = 0, trials: int = 300, **_) -> dict:
    triple = _default_triple(1)

    def one(i: int) -> float:
        rng = np.random.default_rng((seed, i))
        k = int(rng.integers(1, 4))
        u, v = random_bump_pair(rng, k)
        return check_valuation_identity(triple, u, v)

    res = _map(one, list(range(trials)))

    # closed-form exponential example: 3/2 + 3/2 = 2 + 1
    t1 = ZetaTriple.make(ScalarZeta.zero(), ScalarZeta.exp_decay(1.0, 1.0), ScalarZeta.zero(), 1)
    u0 = PL1D.from_affine_max(AffineMax.make([((-2.0,), 0.0), ((1.0,), 0.0)], 1))
    v0 = PL1D.from_affine_max(AffineMax.make([((-1.0,), 0.0), ((2.0,), 0.0)], 1))
    closed = check_valuation_identity(t1, u0, v0)

    worst = max(res)
    tol = {"pairs": EXACT_TOL, "closed_form": 0.0}
    return _report(
        "valuation",
        trials + 1,
        [worst, closed],
        tol,
        worst <= EXACT_TOL and closed == 0.0,
    )


def suite_invariance(seed: int = 0, trials: int = 20, n: int = 2,
                     grid_res: int = 512, **_) -> dict:
    rng = np.random.default_rng(seed)
    triple = _default_triple(n)

    # exact path: translations and linear shifts
    transl_res, dual_res = 0.0, 0.0
    for _ in range(trials):
        u = RadialFn(_random_profile(rng, bounded=True), n)
        taus = [tuple(rng.uniform(-2.0, 2.0, n)) for _ in range(3)]
        transl_res = max(transl_res, check_invariance(triple, u, taus))
        ls = [tuple(rng.uniform(-1.0, 1.0, n)) for _ in range(3)]
        dual_res = max(dual_res, check_invariance(triple, u, ls, dual=True))

    # grid path: shears at the requested resolution
    grid_rel = _grid_shear_residual(grid_res, seed)

    tol = {"translations": 0.0, "dual_shift": EXACT_TOL, "grid_relative": 0.02}
    passed = transl_res == 0.0 and dual_res <= EXACT_TOL and grid_rel <= 0.02
    return _report(
        "invariance",
        2 * trials + 3,
        [transl_res, dual_res, grid_rel],
        tol,
        passed,
        extra={"grid_resolution": grid_res},
    )


def _grid_shear_residual(grid_res: int, seed: int = 0) -> float:
    """Relative invariance residual of the numeric path under sampled shears."""
    triple = ZetaTriple.make(
        ScalarZeta.identity_like(),
        ScalarZeta.exp_decay(1.0, 1.0),
        ScalarZeta.hat(1.0, 6.0),
        2,
    )
    p = PLProfile(0.0, [(0.0, 1.0), (1.0, 2.0), (2.0, 4.0)])

    def f(pts):
        r = np.hypot(pts[..., 0], pts[..., 1])
        flat = r.ravel()
        out = np.empty_like(flat)
        for i, rr in enumerate(flat):
            out[i] = p.eval(float(rr))
        return out.reshape(r.shape)

    u = GridFn.from_callable(f, (-6.0, -6.0), (6.0, 6.0), (grid_res + 1, grid_res + 1))
    shears = [sample_unimodular(seed + s, shear_count=2, magnitude=0.3) for s in (1, 2, 3)]
    base = evaluate_Z(triple, u, tol=1e-3).total
    return check_invariance(triple, u, shears, tol=1e-3) / abs(base)


def suite_continuity(seed: int = 0, trials: int = 10, n: int = 2, k_max: int = 8, **_) -> dict:
    rng = np.random.default_rng(seed)
    triple = _default_triple(n)
    worst_final = 0.0
    cases = 0
    for _ in range(trials):
        u = RadialFn(_random_profile(rng, bounded=None), n)
        res = check_continuity(triple, u, k_max=k_max)
        worst_final = max(worst_final, res[-1])
        cases += 1
    # all-zero triple: residuals vanish identically
    tz = ZetaTriple.make(ScalarZeta.zero(), ScalarZeta.zero(), ScalarZeta.zero(), n)
    zero_res = max(check_continuity(tz, RadialFn(_random_profile(rng), n), k_max=3))
    tol = {"final_residual": EXACT_TOL, "zero_triple": 0.0}
    passed = worst_final <= EXACT_TOL and zero_res == 0.0
    return _report("continuity", cases + 1, [worst_final, zero_res], tol, passed)


def suite_growth(seed: int = 0, trials: int = 50, n: int = 2, **_) -> dict:
    triple = ZetaTriple.make(
        ScalarZeta.identity_like(),
        ScalarZeta.hat(1.0, 2.0),
        ScalarZeta.hat(1.0, 1.0),
        n,
    )
    k0 = triple.k0()

    def one(i: int) -> float:
        rng = np.random.default_rng((seed, i))
        u = RadialFn(_random_profile(rng, bounded=False), n)  # coercive, not super-coercive
        worst = 0.0
        for k in range(k0, k0 + 3):
            r0, r1, r2 = growth_probe(triple, u, k).residuals
            worst = max(worst, r0, r1, r2 if r2 is not None else 0.0)
        return worst

    res = _map(one, list(range(trials)))
    worst = max(res)
    return _report(
        "growth",
        trials * 3,
        [worst],
        {"decomposition": EXACT_TOL},
        worst <= EXACT_TOL,
        extra={"k0": k0},
    )


def remark33_sequence(k: int):
    """Gauge of [-1/k, 1] x [-1, 1] translated so the value at the origin is 1."""
    gauge = gauge_of_polytope([(-1.0 / k, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0 / k, 1.0)])
    return gauge.translate((1.0 / k, 0.0))


def suite_remark33(seed: int = 0, trials: int = 0, k_max: int = 12, **_) -> dict:
    """Documented negative test: epi-convergence without w(u_k) -> w(u).

    The translated gauges u_k epi-converge to the gauge of [0,1]x[-1,1]
    (sublevel Hausdorff distance 1/k) but u_k(0) = 1 for every k while the
    limit vanishes at 0, so any weight w(t) = zeta(-u(0)) with
    zeta(-1) != zeta(0) cannot be continuous.  The suite passes when the
    discontinuity is reproduced, not masked.
    """
    limit_body = [(0.0, -1.0), (1.0, -1.0), (1.0, 1.0), (0.0, 1.0)]
    zeta = ScalarZeta([(-2.0, 3.0), (0.0, 1.0), (1.0, 0.0)], ("zero",))
    target = zeta.eval(-0.0)
    hds, gaps = [], []
    for k in range(1, k_max + 1):
        uk = remark33_sequence(k)
        hd = hausdorff_polygons(sublevel_polytope(uk, 1.0), limit_body)
        hds.append(hd)
        gaps.append(abs(zeta.eval(-uk.eval((0.0, 0.0))) - target))
    hd_err = max(abs(h - 1.0 / (idx + 1)) for idx, h in enumerate(hds))
    converging = hds[-1] <= 1.5 / k_max
    gap_persists = min(gaps) >= abs(zeta.eval(-1.0) - zeta.eval(0.0)) - EXACT_TOL
    passed = converging and gap_persists and hd_err <= 1e-6
    return _report(
        "remark33",
        k_max,
        [hd_err, float(min(gaps))],
        {"hausdorff": 1e-6, "min_gap": abs(zeta.eval(-1.0) - zeta.eval(0.0))},
        passed,
        extra={"hausdorff_sequence": hds, "weight_gaps": gaps, "discontinuity_reproduced": gap_persists},
    )


def suite_uzeta(seed: int = 0, trials: int = 0, n: int = 2, zeta_kind: str = "harmonic", **_) -> dict:
    """Divergence witness: partial integrals through the materialized prefixes.

    For zeta(t) = 1/(1+t) the order-(n-1) moment diverges, and the witness
    profile pushes the partial lifted integrals past 10 within 20 levels.
    """
    if zeta_kind != "harmonic":
        raise ValueError("only the harmonic witness is wired into this suite")
    zeta_fn = lambda t: 1.0 / (1.0 + t) if t >= 0 else 1.0
    zeta = ScalarZeta.harmonic(1.0)
    profile = build_uzeta(zeta_fn, n)
    u = RadialFn(profile, n)
    profile.materialize_to_level(21.0)
    radii = [r for r in profile._radii if r > 0.0][:20]
    partials = [z1_partial(zeta, u, r) for r in radii]
    monotone = all(b >= a for a, b in zip(partials, partials[1:]))
    exceeded_at = next((i + 1 for i, v in enumerate(partials) if v > 10.0), None)
    passed = monotone and exceeded_at is not None and exceeded_at <= 20
    return _report(
        "uzeta",
        len(partials),
        [partials[-1]],
        {"divergence_evidence": 10.0},
        passed,
        extra={"partials": partials, "exceeded_at": exceeded_at, "monotone": monotone},
    )


_SUITE_FNS = {
    "g_k": suite_g_k,
    "conjugate": suite_conjugate,
    "valuation": suite_valuation,
    "invariance": suite_invariance,
    "continuity": suite_continuity,
    "growth": suite_growth,
    "remark33": suite_remark33,
    "uzeta": suite_uzeta,
}


def run_suite(name: str, **kwargs) -> dict:
    if name not in _SUITE_FNS:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(_SUITE_FNS)}")
    kwargs = {k: v for k, v in kwargs.items() if v is not None}
    return _SUITE_FNS[name](**kwargs)
