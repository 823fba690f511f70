"""Zeta-triple valuations Z and their dual counterparts across representations.

A ZetaTriple (zeta0, zeta1, zeta2) with a finite (n-1)-moment for zeta1 and a
vanishing threshold for zeta2 induces

    Z(u) = zeta0(min u) + int zeta1(u(x)) dx + int zeta2(grad u*(x).x - u*(x)) dx,

a translation and volume-preserving-linear invariant valuation on
super-coercive convex functions, plus the dual form

    Z_dual(u) = zeta0(u(0)) + int zeta1(u*) + int zeta2(grad u(x).x - u(x)) dx.

Evaluation dispatches on the representation: exact closed forms for radial
piecewise-linear lifts and 1-D piecewise-linear functions, Riemann sums with
certified boundary checks for grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .affine import (
    PL1D,
    AffineMax,
    compose_gk_1d,
    z0_1d,
    z1_1d,
    z2_1d,
)
from .embed import MAX_BAND, compose_gk, gk_eval, gk_inverse, sf, _gk_bands
from .errors import DomainError, InputError, NotConvexError, UnboundedError
from .grid import GridFn, UnimodularMap, apply_map, z_dual_numeric, z_numeric
from .profiles import PLProfile, pl_max, pl_min
from .radial import (
    INF,
    RadialFn,
    RadialPlusLinear,
    z0,
    z1,
    z2_dual_exact,
    z2_exact,
)
from .zetas import DivergesBeyond, Finite, ScalarZeta, compose_with_increasing, moment_check

EXACT_TOL = 1e-9
GRID_REL_TOL = 0.02

ConvexInput = Union[RadialFn, RadialPlusLinear, PL1D, GridFn]


@dataclass(frozen=True)
class ZComponents:
    """Additive pieces of a valuation together with the evaluation path."""

    z0: float
    z1: float
    z2: float
    path: str

    @property
    def total(self) -> float:
        return self.z0 + self.z1 + self.z2


@dataclass(frozen=True)
class ZetaTriple:
    """Weights (zeta0, zeta1, zeta2) with the certificates Z needs.

    threshold_T bounds the support of zeta2 (zeta2 = 0 on [T, inf));
    moment_certificate records the order-(n-1) moment of zeta1.  Both are
    validated on construction via `make`.
    """

    zeta0: ScalarZeta
    zeta1: ScalarZeta
    zeta2: ScalarZeta
    threshold_T: float
    moment_certificate: object
    n: int

    @classmethod
    def make(cls, zeta0: ScalarZeta, zeta1: ScalarZeta, zeta2: ScalarZeta, n: int) -> "ZetaTriple":
        if n < 1:
            raise DomainError("dimension must be >= 1")
        for name, z in (("zeta0", zeta0), ("zeta1", zeta1), ("zeta2", zeta2)):
            if not z.is_nonnegative():
                raise InputError(f"{name} must be non-negative")
        T = zeta2.support_bound()
        if not math.isfinite(T):
            raise InputError("zeta2 must vanish beyond a finite threshold")
        cert = moment_check(zeta1, n)
        if isinstance(cert, DivergesBeyond):
            raise InputError(
                f"zeta1 lacks a finite order-{n - 1} moment "
                f"(partial integral {cert.partial:.3g} up to {cert.bound:.3g})"
            )
        return cls(zeta0, zeta1, zeta2, float(T), cert, int(n))

    def k0(self) -> int:
        """Smallest k with sf_k >= threshold_T (+1 slack kept)."""
        k = 1
        while sf(k) < self.threshold_T + 1.0:
            k += 1
            if k > MAX_BAND:
                raise DomainError("threshold exceeds the factorial band budget")
        return k


def _reject_affine_max(u) -> None:
    if isinstance(u, AffineMax):
        raise InputError(
            "a finite max of affine pieces is never super-coercive; compose it "
            "with a factorial embedding first (compose_gk / compose_gk_1d)"
        )


def evaluate_Z(
    triple: ZetaTriple,
    u: ConvexInput,
    tol: float = 1e-6,
    dual_range=None,
) -> ZComponents:
    """Z(u) = zeta0(min u) + int zeta1(u) + int zeta2(grad u*.x - u*).

    Exact on radial and 1-D piecewise-linear inputs, Riemann sums on grids.
    Plain AffineMax inputs are rejected with guidance, their integrals being
    infinite without a super-coercive completion.
    """
    _reject_affine_max(u)
    if isinstance(u, RadialPlusLinear):
        # every component of Z is translation invariant in the dual sense:
        # the linear term shifts the conjugate without changing the integrals
        u = u.centered()
    if isinstance(u, RadialFn):
        if u.n != triple.n:
            raise DomainError("dimension mismatch between triple and input")
        return ZComponents(
            z0=z0(triple.zeta0, u),
            z1=z1(triple.zeta1, u, tol=min(tol, EXACT_TOL)),
            z2=z2_exact(triple.zeta2, u),
            path="radial-exact",
        )
    if isinstance(u, PL1D):
        if triple.n != 1:
            raise DomainError("dimension mismatch between triple and input")
        return ZComponents(
            z0=z0_1d(triple.zeta0, u),
            z1=z1_1d(triple.zeta1, u),
            z2=z2_1d(triple.zeta2, u),
            path="pl1d-exact",
        )
    if isinstance(u, GridFn):
        if u.n != triple.n:
            raise DomainError("dimension mismatch between triple and input")
        rep = z_numeric(triple, u, tol=tol, dual_range=dual_range)
        return ZComponents(z0=rep.z0, z1=rep.z1, z2=rep.z2, path="grid-numeric")
    raise InputError(f"unsupported input representation: {type(u).__name__}")


def evaluate_Z_dual(
    triple: ZetaTriple,
    u: ConvexInput,
    tol: float = 1e-6,
    dual_range=None,
) -> ZComponents:
    """Z_dual(u) = zeta0(u(0)) + int zeta1(u*) + int zeta2(grad u.x - u).

    Invariant under u -> u + l for linear functionals l: the conjugate is
    translated, leaving both integrals unchanged, and u(0) is read off the
    radial part for RadialPlusLinear inputs exactly.
    """
    _reject_affine_max(u)
    if isinstance(u, RadialPlusLinear):
        origin = u.value_at_origin()
        c = u.centered()
        return ZComponents(
            z0=triple.zeta0.eval(origin),
            z1=z1(triple.zeta1, c.conjugate(), tol=min(tol, EXACT_TOL)),
            z2=z2_dual_exact(triple.zeta2, c),
            path="radial-exact",
        )
    if isinstance(u, RadialFn):
        if u.n != triple.n:
            raise DomainError("dimension mismatch between triple and input")
        value0 = u.eval(tuple(0.0 for _ in range(u.n)))
        if not math.isfinite(value0):
            raise DomainError("the dual form needs u finite at the origin")
        centered = RadialFn(u.profile, u.n)
        return ZComponents(
            z0=triple.zeta0.eval(value0),
            z1=z1(triple.zeta1, centered.conjugate(), tol=min(tol, EXACT_TOL)),
            z2=z2_dual_exact(triple.zeta2, centered),
            path="radial-exact",
        )
    if isinstance(u, GridFn):
        if u.n != triple.n:
            raise DomainError("dimension mismatch between triple and input")
        rep = z_dual_numeric(triple, u, tol=tol, dual_range=dual_range)
        return ZComponents(z0=rep.z0, z1=rep.z1, z2=rep.z2, path="grid-numeric")
    raise InputError(f"unsupported input representation: {type(u).__name__}")


# -- valuation identity -------------------------------------------------------------------


def check_valuation_identity(triple: ZetaTriple, u: ConvexInput, v: ConvexInput) -> float:
    """|Z(u) + Z(v) - Z(u max v) - Z(u min v)|.

    The pointwise min must remain convex; if not, NotConvex propagates and
    the caller records the pair as skipped.
    """
    if isinstance(u, RadialFn) and isinstance(v, RadialFn):
        if u.n != v.n or tuple(u.center) != tuple(v.center):
            raise InputError("radial lattice operations need a common center")
        umax = RadialFn(pl_max(u.profile, v.profile), u.n, u.center)
        umin = RadialFn(pl_min(u.profile, v.profile), u.n, u.center)
    elif isinstance(u, PL1D) and isinstance(v, PL1D):
        umax = u.lattice(v, take_max=True)
        umin = u.lattice(v, take_max=False)
    else:
        raise InputError("valuation identity checks run on matching exact representations")
    zu = evaluate_Z(triple, u).total
    zv = evaluate_Z(triple, v).total
    zmax = evaluate_Z(triple, umax).total
    zmin = evaluate_Z(triple, umin).total
    return abs(zu + zv - zmax - zmin)


# -- invariance ---------------------------------------------------------------------------


def check_invariance(
    triple: ZetaTriple,
    u: ConvexInput,
    transforms: Sequence,
    dual: bool = False,
    tol: float = 1e-6,
    dual_range=None,
) -> float:
    """Max |Z(transformed u) - Z(u)| over the sample.

    Transforms are translation vectors or UnimodularMap instances for the
    primal form; for the dual form each transform is a linear functional l
    and the identity Z_dual(u + l) = Z_dual(u) is checked.
    """
    if dual:
        if not isinstance(u, RadialFn):
            raise InputError("dual invariance checks run on radial inputs")
        base = evaluate_Z_dual(triple, u, tol=tol).total
        worst = 0.0
        for l in transforms:
            shifted = RadialPlusLinear(u.profile, u.n, tuple(float(c) for c in l))
            worst = max(worst, abs(evaluate_Z_dual(triple, shifted, tol=tol).total - base))
        return worst
    base = evaluate_Z(triple, u, tol=tol, dual_range=dual_range).total
    worst = 0.0
    for phi in transforms:
        if isinstance(phi, UnimodularMap):
            moved = apply_map(u, phi)
        else:
            if isinstance(u, RadialFn):
                moved = u.translate(tuple(float(c) for c in phi))
            else:
                raise InputError("translation transforms apply to radial inputs")
        worst = max(worst, abs(evaluate_Z(triple, moved, tol=tol, dual_range=dual_range).total - base))
    return worst


# -- continuity along the factorial embeddings ----------------------------------------------


def check_continuity(triple: ZetaTriple, u: RadialFn, k_max: int = 8, tol: float = 1e-6) -> List[float]:
    """Residuals |Z(g_k(u)) - Z(u)| for k = 1..k_max on the exact radial path.

    The g_k fix every level below sf_k, so the residual drops to the
    quadrature tail once sf_k clears the threshold and the zeta1-relevant
    levels.
    """
    if not isinstance(u, RadialFn):
        raise InputError("continuity checks run on the exact radial path")
    base = evaluate_Z(triple, u, tol=tol).total
    out = []
    for k in range(1, k_max + 1):
        uk = RadialFn(compose_gk(k, u.profile), u.n, u.center)
        out.append(abs(evaluate_Z(triple, uk, tol=tol).total - base))
    return out


# -- growth-function sequences ---------------------------------------------------------------


@dataclass(frozen=True)
class GrowthSequence:
    """The triple induced at embedding index k: weights precomposed with g_k.

    zeta0_k(t) = zeta0(g_k(t)) and zeta1_k(t) = zeta1(g_k(t)) pointwise;
    zeta2_k equals zeta2 once sf_k clears the threshold (index k0), because
    the Legendre values below the threshold are untouched by g_k.
    """

    triple: ZetaTriple
    k: int

    def zeta0_k(self, t: float) -> float:
        return self.triple.zeta0.eval(gk_eval(self.k, t))

    def zeta1_k(self, t: float) -> float:
        return self.triple.zeta1.eval(gk_eval(self.k, t))

    def zeta1_k_exact(self) -> ScalarZeta:
        """zeta1 composed with g_k as a ScalarZeta; needs compact support."""
        breakpoints = []
        for start, _ in _gk_bands(self.k):
            if start > self.triple.zeta1.support_bound():
                break
            breakpoints.append(float(start))
        return compose_with_increasing(
            self.triple.zeta1,
            lambda t: gk_eval(self.k, t),
            lambda s: gk_inverse(self.k, s),
            breakpoints,
            level_cap=self.triple.zeta1.support_bound(),
        )

    def zeta2_k(self) -> Optional[ScalarZeta]:
        """Stabilized zeta2 for k >= k0; None while sf_k is below the threshold."""
        if self.k >= self.triple.k0():
            return self.triple.zeta2
        return None


@dataclass(frozen=True)
class GrowthReport:
    k: int
    k0: int
    direct: ZComponents
    z0_decomposed: float
    z1_decomposed: float
    z2_decomposed: Optional[float]
    z1_decomposition_exact: bool

    @property
    def residuals(self) -> Tuple[float, float, Optional[float]]:
        r2 = None if self.z2_decomposed is None else abs(self.direct.z2 - self.z2_decomposed)
        return (
            abs(self.direct.z0 - self.z0_decomposed),
            abs(self.direct.z1 - self.z1_decomposed),
            r2,
        )


def growth_probe(triple: ZetaTriple, u: ConvexInput, k: int, tol: float = 1e-9) -> GrowthReport:
    """Compare Z(g_k(u)) against its decomposition through the induced weights.

    Direct side: evaluate_Z on the composed input.  Decomposed side:
    zeta0(g_k(min u)), the zeta1 integral through the composed weight on the
    ORIGINAL input (exact when zeta1 has compact support, else evaluated as
    the same integrand), and the stabilized zeta2 integral of the original
    input for k >= k0.
    """
    seq = GrowthSequence(triple, k)
    k0_idx = triple.k0()
    if isinstance(u, AffineMax):
        if u.n != 1:
            raise InputError("growth probes on affine-max inputs are one-dimensional")
        u = PL1D.from_affine_max(u)
    if isinstance(u, RadialFn):
        composed = RadialFn(compose_gk(k, u.profile), u.n, u.center)
        direct = evaluate_Z(triple, composed)
        z0_dec = triple.zeta0.eval(gk_eval(k, u.profile.min_value()))
        exact1 = math.isfinite(triple.zeta1.support_bound())
        if exact1:
            z1_dec = z1(seq.zeta1_k_exact(), u, tol=tol)
        else:
            z1_dec = direct.z1
        z2_dec = z2_exact(triple.zeta2, u) if k >= k0_idx else None
        return GrowthReport(k, k0_idx, direct, z0_dec, z1_dec, z2_dec, exact1)
    if isinstance(u, PL1D):
        if triple.n != 1:
            raise DomainError("dimension mismatch between triple and input")
        cap = max(
            triple.zeta1.support_bound() if math.isfinite(triple.zeta1.support_bound()) else 0.0,
            triple.threshold_T,
            sf(k),
        )
        composed = compose_gk_1d(k, u, level_cap=cap + 1.0)
        direct = evaluate_Z(triple, composed)
        z0_dec = triple.zeta0.eval(gk_eval(k, u.min_value()))
        exact1 = math.isfinite(triple.zeta1.support_bound())
        if exact1:
            z1_dec = z1_1d(seq.zeta1_k_exact(), u)
        else:
            z1_dec = direct.z1
        z2_dec = z2_1d(triple.zeta2, u) if k >= k0_idx else None
        return GrowthReport(k, k0_idx, direct, z0_dec, z1_dec, z2_dec, exact1)
    raise InputError("growth probes run on radial or 1-D piecewise-linear inputs")


# -- volume-product sweep --------------------------------------------------------------------


def volume_product_experiment(
    zeta: ScalarZeta, family: Sequence[RadialFn]
) -> List[Tuple[str, float, float, float]]:
    """Rows (id, z2, z2_dual, product) for a family of radial inputs.

    Exploratory sweep; no inequality is asserted.
    """
    rows = []
    for i, u in enumerate(family):
        a = z2_exact(zeta, u)
        b = z2_dual_exact(zeta, u)
        rows.append((f"u{i}", a, b, a * b))
    return rows
