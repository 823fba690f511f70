"""Factorial-slope embeddings of coercive into super-coercive profiles.

``gk_eval`` is the piecewise-linear strictly convex bijection of the real
line that is the identity below the k-th factorial sum and whose slopes
grow factorially beyond; composing it with a coercive convex function
yields a super-coercive one while leaving everything below that threshold
untouched.  ``build_vlt`` and ``build_uzeta`` are the two explicit infinite
constructions used by the verification suites: a sequence collapsing onto
the unit-ball indicator, and a divergence witness for integrands whose
moment diverges.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass
from typing import Iterator

from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import DomainError, UnboundedError
from .profiles import INF, PLProfile

#: largest admissible k; sf_k already exceeds 2^61 around k = 20
MAX_K = 20

#: cap on factorial band indices during materialization (float overflow guard)
MAX_BAND = 150


def _check_k(k: int) -> None:
    if not isinstance(k, int) or k < 1:
        raise DomainError("k must be a positive integer")
    if k > MAX_K:
        raise OverflowError(f"factorial sums overflow the supported range beyond k={MAX_K}")


def sf(k: int) -> int:
    """Sum of the first k factorials: 1! + 2! + ... + k!."""
    _check_k(k)
    total, f = 0, 1
    for i in range(1, k + 1):
        f *= i
        total += f
    return total


def _sf0(m: int) -> int:
    return 0 if m == 0 else sf(m)


def gk_eval(k: int, r):
    """The strictly increasing, strictly convex PL bijection g_k at r.

    Identity for r <= sf(k); slope k+j+1 on the j-th band beyond, with the
    bands tied together so that sf(k+j-1) + k! maps exactly onto sf(k+j).
    """
    _check_k(k)
    if r <= sf(k):
        return r
    fk = math.factorial(k)
    # find j >= 0 with sf(k+j-1) + k! < r <= sf(k+j) + k!  (sf(k-1)+k! == sf(k))
    j = 0
    while r > sf(k + j) + fk:
        j += 1
        if k + j > MAX_BAND:
            raise OverflowError("r beyond representable factorial bands")
    return sf(k + j) + (k + j + 1) * (r - _sf0(k + j - 1) - fk)


def gk_inverse(k: int, s):
    """Inverse of g_k; identity for s <= sf(k)."""
    _check_k(k)
    if s <= sf(k):
        return s
    fk = math.factorial(k)
    j = 0
    while s > sf(k + j + 1):
        j += 1
        if k + j + 1 > MAX_BAND:
            raise OverflowError("s beyond representable factorial bands")
    return _sf0(k + j - 1) + fk + (s - sf(k + j)) / (k + j + 1)


def _gk_bands(k: int) -> Iterator[tuple]:
    """Yields (argument_knot, right_slope) of g_k beyond the identity part."""
    fk = math.factorial(k)
    yield (sf(k), k + 1)
    j = 1
    while k + j <= MAX_BAND:
        yield (sf(k + j - 1) + fk, k + j + 1)
        j += 1
    raise OverflowError("factorial band budget exhausted")


def _gk_right_slope(k: int, t):
    """Right slope of g_k at argument t."""
    if t < sf(k):
        return 1
    fk = math.factorial(k)
    j = 0
    while t >= sf(k + j) + fk:
        j += 1
        if k + j > MAX_BAND:
            raise OverflowError("t beyond representable factorial bands")
    return k + j + 1


def compose_gk(k: int, p: PLProfile) -> PLProfile:
    """Super-coercive profile g_k(v), exact and lazily materialized.

    Knots of the composition sit at the original knots of ``p`` and at the
    radii where ``p`` crosses a band boundary of g_k; on each piece the
    slope is the product of the two slopes.  Sublevel sets below sf(k) are
    untouched; the result epi-converges back to ``p`` as k grows.
    """
    _check_k(k)
    if not (p.domain_bound < INF or p.is_lazy or any(s > 0 for _, s in p.knots())):
        raise DomainError("compose_gk requires a coercive profile")

    src = p

    def tail() -> Iterator[tuple]:
        i = 0
        while True:
            while i >= len(src._radii) and src._pull_tail():
                pass
            if i >= len(src._radii):
                return
            ra = src._radii[i]
            s = src._slopes[i]
            va = src._values[i]
            while i + 1 >= len(src._radii) and src._pull_tail():
                pass
            rb = src._radii[i + 1] if i + 1 < len(src._radii) else src.domain_bound
            yield (ra, _gk_right_slope(k, va) * s)
            if s > 0:
                vb = va + s * (rb - ra) if rb < INF else INF
                for arg, band_slope in _gk_bands(k):
                    if arg < va or arg == va:
                        continue
                    if arg >= vb:
                        break
                    yield (ra + (arg - va) / s, band_slope * s)
            if rb == INF or rb >= src.domain_bound:
                return
            i += 1

    gen = tail()
    first = next(gen)
    return PLProfile(
        gk_eval(k, p.base),
        [first],
        domain_bound=p.domain_bound,
        tail=lambda: gen,
        tail_unbounded=p.domain_bound == INF,
    )


# -- appendix construction v_l^t -----------------------------------------------------


class VltProfile(PLProfile):
    """The explicit super-coercive profile collapsing to the ball indicator.

    Constant ``t`` on [0, 1], slope ``l`` up to the first grid point, then
    slope ``(m+1)! * l`` between consecutive grid points ``A(m)``, which are
    spaced exactly ``1/l`` apart and where the profile takes the factorial
    sums as values.
    """

    __slots__ = ("t", "l", "m_t")

    def __init__(self, t: float, l: int):
        if not isinstance(l, int) or l < 1:
            raise DomainError("l must be a positive integer")
        m_t = 1
        while t > sf(m_t):
            m_t += 1
            if m_t > MAX_K:
                raise OverflowError("t beyond representable factorial sums")
        self.t = t
        self.l = l
        self.m_t = m_t

        def tail() -> Iterator[tuple]:
            yield (0, 0)
            yield (1, l)
            m = m_t
            while m + 1 <= MAX_BAND:
                yield (self.grid_point(m), math.factorial(m + 1) * l)
                m += 1
            raise OverflowError("factorial band budget exhausted")

        gen = tail()
        first = next(gen)
        super().__init__(t, [first], tail=lambda: gen, tail_unbounded=True)

    def grid_point(self, m: int) -> Fraction:
        """A(m) = 1 + (sf(m_t) - t + (m - m_t)) / l, defined for m >= m_t.

        Returned as an exact rational so consecutive grid points differ by
        exactly 1/l and the profile hits the factorial sums exactly.
        """
        if m < self.m_t:
            raise DomainError(f"grid points start at m_t={self.m_t}")
        return 1 + Fraction(sf(self.m_t) - Fraction(self.t) + (m - self.m_t), self.l)


def build_vlt(t: float, l: int) -> VltProfile:
    return VltProfile(t, l)


def gk_inverse_of_vlt(k: int, vlt: VltProfile, r: float) -> float:
    """Pointwise g_k^{-1}(v_l^t(r)); convex in r with slope k! * l around A(k)."""
    return gk_inverse(k, vlt.eval(r))


# -- divergence witness u_zeta -------------------------------------------------------


@dataclass(frozen=True)
class UzetaReport:
    """Materialized construction data: levels t_k and radii r_k."""

    levels: tuple
    radii: tuple


def build_uzeta(zeta, n: int, max_terms: int = 200, budget: float = 1e7) -> PLProfile:
    """Super-coercive radial witness concentrating mass of a divergent moment.

    Levels ``t_k`` are chosen minimally with ``t_k >= t_{k-1} + 1`` and
    cumulative moment ``int_0^{t_k} s^{n-1} zeta(s) ds >= k``; the profile
    rises with slope ``k^(1/n)`` between consecutive levels, so it is finite
    and super-coercive while the lifted integral of ``zeta`` diverges.

    Raises :class:`UnboundedError` with "moment appears finite" when the
    cumulative moment cannot reach the next integer within the budget.
    """
    if n < 1:
        raise DomainError("dimension must be >= 1")

    def moment(t: float) -> float:
        val, _ = quad(lambda s: s ** (n - 1) * zeta(s), 0, t, limit=400)
        return val

    def tail() -> Iterator[tuple]:
        t_prev, r_prev = 0.0, 0.0
        for k in range(1, max_terms + 1):
            target = float(k)
            lo = t_prev + 1.0
            if moment(lo) >= target:
                t_k = lo
            else:
                hi = max(lo * 2, 2.0)
                while moment(hi) < target:
                    hi *= 2
                    if hi > budget:
                        raise UnboundedError(
                            "moment appears finite: cumulative moment stalls below "
                            f"{target} up to t={hi:.3g}"
                        )
                t_k = brentq(lambda t: moment(t) - target, lo, hi, xtol=1e-12)
            slope = k ** (1.0 / n)
            yield (r_prev, slope)
            r_prev = r_prev + (t_k - t_prev) / slope
            t_prev = t_k
        raise UnboundedError("u_zeta materialization exceeded max_terms")

    gen = tail()
    first = next(gen)
    return PLProfile(0.0, [first], tail=lambda: gen, tail_unbounded=True)
