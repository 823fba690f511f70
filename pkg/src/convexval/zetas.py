"""Scalar weight functions for the integral functionals.

A :class:`ScalarZeta` is piecewise linear between knots with one of three
tail behaviours past the last knot: identically zero, a decaying exponential
``c * exp(-alpha * t)``, or a harmonic decay ``c / (1 + t)``.  Left of the
first knot the function extends by its first value (constant), which keeps
non-negative data non-negative on all of R.

The closed family exists so that integrals, (n-1)-moments and tail bounds
are available in closed form; quadrature then only ever has to certify
smooth pieces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from scipy.integrate import quad

from .errors import DomainError, InputError

#: junction mismatch rejected beyond this
CONTINUITY_TOL = 1e-9

TAIL_KINDS = ("zero", "exp", "harmonic")


def _poly_segment_moment(t0: float, v0: float, t1: float, v1: float, m: int) -> float:
    """Integral of t^m times the chord through (t0,v0),(t1,v1) over [t0,t1]."""
    if t1 <= t0:
        return 0.0
    slope = (v1 - v0) / (t1 - t0)
    # integrand: t^m * (v0 + slope*(t - t0)) = (v0 - slope*t0) t^m + slope t^{m+1}
    a = v0 - slope * t0
    return a * (t1 ** (m + 1) - t0 ** (m + 1)) / (m + 1) + slope * (
        t1 ** (m + 2) - t0 ** (m + 2)
    ) / (m + 2)


def _exp_moment_to_inf(a: float, m: int, c: float, alpha: float) -> float:
    """Closed form of integral_a^inf t^m * c * e^{-alpha t} dt, a >= 0.

    Repeated integration by parts gives
    e^{-alpha a} * sum_{i=0}^{m} (m!/(m-i)!) a^{m-i} / alpha^{i+1}.
    """
    if alpha <= 0:
        raise DomainError("exponential tail requires alpha > 0")
    total = 0.0
    coeff = 1.0
    for i in range(m + 1):
        total += coeff * a ** (m - i) / alpha ** (i + 1)
        coeff *= m - i
    return c * math.exp(-alpha * a) * total


@dataclass(frozen=True)
class Finite:
    """Moment certificate: the integral converges to `value`."""

    value: float


@dataclass(frozen=True)
class DivergesBeyond:
    """Moment check hit the budget; `partial` is the integral up to `bound`."""

    bound: float
    partial: float


class ScalarZeta:
    """Piecewise-linear scalar function with a certified tail.

    Parameters
    ----------
    knots : sequence of (t, value) pairs, t strictly increasing.
    tail : ("zero",) or ("exp", c, alpha) or ("harmonic", c).  The tail
        applies for t greater than the last knot and must match the last
        knot value there (continuity).
    threshold_T : optional level beyond which the function is promised to
        vanish; validated against the data.
    """

    __slots__ = ("knots", "tail", "threshold_T")

    def __init__(self, knots, tail=("zero",), threshold_T: Optional[float] = None):
        knots = tuple((float(t), float(v)) for t, v in knots)
        if not knots:
            raise InputError("at least one knot is required")
        for (a, _), (b, _) in zip(knots, knots[1:]):
            if not b > a:
                raise InputError("knot abscissae must be strictly increasing")
        tail = tuple(tail)
        if not tail or tail[0] not in TAIL_KINDS:
            raise InputError(f"tail kind must be one of {TAIL_KINDS}")
        t_last, v_last = knots[-1]
        if tail[0] == "zero":
            if abs(v_last) > CONTINUITY_TOL:
                raise InputError("zero tail requires the last knot value to be 0")
        elif tail[0] == "exp":
            if len(tail) != 3:
                raise InputError("exp tail takes (c, alpha)")
            c, alpha = float(tail[1]), float(tail[2])
            if alpha <= 0:
                raise InputError("exp tail requires alpha > 0")
            if abs(c * math.exp(-alpha * t_last) - v_last) > CONTINUITY_TOL:
                raise InputError("exp tail discontinuous at the last knot")
            tail = ("exp", c, alpha)
        else:
            if len(tail) != 2:
                raise InputError("harmonic tail takes (c,)")
            c = float(tail[1])
            if abs(c / (1.0 + t_last) - v_last) > CONTINUITY_TOL:
                raise InputError("harmonic tail discontinuous at the last knot")
            tail = ("harmonic", c)
        self.knots = knots
        self.tail = tail
        if threshold_T is not None:
            threshold_T = float(threshold_T)
            if self.sup_beyond(threshold_T) > CONTINUITY_TOL:
                raise InputError("declared threshold but the function is nonzero beyond it")
        self.threshold_T = threshold_T

    # construction helpers -----------------------------------------------------

    @classmethod
    def zero(cls) -> "ScalarZeta":
        return cls([(0.0, 0.0)], ("zero",), threshold_T=0.0)

    @classmethod
    def exp_decay(cls, c: float = 1.0, alpha: float = 1.0, start: float = 0.0) -> "ScalarZeta":
        """c*e^{-alpha t} for t >= start, constant c*e^{-alpha*start} below."""
        return cls([(start, c * math.exp(-alpha * start))], ("exp", c, alpha))

    @classmethod
    def harmonic(cls, c: float = 1.0) -> "ScalarZeta":
        """c/(1+t) for t >= 0, constant c below."""
        return cls([(0.0, c)], ("harmonic", c))

    @classmethod
    def hat(cls, height: float = 1.0, threshold: float = 1.0) -> "ScalarZeta":
        """max(0, height*(1 - t/threshold)) for t >= 0: the standard ramp-down."""
        return cls([(0.0, height), (threshold, 0.0)], ("zero",), threshold_T=threshold)

    @classmethod
    def constant_then_zero(cls, height: float, threshold: float, ramp: float = 1e-6) -> "ScalarZeta":
        """height on (-inf, threshold-ramp], linear to 0 at threshold, 0 beyond."""
        return cls(
            [(threshold - ramp, height), (threshold, 0.0)], ("zero",), threshold_T=threshold
        )

    @classmethod
    def identity_like(cls, hi: float = 64.0) -> "ScalarZeta":
        """t clamped to [0, hi], constant beyond; useful as a z0 weight."""
        return cls([(0.0, 0.0), (hi, hi), (2 * hi, hi), (2 * hi + 1, 0.0)], ("zero",))

    # evaluation ----------------------------------------------------------------

    def eval(self, t: float) -> float:
        knots = self.knots
        t0, v0 = knots[0]
        if t <= t0:
            return v0
        t_last, v_last = knots[-1]
        if t >= t_last:
            kind = self.tail[0]
            if kind == "zero":
                return 0.0
            if kind == "exp":
                _, c, alpha = self.tail
                return c * math.exp(-alpha * t)
            _, c = self.tail
            return c / (1.0 + t)
        lo, hi = 0, len(knots) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if knots[mid][0] <= t:
                lo = mid
            else:
                hi = mid
        ta, va = knots[lo]
        tb, vb = knots[hi]
        return va + (vb - va) * (t - ta) / (tb - ta)

    __call__ = eval

    def eval_array(self, t) -> "np.ndarray":
        """Vectorized eval for the numeric grid path."""
        import numpy as np

        t = np.asarray(t, dtype=float)
        ts = np.array([k[0] for k in self.knots])
        vs = np.array([k[1] for k in self.knots])
        out = np.interp(t, ts, vs)  # constant extension on both sides
        mask = t > ts[-1]
        if np.any(mask):
            kind = self.tail[0]
            if kind == "zero":
                out = np.where(mask, 0.0, out)
            elif kind == "exp":
                _, c, alpha = self.tail
                out = np.where(mask, c * np.exp(-alpha * np.minimum(t, 700.0 / alpha)), out)
            else:
                _, c = self.tail
                out = np.where(mask, c / (1.0 + t), out)
        return out

    def is_nonnegative(self) -> bool:
        if any(v < 0 for _, v in self.knots):
            return False
        if self.tail[0] != "zero" and self.tail[1] < 0:
            return False
        return True

    def support_bound(self) -> float:
        """Smallest s with zeta == 0 on [s, inf); math.inf for decaying tails."""
        if self.tail[0] != "zero":
            return math.inf
        s = self.knots[-1][0]
        for t, v in reversed(self.knots):
            if abs(v) > 0.0:
                return s
            s = t
        return s

    def sup_beyond(self, t: float) -> float:
        """Upper bound for |zeta| on [t, inf); monotone non-increasing in t."""
        t_last = self.knots[-1][0]
        kind = self.tail[0]
        if kind == "zero":
            tail_sup = 0.0
        elif kind == "exp":
            _, c, alpha = self.tail
            tail_sup = abs(c) * math.exp(-alpha * max(t, t_last))
        else:
            _, c = self.tail
            tail_sup = abs(c) / (1.0 + max(t, t_last, -0.5))
        if t >= t_last:
            return tail_sup
        return max(tail_sup, max(abs(v) for tt, v in self.knots if tt >= t), abs(self.eval(t)))

    # closed-form integrals ------------------------------------------------------

    def _moment_finite(self, a: float, b: float, m: int) -> float:
        """Integral of t^m * zeta(t) over the finite interval [a, b]."""
        if b <= a:
            return 0.0
        knots = self.knots
        total = 0.0
        # grid of breakpoints clipped to [a, b]
        pts = [a] + [t for t, _ in knots if a < t < b] + [b]
        for ta, tb in zip(pts, pts[1:]):
            va, vb = self.eval(ta), self.eval(tb)
            total += _poly_segment_moment(ta, va, tb, vb, m)
        return total

    def integral(self, a: float, b: float) -> float:
        """Exact integral of zeta over [a, b] (finite endpoints)."""
        if not (math.isfinite(a) and math.isfinite(b)):
            raise DomainError("integral endpoints must be finite; use moment() for tails")
        if b <= a:
            return 0.0
        t_last = self.knots[-1][0]
        cut = min(b, max(a, t_last))
        total = self._moment_finite(a, cut, 0)
        lo = max(a, t_last)
        if b > lo:
            kind = self.tail[0]
            if kind == "exp":
                _, c, alpha = self.tail
                total += _exp_moment_to_inf(lo, 0, c, alpha) - _exp_moment_to_inf(b, 0, c, alpha)
            elif kind == "harmonic":
                _, c = self.tail
                total += c * (math.log1p(b) - math.log1p(lo))
        return total

    def moment(self, n: int, lower: float = 0.0):
        """Integral of t^{n-1} * zeta(t) over [lower, inf) when it converges.

        Returns a float for convergent tails (zero / exp) and None for the
        harmonic tail, whose (n-1)-moment diverges for every n >= 1.
        """
        if n < 1:
            raise DomainError("n must be >= 1")
        kind = self.tail[0]
        if kind == "harmonic":
            return None
        t_last = self.knots[-1][0]
        cut = max(lower, t_last)
        total = self._moment_finite(lower, cut, n - 1)
        if kind == "exp":
            _, c, alpha = self.tail
            total += _exp_moment_to_inf(cut, n - 1, c, alpha)
        return total

    def partial_moment(self, n: int, upper: float) -> float:
        """Integral of t^{n-1} * zeta(t) over [0, upper], any tail kind."""
        if n < 1:
            raise DomainError("n must be >= 1")
        t_last = self.knots[-1][0]
        cut = min(upper, max(0.0, t_last))
        total = self._moment_finite(0.0, cut, n - 1)
        if upper > cut:
            kind = self.tail[0]
            if kind == "zero":
                pass
            elif kind == "exp":
                _, c, alpha = self.tail
                total += _exp_moment_to_inf(cut, n - 1, c, alpha) - _exp_moment_to_inf(
                    upper, n - 1, c, alpha
                )
            else:
                _, c = self.tail
                if n == 2:
                    # t/(1+t) has antiderivative t - ln(1+t)
                    total += c * ((upper - math.log1p(upper)) - (cut - math.log1p(cut)))
                else:
                    val, _ = quad(
                        lambda t: t ** (n - 1) * c / (1.0 + t), cut, upper, epsabs=0.0, epsrel=1e-12
                    )
                    total += val
        return total

    # structural ------------------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, ScalarZeta):
            return NotImplemented
        return (
            self.knots == other.knots
            and self.tail == other.tail
            and self.threshold_T == other.threshold_T
        )

    def __hash__(self):
        return hash((self.knots, self.tail, self.threshold_T))

    def __repr__(self) -> str:
        return f"ScalarZeta(knots={self.knots!r}, tail={self.tail!r}, threshold_T={self.threshold_T!r})"


def compose_with_increasing(
    zeta: ScalarZeta, phi: Callable[[float], float], phi_inverse: Callable[[float], float],
    breakpoints, level_cap: float,
) -> ScalarZeta:
    """zeta composed with an increasing piecewise-linear map phi.

    Exact on the piecewise-linear part: the composition is again piecewise
    linear with knots at phi^{-1}(zeta knots) and at the kinks of phi, both
    restricted to levels below `level_cap`.  Beyond the cap the tail is the
    zero tail if zeta vanishes there, else an exponential upper envelope is
    rejected (caller should evaluate pointwise instead).
    """
    if zeta.support_bound() > level_cap:
        raise DomainError("composition only supported below the zero-tail support bound")
    ts = {phi_inverse(t) for t, _ in zeta.knots if t <= level_cap}
    ts.update(b for b in breakpoints if phi(b) <= level_cap)
    ts.add(phi_inverse(level_cap))
    ordered = sorted(ts)
    knots = [(t, zeta.eval(phi(t))) for t in ordered]
    if abs(knots[-1][1]) > CONTINUITY_TOL:
        raise DomainError("composed function does not vanish at the cap")
    return ScalarZeta(knots, ("zero",), threshold_T=None)


def moment_check(zeta1: ScalarZeta, n: int, budget: float = 1e6):
    """Certify the (n-1)-moment of zeta1: Finite(value) or DivergesBeyond.

    Zero and exponential tails admit closed-form tail integrals, so the
    answer is exact.  The harmonic tail has no finite moment for any n >= 1;
    the partial integral up to `budget` is reported as evidence.
    """
    value = zeta1.moment(n)
    if value is not None:
        return Finite(value)
    return DivergesBeyond(bound=budget, partial=zeta1.partial_moment(n, budget))
