"""Exact calculus of 1-D piecewise-linear convex increasing profiles.

A profile ``v : [0, inf) -> R u {+inf}`` is stored as a base value ``v(0)``,
a list of knots ``(radius, right_slope)`` with strictly increasing radii
(the first knot sits at radius 0), and a domain bound beyond which the
value is +inf.  Slopes are non-negative and non-decreasing, so the radial
lift ``u(x) = v(|x|)`` is always a coercive convex function.

Profiles with infinitely many knots (factorial embeddings, divergence
witnesses) carry a lazy knot stream; all operations materialize only the
prefix they need.  Arithmetic is plain Python, so exact types such as
``fractions.Fraction`` pass through untouched.
"""

from __future__ import annotations

import threading
from bisect import bisect_right
from typing import Callable, Iterable, Iterator, Optional

from .errors import DomainError, NonTerminatingError, NotConvexError

INF = float("inf")

#: knots closer than this (in radius or slope) are merged during canonicalization
MERGE_TOL = 1e-12

#: hard cap on lazy materialization, guards buggy knot streams
MAX_MATERIALIZED_KNOTS = 100_000


class PLProfile:
    """Piecewise-linear convex increasing profile on ``[0, inf)``.

    Parameters
    ----------
    base:
        ``v(0)``.
    knots:
        Iterable of ``(radius, right_slope)``.  Radii strictly increasing,
        first radius 0; slopes non-negative and non-decreasing.
    domain_bound:
        Radius beyond which ``v = +inf`` (``inf`` for full domain).  The
        value at the bound itself is the finite one-sided limit.
    tail:
        Optional callable returning an iterator of further ``(radius,
        right_slope)`` knots past the given prefix.  Used by the infinite
        constructions; concurrent materialization is locked and idempotent.
    tail_unbounded:
        Declares that the tail's slopes grow without bound (the profile is
        then super-coercive even though only a prefix is ever materialized).
    """

    __slots__ = (
        "base",
        "domain_bound",
        "_radii",
        "_slopes",
        "_values",
        "_tail_iter",
        "_tail_unbounded",
        "_lock",
    )

    def __init__(
        self,
        base,
        knots: Iterable[tuple],
        domain_bound=INF,
        tail: Optional[Callable[[], Iterator[tuple]]] = None,
        tail_unbounded: bool = False,
    ):
        self.base = base
        self.domain_bound = domain_bound
        self._radii: list = []
        self._slopes: list = []
        self._values: list = []
        self._tail_iter = tail() if tail is not None else None
        self._tail_unbounded = bool(tail_unbounded) and tail is not None
        self._lock = threading.Lock()
        for r, s in knots:
            self._push_knot(r, s)
        if not self._radii:
            # degenerate: no knots given -> constant profile
            self._push_knot(0, 0)
        if self._radii[0] != 0:
            raise ValueError("first knot must sit at radius 0")
        if domain_bound <= 0:
            raise ValueError("domain_bound must be positive")

    # -- construction helpers -------------------------------------------------

    @classmethod
    def linear(cls, slope, base=0.0) -> "PLProfile":
        """v(r) = base + slope * r."""
        return cls(base, [(0, slope)])

    @classmethod
    def indicator(cls, radius, value=0.0) -> "PLProfile":
        """Profile of the indicator of the centered ball: value on [0, radius], +inf beyond."""
        return cls(value, [(0, 0)], domain_bound=radius)

    @classmethod
    def from_breakpoints(cls, base, breakpoints, domain_bound=INF) -> "PLProfile":
        return cls(base, breakpoints, domain_bound=domain_bound)

    # -- knot maintenance -----------------------------------------------------

    def _push_knot(self, r, s) -> None:
        # Canonicalizes on insertion: zero-length segments collapse, equal
        # slopes merge.  Convexity (non-decreasing slopes) is enforced here.
        if s < 0:
            raise NotConvexError("profile slopes must be non-negative")
        if not self._radii:
            self._radii.append(r)
            self._slopes.append(s)
            self._values.append(self.base)
            return
        last_r = self._radii[-1]
        if r < last_r - MERGE_TOL:
            raise ValueError("knot radii must be increasing")
        if r <= last_r + MERGE_TOL:
            # zero-length segment: the later slope wins
            prev = self._slopes[-2] if len(self._slopes) > 1 else None
            if prev is not None and s < prev - MERGE_TOL:
                raise NotConvexError("slope sequence must be non-decreasing")
            if prev is not None and abs(s - prev) <= MERGE_TOL:
                self._radii.pop()
                self._slopes.pop()
                self._values.pop()
            else:
                self._slopes[-1] = s
            return
        if s < self._slopes[-1] - MERGE_TOL:
            raise NotConvexError("slope sequence must be non-decreasing")
        if abs(s - self._slopes[-1]) <= MERGE_TOL:
            return  # merge: same slope continues
        self._radii.append(r)
        self._slopes.append(s)
        self._values.append(self._values[-1] + self._slopes[-2] * (r - self._radii[-2]))

    def _pull_tail(self) -> bool:
        """Materialize one more knot from the tail; returns False when exhausted."""
        if self._tail_iter is None:
            return False
        with self._lock:
            if self._tail_iter is None:
                return False
            try:
                r, s = next(self._tail_iter)
            except StopIteration:
                self._tail_iter = None
                return False
            if len(self._radii) >= MAX_MATERIALIZED_KNOTS:
                raise NonTerminatingError("materialization budget exceeded")
            self._push_knot(r, s)
            return True

    # -- materialization ------------------------------------------------------

    @property
    def is_lazy(self) -> bool:
        return self._tail_iter is not None

    @property
    def super_coercive(self) -> bool:
        """True iff slopes grow without bound or the domain is bounded."""
        return self.domain_bound < INF or self._tail_unbounded

    def materialize_to_radius(self, r) -> None:
        while self._tail_iter is not None and self._radii[-1] <= r:
            if not self._pull_tail():
                break

    def materialize_to_level(self, t) -> None:
        while self._tail_iter is not None and self._values[-1] <= t:
            if not self._pull_tail():
                break

    def knots(self) -> list:
        """Materialized prefix as ``[(radius, right_slope), ...]``."""
        return list(zip(self._radii, self._slopes))

    def knot_values(self) -> list:
        return list(self._values)

    # -- evaluation -----------------------------------------------------------

    def __call__(self, r):
        return self.eval(r)

    def eval(self, r):
        """Value of the profile at radius ``r >= 0`` (+inf beyond domain_bound)."""
        if r < 0:
            raise DomainError("profile radius must be non-negative")
        if r > self.domain_bound:
            return INF
        self.materialize_to_radius(r)
        i = bisect_right(self._radii, r) - 1
        if i < 0:
            i = 0
        return self._values[i] + self._slopes[i] * (r - self._radii[i])

    def right_slope(self, r):
        if r < 0 or r >= self.domain_bound:
            raise DomainError("radius outside domain interior")
        self.materialize_to_radius(r)
        i = bisect_right(self._radii, r) - 1
        return self._slopes[max(i, 0)]

    def subdifferential(self, r) -> tuple:
        """Closed interval ``[left_slope, right_slope]`` at interior radius r > 0."""
        if r <= 0 or r >= self.domain_bound:
            raise DomainError("subdifferential requires 0 < r < domain_bound")
        self.materialize_to_radius(r)
        i = bisect_right(self._radii, r) - 1
        if i + 1 < len(self._radii) and self._radii[i + 1] == r:
            i += 1
        if self._radii[i] == r and i > 0:
            return (self._slopes[i - 1], self._slopes[i])
        return (self._slopes[i], self._slopes[i])

    def min_value(self):
        """min of the radial lift (= v(0), profiles are increasing)."""
        return self.base

    # -- sublevel sets ----------------------------------------------------------

    def sublevel_radius(self, t):
        """Radius rho with {v <= t} = [0, rho]; None if t < v(0); inf if unbounded."""
        if t < self.base:
            return None
        self.materialize_to_level(t)
        radii, slopes, values = self._radii, self._slopes, self._values
        for i in range(len(radii)):
            end = radii[i + 1] if i + 1 < len(radii) else self.domain_bound
            v_end = values[i] + slopes[i] * (end - radii[i]) if end < INF else (
                INF if slopes[i] > 0 else values[i]
            )
            if v_end > t:
                if slopes[i] == 0:
                    continue  # plateau below t, keep walking
                rho = radii[i] + (t - values[i]) / slopes[i]
                return min(rho, self.domain_bound)
        return self.domain_bound  # includes INF for non-coercive plateaus

    # -- comparison -------------------------------------------------------------

    def prefix(self, radius) -> "PLProfile":
        """Finite profile equal to self on [0, radius] (tail dropped beyond)."""
        self.materialize_to_radius(radius)
        ks = [(r, s) for r, s in zip(self._radii, self._slopes) if r <= radius]
        return PLProfile(self.base, ks, domain_bound=self.domain_bound)

    def equals(self, other: "PLProfile", horizon=None) -> bool:
        """Exact equality of canonical representations (prefixes up to horizon if lazy)."""
        if horizon is None and (self.is_lazy or other.is_lazy):
            raise ValueError("lazy profiles need an explicit comparison horizon")
        if horizon is not None:
            a, b = self.prefix(horizon), other.prefix(horizon)
            return (
                a.base == b.base
                and a.knots() == b.knots()
                and min(a.domain_bound, horizon) == min(b.domain_bound, horizon)
            )
        return (
            self.base == other.base
            and self.knots() == other.knots()
            and self.domain_bound == other.domain_bound
        )

    def __repr__(self):
        tail = ", lazy" if self.is_lazy else ""
        return (
            f"PLProfile(base={self.base!r}, knots={self.knots()!r}, "
            f"domain_bound={self.domain_bound!r}{tail})"
        )


# -- level/slope parameterization ------------------------------------------------


class LevelSlopeForm:
    """Strictly increasing level/slope parameterization of a profile.

    ``levels = (t_1, ..., t_m)`` with ``v(0) = t_1`` and slope ``b_k`` active
    on the level band ``(t_k, t_{k+1})``; the last slope continues past
    ``t_m``.  Bijective with strict finite profiles; the round trip is the
    identity.
    """

    def __init__(self, levels, slopes):
        levels = list(levels)
        slopes = list(slopes)
        if len(levels) != len(slopes):
            raise ValueError("need one slope per level")
        if any(b <= 0 for b in slopes):
            raise ValueError("slopes must be positive")
        if any(levels[i] >= levels[i + 1] for i in range(len(levels) - 1)):
            raise ValueError("levels must be strictly increasing")
        if any(slopes[i] >= slopes[i + 1] for i in range(len(slopes) - 1)):
            raise ValueError("slopes must be strictly increasing")
        self.levels = levels
        self.slopes = slopes

    def to_profile(self) -> PLProfile:
        knots = [(0, self.slopes[0])]
        rho = 0
        for k in range(1, len(self.levels)):
            rho = rho + (self.levels[k] - self.levels[k - 1]) / self.slopes[k - 1]
            knots.append((rho, self.slopes[k]))
        return PLProfile(self.levels[0], knots)

    @classmethod
    def from_profile(cls, p: PLProfile) -> "LevelSlopeForm":
        if p.is_lazy:
            raise ValueError("materialize a prefix first")
        if p.domain_bound < INF:
            raise ValueError("level/slope form requires full domain")
        return cls(p.knot_values(), [s for _, s in p.knots()])


# -- operations -------------------------------------------------------------------


def eval_profile(p: PLProfile, r):
    return p.eval(r)


def subdifferential(p: PLProfile, r):
    return p.subdifferential(r)


def sublevel_radius(p: PLProfile, t):
    return p.sublevel_radius(t)


def _conjugate_knots(src: PLProfile) -> Iterator[tuple]:
    # Dual knots: the source slope values, carrying the *next* source radius
    # as the dual right-slope (argmax exchange).  Pulls the source lazily.
    if src._slopes[0] > 0:
        yield (0, 0)
    i = 0
    while True:
        while i + 1 >= len(src._radii) and src._pull_tail():
            pass
        if i + 1 < len(src._radii):
            yield (src._slopes[i], src._radii[i + 1])
            i += 1
        else:
            if src.domain_bound < INF:
                yield (src._slopes[i], src.domain_bound)
            return


def conjugate_1d(p: PLProfile) -> PLProfile:
    """Monotone convex conjugate ``v*(s) = sup_{r>=0} (r s - v(r))``, exact.

    Radii and slopes exchange roles, so conjugation is a pure representation
    swap: applying it twice returns the canonical original bit-for-bit.
    The conjugate has full domain iff ``p`` is super-coercive, and unbounded
    slopes iff ``p`` has full domain.
    """
    base = -p.base
    if not p.is_lazy:
        radii, slopes = p._radii, p._slopes
        knots = []
        if slopes[0] > 0:
            knots.append((0, 0))
        for i, s in enumerate(slopes):
            r_next = radii[i + 1] if i + 1 < len(radii) else p.domain_bound
            if r_next == INF:
                return PLProfile(base, knots or [(0, 0)], domain_bound=s)
            knots.append((s, r_next))
        return PLProfile(base, knots, domain_bound=INF)

    if not p._tail_unbounded:
        raise ValueError("lazy profile must declare unbounded slopes for exact conjugation")
    gen = _conjugate_knots(p)
    first = next(gen)
    return PLProfile(
        base,
        [first],
        domain_bound=INF,  # super-coercive source -> full dual domain
        tail=lambda: gen,
        tail_unbounded=p.domain_bound == INF,
    )


def _lattice_candidates(p: PLProfile, q: PLProfile, hi):
    """Merged knot radii plus exact crossing radii of the two profiles on [0, hi)."""
    if hi < INF:
        p.materialize_to_radius(hi)
        q.materialize_to_radius(hi)
    radii = sorted(
        set(r for r in p._radii + q._radii if r < hi)
        | {d for d in (p.domain_bound, q.domain_bound) if d < hi}
        | {0}
    )
    out = list(radii)
    for a, b in zip(radii, radii[1:] + [hi]):
        pa, qa = p.eval(a), q.eval(a)
        if pa == INF or qa == INF:
            continue
        sp = p.right_slope(a) if a < p.domain_bound else None
        sq = q.right_slope(a) if a < q.domain_bound else None
        if sp is None or sq is None or sp == sq:
            continue
        rc = a + (qa - pa) / (sp - sq)
        if a < rc < b:
            out.append(rc)
    return sorted(set(out))


def _finite_lattice(p: PLProfile, q: PLProfile, take_max: bool) -> PLProfile:
    if p.is_lazy or q.is_lazy:
        raise ValueError("lattice operations need finite profiles; take a prefix first")
    if take_max:
        db = min(p.domain_bound, q.domain_bound)
    else:
        db = max(p.domain_bound, q.domain_bound)
    cands = [r for r in _lattice_candidates(p, q, db) if r < db]

    op = max if take_max else min
    base = op(p.eval(0), q.eval(0))
    knots = []
    for a, b in zip(cands, cands[1:] + [db]):
        mid = (a + b) / 2 if b < INF else a + 1
        va, vb = p.eval(mid), q.eval(mid)
        use_p = (va >= vb) if take_max else (va <= vb)
        f = p if use_p else q
        knots.append((a, f.right_slope(a)))
    return PLProfile(base, knots, domain_bound=db)


def pl_max(p: PLProfile, q: PLProfile) -> PLProfile:
    """Pointwise maximum; always convex."""
    return _finite_lattice(p, q, take_max=True)


def pl_min(p: PLProfile, q: PLProfile) -> PLProfile:
    """Pointwise minimum; raises :class:`NotConvexError` when not convex."""
    return _finite_lattice(p, q, take_max=False)


def fenchel_young_gap(p: PLProfile, r, s, conjugate: Optional[PLProfile] = None):
    """v(r) + v*(s) - r*s; non-negative, zero iff s is a subgradient at r."""
    q = conjugate if conjugate is not None else conjugate_1d(p)
    return p.eval(r) + q.eval(s) - r * s


#: level offsets (above the smaller base) probed by the sublevel part of epi_distance
EPI_LEVEL_LADDER = (0.5, 1.0, 2.0, 4.0)


def epi_distance(p: PLProfile, q: PLProfile, horizon=8):
    """Metric surrogate for epi-convergence of profiles.

    Combines capped sup-distances on the radius windows [0, j], j <= horizon
    (local uniform convergence) with capped Hausdorff distances of sublevel
    intervals on a fixed level ladder above the smaller minimum.  Zero iff
    the profiles agree on [0, horizon]; any metrization of local-uniform
    convergence works for the continuity tests, this is one such choice.
    """
    p.materialize_to_radius(horizon)
    q.materialize_to_radius(horizon)
    total = 0.0
    for j in range(1, int(horizon) + 1):
        pts = sorted(
            set(
                [0.0, float(j)]
                + [r for r in p._radii + q._radii if r <= j]
                + [d for d in (p.domain_bound, q.domain_bound) if d <= j]
            )
        )
        sup = 0.0
        for r in pts:
            a, b = p.eval(r), q.eval(r)
            if a == INF and b == INF:
                continue
            diff = 1.0 if (a == INF or b == INF) else abs(a - b)
            sup = max(sup, diff)
            if sup >= 1.0:
                break
        total += 2.0 ** (-j) * min(1.0, sup)
    m = min(p.base, q.base)
    for i, off in enumerate(EPI_LEVEL_LADDER, start=1):
        t = m + off
        rp, rq = p.sublevel_radius(t), q.sublevel_radius(t)
        if rp is None and rq is None:
            continue
        if rp is None or rq is None or rp == INF or rq == INF:
            hd = 1.0 if rp != rq else 0.0
        else:
            hd = abs(rp - rq)
        total += 2.0 ** (-i) * min(1.0, hd)
    return total
