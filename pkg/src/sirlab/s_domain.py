"""Profiles and transforms in the exponential clock variable.

The change of variable s = exp(lam*tau) maps the clock half-line onto
[1, inf) and turns the homogeneous memory model into the integral
relation

    f(s) = (beta/s) * integral_1^s g + g(s),        beta = s0/i0,

between the kernel survival profile g (nonincreasing, g(1) = 1, g -> 0)
and the normalized infected profile f.  The map is invertible:

    g(s)  = -beta s^{-beta-1} * integral_1^s f(u) u^beta du + f(s)
    g'(s) = beta(beta+1) s^{-beta-2} * integral_1^s f(u) u^beta du
            - beta f(s)/s + f'(s).

Profiles are represented piecewise: closed-form power/log segments where
available (so the kink structure that peak counting depends on survives
exactly), callable or cumulative segments elsewhere, and a power-law
tail.  Moments integral_1^s profile(u) u^q du use segment-exact
antiderivatives for power/log segments and adaptive quadrature with
prefix caching otherwise.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .numerics import (DEFAULT_TOL, GridFunction, PrefixIntegrator,
                       integrate_adaptive)

__all__ = [
    "OneSided",
    "Segment",
    "PolyLogSegment",
    "FuncSegment",
    "CumulativeSegment",
    "BumpOverlaySegment",
    "SProfile",
    "s_of_tau",
    "tau_of_s",
    "forward_map",
    "inverse_map",
    "g_prime_of_f",
    "forward_profile",
    "inverse_profile",
    "case3_profiles",
    "builtin_profile",
    "constant_profile",
    "check_kernel_profile",
    "lower_decay_check",
    "LowerDecayReport",
    "alpha0_threshold",
    "save_profile_csv",
    "load_profile_csv",
]

_KINK_TOL = 1e-9


class OneSided(NamedTuple):
    """Pair of one-sided values at a kink (left limit, right limit)."""

    left: float
    right: float


def s_of_tau(lam: float, tau: float) -> float:
    """Clock to s-variable: s = exp(lam*tau), tau >= 0."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    return math.exp(lam * tau)


def tau_of_s(lam: float, s: float) -> float:
    """s-variable to clock: tau = ln(s)/lam, s >= 1."""
    if s < 1.0:
        raise ValueError("s must be at least 1")
    return math.log(s) / lam


def _power_moment(a: float, b: float, q: float, k: int) -> float:
    """integral_a^b u^q ln(u)^k du for k in {0, 1}, 0 < a <= b."""
    la = math.log(a)
    lb = math.log(b)
    eps = q + 1.0
    if k == 0:
        if eps == 0.0:
            return lb - la
        if abs(eps) * max(abs(la), abs(lb)) < 1e-6:
            # series around the logarithmic case avoids cancellation
            return (math.expm1(eps * lb) - math.expm1(eps * la)) / eps
        return (b ** eps - a ** eps) / eps
    if k == 1:
        if eps == 0.0:
            return 0.5 * (lb * lb - la * la)
        if abs(eps) * max(abs(la), abs(lb)) < 1e-6:
            total = 0.0
            term_pow = 1.0  # eps^n
            fact = 1.0      # n!
            for n in range(0, 30):
                inc = term_pow * (lb ** (n + 2) - la ** (n + 2)) / ((n + 2) * fact)
                total += inc
                if abs(inc) <= 1e-17 * (1.0 + abs(total)):
                    break
                term_pow *= eps
                fact *= (n + 1)
            return total
        return (b ** eps * (eps * lb - 1.0) - a ** eps * (eps * la - 1.0)) \
            / (eps * eps)
    raise ValueError("log power k must be 0 or 1")


class Segment:
    """Piece of a profile on an interval; subclasses provide evaluation,
    derivative and weighted moments."""

    def value(self, s: float) -> float:
        raise NotImplementedError

    def derivative(self, s: float) -> float:
        raise NotImplementedError

    def moment(self, a: float, b: float, q: float, tol: float) -> float:
        """integral_a^b value(u) * u^q du."""
        raise NotImplementedError


@dataclass(frozen=True)
class PolyLogSegment(Segment):
    """Sum of terms c * s^p * ln(s)^k with k in {0, 1}; exact moments."""

    terms: tuple  # of (coef, power, logpow)

    def value(self, s):
        total = 0.0
        ls = None
        for c, p, k in self.terms:
            v = c * s ** p
            if k:
                if ls is None:
                    ls = math.log(s)
                v *= ls
            total += v
        return total

    def derivative(self, s):
        total = 0.0
        ls = None
        for c, p, k in self.terms:
            if k:
                if ls is None:
                    ls = math.log(s)
                total += c * s ** (p - 1.0) * (p * ls + 1.0)
            else:
                total += c * p * s ** (p - 1.0)
        return total

    def moment(self, a, b, q, tol):
        return sum(c * _power_moment(a, b, p + q, k) for c, p, k in self.terms)


@dataclass(frozen=True)
class FuncSegment(Segment):
    """Arbitrary smooth piece given by callables; adaptive moments."""

    func: Callable[[float], float]
    deriv: Callable[[float], float] | None = None

    def value(self, s):
        return self.func(s)

    def derivative(self, s):
        if self.deriv is None:
            h = 1e-6 * max(1.0, abs(s))
            return (self.func(s + h) - self.func(s - h)) / (2.0 * h)
        return self.deriv(s)

    def moment(self, a, b, q, tol):
        if a == b:
            return 0.0
        return integrate_adaptive(lambda u: self.func(u) * u ** q, a, b, tol)


class CumulativeSegment(Segment):
    """Piece defined by its slope: value(s) = base + integral_lo^s slope.

    The derivative is the slope itself (exact); values come from anchored
    cumulative quadrature, so sorted sweeps cost one short integral per
    query.
    """

    def __init__(self, slope: Callable[[float], float], lo: float,
                 base: float, tol: float = 1e-13):
        self.slope = slope
        self.lo = lo
        self.base = base
        self._prefix = PrefixIntegrator(slope, lo, tol)

    def value(self, s):
        return self.base + self._prefix(s)

    def derivative(self, s):
        return self.slope(s)

    def moment(self, a, b, q, tol):
        # Integration by parts removes the nesting: with W the
        # antiderivative of u^q,
        #   integral_a^b V(u) u^q du = V(b)W(b) - V(a)W(a)
        #                              - integral_a^b W(u) slope(u) du.
        if a == b:
            return 0.0
        if q == -1.0:
            W = math.log
        else:
            W = lambda u: u ** (q + 1.0) / (q + 1.0)
        boundary = self.value(b) * W(b) - self.value(a) * W(a)
        return boundary - integrate_adaptive(
            lambda u: W(u) * self.slope(u), a, b, tol)


@dataclass(frozen=True)
class BumpOverlaySegment(Segment):
    """Base segment plus amp * phi1((s - center)/width).

    phi1 is the strictly peaked compact bump, so the overlay adds exactly
    one strict local maximum at the center when the base is flat.
    """

    base: Segment
    center: float
    width: float
    amp: float

    def _bump(self, s):
        from .numerics import bump_phi1
        return self.amp * bump_phi1((s - self.center) / self.width)

    def value(self, s):
        return self.base.value(s) + self._bump(s)

    def derivative(self, s):
        from .numerics import bump_phi1_prime
        x = (s - self.center) / self.width
        return self.base.derivative(s) \
            + self.amp * bump_phi1_prime(x) / self.width

    def moment(self, a, b, q, tol):
        if a == b:
            return 0.0
        extra = integrate_adaptive(lambda u: self._bump(u) * u ** q, a, b,
                                   min(tol, 1e-13))
        return self.base.moment(a, b, q, tol) + extra


@dataclass
class SProfile:
    """Piecewise profile on [1, inf) (or [1, s_end] for sampled data).

    ``pieces`` is a contiguous list of (lo, hi, segment) starting at 1;
    the final hi may be inf.  ``theta`` records the tail decay exponent,
    ``beta`` the susceptible-to-infected ratio carried as context.
    ``meta`` holds construction data (peak locations, bump supports,
    mollification patches) that grid builders use.
    """

    pieces: list
    theta: float = 1.0
    beta: float | None = None
    name: str = ""
    meta: dict = field(default_factory=dict)
    _los: list = field(init=False, repr=False)
    _moment_cache: dict = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):
        if not self.pieces:
            raise ValueError("profile needs at least one piece")
        if abs(self.pieces[0][0] - 1.0) > 1e-12:
            raise ValueError("profile domain must start at s = 1")
        for (lo1, hi1, _), (lo2, _, _) in zip(self.pieces, self.pieces[1:]):
            if not math.isclose(hi1, lo2, rel_tol=0, abs_tol=1e-12):
                raise ValueError("pieces must be contiguous")
            if lo2 <= lo1:
                raise ValueError("pieces must be increasing")
        self._los = [lo for lo, _, _ in self.pieces]

    @property
    def s_end(self) -> float:
        return self.pieces[-1][1]

    @property
    def breakpoints(self) -> list[float]:
        """Interior piece boundaries (candidate kink locations)."""
        return [lo for lo, _, _ in self.pieces[1:]]

    def _piece_index(self, s: float) -> int:
        if s < 1.0 - 1e-12:
            raise ValueError(f"s={s} below the profile domain [1, ...)")
        idx = bisect.bisect_right(self._los, s) - 1
        if idx < 0:
            idx = 0
        if s > self.pieces[idx][1] + 1e-12:
            raise ValueError(f"s={s} beyond the profile domain "
                             f"(ends at {self.s_end:g})")
        return idx

    def value(self, s: float) -> float:
        lo, hi, seg = self.pieces[self._piece_index(s)]
        return seg.value(min(max(s, lo), hi))

    def values(self, s_grid) -> np.ndarray:
        return np.array([self.value(float(s)) for s in np.asarray(s_grid)])

    def derivative_sided(self, s: float) -> OneSided:
        idx = self._piece_index(s)
        lo, hi, seg = self.pieces[idx]
        right = seg.derivative(s)
        left = right
        if idx > 0 and math.isclose(s, lo, rel_tol=0, abs_tol=1e-12):
            left = self.pieces[idx - 1][2].derivative(s)
        return OneSided(left, right)

    def derivative(self, s: float) -> float:
        """Two-sided derivative; at a genuine kink the right limit wins."""
        return self.derivative_sided(s).right

    def _partial_moment(self, idx: int, s: float, q: float,
                        tol: float) -> float:
        """Moment of piece idx from its left edge to s, anchored for
        segments without closed forms so sorted sweeps stay linear."""
        lo, hi, seg = self.pieces[idx]
        if isinstance(seg, (PolyLogSegment, CumulativeSegment)):
            return seg.moment(lo, s, q, tol)
        key = (idx, float(q))
        anchored = self._moment_cache.setdefault("anchors", {})
        pref = anchored.get(key)
        if pref is None:
            pref = PrefixIntegrator(lambda u: seg.value(u) * u ** q, lo,
                                    min(tol, 1e-12))
            anchored[key] = pref
        return pref(s)

    def moment(self, s: float, q: float, tol: float = DEFAULT_TOL) -> float:
        """integral_1^s value(u) u^q du with per-exponent prefix caching."""
        idx = self._piece_index(s)
        key = float(q)
        prefixes = self._moment_cache.get(key)
        if prefixes is None:
            prefixes = [0.0]
            self._moment_cache[key] = prefixes
        while len(prefixes) <= idx:
            j = len(prefixes) - 1
            hi = self.pieces[j][1]
            prefixes.append(prefixes[j] + self._partial_moment(j, hi, q, tol))
        return prefixes[idx] + self._partial_moment(idx, s, q, tol)


def constant_profile(value: float = 1.0, s_end: float = math.inf,
                     name: str = "constant") -> SProfile:
    """Constant test profile on [1, s_end]."""
    return SProfile([(1.0, s_end, PolyLogSegment(((value, 0.0, 0),)))],
                    theta=1.0, name=name)


def forward_map(g: SProfile, beta: float, s: float,
                tol: float = DEFAULT_TOL) -> float:
    """Infected profile from a kernel profile: f(s) = (beta/s)∫_1^s g + g(s)."""
    if s < 1.0:
        raise ValueError("s must be at least 1")
    if not beta > 0:
        raise ValueError("beta must be positive")
    return (beta / s) * g.moment(s, 0.0, tol) + g.value(s)


def inverse_map(f: SProfile, beta: float, s: float,
                tol: float = DEFAULT_TOL) -> float:
    """Kernel profile from an infected profile (exact inverse of forward_map)."""
    if s < 1.0:
        raise ValueError("s must be at least 1")
    if not beta > 0:
        raise ValueError("beta must be positive")
    return -beta * s ** (-beta - 1.0) * f.moment(s, beta, tol) + f.value(s)


def g_prime_of_f(f: SProfile, beta: float, s: float,
                 tol: float = DEFAULT_TOL):
    """Derivative of the induced kernel profile, straight from f:

        g'(s) = beta(beta+1) s^{-beta-2} ∫_1^s f(u) u^beta du
                - beta f(s)/s + f'(s).

    Returns a float at smooth points.  At a kink of f both one-sided
    values are returned as a OneSided pair.
    """
    if s < 1.0:
        raise ValueError("s must be at least 1")
    moment_term = beta * (beta + 1.0) * s ** (-beta - 2.0) \
        * f.moment(s, beta, tol)
    mid = moment_term - beta * f.value(s) / s
    dl, dr = f.derivative_sided(s)
    if abs(dl - dr) <= _KINK_TOL * (1.0 + abs(dl) + abs(dr)):
        return mid + dr
    return OneSided(mid + dl, mid + dr)


def forward_profile(g: SProfile, beta: float,
                    tol: float = DEFAULT_TOL) -> SProfile:
    """The forward image of g as a profile (pieces mirror g's kinks).

    Values go through forward_map; moments of the new profile are
    computed by quadrature of those values, independently of any
    analytic shortcut, so round trips through this object genuinely
    exercise both transform directions.  Each mirrored piece takes its
    derivative from the matching source piece, which preserves one-sided
    values at kinks.
    """
    pieces = []
    for lo, hi, src in g.pieces:
        def deriv(s, src=src):
            return -(beta / s ** 2) * g.moment(s, 0.0, tol) \
                + (beta / s) * src.value(s) + src.derivative(s)

        pieces.append((lo, hi, FuncSegment(
            lambda s: forward_map(g, beta, s, tol), deriv)))
    return SProfile(pieces, theta=g.theta, beta=beta,
                    name=f"forward({g.name})", meta=dict(g.meta))


def inverse_profile(f: SProfile, beta: float,
                    tol: float = DEFAULT_TOL) -> SProfile:
    """The induced kernel profile of f (pieces mirror f's kinks).

    The derivative is the exact expression of g_prime_of_f, evaluated
    piece by piece so one-sided values at kinks of f carry over; moments
    are quadrature of the values.
    """
    pieces = []
    for lo, hi, src in f.pieces:
        def deriv(s, src=src):
            return beta * (beta + 1.0) * s ** (-beta - 2.0) \
                * f.moment(s, beta, tol) - beta * src.value(s) / s \
                + src.derivative(s)

        pieces.append((lo, hi, FuncSegment(
            lambda s: inverse_map(f, beta, s, tol), deriv)))
    return SProfile(pieces, theta=f.theta, beta=beta,
                    name=f"inverse({f.name})", meta=dict(f.meta))


_LN2 = math.log(2.0)


def case3_profiles() -> tuple[SProfile, SProfile]:
    """The explicit two-peak example at beta = 2.

    Kernel profile g: 1/s on [1,2], 1/2 on [2, 2.1], 2.1/(2s) beyond.
    Infected profile f = forward image of g, in closed form per branch.
    f has a smooth peak at sqrt(e) and a kink peak at 2.1; both survive
    because the pieces are kept exact.
    """
    g = SProfile(
        [(1.0, 2.0, PolyLogSegment(((1.0, -1.0, 0),))),
         (2.0, 2.1, PolyLogSegment(((0.5, 0.0, 0),))),
         (2.1, math.inf, PolyLogSegment(((1.05, -1.0, 0),)))],
        theta=1.0, beta=2.0, name="case3-g")
    c3 = 2.0 * _LN2 + 0.1 + 1.05 - 2.1 * math.log(2.1)
    f = SProfile(
        [(1.0, 2.0, PolyLogSegment(((1.0, -1.0, 0), (2.0, -1.0, 1)))),
         (2.0, 2.1, PolyLogSegment(((1.5, 0.0, 0), (2.0 * _LN2 - 2.0, -1.0, 0)))),
         (2.1, math.inf, PolyLogSegment(((c3, -1.0, 0), (2.1, -1.0, 1))))],
        theta=1.0, beta=2.0, name="case3-f",
        meta={"peaks": [math.exp(0.5), 2.1]})
    return g, f


def builtin_profile(name: str) -> SProfile:
    """Named profile registry: 'case3-g' and 'case3-f'."""
    g, f = case3_profiles()
    table = {"case3-g": g, "case3-f": f}
    try:
        return table[name]
    except KeyError:
        raise ValueError(f"unknown profile {name!r}; "
                         f"built-ins: {sorted(table)}") from None


def check_kernel_profile(g: SProfile, n: int = 256) -> None:
    """Sampled kernel-profile validity: g(1) = 1, positive, nonincreasing,
    decaying.  Raises ValueError on failure."""
    if abs(g.value(1.0) - 1.0) > 1e-9:
        raise ValueError(f"{g.name}: value at 1 is {g.value(1.0)}, not 1")
    hi = min(g.s_end, 1e6)
    grid = np.geomspace(1.0, hi, n)
    vals = g.values(grid)
    if np.any(vals <= 0):
        raise ValueError(f"{g.name}: not positive everywhere")
    if np.any(np.diff(vals) > 1e-12):
        raise ValueError(f"{g.name}: not nonincreasing")
    if math.isinf(g.s_end) and vals[-1] > 0.05:
        raise ValueError(f"{g.name}: does not decay toward zero")


@dataclass(frozen=True)
class LowerDecayReport:
    """Check of the decay floor s*f(s) >= beta * integral_1^2 g > 0."""

    bound: float
    s_grid: np.ndarray
    margins: np.ndarray

    @property
    def passed(self) -> bool:
        return self.bound > 0 and bool(np.all(self.margins >= 0))


def lower_decay_check(f: SProfile, g: SProfile, beta: float,
                      s_grid) -> LowerDecayReport:
    """Verify that f cannot decay faster than 1/s.

    Since g is positive, s*f(s) >= beta * integral_1^2 g for every
    s >= 2; the report carries the bound and per-node margins.
    """
    s_grid = np.asarray(s_grid, dtype=float)
    if np.any(s_grid < 2.0):
        raise ValueError("the decay floor applies on [2, inf)")
    bound = beta * g.moment(2.0, 0.0)
    margins = np.array([s * f.value(float(s)) - bound for s in s_grid])
    return LowerDecayReport(bound, s_grid, margins)


def alpha0_threshold(g: SProfile, s_max: float, n: int = 4096) -> float:
    """Smallest sampled point beyond which the running mean of g exceeds g.

    Scans a geometric grid for the condition (1/s)∫_1^s g > g(s); returns
    the last failing node (all later nodes satisfy the condition).  Beyond
    the threshold the induced infected profile must be strictly
    decreasing.  Raises if the condition still fails at s_max.
    """
    grid = np.unique(np.concatenate(
        [np.geomspace(1.0, s_max, n),
         [b for b in g.breakpoints if b < s_max]]))
    ok = np.empty(len(grid), dtype=bool)
    for j, s in enumerate(grid):
        s = float(s)
        ok[j] = (g.moment(s, 0.0) / s) > g.value(s) if s > 1.0 else False
    if not ok[-1]:
        raise ArithmeticError(f"threshold undetermined below s_max={s_max:g}")
    bad = np.nonzero(~ok)[0]
    if len(bad) == 0:
        return float(grid[0])
    return float(grid[bad[-1]])


def save_profile_csv(profile: SProfile, path: str, s_grid) -> None:
    """Serialize sampled profile values as CSV with columns s,value."""
    from .cli import write_csv
    s_grid = np.asarray(s_grid, dtype=float)
    write_csv(path, ("s", "value"), [s_grid, profile.values(s_grid)])


def load_profile_csv(path: str) -> SProfile:
    """Load a sampled profile (columns s,value); linear interpolation,
    domain limited to the sampled range."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    if data.dtype.names is None or tuple(data.dtype.names[:2]) != ("s", "value"):
        raise ValueError(f"{path}: expected CSV header 's,value'")
    gf = GridFunction(data["s"], data["value"])
    if abs(gf.nodes[0] - 1.0) > 1e-9:
        raise ValueError(f"{path}: sampled profile must start at s = 1")
    seg = FuncSegment(lambda s: float(gf(s)))
    return SProfile([(1.0, float(gf.nodes[-1]), seg)], theta=1.0,
                    name=f"file:{path}")
