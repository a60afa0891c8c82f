"""Shared numerical primitives.

Everything downstream is built on the five tools in this module: adaptive
Simpson quadrature, a bracketed Brent root finder, central finite
differences, two smooth bump functions (a flat-topped cutoff and a
strictly peaked one), and strict local-maximum detection on sampled data.
All functions are pure and deterministic.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

__all__ = [
    "QuadratureError",
    "BracketError",
    "GridFunction",
    "Peak",
    "integrate_adaptive",
    "find_root_bracketed",
    "finite_difference",
    "bump_phi0",
    "bump_phi1",
    "bump_phi0_prime",
    "bump_phi1_prime",
    "detect_peaks",
]

_MAX_DEPTH = 50
DEFAULT_TOL = 1e-10


class QuadratureError(ArithmeticError):
    """Adaptive quadrature did not converge within the subdivision cap.

    The best available estimate is kept in ``estimate``.
    """

    def __init__(self, message, estimate):
        super().__init__(message)
        self.estimate = estimate


class BracketError(ValueError):
    """The supplied interval does not bracket a sign change."""


@dataclass(frozen=True)
class GridFunction:
    """A sampled function: strictly increasing nodes with matching values."""

    nodes: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)
        if nodes.ndim != 1 or values.ndim != 1:
            raise ValueError("nodes and values must be one-dimensional")
        if len(nodes) != len(values):
            raise ValueError("nodes and values must have equal length")
        if len(nodes) >= 2 and not np.all(np.diff(nodes) > 0):
            raise ValueError("nodes must be strictly increasing")
        if not (np.all(np.isfinite(nodes)) and np.all(np.isfinite(values))):
            raise ValueError("nodes and values must be finite")

    def __len__(self):
        return len(self.nodes)

    def __call__(self, x):
        return np.interp(x, self.nodes, self.values)


class Peak(NamedTuple):
    """A strict local maximum of a sampled function.

    ``flat`` marks a plateau run (equal values strictly above both
    neighbours); such a run is reported once, at its middle node.
    """

    index: int
    location: float
    height: float
    flat: bool = False


def integrate_adaptive(f: Callable[[float], float], a: float, b: float,
                       tol: float = DEFAULT_TOL) -> float:
    """Integrate f over [a, b] by adaptive Simpson with Richardson update.

    The result Q satisfies |Q - integral| <= tol * (1 + |Q|) for integrands
    smooth on [a, b].  Exact (to round-off) for polynomials up to degree 3.
    Raises QuadratureError when the recursion cap (depth 50) is hit; the
    partial estimate is attached to the exception.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if a > b:
        raise ValueError("integration requires a <= b")
    if a == b:
        return 0.0

    fa = f(a)
    fb = f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    # Scale the accuracy target once, off the first whole-interval estimate.
    eps = tol * (1.0 + abs(whole))
    failed = False
    budget = 400_000  # function evaluations; guards against integrands
    # whose refinement never settles (noise, essential oscillation)

    def recurse(a, b, fa, fm, fb, whole, eps, depth):
        nonlocal failed, budget
        m = 0.5 * (a + b)
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm = f(lm)
        frm = f(rm)
        budget -= 2
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole
        if abs(delta) <= 15.0 * eps or (b - a) <= 1e-15 * (abs(a) + abs(b)):
            return left + right + delta / 15.0
        if depth >= _MAX_DEPTH or budget <= 0:
            failed = True
            return left + right + delta / 15.0
        half = 0.5 * eps
        return (recurse(a, m, fa, flm, fm, left, half, depth + 1)
                + recurse(m, b, fm, frm, fb, right, half, depth + 1))

    result = recurse(a, b, fa, fm, fb, whole, eps, 0)
    if failed:
        raise QuadratureError(
            f"quadrature failure on [{a}, {b}]: subdivision cap reached, "
            f"achieved estimate {result!r}", result)
    return result


def find_root_bracketed(f: Callable[[float], float], a: float, b: float,
                        tol: float = 1e-14) -> float:
    """Find a root of f in [a, b] by Brent's method.

    f(a) and f(b) must have opposite (or vanishing) signs.  Returns x in
    [a, b] with |f(x)| <= tol or bracket width <= tol.
    """
    fa = f(a)
    fb = f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0.0:
        raise BracketError(f"bracket error: f({a})={fa} and f({b})={fb} "
                           "have the same sign")

    c, fc = a, fa
    d = e = b - a
    eps = np.finfo(float).eps
    while True:
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol1 = 2.0 * eps * abs(b) + 0.5 * tol
        m = 0.5 * (c - b)
        if abs(m) <= tol1 or fb == 0.0 or abs(fb) <= tol:
            return b
        if abs(e) < tol1 or abs(fa) <= abs(fb):
            d = e = m
        else:
            s = fb / fa
            if a == c:
                p = 2.0 * m * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0.0:
                q = -q
            else:
                p = -p
            if 2.0 * p < min(3.0 * m * q - abs(tol1 * q), abs(e * q)):
                e = d
                d = p / q
            else:
                d = e = m
        a, fa = b, fb
        if abs(d) > tol1:
            b += d
        else:
            b += tol1 if m > 0.0 else -tol1
        fb = f(b)
        if (fb > 0.0) == (fc > 0.0):
            c, fc = a, fa
            d = e = b - a


def finite_difference(f: Callable[[float], float], x: float, h: float,
                      order: int = 1) -> float:
    """Central difference of order 1 or 2; O(h^2) accurate for smooth f."""
    if not h > 0:
        raise ValueError("h must be positive")
    if order == 1:
        return (f(x + h) - f(x - h)) / (2.0 * h)
    if order == 2:
        return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
    raise ValueError("order must be 1 or 2")


def _smoothstep(u: float) -> float:
    # C-infinity step: 0 for u<=0, 1 for u>=1, flat to all orders at both ends.
    if u <= 0.0:
        return 0.0
    if u >= 1.0:
        return 1.0
    ea = math.exp(-1.0 / u)
    eb = math.exp(-1.0 / (1.0 - u))
    return ea / (ea + eb)


def bump_phi0(x: float) -> float:
    """Flat-topped smooth cutoff.

    Equal to 1 for |x| < 1/3, exp(-1/(1-x^2)) for 2/3 < |x| < 1, and 0 for
    |x| >= 1.  On [1/3, 2/3] the two regimes are joined by a partition-of-
    unity blend with a C-infinity step, which keeps the function smooth,
    even, and non-increasing in |x|.
    """
    ax = abs(x)
    if ax >= 1.0:
        return 0.0
    if ax <= 1.0 / 3.0:
        return 1.0
    outer = math.exp(-1.0 / (1.0 - ax * ax))
    if ax >= 2.0 / 3.0:
        return outer
    w = _smoothstep(3.0 * (ax - 1.0 / 3.0))
    return (1.0 - w) + w * outer


def bump_phi0_prime(x: float, h: float = 1e-6) -> float:
    """Derivative of bump_phi0 (central difference; the blend has no
    convenient closed form)."""
    return finite_difference(bump_phi0, x, h, order=1)


def bump_phi1(x: float) -> float:
    """Strictly peaked bump: exp(-1/(1-x^2)) on (-1, 1), zero outside.

    Maximum value exp(-1) at x = 0; the peak is strict (no flat top).
    """
    ax = abs(x)
    if ax >= 1.0:
        return 0.0
    z = 1.0 - x * x
    arg = 1.0 / z
    if arg > 745.0:  # exp underflows; the tail is numerically zero anyway
        return 0.0
    return math.exp(-arg)


def bump_phi1_prime(x: float) -> float:
    """Exact derivative of bump_phi1."""
    ax = abs(x)
    if ax >= 1.0:
        return 0.0
    z = 1.0 - x * x
    arg = 1.0 / z
    if arg > 745.0:
        return 0.0
    return math.exp(-arg) * (-2.0 * x) / (z * z)


def detect_peaks(g: GridFunction) -> list[Peak]:
    """Strict interior local maxima of a sampled function.

    A node (or a maximal run of equal-valued nodes) is a peak when its value
    strictly exceeds both neighbouring values.  Runs touching either end of
    the grid are not peaks.  A run of length > 1 is reported once, at its
    middle node, with ``flat=True``.  The result is invariant under adding a
    constant to all values and under positive rescaling.
    """
    if len(g) < 3:
        raise ValueError("detect_peaks requires at least 3 nodes")
    vals = g.values
    nodes = g.nodes
    n = len(vals)
    peaks = []
    i = 0
    while i < n:
        j = i
        while j + 1 < n and vals[j + 1] == vals[i]:
            j += 1
        interior = i > 0 and j < n - 1
        if interior and vals[i - 1] < vals[i] and vals[j + 1] < vals[i]:
            k = (i + j) // 2
            peaks.append(Peak(k, float(nodes[k]), float(vals[k]), flat=(j > i)))
        i = j + 1
    return peaks


@dataclass
class PrefixIntegrator:
    """Cumulative adaptive quadrature of a fixed integrand from a fixed
    left endpoint, with anchor caching.

    Repeated queries (typically along a sorted grid) cost only the
    incremental integral from the nearest cached anchor at or below the
    query point.
    """

    f: Callable[[float], float]
    a: float
    tol: float = DEFAULT_TOL
    _anchors: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        self._anchors = [(self.a, 0.0)]

    def __call__(self, x: float) -> float:
        if x < self.a:
            raise ValueError(f"query {x} below left endpoint {self.a}")
        keys = [s for s, _ in self._anchors]
        idx = bisect.bisect_right(keys, x) - 1
        s0, acc = self._anchors[idx]
        if x == s0:
            return acc
        acc += integrate_adaptive(self.f, s0, x, self.tol)
        bisect.insort(self._anchors, (x, acc))
        return acc
