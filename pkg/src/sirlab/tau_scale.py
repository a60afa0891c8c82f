"""Linearization of the classic model in the rescaled clock.

Under the time change d(tau) = I dt the susceptible equation becomes
linear and the pair (S1, I1) has the closed form

    S1(tau) = s0 * exp(-lam*tau)
    I1(tau) = s0 + i0 - s0*exp(-lam*tau) - gamma*tau,

valid up to the horizon tau_inf where I1 vanishes.  Physical time is
recovered through t(tau) = integral of 1/I1, which diverges at the
horizon.  This module evaluates the closed forms, locates the horizon,
classifies the dynamics, and rebuilds the physical-time trajectory on a
discretized clock grid.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .classic_sir import SirParams, Trajectory
from .numerics import find_root_bracketed, integrate_adaptive, DEFAULT_TOL

__all__ = [
    "Case",
    "TauSolution",
    "closed_form",
    "tau_infinity",
    "classify_case",
    "case1_peak_tau",
    "time_of_tau",
    "reconstruct_trajectory",
    "solve",
]

_HORIZON_SLACK = 1e-9


class Case(enum.Enum):
    """Dynamics classification by the reproduction number lam*s0/gamma."""

    CASE1 = "peak then decay (reproduction number > 1)"
    CASE2 = "monotone decay (reproduction number <= 1)"
    OUT_OF_RANGE = "outside the classified parameter range"


@dataclass(frozen=True)
class TauSolution:
    """Closed-form solution record: parameters, horizon and case tag."""

    params: SirParams
    tau_inf: float
    case_tag: Case

    def s1(self, tau):
        return closed_form(self.params, tau)[0]

    def i1(self, tau):
        return closed_form(self.params, tau)[1]


@lru_cache(maxsize=256)
def tau_infinity(p: SirParams) -> float:
    """Unique positive root of s0 + i0 - s0*exp(-lam*tau) - gamma*tau.

    The bracket [0, (s0+i0)/gamma] is always valid: the expression equals
    i0 > 0 at tau = 0 and is negative at the right end.
    """
    f = lambda tau: p.s0 + p.i0 - p.s0 * math.exp(-p.lam * tau) - p.gamma * tau
    hi = (p.s0 + p.i0) / p.gamma
    return find_root_bracketed(f, 0.0, hi, tol=1e-15)


def closed_form(p: SirParams, tau: float) -> tuple[float, float]:
    """(S1, I1) at clock value tau, for 0 <= tau <= tau_inf."""
    horizon = tau_infinity(p)
    if tau < 0 or tau > horizon + _HORIZON_SLACK:
        raise ValueError(f"tau={tau} outside [0, tau_inf={horizon:.12g}]")
    s1 = p.s0 * math.exp(-p.lam * tau)
    # i0 - s0*expm1(-lam*tau) equals s0 + i0 - s0*exp(-lam*tau) but is
    # exact at tau = 0 and keeps precision for small tau.
    i1 = p.i0 - p.s0 * math.expm1(-p.lam * tau) - p.gamma * tau
    return s1, i1


def classify_case(p: SirParams) -> Case:
    """CASE1 iff lam*s0 > gamma (boundary lam*s0 = gamma counts as CASE2)."""
    return Case.CASE1 if p.lam * p.s0 > p.gamma else Case.CASE2


def case1_peak_tau(p: SirParams) -> float:
    """Clock location of the unique interior maximum of I1 in CASE1."""
    if classify_case(p) is not Case.CASE1:
        raise ValueError("the infected curve peaks only in CASE1")
    return math.log(p.lam * p.s0 / p.gamma) / p.lam


def time_of_tau(p: SirParams, tau: float, tol: float = DEFAULT_TOL) -> float:
    """Physical time at clock value tau: t = integral of 1/I1 over [0, tau].

    Strictly increasing in tau; diverges as tau approaches the horizon,
    so tau must stay strictly below tau_inf.
    """
    horizon = tau_infinity(p)
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    if tau >= horizon:
        raise ValueError(
            f"horizon reached: t -> infinity as tau -> tau_inf={horizon:.12g}")
    if tau == 0:
        return 0.0
    integrand = lambda u: 1.0 / closed_form(p, u)[1]
    return integrate_adaptive(integrand, 0.0, tau, tol)


def time_grid(p: SirParams, taus: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Cumulative t(tau) over an increasing clock grid.

    Integrates segment by segment with a running sum, so the cost is one
    quadrature per grid interval rather than per node.
    """
    taus = np.asarray(taus, dtype=float)
    integrand = lambda u: 1.0 / closed_form(p, u)[1]
    out = np.empty(len(taus))
    out[0] = time_of_tau(p, taus[0], tol) if taus[0] > 0 else 0.0
    for j in range(1, len(taus)):
        out[j] = out[j - 1] + integrate_adaptive(integrand, taus[j - 1],
                                                 taus[j], tol)
    return out


def reconstruct_trajectory(p: SirParams, n_nodes: int = 2000,
                           tau_cap_fraction: float = 0.999) -> Trajectory:
    """Physical-time trajectory rebuilt from the closed forms.

    The clock interval [0, tau_cap_fraction*tau_inf] is discretized
    uniformly; each node is mapped through t(tau) and the closed forms.
    The cap must stay strictly below 1 because t(tau_inf) is infinite.
    """
    if n_nodes < 2:
        raise ValueError("n_nodes must be at least 2")
    if not 0 < tau_cap_fraction < 1:
        raise ValueError("tau_cap_fraction must lie strictly in (0, 1)")
    horizon = tau_infinity(p)
    taus = np.linspace(0.0, tau_cap_fraction * horizon, n_nodes)
    t = time_grid(p, taus)
    s = p.s0 * np.exp(-p.lam * taus)
    i = p.i0 - p.s0 * np.expm1(-p.lam * taus) - p.gamma * taus
    return Trajectory(t, s, i, 1.0 - s - i)


def solve(p: SirParams) -> TauSolution:
    """Bundle the horizon and the case classification for the parameters."""
    return TauSolution(params=p, tau_inf=tau_infinity(p),
                       case_tag=classify_case(p))
