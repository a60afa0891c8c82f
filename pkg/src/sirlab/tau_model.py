"""Memory model in the rescaled clock.

Transporting the nonlocal model through the time change d(tau) = I dt
turns the recovery law into a two-argument kernel K(tau, u) on the
half-plane 0 <= u <= tau, with S1(tau) = s0*exp(-lam*tau) exact and

    I1(tau) = lam*s0 * integral_0^tau [1 - K(tau, tau-u)] e^{lam(u-tau)} du
              + i0 * [1 - K(tau, 0)].

Any kernel vanishing on the diagonal, monotone in each argument and
saturating to 1 defines a valid model of this family.  Homogeneous
exponential kernels K(tau, u) = 1 - exp(-A(tau-u)) admit closed forms and
reproduce the classic two-case dichotomy; the general evaluation is by
adaptive quadrature.  The map psi(tau) = integral of 1/I1 carries results
back to physical time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .classic_sir import SirParams, Trajectory
from .numerics import integrate_adaptive, DEFAULT_TOL
from .nonlocal_time import CdfKernel
from .tau_scale import Case

__all__ = [
    "AdmissibleKernel",
    "HomogeneousKernel",
    "ExpClassification",
    "exponential_tau_kernel",
    "tau_kernel_from_spec",
    "check_admissible",
    "i1_general",
    "i1_exponential",
    "classify_exponential",
    "max_principle_check",
    "MaxPrincipleReport",
    "psi_time_map",
    "psi_grid",
    "kernel_from_trajectory",
]


@dataclass(frozen=True)
class AdmissibleKernel:
    """Two-argument recovery kernel on {0 <= u <= tau}.

    Required behaviour (checked by sampling, not enforced per call):
    K(tau, tau) = 0, values in [0, 1], nondecreasing in tau at fixed u,
    nonincreasing in u at fixed tau, and K(T, u) -> 1 as T grows.
    """

    func: Callable[[float, float], float]
    name: str = "kernel"
    scale: float = 1.0

    def __call__(self, tau: float, u: float) -> float:
        return self.func(tau, u)


@dataclass(frozen=True)
class HomogeneousKernel:
    """Difference kernel K(tau, u) = Gt(tau - u) for a CDF Gt with rate A."""

    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("rate must be positive")

    def gtilde(self, x: float) -> float:
        return 1.0 - math.exp(-self.rate * x) if x > 0 else 0.0

    def as_admissible(self) -> AdmissibleKernel:
        return AdmissibleKernel(lambda tau, u: self.gtilde(tau - u),
                                name=f"exp-tau:A={self.rate:g}",
                                scale=1.0 / self.rate)


def exponential_tau_kernel(A: float) -> AdmissibleKernel:
    """The built-in homogeneous exponential kernel."""
    return HomogeneousKernel(A).as_admissible()


def tau_kernel_from_spec(spec: str) -> AdmissibleKernel:
    """Kernel registry: 'exp-tau:A=<x>' is the only built-in form."""
    if spec.startswith("exp-tau:"):
        body = spec[len("exp-tau:"):]
        key, _, val = body.partition("=")
        if key != "A":
            raise ValueError(f"unknown exp-tau parameter {key!r}")
        return exponential_tau_kernel(float(val))
    raise ValueError(f"unknown tau-kernel spec {spec!r}")


def check_admissible(k: AdmissibleKernel, n: int = 64) -> None:
    """Sampled admissibility check on an n-by-n geometric grid.

    Verifies the diagonal zero to 1e-12, the range [0, 1], monotonicity in
    each argument, and saturation K(1000*scale, u) > 1 - 1e-4.  Raises
    ValueError on the first failure.
    """
    taus = np.concatenate(([0.0], np.geomspace(1e-3 * k.scale,
                                               1e3 * k.scale, n - 1)))
    for tau in taus:
        v = k(tau, tau)
        if abs(v) > 1e-12:
            raise ValueError(f"{k.name}: K(tau, tau) = {v} at tau={tau}")
    for tau in taus:
        prev = None
        for u in taus[taus <= tau]:
            v = k(tau, u)
            if not -1e-12 <= v <= 1 + 1e-12:
                raise ValueError(f"{k.name}: value {v} outside [0, 1]")
            if prev is not None and v > prev + 1e-12:
                raise ValueError(
                    f"{k.name}: increasing in second argument at "
                    f"({tau}, {u})")
            prev = v
    for u in taus:
        prev = None
        for tau in taus[taus >= u]:
            v = k(tau, u)
            if prev is not None and v < prev - 1e-12:
                raise ValueError(
                    f"{k.name}: decreasing in first argument at ({tau}, {u})")
            prev = v
        if k(1e3 * k.scale + u, u) <= 1.0 - 1e-4:
            raise ValueError(f"{k.name}: does not saturate to 1 at u={u}")


def i1_general(p: SirParams, k: AdmissibleKernel, tau: float,
               tol: float = DEFAULT_TOL) -> float:
    """Infected fraction in the rescaled clock for an arbitrary kernel.

    The integrand is evaluated as [1 - K(tau, tau-u)] * exp(lam*(u - tau)),
    i.e. with the outer exp(-lam*tau) folded into the exponent.  This keeps
    every factor bounded by 1 (no overflow at large tau) while preserving
    the recency-ordered form of the integral.  Simpson weights are positive
    and the integrand is nonnegative, so the result is nonnegative by
    construction.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    survival0 = 1.0 - k(tau, 0.0)
    if tau == 0.0:
        return p.i0 * survival0
    lam = p.lam

    def integrand(u):
        return (1.0 - k(tau, tau - u)) * math.exp(lam * (u - tau))

    integral = integrate_adaptive(integrand, 0.0, tau, tol)
    return lam * p.s0 * integral + p.i0 * survival0


def i1_exponential(p: SirParams, A: float, tau: float) -> float:
    """Closed form for the homogeneous exponential kernel with rate A.

        I1 = (lam*s0/(A-lam)) e^{-lam*tau} + (i0 - lam*s0/(A-lam)) e^{-A*tau}

    The removable singularity A = lam is evaluated by its analytic limit
    (lam*s0*tau + i0) e^{-lam*tau}.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    if not A > 0:
        raise ValueError("A must be positive")
    lam = p.lam
    if abs(A - lam) <= 1e-12 * max(A, lam):
        return (lam * p.s0 * tau + p.i0) * math.exp(-lam * tau)
    coef = lam * p.s0 / (A - lam)
    return coef * math.exp(-lam * tau) + (p.i0 - coef) * math.exp(-A * tau)


class ExpClassification:
    """Case tag plus a short note for the exponential-kernel model."""

    __slots__ = ("case", "note")

    def __init__(self, case: Case, note: str = ""):
        self.case = case
        self.note = note

    def __repr__(self):
        return f"ExpClassification({self.case}, {self.note!r})"

    def __eq__(self, other):
        if isinstance(other, Case):
            return self.case is other
        if isinstance(other, ExpClassification):
            return self.case is other.case
        return NotImplemented


def classify_exponential(p: SirParams, A: float) -> ExpClassification:
    """Case dichotomy for the exponential kernel.

    CASE1 for 0 < A < lam (rise then decay), CASE2 for
    lam < A < lam*(1 + s0/i0) (monotone decay).  Everything else,
    including the degenerate A = lam boundary and A at or beyond the upper
    threshold, is flagged OUT_OF_RANGE without interpretation.
    """
    if not A > 0:
        raise ValueError("A must be positive")
    lam = p.lam
    upper = lam * (1.0 + p.s0 / p.i0)
    if A == lam:
        return ExpClassification(Case.OUT_OF_RANGE, "degenerate A=lam")
    if A < lam:
        return ExpClassification(Case.CASE1)
    if A < upper:
        return ExpClassification(Case.CASE2)
    return ExpClassification(
        Case.OUT_OF_RANGE,
        f"A={A:g} at or beyond lam*(1+s0/i0)={upper:g}; uncharacterized")


def case1_peak_tau_exponential(p: SirParams, A: float) -> float:
    """Clock location of the unique maximum of the CASE1 closed form."""
    lam = p.lam
    if not 0 < A < lam:
        raise ValueError("the closed form peaks only for 0 < A < lam")
    coef = lam * p.s0 / (A - lam)  # negative here
    # Root of I1' = 0: -lam*coef*e^{-lam*tau} = A*(i0-coef)*e^{-A*tau}.
    return math.log((-lam * coef) / (A * (p.i0 - coef))) / (lam - A)


@dataclass(frozen=True)
class MaxPrincipleReport:
    """Per-node margins of the bound S1 + I1 <= s0 + i0."""

    tau_grid: np.ndarray
    margins: np.ndarray

    @property
    def min_margin(self) -> float:
        return float(np.min(self.margins))

    def passed(self, slack: float = 1e-9) -> bool:
        return self.min_margin >= -slack


def max_principle_check(p: SirParams, k: AdmissibleKernel, tau_grid,
                        tol: float = DEFAULT_TOL) -> MaxPrincipleReport:
    """Evaluate (s0 + i0) - (S1 + I1) on a clock grid."""
    tau_grid = np.asarray(tau_grid, dtype=float)
    if len(tau_grid) and (np.any(tau_grid < 0)
                          or np.any(np.diff(tau_grid) <= 0)):
        raise ValueError("tau_grid must be nonnegative and increasing")
    margins = np.empty(len(tau_grid))
    for j, tau in enumerate(tau_grid):
        s1 = p.s0 * math.exp(-p.lam * tau)
        i1 = i1_general(p, k, float(tau), tol)
        margins[j] = (p.s0 + p.i0) - (s1 + i1)
    return MaxPrincipleReport(tau_grid, margins)


def psi_time_map(p: SirParams, k: AdmissibleKernel, tau: float,
                 tol: float = DEFAULT_TOL) -> float:
    """Physical time at clock value tau: psi(tau) = integral of 1/I1.

    Strictly increasing with psi(0) = 0.  Together with the closed S1 and
    i1_general this recovers S(t) and I(t) on a discretized grid by
    inverting psi node-wise.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    if tau == 0:
        return 0.0
    inner_tol = min(tol, 1e-10)
    integrand = lambda u: 1.0 / i1_general(p, k, u, inner_tol)
    return integrate_adaptive(integrand, 0.0, tau, tol)


def psi_grid(p: SirParams, k: AdmissibleKernel, taus,
             tol: float = 1e-9) -> np.ndarray:
    """Cumulative psi over an increasing clock grid (running-sum segments)."""
    taus = np.asarray(taus, dtype=float)
    inner_tol = min(tol, 1e-10)
    integrand = lambda u: 1.0 / i1_general(p, k, u, inner_tol)
    out = np.empty(len(taus))
    out[0] = psi_time_map(p, k, float(taus[0]), tol) if taus[0] > 0 else 0.0
    for j in range(1, len(taus)):
        out[j] = out[j - 1] + integrate_adaptive(integrand, float(taus[j - 1]),
                                                 float(taus[j]), tol)
    return out


def kernel_from_trajectory(traj: Trajectory, G: CdfKernel) -> AdmissibleKernel:
    """One refinement pass toward the physical-time memory model.

    From a solved trajectory, measure the clock tau(t) as the cumulative
    integral of I, interpolate its inverse phi, and transport the CDF:
    K(tau, u) = G(phi(tau) - phi(u)).  Re-solving the clock model with the
    returned kernel is one fixed-point sweep on the original memory model;
    no convergence is claimed.  Beyond the measured clock range, phi is
    extended linearly with the final slope 1/I(t_end).
    """
    t = traj.t
    taus = np.concatenate(([0.0],
                           np.cumsum(0.5 * (traj.i[1:] + traj.i[:-1])
                                     * np.diff(t))))
    tau_max = taus[-1]
    i_end = max(traj.i[-1], 1e-300)

    def phi(tau):
        if tau <= tau_max:
            return float(np.interp(tau, taus, t))
        return float(t[-1] + (tau - tau_max) / i_end)

    return AdmissibleKernel(lambda tau, u: G(phi(tau) - phi(u)),
                            name=f"measured({G.name})", scale=G.scale)
