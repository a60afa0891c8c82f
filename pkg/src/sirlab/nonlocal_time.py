"""Nonlocal SIR model in physical time.

The recovery law is a cumulative distribution G of the infectious period:
the infected fraction is the memory integral

    I(t) = integral_0^t [1 - G(t-u)] (-S'(u)) du + i0 [1 - G(t)],

coupled to dS/dt = -lam*I*S.  With G(t) = 1 - exp(-gamma*t) this
reproduces the classic model exactly.  The module provides a second-order
product-trapezoidal Volterra solver, the susceptible-parameterized form
of the infected fraction built on a caller-supplied kernel profile, the
residual of the consistency condition that makes the S-form coincide with
the classic relation, and the implicit time integral in the S variable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .classic_sir import SirParams, StepSizeError, Trajectory
from .numerics import GridFunction, integrate_adaptive, DEFAULT_TOL

__all__ = [
    "CdfKernel",
    "SKernel",
    "exponential_kernel",
    "kernel_from_grid",
    "load_cdf_csv",
    "cdf_kernel_from_spec",
    "check_cdf_kernel",
    "solve_volterra",
    "i_of_s_nonlocal",
    "kernel_residual",
    "time_of_s_nonlocal",
]


@dataclass(frozen=True)
class CdfKernel:
    """Recovery-time distribution: G nondecreasing, G(0)=0, G(inf)=1.

    ``scale`` is the caller-declared characteristic time used by the
    sampled validity check.
    """

    func: Callable[[float], float]
    name: str = "cdf"
    scale: float = 1.0

    def __call__(self, t: float) -> float:
        return self.func(t)


@dataclass(frozen=True)
class SKernel:
    """Kernel profile for the susceptible-parameterized infected relation.

    ``func`` must be evaluable on the full range the formulas touch: the
    negative arguments s - s0 <= 0 appearing in the memory integral and
    the positive arguments s in (0, s0].  The model leaves behaviour off
    [0, inf) unspecified, so the caller owns that choice.  ``deriv`` is
    required only by kernel_residual.
    """

    func: Callable[[float], float]
    deriv: Callable[[float], float] | None = None
    name: str = "s-kernel"

    def __call__(self, x: float) -> float:
        return self.func(x)


def exponential_kernel(gamma: float) -> CdfKernel:
    """G(t) = 1 - exp(-gamma*t): the kernel of the classic model."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    return CdfKernel(lambda t: 1.0 - math.exp(-gamma * t),
                     name=f"exponential:gamma={gamma:g}", scale=1.0 / gamma)


def kernel_from_grid(grid: GridFunction, name: str = "sampled") -> CdfKernel:
    """CDF kernel from sampled (t, G) pairs, linearly interpolated.

    Requires G(0) = 0 and nondecreasing samples; the last sampled value is
    held constant beyond the grid.
    """
    if grid.nodes[0] != 0.0 or abs(grid.values[0]) > 1e-12:
        raise ValueError("sampled kernel must start at (0, 0)")
    if np.any(np.diff(grid.values) < 0):
        raise ValueError("sampled kernel must be nondecreasing")
    if np.any(grid.values > 1 + 1e-12):
        raise ValueError("sampled kernel values must not exceed 1")
    scale = float(grid.nodes[-1]) / 1000.0
    return CdfKernel(lambda t: float(grid(t)), name=name, scale=max(scale, 1e-12))


def load_cdf_csv(path: str) -> CdfKernel:
    """Load a sampled CDF kernel from a CSV file with columns t,G."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    if data.dtype.names is None or tuple(data.dtype.names[:2]) != ("t", "G"):
        raise ValueError(f"{path}: expected CSV header 't,G'")
    return kernel_from_grid(GridFunction(data["t"], data["G"]),
                            name=f"file:{path}")


def cdf_kernel_from_spec(spec: str) -> CdfKernel:
    """Kernel registry: 'exponential:gamma=<x>' or 'file:<path>'."""
    if spec.startswith("exponential:"):
        body = spec[len("exponential:"):]
        key, _, val = body.partition("=")
        if key != "gamma":
            raise ValueError(f"unknown exponential parameter {key!r}")
        return exponential_kernel(float(val))
    if spec.startswith("file:"):
        return load_cdf_csv(spec[len("file:"):])
    raise ValueError(f"unknown kernel spec {spec!r}")


def check_cdf_kernel(k: CdfKernel, n: int = 64) -> None:
    """Sampled validity check: G(0)=0, nondecreasing on a log-spaced grid,
    and G(1000*scale) > 1 - 1e-6.  Raises ValueError on failure."""
    if abs(k(0.0)) > 1e-12:
        raise ValueError(f"{k.name}: G(0) = {k(0.0)} != 0")
    ts = np.geomspace(1e-6 * k.scale, 1e3 * k.scale, n)
    vals = [k(float(t)) for t in ts]
    prev = 0.0
    for t, v in zip(ts, vals):
        if v < prev - 1e-12:
            raise ValueError(f"{k.name}: not nondecreasing at t={t}")
        prev = max(prev, v)
    if vals[-1] <= 1.0 - 1e-6:
        raise ValueError(
            f"{k.name}: G({ts[-1]:g}) = {vals[-1]} has not reached 1")


def solve_volterra(p: SirParams, G: CdfKernel, h: float,
                   t_max: float) -> Trajectory:
    """Second-order product-trapezoidal solve of the memory model.

    On the uniform grid t_k = k*h the infection flux D_k = lam*I_k*S_k
    (the discrete right-hand side, used in place of -S') is stored; at
    each step the memory integral is the trapezoidal sum of survival
    weights [1 - G(t_n - t_k)] against the flux history, and S advances
    by a trapezoidal-implicit step resolved with one fixed-point sweep.
    The diagonal coupling between I_n and its own flux is eliminated in
    closed form, which keeps the history self-consistent.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    n = int(round(t_max / h))
    lam = p.lam
    i0 = p.i0
    # Survival weights only ever get evaluated at multiples of h.
    W = 1.0 - np.array([G(k * h) for k in range(n + 1)])
    if abs(W[0] - 1.0) > 1e-12:
        raise ValueError(f"{G.name}: G(0) must be 0")
    S = np.empty(n + 1)
    I = np.empty(n + 1)
    D = np.empty(n + 1)
    S[0] = p.s0
    I[0] = i0
    D[0] = lam * i0 * p.s0
    for k in range(1, n + 1):
        # Memory integral over [0, t_k] without the diagonal (j=k) node.
        memnd = h * (np.dot(D[1:k], W[k - 1:0:-1]) + 0.5 * W[k] * D[0]) \
            + i0 * W[k]
        d_prev = D[k - 1]
        s_pred = S[k - 1] - h * d_prev
        i_pred = memnd / (1.0 - 0.5 * h * lam * s_pred)
        d_pred = lam * i_pred * s_pred
        s_new = S[k - 1] - 0.5 * h * (d_prev + d_pred)
        i_new = memnd / (1.0 - 0.5 * h * lam * s_new)
        if not 0.0 <= s_new <= 1.0 or i_new < 0.0:
            raise StepSizeError(
                f"step-size error at t={k * h:.6g}: S={s_new:.3e}, "
                f"I={i_new:.3e}; use a smaller h")
        S[k] = s_new
        I[k] = i_new
        D[k] = lam * i_new * s_new
    t = np.arange(n + 1) * h
    return Trajectory(t, S, I, 1.0 - S - I)


def i_of_s_nonlocal(k: SKernel, p: SirParams, s: float,
                    tol: float = DEFAULT_TOL) -> float:
    """Infected fraction as a function of S under a convolution kernel.

    I(S) = 1 - S + integral_0^{S-s0} k(x) dx - i0*k(S).  The upper limit
    S - s0 is nonpositive, so the integral is signed (negative
    orientation).  The formula presumes a zero initial recovered fraction
    and initial consistency k(s0) = 0, so that I(s0) = i0.
    """
    if not 0 < s <= p.s0:
        raise ValueError("i_of_s_nonlocal requires 0 < s <= s0")
    lower = s - p.s0
    if lower == 0.0:
        integral = 0.0
    else:
        integral = -integrate_adaptive(k.func, lower, 0.0, tol)
    return 1.0 - s + integral - p.i0 * k(s)


def kernel_residual(k: SKernel, p: SirParams, s_grid) -> np.ndarray:
    """Residual of the consistency condition k(s-s0) - i0*k'(s) = gamma/(lam*s).

    Reported per node; vanishing residual means the S-parameterized model
    coincides with the classic one.  Never asserted zero here: the
    condition is a functional equation this package only measures.
    """
    if k.deriv is None:
        raise ValueError("kernel_residual requires a derivative evaluator")
    s_grid = np.asarray(s_grid, dtype=float)
    out = np.empty(len(s_grid))
    for j, s in enumerate(s_grid):
        out[j] = k(s - p.s0) - p.i0 * k.deriv(s) - p.gamma / (p.lam * s)
    return out


def time_of_s_nonlocal(k: SKernel, p: SirParams, s: float,
                       tol: float = DEFAULT_TOL) -> float:
    """Implicit time solution of the S-parameterized nonlocal model.

    t = integral over sigma in [s, s0] of 1/(lam*sigma*I(sigma)) with I
    from i_of_s_nonlocal.  Raises if the infected fraction is not
    positive somewhere in the integration range.
    """
    if not 0 < s <= p.s0:
        raise ValueError("time_of_s_nonlocal requires 0 < s <= s0")
    if s == p.s0:
        return 0.0

    def integrand(sigma):
        val = i_of_s_nonlocal(k, p, sigma, tol)
        if val <= 0.0:
            raise ArithmeticError(
                f"extinction reached: I({sigma:.12g}) = {val:.3e} <= 0")
        return 1.0 / (p.lam * sigma * val)

    return integrate_adaptive(integrand, s, p.s0, tol)
