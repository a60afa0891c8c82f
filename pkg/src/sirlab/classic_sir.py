"""Classic normalized SIR model.

Reference fixed-step RK4 integration, the exact infected-vs-susceptible
relation I(S) = -S + (gamma/lambda) ln S + C, the implicit time solution
obtained by integrating dt = -dS / (lambda S I(S)), and the closed-form
solution of the SIS model in the rescaled clock.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .numerics import find_root_bracketed, integrate_adaptive, DEFAULT_TOL

__all__ = [
    "SirParams",
    "SisParams",
    "Trajectory",
    "StepSizeError",
    "simulate_rk4",
    "i_of_s",
    "s_extinction",
    "time_of_s",
    "sis_closed_form",
]

_UNDERSHOOT = 1e-12
CONSERVATION_TOL = 1e-9


class StepSizeError(ArithmeticError):
    """A fixed integration step drove the state negative beyond tolerance."""


@dataclass(frozen=True)
class SirParams:
    """Rates and initial fractions of the normalized model.

    lam:   transmission rate (> 0, per unit time)
    gamma: recovery rate (> 0, per unit time)
    s0:    initial susceptible fraction, in (0, 1]
    i0:    initial infected fraction, in (0, 1]

    The initial recovered fraction is 1 - s0 - i0 >= 0.
    """

    lam: float
    gamma: float
    s0: float
    i0: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not 0 < self.s0 <= 1:
            raise ValueError("s0 must lie in (0, 1]")
        if not 0 < self.i0 <= 1:
            raise ValueError("i0 must lie in (0, 1]")
        if self.s0 + self.i0 > 1 + 1e-12:
            raise ValueError("s0 + i0 must not exceed 1")

    @property
    def c(self) -> float:
        """Integration constant of the I(S) relation."""
        return self.i0 + self.s0 - (self.gamma / self.lam) * math.log(self.s0)

    @property
    def r0(self) -> float:
        """Initial recovered fraction."""
        return max(0.0, 1.0 - self.s0 - self.i0)


@dataclass(frozen=True)
class SisParams:
    """Rates and initial susceptible fraction of the normalized SIS model."""

    lam: float
    gamma: float
    mu: float = 0.0
    s0: float = 0.99

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if self.gamma < 0 or self.mu < 0:
            raise ValueError("rates must be nonnegative")
        if not 0 <= self.s0 <= 1:
            raise ValueError("s0 must lie in [0, 1]")


@dataclass(frozen=True)
class Trajectory:
    """Sampled (t, S, I, R) path with the conservation invariant S+I+R = 1."""

    t: np.ndarray
    s: np.ndarray
    i: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        for name in ("t", "s", "i", "r"):
            object.__setattr__(self, name,
                               np.asarray(getattr(self, name), dtype=float))
        n = len(self.t)
        if any(len(getattr(self, name)) != n for name in ("s", "i", "r")):
            raise ValueError("all columns must have equal length")
        if n >= 2 and not np.all(np.diff(self.t) > 0):
            raise ValueError("time nodes must be strictly increasing")

    def __len__(self):
        return len(self.t)

    def conservation_defect(self) -> float:
        return float(np.max(np.abs(self.s + self.i + self.r - 1.0)))

    def validate(self):
        defect = self.conservation_defect()
        if defect > CONSERVATION_TOL:
            raise ValueError(f"conservation violated by {defect:.3e}")
        return self


def simulate_rk4(p: SirParams, t_max: float, dt: float) -> Trajectory:
    """Integrate the classic system with fixed-step classical RK4.

    dS/dt = -lam*I*S,  dI/dt = lam*I*S - gamma*I,  R = 1 - S - I.
    A step may undershoot 0 by at most 1e-12 (the value is clamped);
    anything worse raises StepSizeError suggesting a smaller dt.
    """
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    if not dt > 0:
        raise ValueError("dt must be positive")
    n = int(math.ceil(t_max / dt - 1e-12))
    lam = p.lam
    gam = p.gamma
    s = p.s0
    i = p.i0
    s_hist = [0.0] * (n + 1)
    i_hist = [0.0] * (n + 1)
    s_hist[0] = s
    i_hist[0] = i
    h = dt
    h2 = 0.5 * dt
    h6 = dt / 6.0
    for k in range(1, n + 1):
        f = lam * i * s
        k1s = -f
        k1i = f - gam * i
        sa = s + h2 * k1s
        ia = i + h2 * k1i
        f = lam * ia * sa
        k2s = -f
        k2i = f - gam * ia
        sb = s + h2 * k2s
        ib = i + h2 * k2i
        f = lam * ib * sb
        k3s = -f
        k3i = f - gam * ib
        sc = s + h * k3s
        ic = i + h * k3i
        f = lam * ic * sc
        k4s = -f
        k4i = f - gam * ic
        s = s + h6 * (k1s + 2.0 * (k2s + k3s) + k4s)
        i = i + h6 * (k1i + 2.0 * (k2i + k3i) + k4i)
        if s < 0.0 or i < 0.0:
            if s < -_UNDERSHOOT or i < -_UNDERSHOOT:
                raise StepSizeError(
                    f"step-size error at t={k * dt:.6g}: state undershot "
                    f"zero (S={s:.3e}, I={i:.3e}); use a smaller dt")
            s = max(s, 0.0)
            i = max(i, 0.0)
        s_hist[k] = s
        i_hist[k] = i
    t = np.arange(n + 1) * dt
    s_arr = np.asarray(s_hist)
    i_arr = np.asarray(i_hist)
    return Trajectory(t, s_arr, i_arr, 1.0 - s_arr - i_arr)


def i_of_s(p: SirParams, s: float) -> float:
    """Exact infected fraction as a function of the susceptible fraction."""
    if s <= 0:
        raise ValueError("i_of_s requires s > 0")
    return -s + (p.gamma / p.lam) * math.log(s) + p.c


@lru_cache(maxsize=256)
def s_extinction(p: SirParams) -> float:
    """Positive root of I(S) = 0 below s0: the extinction limit of S.

    time_of_s is only defined for s strictly above this value.
    """
    lo = p.s0
    f = lambda s: i_of_s(p, s)
    # I(s0) = i0 > 0 and I -> -inf as s -> 0+; expand down to find the sign change.
    while f(lo) > 0:
        lo *= 0.5
        if lo < 1e-300:
            raise ArithmeticError("no extinction root found above underflow")
    return find_root_bracketed(f, lo, min(2.0 * lo, p.s0), tol=1e-15)


def time_of_s(p: SirParams, s: float, tol: float = DEFAULT_TOL) -> float:
    """Implicit time solution: the time at which S first reaches s.

    Computed as t = integral over sigma in [s, s0] of
    1 / (lam * sigma * I(sigma)), which is the antiderivative relation of
    the exact solution with the sign arranged so that t >= 0.
    """
    if s > p.s0:
        raise ValueError("time_of_s requires s <= s0")
    s_min = s_extinction(p)
    if s <= s_min:
        raise ValueError(
            f"s={s} is at or below the extinction value {s_min:.12g}; "
            "the time integral diverges there")
    if s == p.s0:
        return 0.0
    lam = p.lam
    integrand = lambda sigma: 1.0 / (lam * sigma * i_of_s(p, sigma))
    return integrate_adaptive(integrand, s, p.s0, tol)


def sis_closed_form(p: SisParams, tau: float) -> tuple[float, float]:
    """Closed-form SIS solution in the rescaled clock.

    S(tau) = ((mu+gamma)/lam)(1 - e^{-lam tau}) + s0 e^{-lam tau}, and
    I = 1 - S by conservation of the normalized total population.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    rho = (p.mu + p.gamma) / p.lam
    decay = math.exp(-p.lam * tau)
    s = rho * (1.0 - decay) + p.s0 * decay
    return s, 1.0 - s
