import math

import numpy as np
import pytest

from sirlab.classic_sir import SirParams, i_of_s, simulate_rk4
from sirlab.tau_scale import (Case, case1_peak_tau, classify_case,
                              closed_form, reconstruct_trajectory, solve,
                              tau_infinity, time_of_tau)

REF = SirParams(lam=1.0, gamma=0.5, s0=0.99, i0=0.01)

# frozen from an independent bisection of 1 - 0.99 e^{-x} - 0.5 x to
# residual < 1e-15 (the displayed value 1.6002 is that root to ~4 digits)
TAU_INF_REF = 1.6004079353535983


def rk4_clock_system(p, tau_end, dtau):
    """Independent oracle: fixed-step RK4 on the linear clock system
    dS1 = -lam*S1, dI1 = lam*S1 - gamma."""
    n = int(round(tau_end / dtau))
    s, i = p.s0, p.i0
    for _ in range(n):
        k1s = -p.lam * s
        k1i = p.lam * s - p.gamma
        s2 = s + 0.5 * dtau * k1s
        k2s = -p.lam * s2
        k2i = p.lam * s2 - p.gamma
        s3 = s + 0.5 * dtau * k2s
        k3s = -p.lam * s3
        k3i = p.lam * s3 - p.gamma
        s4 = s + dtau * k3s
        k4s = -p.lam * s4
        k4i = p.lam * s4 - p.gamma
        s += dtau / 6.0 * (k1s + 2.0 * (k2s + k3s) + k4s)
        i += dtau / 6.0 * (k1i + 2.0 * (k2i + k3i) + k4i)
    return s, i


class TestClosedForm:
    def test_initial_point_exact(self):
        assert closed_form(REF, 0.0) == (REF.s0, REF.i0)

    def test_vanishes_at_horizon(self):
        _, i1 = closed_form(REF, tau_infinity(REF))
        assert abs(i1) <= 1e-10

    def test_against_clock_ode_oracle(self):
        s_ref, i_ref = rk4_clock_system(REF, 0.5, 1e-5)
        s1, i1 = closed_form(REF, 0.5)
        assert s1 == pytest.approx(s_ref, abs=1e-10)
        assert i1 == pytest.approx(i_ref, abs=1e-10)

    def test_domain_check(self):
        with pytest.raises(ValueError):
            closed_form(REF, tau_infinity(REF) + 1e-3)
        with pytest.raises(ValueError):
            closed_form(REF, -0.1)


class TestHorizon:
    def test_reference_value(self):
        tau = tau_infinity(REF)
        assert tau == pytest.approx(TAU_INF_REF, abs=1e-12)
        residual = REF.s0 + REF.i0 - REF.s0 * math.exp(-tau) - REF.gamma * tau
        assert abs(residual) <= 1e-12

    def test_stiff_recovery_bracket(self):
        p = SirParams(lam=1.0, gamma=10.0, s0=0.1, i0=0.1)
        tau = tau_infinity(p)
        upper = p.i0 / (p.gamma - p.lam * p.s0) + 1e-3
        f = lambda t: p.s0 + p.i0 - p.s0 * math.exp(-t) - p.gamma * t
        assert f(0.0) > 0 > f(upper)
        assert 0.0 < tau < upper

    def test_joint_rate_scaling(self):
        p2 = SirParams(lam=2.0, gamma=1.0, s0=0.99, i0=0.01)
        assert tau_infinity(p2) == pytest.approx(0.5 * tau_infinity(REF),
                                                 abs=1e-12)


class TestClassification:
    def test_reference_is_case1(self):
        assert classify_case(REF) is Case.CASE1
        assert case1_peak_tau(REF) == pytest.approx(math.log(1.98),
                                                    rel=1e-14)

    def test_boundary_is_case2(self):
        p = SirParams(lam=1.0, gamma=0.5, s0=0.5, i0=0.1)
        assert classify_case(p) is Case.CASE2

    def test_subcritical_monotone(self):
        p = SirParams(lam=1.0, gamma=2.0, s0=0.5, i0=0.1)
        assert classify_case(p) is Case.CASE2
        taus = np.linspace(0.0, tau_infinity(p), 400)
        slope = p.lam * p.s0 * np.exp(-p.lam * taus) - p.gamma
        assert np.all(slope < 0)

    def test_solution_record(self):
        sol = solve(REF)
        assert sol.case_tag is Case.CASE1
        assert sol.tau_inf == tau_infinity(REF)
        assert sol.i1(0.0) == REF.i0


class TestTimeMap:
    def test_zero(self):
        assert time_of_tau(REF, 0.0) == 0.0

    def test_monotone(self):
        assert time_of_tau(REF, 0.2) < time_of_tau(REF, 0.4) \
            < time_of_tau(REF, 0.8)

    def test_horizon_rejected(self):
        with pytest.raises(ValueError, match="horizon"):
            time_of_tau(REF, tau_infinity(REF))

    def test_rk4_crossing_consistency(self):
        # S(t(tau)) must agree with the closed form S1(tau)
        t1 = time_of_tau(REF, 1.0, 1e-12)
        target = 0.99 * math.exp(-1.0)
        traj = simulate_rk4(REF, t1 + 0.1, 1e-4)
        s_at_t1 = float(np.interp(t1, traj.t, traj.s))
        assert s_at_t1 == pytest.approx(target, abs=1e-5)


@pytest.fixture(scope="module")
def recon():
    return reconstruct_trajectory(REF, n_nodes=800, tau_cap_fraction=0.995)


class TestReconstruction:
    def test_first_node(self, recon):
        assert recon.t[0] == 0.0
        assert recon.s[0] == REF.s0
        assert recon.i[0] == REF.i0
        assert recon.r[0] == pytest.approx(0.0, abs=1e-15)

    def test_time_strictly_increasing(self, recon):
        assert np.all(np.diff(recon.t) > 0)

    def test_matches_rk4(self, recon):
        ref = simulate_rk4(REF, float(recon.t[-1]) + 1e-4, 1e-4)
        ds = np.max(np.abs(recon.s - np.interp(recon.t, ref.t, ref.s)))
        di = np.max(np.abs(recon.i - np.interp(recon.t, ref.t, ref.i)))
        assert ds <= 1e-5
        assert di <= 1e-5

    def test_concavity_of_infected(self):
        taus = np.linspace(0.0, tau_infinity(REF), 1000)
        i1 = REF.i0 - REF.s0 * np.expm1(-REF.lam * taus) - REF.gamma * taus
        second = np.diff(i1, 2)
        assert np.all(second <= 0)

    def test_consistency_with_exact_relation(self):
        taus = np.linspace(0.0, 0.999 * tau_infinity(REF), 500)
        worst = max(abs(closed_form(REF, float(t))[1]
                        - i_of_s(REF, closed_form(REF, float(t))[0]))
                    for t in taus)
        assert worst <= 1e-10

    def test_argument_validation(self):
        with pytest.raises(ValueError):
            reconstruct_trajectory(REF, 1, 0.9)
        with pytest.raises(ValueError):
            reconstruct_trajectory(REF, 100, 1.0)
