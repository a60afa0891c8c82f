import math

import numpy as np
import pytest

from sirlab.classic_sir import SirParams, i_of_s, simulate_rk4
from sirlab.nonlocal_time import (CdfKernel, SKernel, cdf_kernel_from_spec,
                                  check_cdf_kernel, exponential_kernel,
                                  i_of_s_nonlocal, kernel_from_grid,
                                  kernel_residual, load_cdf_csv,
                                  solve_volterra, time_of_s_nonlocal)
from sirlab.numerics import GridFunction

REF = SirParams(lam=1.0, gamma=0.5, s0=0.99, i0=0.01)


def classic_matching_kernel(p):
    """Profile that reproduces the classic model exactly: the known
    solution of the consistency condition on the negative axis, zero on
    the positive axis (where only the value at S enters, weighted by i0)."""
    def func(x):
        return p.gamma / (p.lam * (x + p.s0)) if x <= 0 else 0.0

    def deriv(x):
        return -p.gamma / (p.lam * (x + p.s0) ** 2) if x <= 0 else 0.0

    return SKernel(func, deriv, name="classic-matching")


class TestVolterraSolver:
    def test_initial_node(self):
        traj = solve_volterra(REF, exponential_kernel(0.5), 1e-3, 0.01)
        assert traj.s[0] == REF.s0
        assert traj.i[0] == REF.i0
        assert traj.r[0] == pytest.approx(0.0, abs=1e-15)

    def test_exponential_kernel_reproduces_classic(self):
        traj = solve_volterra(REF, exponential_kernel(REF.gamma), 2e-3, 10.0)
        ref = simulate_rk4(REF, 10.0, 1e-4)
        err_s = np.max(np.abs(traj.s - np.interp(traj.t, ref.t, ref.s)))
        err_i = np.max(np.abs(traj.i - np.interp(traj.t, ref.t, ref.i)))
        assert max(err_s, err_i) <= 1e-4

    def test_second_order_convergence(self):
        ref = simulate_rk4(REF, 5.0, 5e-5)
        errs = []
        for h in (4e-3, 2e-3):
            traj = solve_volterra(REF, exponential_kernel(REF.gamma), h, 5.0)
            errs.append(np.max(np.abs(
                traj.s - np.interp(traj.t, ref.t, ref.s))))
        assert 3.0 <= errs[0] / errs[1] <= 5.0

    def test_positivity_and_monotonicity(self):
        slow = CdfKernel(lambda t: t / (1.0 + t), name="heavy-tail",
                         scale=1e3)
        traj = solve_volterra(REF, slow, 2e-3, 15.0)
        assert np.all(traj.i > 0)
        assert np.all(np.diff(traj.s) <= 0)
        assert traj.conservation_defect() <= 1e-9

    def test_nonzero_g0_rejected(self):
        bad = CdfKernel(lambda t: 0.5, name="bad")
        with pytest.raises(ValueError):
            solve_volterra(REF, bad, 1e-2, 1.0)


class TestCdfKernels:
    def test_exponential_valid(self):
        check_cdf_kernel(exponential_kernel(0.5))

    def test_saturation_required(self):
        stuck = CdfKernel(lambda t: min(0.5, t), name="stuck", scale=1.0)
        with pytest.raises(ValueError, match="reached"):
            check_cdf_kernel(stuck)

    def test_registry(self):
        k = cdf_kernel_from_spec("exponential:gamma=0.25")
        assert k(1.0) == pytest.approx(1.0 - math.exp(-0.25))
        with pytest.raises(ValueError):
            cdf_kernel_from_spec("exponential:rate=1")
        with pytest.raises(ValueError):
            cdf_kernel_from_spec("magic")

    def test_sampled_kernel(self, tmp_path):
        t = np.linspace(0.0, 20.0, 400)
        g = 1.0 - np.exp(-0.5 * t)
        sampled = kernel_from_grid(GridFunction(t, g), name="sampled-exp")
        assert sampled(1.0) == pytest.approx(1.0 - math.exp(-0.5), abs=1e-3)
        assert sampled(100.0) == g[-1]  # held beyond the grid
        path = tmp_path / "kern.csv"
        with open(path, "w") as fh:
            fh.write("t,G\n")
            for tk, gk in zip(t, g):
                fh.write(f"{float(tk)!r},{float(gk)!r}\n")
        loaded = load_cdf_csv(str(path))
        assert loaded(2.0) == pytest.approx(sampled(2.0), abs=1e-12)

    def test_sampled_kernel_validation(self):
        with pytest.raises(ValueError, match="start"):
            kernel_from_grid(GridFunction([1.0, 2.0], [0.0, 0.5]))
        with pytest.raises(ValueError, match="nondecreasing"):
            kernel_from_grid(GridFunction([0.0, 1.0, 2.0], [0.0, 0.5, 0.4]))


class TestSusceptibleForm:
    def test_initial_consistency(self):
        k = SKernel(lambda x: 0.0 if x >= 0 else 0.1)
        val = i_of_s_nonlocal(k, REF, REF.s0)
        assert val == pytest.approx(REF.i0, abs=1e-15)

    def test_zero_kernel_means_no_recovery(self):
        k = SKernel(lambda x: 0.0)
        for s in (0.9, 0.7, 0.4):
            assert i_of_s_nonlocal(k, REF, s) == pytest.approx(1.0 - s,
                                                               abs=1e-12)

    def test_classic_matching_kernel_reproduces_classic(self):
        k = classic_matching_kernel(REF)
        grid = np.linspace(0.4, REF.s0, 40)
        worst_res = np.max(np.abs(kernel_residual(k, REF, grid)))
        assert worst_res <= 1e-14
        worst = max(abs(i_of_s_nonlocal(k, REF, float(s), 1e-12)
                        - i_of_s(REF, float(s))) for s in grid)
        assert worst <= 1e-10

    def test_domain_check(self):
        k = SKernel(lambda x: 0.0)
        with pytest.raises(ValueError):
            i_of_s_nonlocal(k, REF, REF.s0 + 0.01)


class TestKernelResidual:
    def test_zero_kernel(self):
        k = SKernel(lambda x: 0.0, lambda x: 0.0)
        grid = np.array([0.5, 0.7, 0.9])
        res = kernel_residual(k, REF, grid)
        expected = -REF.gamma / (REF.lam * grid)
        assert np.allclose(res, expected, atol=1e-15)

    def test_vanishing_infected_limit(self):
        p = SirParams(lam=1.0, gamma=0.5, s0=0.99, i0=1e-12)
        k = SKernel(lambda x: p.gamma / (p.lam * (x + p.s0)),
                    lambda x: -p.gamma / (p.lam * (x + p.s0) ** 2))
        grid = np.linspace(0.5, 0.99, 20)
        res = kernel_residual(k, p, grid)
        assert np.max(np.abs(res)) <= 1e-11

    def test_derivative_required(self):
        k = SKernel(lambda x: 0.0)
        with pytest.raises(ValueError, match="derivative"):
            kernel_residual(k, REF, [0.5])


class TestTimeOfSusceptibleNonlocal:
    def test_zero_at_start(self):
        k = SKernel(lambda x: 0.0)
        assert time_of_s_nonlocal(k, REF, REF.s0) == 0.0

    def test_no_recovery_closed_form(self):
        k = SKernel(lambda x: 0.0)
        lam = REF.lam
        for s in (0.9, 0.6, 0.3):
            expected = (math.log(REF.s0 / (1.0 - REF.s0))
                        - math.log(s / (1.0 - s))) / lam
            assert time_of_s_nonlocal(k, REF, s, 1e-12) == pytest.approx(
                expected, abs=1e-10)

    def test_increasing_as_s_decreases(self):
        k = SKernel(lambda x: 0.0)
        times = [time_of_s_nonlocal(k, REF, s) for s in (0.9, 0.7, 0.5)]
        assert times[0] < times[1] < times[2]

    def test_extinction_error(self):
        k = SKernel(lambda x: 50.0 if x <= 0 else 0.0)
        with pytest.raises(ArithmeticError, match="extinction"):
            time_of_s_nonlocal(k, REF, 0.5)
