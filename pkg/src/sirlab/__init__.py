"""sirlab: a numerical laboratory for the classic SIR epidemic model and
its distributed-recovery (nonlocal) variant.

Modules
-------
numerics           adaptive quadrature, Brent roots, bumps, peak detection
classic_sir        RK4 reference, exact I(S) relation, implicit time, SIS
tau_scale          closed forms in the rescaled clock, horizon, time map
nonlocal_time      Volterra memory model and its S-parameterized form
tau_model          memory kernels in the rescaled clock, maximum principle
s_domain           exponential clock variable, invertible kernel transform
peak_construction  multi-peak profiles, mollification, verification
cli                command-line front end, CSV export, invariant suite
"""

from .classic_sir import (SirParams, SisParams, Trajectory, simulate_rk4,
                          i_of_s, time_of_s, sis_closed_form)
from .numerics import (GridFunction, Peak, integrate_adaptive,
                       find_root_bracketed, finite_difference, bump_phi0,
                       bump_phi1, detect_peaks)
from .nonlocal_time import (CdfKernel, SKernel, exponential_kernel,
                            solve_volterra, i_of_s_nonlocal, kernel_residual,
                            time_of_s_nonlocal)
from .peak_construction import (GridSpec, Mode, PeakSpec, VerificationReport,
                                construct_base_f, construct_infinite_truncated,
                                construct_precise, construct_rough,
                                mollify_g_monotone, verify_profile)
from .s_domain import (SProfile, case3_profiles, forward_map, inverse_map,
                       g_prime_of_f, s_of_tau, tau_of_s)
from .tau_model import (AdmissibleKernel, HomogeneousKernel,
                        exponential_tau_kernel, i1_exponential, i1_general,
                        max_principle_check, psi_time_map)
from .tau_scale import (Case, TauSolution, classify_case, closed_form,
                        reconstruct_trajectory, tau_infinity, time_of_tau)

__version__ = "0.1.0"
