"""Command-line front end: scenario configuration, CSV export, and the
end-to-end invariant verification pipeline.

Subcommands: classic, tau, sis, nonlocal, tau-model, sdomain,
peaks {rough|precise|infinite}, verify.  Outputs are deterministic:
identical configuration produces byte-identical files.  Exit codes:
0 success, 1 validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import classic_sir, nonlocal_time, numerics, peak_construction
from . import s_domain, tau_model, tau_scale
from .classic_sir import SirParams, SisParams

__all__ = ["main", "run", "write_csv", "export_csv", "load_scenario",
           "run_invariant_suite"]


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_csv(path: str, header, columns) -> None:
    """Write columns as CSV: header row, 17 significant digits, LF line
    endings, no trailing whitespace."""
    columns = [np.asarray(c, dtype=float) for c in columns]
    n = len(columns[0])
    if any(len(c) != n for c in columns):
        raise ValueError("columns must have equal length")
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def export_trajectory(traj, path: str) -> None:
    write_csv(path, ("t", "S", "I", "R"), [traj.t, traj.s, traj.i, traj.r])


def export_tau_solution(taus, ts, s1, i1, path: str) -> None:
    write_csv(path, ("tau", "t", "S1", "I1"), [taus, ts, s1, i1])


def export_csv(obj, path: str, s_grid=None) -> None:
    """Serialize a trajectory (t,S,I,R) or a profile (s,value) to CSV.

    Profiles are sampled representations, so exporting one requires the
    sampling grid.
    """
    from .classic_sir import Trajectory
    from .s_domain import SProfile
    if isinstance(obj, Trajectory):
        export_trajectory(obj, path)
    elif isinstance(obj, SProfile):
        if s_grid is None:
            raise ValueError("profile export requires a sampling grid")
        write_csv(path, ("s", "value"),
                  [np.asarray(s_grid, dtype=float), obj.values(s_grid)])
    else:
        raise TypeError(f"cannot export objects of type "
                        f"{type(obj).__name__}")


def load_scenario(path: str) -> dict:
    """Flat JSON key/value scenario mirroring the flag names."""
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: scenario must be a flat JSON object")
    return data


def _sir_params(ns) -> SirParams:
    return SirParams(lam=ns.lam, gamma=ns.gamma, s0=ns.s0, i0=ns.i0)


def _add_sir_flags(sub, gamma_default=0.5):
    sub.add_argument("--lambda", dest="lam", type=float, default=1.0)
    sub.add_argument("--gamma", type=float, default=gamma_default)
    sub.add_argument("--s0", type=float, default=0.99)
    sub.add_argument("--i0", type=float, default=0.01)


def _add_common(sub):
    sub.add_argument("--out", type=str, default=None)
    sub.add_argument("--tol", type=float, default=1e-10)
    sub.add_argument("--seed", type=int, default=None,
                     help="accepted and ignored; all algorithms are "
                     "deterministic")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sirlab",
        description="Numerical laboratory for classic and distributed-"
        "recovery SIR models")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("classic", help="fixed-step RK4 trajectory")
    _add_sir_flags(p)
    p.add_argument("--t-max", type=float, default=25.0)
    p.add_argument("--dt", type=float, default=1e-3)
    _add_common(p)

    p = subs.add_parser("tau", help="rescaled-clock closed form, mapped "
                        "back to physical time")
    _add_sir_flags(p)
    p.add_argument("--n-nodes", type=int, default=2000)
    p.add_argument("--cap", type=float, default=0.999,
                   help="fraction of the clock horizon to cover")
    _add_common(p)

    p = subs.add_parser("sis", help="closed-form SIS solution in the "
                        "rescaled clock")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--s0", type=float, default=0.99)
    p.add_argument("--tau-max", type=float, default=10.0)
    p.add_argument("--n-nodes", type=int, default=500)
    _add_common(p)

    p = subs.add_parser("nonlocal", help="memory-kernel model in physical "
                        "time (product-trapezoidal Volterra solve)")
    _add_sir_flags(p)
    p.add_argument("--kernel", type=str, default="exponential:gamma=0.5",
                   help="'exponential:gamma=<x>' or 'file:<csv>'")
    p.add_argument("--h", type=float, default=1e-3)
    p.add_argument("--t-max", type=float, default=25.0)
    _add_common(p)

    p = subs.add_parser("tau-model", help="memory-kernel model in the "
                        "rescaled clock")
    _add_sir_flags(p, gamma_default=1.0)
    p.add_argument("--kernel", type=str, default="exp-tau:A=0.5",
                   help="'exp-tau:A=<x>'")
    p.add_argument("--tau-max", type=float, default=10.0)
    p.add_argument("--n-nodes", type=int, default=400)
    _add_common(p)

    p = subs.add_parser("sdomain", help="profiles and transforms in the "
                        "exponential clock variable")
    p.add_argument("--profile", type=str, default="case3-f",
                   help="built-in name or 'file:<csv>'")
    p.add_argument("--map", dest="map_kind", type=str, default="none",
                   choices=("none", "forward", "inverse"))
    p.add_argument("--beta", type=float, default=2.0)
    p.add_argument("--s-max", type=float, default=10.0)
    p.add_argument("--n", type=int, default=1000)
    _add_common(p)

    p = subs.add_parser("peaks", help="constructive multi-peak profiles")
    modes = p.add_subparsers(dest="mode", required=True)

    m = modes.add_parser("rough")
    m.add_argument("--beta", type=float, required=True)
    m.add_argument("--m0", type=int, default=1)
    m.add_argument("--theta", type=float, default=0.5)
    m.add_argument("--eta0", type=float, default=0.1)
    m.add_argument("--epsilon", type=float, default=None)
    m.add_argument("--s-max", type=float, default=None)
    m.add_argument("--n", type=int, default=2000)
    m.add_argument("--report", type=str, default=None)
    _add_common(m)

    m = modes.add_parser("precise")
    m.add_argument("--beta", type=float, required=True)
    m.add_argument("--window", type=str, required=True, help="M1:M2")
    m.add_argument("--at", type=str, required=True,
                   help="comma-separated peak locations")
    m.add_argument("--theta", type=float, default=None)
    m.add_argument("--eta0", type=float, default=None)
    m.add_argument("--delta0", type=float, default=None)
    m.add_argument("--s-max", type=float, default=None)
    m.add_argument("--n", type=int, default=2000)
    m.add_argument("--report", type=str, default=None)
    _add_common(m)

    m = modes.add_parser("infinite")
    m.add_argument("--beta", type=float, required=True)
    m.add_argument("--window", type=str, required=True, help="M1:M2")
    m.add_argument("--s-inf", type=float, required=True)
    m.add_argument("--n-bumps", type=int, required=True)
    m.add_argument("--theta", type=float, default=None)
    m.add_argument("--eta0", type=float, default=None)
    m.add_argument("--s-max", type=float, default=None)
    m.add_argument("--n", type=int, default=2000)
    m.add_argument("--report", type=str, default=None)
    _add_common(m)

    p = subs.add_parser("verify", help="run the aggregated invariant suite")
    p.add_argument("--scenario", type=str, default=None,
                   help="flat JSON scenario file; flags override its values")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--s0", type=float, default=None)
    p.add_argument("--i0", type=float, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--h", type=float, default=None)
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)

    return parser


def _parse_window(text: str) -> tuple[float, float]:
    a, _, b = text.partition(":")
    return float(a), float(b)


# ---------------------------------------------------------------------------
# subcommand bodies


def _cmd_classic(ns) -> int:
    traj = classic_sir.simulate_rk4(_sir_params(ns), ns.t_max, ns.dt)
    traj.validate()
    if ns.out:
        export_trajectory(traj, ns.out)
    print(f"classic: {len(traj)} nodes, final S={traj.s[-1]:.6g} "
          f"I={traj.i[-1]:.6g}")
    return 0


def _cmd_tau(ns) -> int:
    p = _sir_params(ns)
    traj = tau_scale.reconstruct_trajectory(p, ns.n_nodes, ns.cap)
    traj.validate()
    horizon = tau_scale.tau_infinity(p)
    taus = np.linspace(0.0, ns.cap * horizon, ns.n_nodes)
    if ns.out:
        export_tau_solution(taus, traj.t, traj.s, traj.i, ns.out)
    case = tau_scale.classify_case(p)
    print(f"tau: horizon {horizon:.12g}, {case.name}, covered t up to "
          f"{traj.t[-1]:.6g}")
    return 0


def _cmd_sis(ns) -> int:
    p = SisParams(lam=ns.lam, gamma=ns.gamma, mu=ns.mu, s0=ns.s0)
    taus = np.linspace(0.0, ns.tau_max, ns.n_nodes)
    pairs = [classic_sir.sis_closed_form(p, float(t)) for t in taus]
    s = [a for a, _ in pairs]
    i = [b for _, b in pairs]
    if ns.out:
        write_csv(ns.out, ("tau", "S", "I"), [taus, s, i])
    print(f"sis: limit S = {(p.mu + p.gamma) / p.lam:.6g}")
    return 0


def _cmd_nonlocal(ns) -> int:
    kernel = nonlocal_time.cdf_kernel_from_spec(ns.kernel)
    traj = nonlocal_time.solve_volterra(_sir_params(ns), kernel, ns.h,
                                        ns.t_max)
    traj.validate()
    if ns.out:
        export_trajectory(traj, ns.out)
    print(f"nonlocal[{kernel.name}]: {len(traj)} nodes, final "
          f"S={traj.s[-1]:.6g} I={traj.i[-1]:.6g}")
    return 0


def _cmd_tau_model(ns) -> int:
    p = _sir_params(ns)
    kernel = tau_model.tau_kernel_from_spec(ns.kernel)
    taus = np.linspace(0.0, ns.tau_max, ns.n_nodes)
    i1 = np.array([tau_model.i1_general(p, kernel, float(t), ns.tol)
                   for t in taus])
    s1 = p.s0 * np.exp(-p.lam * taus)
    ts = tau_model.psi_grid(p, kernel, taus)
    if ns.out:
        export_tau_solution(taus, ts, s1, i1, ns.out)
    print(f"tau-model[{kernel.name}]: I1 final {i1[-1]:.6g}, "
          f"t final {ts[-1]:.6g}")
    return 0


def _cmd_sdomain(ns) -> int:
    if ns.profile.startswith("file:"):
        prof = s_domain.load_profile_csv(ns.profile[len("file:"):])
    else:
        prof = s_domain.builtin_profile(ns.profile)
    if ns.map_kind == "forward":
        prof = s_domain.forward_profile(prof, ns.beta, ns.tol)
    elif ns.map_kind == "inverse":
        prof = s_domain.inverse_profile(prof, ns.beta, ns.tol)
    grid = np.geomspace(1.0, ns.s_max, ns.n)
    if ns.out:
        write_csv(ns.out, ("s", "value"), [grid, prof.values(grid)])
    print(f"sdomain[{prof.name}]: sampled {ns.n} nodes on [1, {ns.s_max:g}]")
    return 0


def _cmd_peaks(ns) -> int:
    if ns.mode == "rough":
        spec = peak_construction.PeakSpec.rough(
            beta=ns.beta, m0=ns.m0, theta=ns.theta, eta0=ns.eta0,
            epsilon=ns.epsilon)
        prof = peak_construction.construct_rough(spec)
    elif ns.mode == "precise":
        spec = peak_construction.PeakSpec.precise(
            beta=ns.beta, window=_parse_window(ns.window),
            peaks=[float(x) for x in ns.at.split(",")],
            theta=ns.theta, eta0=ns.eta0, delta0=ns.delta0)
        prof = peak_construction.construct_precise(spec)
    else:
        spec = peak_construction.PeakSpec.infinite(
            beta=ns.beta, window=_parse_window(ns.window), s_inf=ns.s_inf,
            n_bumps=ns.n_bumps, theta=ns.theta, eta0=ns.eta0)
        prof = peak_construction.construct_infinite_truncated(spec)

    s_max = ns.s_max
    if s_max is None:
        feats = [p for p in prof.meta.get("points", ())] + [1.0]
        s_max = 10.0 * max(feats)
    n_feature = 9 if ns.mode == "infinite" else 100
    report = peak_construction.verify_profile(
        prof, ns.beta,
        peak_construction.GridSpec(s_max=s_max, n_feature=n_feature))
    if ns.out:
        grid = np.geomspace(1.0, s_max, ns.n)
        write_csv(ns.out, ("s", "value"), [grid, prof.values(grid)])
    if ns.report:
        with open(ns.report, "w", newline="") as fh:
            fh.write(report.to_text())
    ok = report.inequality_margin < 0 and report.g_monotone_margin < 0
    print(f"peaks {ns.mode}: {len(report.peaks_found)} peaks, "
          f"inequality_margin={report.inequality_margin:.3e}, "
          f"{'ok' if ok else 'FAILED'}")
    return 0 if ok else 2


# ---------------------------------------------------------------------------
# aggregated invariant suite


def run_invariant_suite(p: SirParams, dt: float = 1e-3, h: float = 2e-3,
                        t_max: float = 20.0, tol: float = 1e-10,
                        log=print) -> list[tuple[str, bool, str]]:
    """Fast pass over every module's invariants.  Returns one
    (name, ok, detail) triple per check."""
    results = []

    def check(name, fn):
        try:
            detail = fn()
            results.append((name, True, detail or ""))
            log(f"  [ok]   {name} {detail or ''}".rstrip())
        except Exception as exc:  # noqa: BLE001 - suite reports, not raises
            results.append((name, False, str(exc)))
            log(f"  [FAIL] {name}: {exc}")

    def quadrature():
        q = numerics.integrate_adaptive(lambda x: x, 0.0, 1.0, tol)
        assert abs(q - 0.5) < 1e-14
        q = numerics.integrate_adaptive(lambda x: 1.0 / x, 1.0, 2.0, tol)
        assert abs(q - math.log(2.0)) < 1e-12
        return f"ln2 residual {abs(q - math.log(2.0)):.1e}"

    def roots():
        x = numerics.find_root_bracketed(lambda u: u * u - 2.0, 1.0, 2.0)
        assert abs(x - math.sqrt(2.0)) < 1e-12 and 1.0 <= x <= 2.0

    def bumps():
        assert numerics.bump_phi0(0.0) == 1.0
        assert numerics.bump_phi0(1.5) == 0.0
        assert abs(numerics.bump_phi1(0.0) - math.exp(-1.0)) < 1e-15
        for x in (0.2, 0.5, 0.9):
            assert numerics.bump_phi0(x) == numerics.bump_phi0(-x)

    def classic():
        traj = classic_sir.simulate_rk4(p, t_max, dt)
        defect = traj.conservation_defect()
        assert defect <= 1e-9, f"conservation defect {defect:.2e}"
        rel = max(abs(traj.i[k] - classic_sir.i_of_s(p, traj.s[k]))
                  for k in range(0, len(traj), max(1, len(traj) // 200)))
        assert rel <= 1e-6, f"I(S) relation defect {rel:.2e}"
        return f"conservation {defect:.1e}, I(S) {rel:.1e}"

    def tau_recon():
        horizon = tau_scale.tau_infinity(p)
        res = p.s0 + p.i0 - p.s0 * math.exp(-p.lam * horizon) \
            - p.gamma * horizon
        assert abs(res) <= 1e-12, f"horizon residual {res:.2e}"
        traj = tau_scale.reconstruct_trajectory(p, 400, 0.99)
        ref = classic_sir.simulate_rk4(p, float(traj.t[-1]) + dt, dt)
        ds = np.max(np.abs(traj.s - np.interp(traj.t, ref.t, ref.s)))
        assert ds <= 1e-5, f"reconstruction error {ds:.2e}"
        return f"residual {abs(res):.1e}, recon error {ds:.1e}"

    def volterra():
        kernel = nonlocal_time.exponential_kernel(p.gamma)
        traj = nonlocal_time.solve_volterra(p, kernel, h, t_max)
        assert np.all(traj.i > 0), "positivity violated"
        assert np.all(np.diff(traj.s) <= 0), "S not nonincreasing"
        ref = classic_sir.simulate_rk4(p, t_max, dt)
        err = np.max(np.abs(traj.s - np.interp(traj.t, ref.t, ref.s)))
        assert err <= 1e-4, f"classic equivalence error {err:.2e}"
        return f"equivalence error {err:.1e}"

    def tau_kernel():
        A = 0.5 * p.lam
        kernel = tau_model.exponential_tau_kernel(A)
        taus = np.linspace(0.0, 10.0, 21)
        worst = max(abs(tau_model.i1_general(p, kernel, float(t), 1e-10)
                        - tau_model.i1_exponential(p, A, float(t)))
                    for t in taus)
        assert worst <= 1e-8, f"closed-form disagreement {worst:.2e}"
        rep = tau_model.max_principle_check(p, kernel,
                                            np.linspace(0.0, 10.0, 101),
                                            1e-10)
        assert rep.passed(), f"max principle margin {rep.min_margin:.2e}"
        return f"oracle {worst:.1e}, margin {rep.min_margin:.1e}"

    def case3():
        g, f = s_domain.case3_profiles()
        grid = np.linspace(1.0, 8.0, 101)
        worst = max(abs(s_domain.forward_map(g, 2.0, float(s), 1e-11)
                        - f.value(float(s))) for s in grid)
        assert worst <= 1e-9, f"forward map vs closed form {worst:.2e}"
        rt = max(abs(s_domain.inverse_map(
            s_domain.forward_profile(g, 2.0, 1e-11), 2.0, float(s), 1e-11)
            - g.value(float(s))) for s in grid[:: 5])
        assert rt <= 1e-8, f"round trip {rt:.2e}"
        dense = np.arange(1.0, 10.0 + 5e-4, 1e-3)
        peaks = numerics.detect_peaks(
            numerics.GridFunction(dense, f.values(dense)))
        assert len(peaks) == 2, f"expected 2 peaks, found {len(peaks)}"
        return f"forward {worst:.1e}, roundtrip {rt:.1e}, 2 peaks"

    def construction():
        spec = peak_construction.PeakSpec.precise(
            beta=2.0, window=(2.0, 6.0), peaks=(3.0, 4.5))
        prof = peak_construction.construct_precise(spec)
        rep = peak_construction.verify_profile(
            prof, 2.0, peak_construction.GridSpec(s_max=60.0,
                                                  n_geometric=4000))
        assert rep.inequality_margin < 0, \
            f"inequality margin {rep.inequality_margin:.2e}"
        assert rep.g_monotone_margin < 0, \
            f"kernel slope {rep.g_monotone_margin:.2e}"
        locs = sorted(pk.location for pk in rep.peaks_found)
        assert len(locs) == 2 and abs(locs[0] - 3.0) < 1e-3 \
            and abs(locs[1] - 4.5) < 1e-3, f"peaks at {locs}"
        return f"margin {rep.inequality_margin:.1e}"

    check("numerics.quadrature", quadrature)
    check("numerics.roots", roots)
    check("numerics.bumps", bumps)
    check("classic_sir.invariants", classic)
    check("tau_scale.reconstruction", tau_recon)
    check("nonlocal_time.volterra", volterra)
    check("tau_model.closed_forms", tau_kernel)
    check("s_domain.case3", case3)
    check("peak_construction.precise", construction)
    return results


_VERIFY_DEFAULTS = {"lambda": 1.0, "gamma": 0.5, "s0": 0.99, "i0": 0.01,
                    "dt": 1e-3, "h": 2e-3, "t_max": 20.0, "tol": 1e-10}


def _cmd_verify(ns) -> int:
    # precedence: explicit flag > scenario file > built-in default
    merged = dict(_VERIFY_DEFAULTS)
    if ns.scenario:
        for key, val in load_scenario(ns.scenario).items():
            if key not in merged:
                raise ValueError(f"unknown scenario key {key!r}; "
                                 f"valid keys: {sorted(merged)}")
            merged[key] = val
    flags = {"lambda": ns.lam, "gamma": ns.gamma, "s0": ns.s0, "i0": ns.i0,
             "dt": ns.dt, "h": ns.h, "t_max": ns.t_max, "tol": ns.tol}
    merged.update({k: v for k, v in flags.items() if v is not None})
    for key in ("dt", "h", "t_max", "tol"):
        if not merged[key] > 0:
            raise ValueError(f"scenario value {key}={merged[key]} must be "
                             "positive")
    p = SirParams(lam=merged["lambda"], gamma=merged["gamma"],
                  s0=merged["s0"], i0=merged["i0"])
    print(f"verify: lambda={p.lam:g} gamma={p.gamma:g} s0={p.s0:g} "
          f"i0={p.i0:g}")
    results = run_invariant_suite(p, dt=merged["dt"], h=merged["h"],
                                  t_max=merged["t_max"], tol=merged["tol"])
    failures = [name for name, ok, _ in results if not ok]
    print(f"verify: {len(results) - len(failures)}/{len(results)} checks "
          "passed")
    return 0 if not failures else 2


def run(argv=None) -> int:
    """Parse argv and dispatch; returns the process exit code."""
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; the contract is exit 1
        return 0 if exc.code in (0, None) else 1
    handlers = {
        "classic": _cmd_classic,
        "tau": _cmd_tau,
        "sis": _cmd_sis,
        "nonlocal": _cmd_nonlocal,
        "tau-model": _cmd_tau_model,
        "sdomain": _cmd_sdomain,
        "peaks": _cmd_peaks,
        "verify": _cmd_verify,
    }
    try:
        return handlers[ns.command](ns)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ArithmeticError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
