"""Command-line entry point.

Subcommands: spectrum, biortho, synthesize, simulate, cost-sweep, verify.
Configuration comes from flags or a key=value file (--config); flags win.
Artifacts are deterministic: identical configuration (including --seed)
produces byte-identical JSON/CSV, and every artifact embeds its resolved
configuration. Exit status: 0 only if every internal oracle on the invoked
path passed; 1 on numerical failure; 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import bessel
from ._fmt import csv_cell
from .biortho import bound_profile, build_biortho, eval_sigma
from .control import moment_residual, reachability_score, synthesize
from .cost import cost_sweep, resolve_u0
from .errors import DegctrlError, DomainError, UsageError
from .quadrature import panel_rule
from .simulate import ORACLE_TOL, evolve
from .spectrum import (MomentVector, gram_matrix, make_basis,
                       neumann_trace_numeric, source_coefficient,
                       source_coefficient_quadrature)

_CONFIG_KEYS = {
    "alpha": float, "alphas": str, "modes": int, "horizon": float,
    "tol": float, "u0": str, "target": str, "reach-K": float,
    "out-dir": str, "seed": int, "format": str, "grid": int,
}


def _load_config(path: str) -> dict:
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, val = line.partition("=")
            key = key.strip()
            if key not in _CONFIG_KEYS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = _CONFIG_KEYS[key](val.strip())
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="degctrl",
        description="boundary control of the degenerate heat equation "
                    "u_t = (x^a u_x)_x at the degeneracy point")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value configuration file; flags win")
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--modes", type=int, default=None)
        p.add_argument("--horizon", type=float, default=None)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--out-dir", dest="out_dir", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--format", choices=("csv", "json"), default=None)
        return p

    common(sub.add_parser("spectrum", help="eigenvalues, eigenfunction data"))
    common(sub.add_parser("biortho", help="biorthogonal family diagnostics"))
    p = common(sub.add_parser("synthesize", help="moment-method control"))
    p.add_argument("--u0", default=None)
    p.add_argument("--target", default=None)
    p.add_argument("--reach-K", dest="reach_k", type=float, default=None)
    p = common(sub.add_parser("simulate", help="evolve the controlled equation"))
    p.add_argument("--u0", default=None)
    p.add_argument("--grid", type=int, default=None)
    p = common(sub.add_parser("cost-sweep", help="cost bounds over alphas"))
    p.add_argument("--alphas", default=None)
    p.add_argument("--u0", default=None)
    common(sub.add_parser("verify", help="run the invariant battery"))
    return parser


def _resolve(args) -> dict:
    """Merge flags over config-file values over defaults."""
    cfg = {}
    if getattr(args, "config", None):
        cfg = _load_config(args.config)
    def pick(flag, key, default):
        val = getattr(args, flag, None)
        if val is not None:
            return val
        if key in cfg:
            return cfg[key]
        return default
    resolved = {
        "command": args.command,
        "alpha": pick("alpha", "alpha", None),
        "alphas": pick("alphas", "alphas", None),
        "modes": pick("modes", "modes", 8),
        "horizon": pick("horizon", "horizon", 1.0),
        "tol": pick("tol", "tol", 1e-6),
        "u0": pick("u0", "u0", None),
        "target": pick("target", "target", None),
        "reach_k": pick("reach_k", "reach-K", None),
        "out_dir": pick("out_dir", "out-dir", "."),
        "seed": pick("seed", "seed", 0),
        "format": pick("format", "format", "json"),
        "grid": pick("grid", "grid", 512),
    }
    return resolved


def _need_alpha(cfg) -> float:
    if cfg["alpha"] is None:
        raise UsageError("--alpha is required (flag or config file)")
    a = cfg["alpha"]
    if cfg["command"] == "spectrum":
        if not 0.0 <= a <= 1.0:
            raise UsageError("alpha must lie in [0, 1]")
    elif not 0.0 <= a < 1.0:
        raise UsageError("alpha must lie in [0, 1) for synthesis commands")
    return a


def _config_header(cfg) -> str:
    return json.dumps(cfg, sort_keys=True)


def _write_json(path, payload, cfg) -> None:
    payload = {"config": cfg, **payload}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _out(cfg, name) -> str:
    os.makedirs(cfg["out_dir"], exist_ok=True)
    return os.path.join(cfg["out_dir"], name)


def _cmd_spectrum(cfg) -> int:
    alpha = _need_alpha(cfg)
    n = cfg["modes"]
    if alpha == 1.0:
        from .spectrum import make_limit_basis
        lb = make_limit_basis(n)
        lams = (0.5 * lb.zeros) ** 2
        payload = {"alpha": 1.0, "limit_basis": True,
                   "zeros": lb.zeros.tolist(), "eigenvalues": lams.tolist()}
        _write_json(_out(cfg, "spectrum.json"), payload, cfg)
        print("lambda = {" + ", ".join(f"{v:.10g}" for v in lams) + "} [limit basis] | PASS")
        return 0
    basis = make_basis(alpha, n)
    payload = basis.to_json_dict()
    if cfg["format"] == "csv":
        with open(_out(cfg, "spectrum.csv"), "w") as fh:
            fh.write(f"# {_config_header(cfg)}\n")
            fh.write("n,zero,eigenvalue,norm_const,neumann_trace\n")
            for m in basis.modes:
                fh.write(",".join(csv_cell(v) for v in
                                  (m.index, m.zero, m.eigenvalue,
                                   m.norm_const, m.neumann_trace)) + "\n")
    else:
        _write_json(_out(cfg, "spectrum.json"), payload, cfg)
    gap_ok = (basis.gap["sqrt_lambda_1"] >= basis.gap["first_bound"]
              and basis.gap["min_gap"] >= basis.gap["gap_bound"])
    lams = basis.eigenvalues
    print("lambda = {" + ", ".join(f"{v:.10g}" for v in lams) + "}"
          + f" | gap certificate {'PASS' if gap_ok else 'FAIL'}")
    return 0 if gap_ok else 1


def _cmd_biortho(cfg) -> int:
    alpha = _need_alpha(cfg)
    basis = make_basis(alpha, cfg["modes"])
    fam = build_biortho(basis.eigenvalues, cfg["horizon"], tol=cfg["tol"])
    prof = bound_profile(fam) if fam.n_modes >= 3 else None
    payload = fam.to_json_dict()
    if prof is not None:
        payload["bound_profile"] = {"K": prof.K, "log_B": prof.log_B,
                                    "fit_rel_rms": prof.fit_rel_rms}
    _write_json(_out(cfg, "biortho.json"), payload, cfg)
    ok = fam.residual_max <= cfg["tol"] and np.max(np.abs(fam.zero_mean_values)) <= 1e-8
    print(f"residual_max = {fam.residual_max:.3e}, cond = {fam.gram_condition:.3e}"
          f" | {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


def _moments_for(cfg, basis, descr):
    if descr is None:
        raise UsageError("--u0 is required for this command")
    return resolve_u0(descr, basis)


def _cmd_synthesize(cfg) -> int:
    alpha = _need_alpha(cfg)
    basis = make_basis(alpha, cfg["modes"])
    fam = build_biortho(basis.eigenvalues, cfg["horizon"], tol=cfg["tol"])
    mu0 = _moments_for(cfg, basis, cfg["u0"])
    if cfg["target"] is not None:
        muT = resolve_u0(cfg["target"], basis)
        k = cfg["reach_k"] if cfg["reach_k"] is not None else bound_profile(fam).K
        score = reachability_score(muT, alpha, k)
        if not score.passed:
            print(f"target fails the reachability score (K={k:.4g}); refusing "
                  f"to synthesize", file=sys.stderr)
            return 1
    else:
        muT = MomentVector(alpha=alpha, coefficients=np.zeros(basis.n_modes),
                           basis_id=basis.basis_id)
    sig = synthesize(basis, fam, mu0, muT)
    res = moment_residual(basis, sig, mu0, muT)
    sig.save_json(_out(cfg, "control.json"))
    sig.save_csv(_out(cfg, "control_samples.csv"))
    ok = (np.max(np.abs(res)) <= cfg["tol"]
          and abs(sig.terminal_value) <= 1e-8)
    print(f"||G||_H1 = {sig.norms['G_h1']:.6g}, |G(T)| = {abs(sig.terminal_value):.2e}, "
          f"moment residual {np.max(np.abs(res)):.2e} | {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


def _cmd_simulate(cfg) -> int:
    alpha = _need_alpha(cfg)
    basis = make_basis(alpha, cfg["modes"])
    fam = build_biortho(basis.eigenvalues, cfg["horizon"], tol=cfg["tol"])
    mu0 = _moments_for(cfg, basis, cfg["u0"])
    muT = MomentVector(alpha=alpha, coefficients=np.zeros(basis.n_modes),
                       basis_id=basis.basis_id)
    sig = synthesize(basis, fam, mu0, muT)
    traj = evolve(basis, mu0, sig, grid_size=cfg["grid"])
    traj.save_csv(_out(cfg, "trajectory.csv"))
    payload = traj.summary_dict()
    _write_json(_out(cfg, "trajectory.json"), payload, cfg)
    ok = (traj.oracle_deviation <= ORACLE_TOL
          and float(np.max(np.abs(traj.terminal))) <= 1e-5)
    print(f"terminal residual {np.max(np.abs(traj.terminal)):.2e}, oracle "
          f"deviation {traj.oracle_deviation:.2e} | {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


def _cmd_cost_sweep(cfg) -> int:
    if cfg["alphas"] is not None:
        alphas = [float(s) for s in str(cfg["alphas"]).split(",") if s.strip()]
    elif cfg["alpha"] is not None:
        alphas = [cfg["alpha"]]
    else:
        raise UsageError("--alphas (or --alpha) is required for cost-sweep")
    if any(not 0.0 <= a < 1.0 for a in alphas):
        raise UsageError("all sweep alphas must lie in [0, 1)")
    u0 = cfg["u0"] if cfg["u0"] is not None else "mode:1"
    report = cost_sweep(alphas, u0, cfg["horizon"], cfg["modes"], tol=cfg["tol"])
    report.save_csv(_out(cfg, "cost_sweep.csv"), header_comment=_config_header(cfg))
    if cfg["format"] == "json":
        _write_json(_out(cfg, "cost_sweep.json"), report.to_json_dict(), cfg)
    certified = all(p.ok and p.lower <= p.upper for p in report.points)
    print(f"{len(report.points)} alphas, product_upper ratio "
          f"{report.product_upper_ratio:.3g}, lower<=upper "
          f"{'PASS' if certified else 'FAIL'}")
    return 0 if certified else 1


def _verify_checks(cfg):
    alpha = _need_alpha(cfg)
    n = cfg["modes"]
    T = cfg["horizon"]
    tol = cfg["tol"]
    rng = np.random.default_rng(cfg["seed"])
    checks = []

    def record(name, passed, metric):
        checks.append({"name": name, "passed": bool(passed), "metric": metric})

    basis = make_basis(alpha, n)
    record("gap_certificate",
           basis.gap["sqrt_lambda_1"] >= basis.gap["first_bound"] - 1e-12
           and basis.gap["min_gap"] >= basis.gap["gap_bound"] - 1e-12,
           basis.gap["min_gap"])

    resid = max(abs(bessel.bessel_j(basis.nu, m.zero).value) for m in basis.modes)
    brackets = all(b.bracket[0] - 1e-9 <= b.zero <= b.bracket[1] + 1e-9
                   for b in (bessel.bessel_zero(basis.nu, k) for k in range(1, n + 1)))
    record("zero_certification", resid < 1e-12 and brackets, resid)

    gram_dev = float(np.max(np.abs(gram_matrix(basis) - np.eye(n))))
    record("orthonormality", gram_dev < 1e-8, gram_dev)

    src_dev = max(abs(source_coefficient_quadrature(basis, k) - source_coefficient(basis, k))
                  for k in range(1, n + 1))
    record("source_coefficient", src_dev < 1e-8, src_dev)

    trace_devs = [abs(neumann_trace_numeric(basis, 1, xs) - basis.modes[0].neumann_trace)
                  for xs in (1e-3, 1e-4, 1e-5)]
    record("neumann_trace_convergence",
           trace_devs[2] < trace_devs[1] < trace_devs[0], trace_devs[2])

    fam = build_biortho(basis.eigenvalues, T, tol=tol)
    zm = float(np.max(np.abs(fam.zero_mean_values)))
    record("biorthogonality", fam.residual_max <= tol, fam.residual_max)
    record("zero_mean", zm <= 1e-8, zm)

    # min-norm: constraint-respecting perturbations cannot shrink the norm
    mids = 0.5 * (fam.lambdas[:-1] + fam.lambdas[1:])
    extra = np.concatenate([mids, [fam.lambdas[-1] * 1.5]])
    # cross-Gram of the family exponents against the perturbation exponents
    A = np.stack([(1.0 - np.exp(-(lm + extra) * T)) / (lm + extra)
                  for lm in fam.lambdas_full])
    Gp = np.stack([(1.0 - np.exp(-(mi + extra) * T)) / (mi + extra)
                   for mi in extra])
    ok_min = True
    worst = 0.0
    for idx in (1, max(1, fam.n_modes // 2)):
        a_vec = fam.coeffs_reflected[:, idx - 1]
        base = fam.sigma_tilde_norm(idx) ** 2
        for _ in range(4):
            q = rng.standard_normal(len(extra))
            q -= np.linalg.lstsq(A, A @ q, rcond=None)[0]
            grown = base + 2.0 * a_vec @ (A @ q) + q @ Gp @ q
            worst = max(worst, (base - grown) / base)
            ok_min &= grown >= base * (1.0 - 1e-8)
    record("min_norm_optimality", ok_min, worst)

    mu0 = resolve_u0(cfg["u0"] or "mode:1", basis)
    muT = MomentVector(alpha=alpha, coefficients=np.zeros(n), basis_id=basis.basis_id)
    sig = synthesize(basis, fam, mu0, muT)
    res = moment_residual(basis, sig, mu0, muT)
    traj = evolve(basis, mu0, sig, grid_size=cfg["grid"])
    record("moment_residuals", float(np.max(np.abs(res))) <= tol,
           float(np.max(np.abs(res))))
    record("boundary_return", abs(sig.terminal_value) <= 1e-8,
           abs(sig.terminal_value))
    record("terminal_state", float(np.max(np.abs(traj.terminal))) <= 1e-5,
           float(np.max(np.abs(traj.terminal))))
    record("propagation_oracle", traj.oracle_deviation <= ORACLE_TOL,
           traj.oracle_deviation)

    # replay int sigma_m e^{lambda_m t} dt = 1 by quadrature, damped split
    t, w = panel_rule(0.0, T, 16, 32)
    replay = 0.0
    for m in range(1, min(n, 4) + 1):
        lam_m = fam.lambdas[m - 1]
        damped = np.dot(w, eval_sigma(fam, m, t) * np.exp(lam_m * (t - T)))
        replay = max(replay, abs(damped * np.exp(lam_m * T) - 1.0))
    record("sigma_replay", replay <= tol, float(replay))
    return checks


def _cmd_verify(cfg) -> int:
    checks = _verify_checks(cfg)
    all_ok = all(c["passed"] for c in checks)
    _write_json(_out(cfg, "verify.json"),
                {"checks": checks, "all_passed": all_ok}, cfg)
    for c in checks:
        print(f"{c['name']:26s} {'PASS' if c['passed'] else 'FAIL'} "
              f"(metric {c['metric']:.3e})")
    print(f"verify: {'PASS' if all_ok else 'FAIL'} "
          f"({sum(c['passed'] for c in checks)}/{len(checks)} checks)")
    return 0 if all_ok else 1


_COMMANDS = {
    "spectrum": _cmd_spectrum,
    "biortho": _cmd_biortho,
    "synthesize": _cmd_synthesize,
    "simulate": _cmd_simulate,
    "cost-sweep": _cmd_cost_sweep,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve(args)
        return _COMMANDS[args.command](cfg)
    except (UsageError, DomainError) as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 2
    except DegctrlError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 1
    except FileNotFoundError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
