"""Null-controllability cost across the degeneracy parameter.

Upper estimates: the full pipeline (spectral basis -> biorthogonal family
-> moment-method control with zero target) is run and ||G||_H1 reported,
but only after the run's own oracles pass: moment residuals below
tolerance, |G(T)| < 1e-8, closed-form vs integrator deviation < 1e-6 and
controlled-mode terminal residuals < 1e-5. This bounds the true cost from
above; the moment-method control is not claimed optimal.

Certified lower bounds: from the moment identity
r_n int_0^T G e^{lambda_n t} dt = -mu0_n, Cauchy-Schwarz gives, for EVERY
admissible control,

    ||G||_L2 >= |mu0_n| / (r_n ||e^{lambda_n t}||_{L2(0,T)})
             = |mu0_n| e^{-lambda_n T} sqrt(2 lambda_n)
               / (r_n sqrt(1 - e^{-2 lambda_n T})),

computed in the damped form shown (no e^{+lambda T} is ever materialized),
and ||G||_H1 >= ||G||_L2. The bound needs no Gram system, so it stays
available arbitrarily close to alpha = 1. Near that end (alpha > 0.9) the
maximizing mode is restricted to modes whose coefficient against the
alpha = 1 limit basis is stable, matching the continuity argument that
drives the blow-up constant; elsewhere the bound maximizes over all modes.

Scaled products (1-alpha) * upper and (1-alpha) * lower trace the
two-sided 1/(1-alpha) blow-up law; ``cost_sweep`` reports both bands.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ._fmt import csv_cell
from .biortho import build_biortho
from .control import moment_residual, synthesize
from .errors import AccuracyError, ConditioningError, DomainError, UsageError
from .simulate import ORACLE_TOL, evolve
from .spectrum import (LimitBasis, MomentVector, SpectralBasis, make_basis,
                       make_limit_basis, project, unit_moment)

_MIN_RETRY_N = 4
_TERMINAL_TOL = 1e-5
_BOUNDARY_TOL = 1e-8
_LIMIT_COEFF_FLOOR = 1e-8


def resolve_u0(u0, basis: SpectralBasis) -> MomentVector:
    """Turn a u0 description into a MomentVector against ``basis``.

    Accepted forms: a MomentVector (checked against the basis), a callable
    f(x) on [0,1] (projected), or a descriptor string:

    * ``mode:<n>``   -- n-th basis vector;
    * ``poly:x(1-x)`` -- the built-in bump profile x(1-x);
    * ``csv:<path>`` -- two-column CSV (x, value), linearly interpolated
      and projected.
    """
    if isinstance(u0, MomentVector):
        if u0.alpha != basis.alpha or len(u0) != basis.n_modes:
            raise UsageError("moment vector does not match the basis "
                             f"(alpha {u0.alpha} vs {basis.alpha}, "
                             f"N {len(u0)} vs {basis.n_modes})")
        return u0
    if callable(u0):
        return project(basis, u0)
    if isinstance(u0, str):
        kind, _, arg = u0.partition(":")
        if kind == "mode":
            n = int(arg)
            if not 1 <= n <= basis.n_modes:
                raise UsageError(f"mode index {n} outside 1..{basis.n_modes}")
            return unit_moment(basis, n)
        if kind == "poly":
            if arg.replace(" ", "") != "x(1-x)":
                raise UsageError(f"unknown polynomial profile {arg!r}; "
                                 "only x(1-x) is built in")
            return project(basis, lambda x: x * (1.0 - x))
        if kind == "csv":
            # sampled data is piecewise linear; its kinks dominate the
            # quadrature error long before the interpolation error matters,
            # so the projection tolerance follows the data resolution
            data = np.loadtxt(arg, delimiter=",", ndmin=2)
            xs, vals = data[:, 0], data[:, 1]
            return project(basis, lambda x: np.interp(x, xs, vals),
                           panels=16, tol=1e-6)
        raise UsageError(f"unknown u0 descriptor {u0!r}")
    raise UsageError(f"cannot interpret u0 of type {type(u0).__name__}")


def _limit_coefficients(u0, limit_basis: LimitBasis) -> np.ndarray | None:
    """Coefficients of u0 against the alpha = 1 limit family, when u0 has
    a function form; None otherwise."""
    if callable(u0):
        return limit_basis.project(u0)
    if isinstance(u0, str):
        kind, _, arg = u0.partition(":")
        if kind == "mode":
            c = np.zeros(limit_basis.n_modes)
            c[int(arg) - 1] = 1.0
            return c
        if kind == "poly":
            return limit_basis.project(lambda x: x * (1.0 - x))
        if kind == "csv":
            data = np.loadtxt(arg, delimiter=",", ndmin=2)
            xs, vals = data[:, 0], data[:, 1]
            return limit_basis.project(lambda x: np.interp(x, xs, vals))
    return None


@dataclass(frozen=True)
class CostUpper:
    """Upper cost estimate with the mode count actually used and the
    oracle readings that gated it."""

    value: float
    n_used: int
    diagnostics: dict


def cost_upper(alpha: float, u0: MomentVector, T: float, n_modes: int,
               tol: float = 1e-6) -> CostUpper:
    """||G_alpha||_H1 of the verified moment-method null control.

    On Gram conditioning failure the mode count backs off one at a time
    (u0 coefficients truncated accordingly) down to 4; the count actually
    used is reported. Conditioning-induced accuracy failures of the family
    construction (residual floor above tolerance at high condition
    numbers) back off the same way.
    """
    if not 0.0 <= alpha < 1.0:
        raise DomainError(f"alpha must lie in [0, 1), got {alpha}")
    if len(u0) < n_modes:
        raise UsageError(f"u0 carries {len(u0)} coefficients, need {n_modes}")
    last_err = None
    for n in range(n_modes, _MIN_RETRY_N - 1, -1):
        basis = make_basis(alpha, n)
        mu0 = MomentVector(alpha=alpha, coefficients=u0.coefficients[:n],
                           basis_id=basis.basis_id)
        muT = MomentVector(alpha=alpha, coefficients=np.zeros(n),
                           basis_id=basis.basis_id)
        try:
            fam = build_biortho(basis.eigenvalues, T, tol=tol)
        except (ConditioningError, AccuracyError) as err:
            last_err = err
            continue
        signal = synthesize(basis, fam, mu0, muT)
        res = moment_residual(basis, signal, mu0, muT)
        traj = evolve(basis, mu0, signal)
        diag = {
            "moment_residual_max": float(np.max(np.abs(res))),
            "terminal_residual_max": float(np.max(np.abs(traj.terminal))),
            "boundary_terminal": abs(signal.terminal_value),
            "oracle_deviation": traj.oracle_deviation,
            "gram_condition": fam.gram_condition,
        }
        failures = []
        if diag["moment_residual_max"] > tol:
            failures.append(f"moment residual {diag['moment_residual_max']:.2e} > {tol:.0e}")
        if diag["boundary_terminal"] > _BOUNDARY_TOL:
            failures.append(f"|G(T)| = {diag['boundary_terminal']:.2e} > {_BOUNDARY_TOL:.0e}")
        if diag["oracle_deviation"] > ORACLE_TOL:
            failures.append(f"oracle deviation {diag['oracle_deviation']:.2e} > {ORACLE_TOL:.0e}")
        if diag["terminal_residual_max"] > _TERMINAL_TOL:
            failures.append(f"terminal residual {diag['terminal_residual_max']:.2e} > {_TERMINAL_TOL:.0e}")
        if failures:
            raise AccuracyError("null-control oracles failed: " + "; ".join(failures))
        return CostUpper(value=signal.norms["G_h1"], n_used=n, diagnostics=diag)
    raise ConditioningError(
        f"no admissible mode count in [{_MIN_RETRY_N}, {n_modes}] for "
        f"alpha={alpha}, T={T}: {last_err}",
        largest_admissible_n=getattr(last_err, "largest_admissible_n", None))


def cost_lower(alpha: float, u0: MomentVector, T: float,
               limit_coeffs: np.ndarray | None = None) -> float:
    """Certified lower bound on the H1 null-control cost for u0.

    Valid for every admissible control. ``limit_coeffs``, when supplied
    and alpha > 0.9, restricts the maximized modes to those with a stable
    coefficient against the limit basis.
    """
    if not 0.0 <= alpha < 1.0:
        raise DomainError(f"alpha must lie in [0, 1), got {alpha}")
    if not T > 0.0:
        raise DomainError(f"horizon must be positive, got {T}")
    basis = make_basis(alpha, len(u0))
    lam = basis.eigenvalues
    r = basis.neumann_traces
    mu = np.abs(u0.coefficients)
    bounds = mu * np.exp(-lam * T) * np.sqrt(2.0 * lam) / (
        r * np.sqrt(1.0 - np.exp(-2.0 * lam * T)))
    if alpha > 0.9 and limit_coeffs is not None:
        lc = np.abs(limit_coeffs[:len(bounds)])
        stable = lc >= _LIMIT_COEFF_FLOOR * max(np.max(lc), _LIMIT_COEFF_FLOOR)
        if np.any(stable):
            return float(np.max(bounds[stable]))
    return float(np.max(bounds)) if len(bounds) else 0.0


@dataclass(frozen=True)
class CostPoint:
    alpha: float
    upper: float | None
    lower: float
    n_used: int | None
    ok: bool
    message: str

    @property
    def product_upper(self) -> float | None:
        return None if self.upper is None else (1.0 - self.alpha) * self.upper

    @property
    def product_lower(self) -> float:
        return (1.0 - self.alpha) * self.lower


@dataclass(frozen=True)
class CostReport:
    """Per-alpha cost estimates with the (1-alpha)-scaled profile."""

    points: tuple[CostPoint, ...]
    u0_descr: str
    T: float
    n_modes: int
    normalized: bool

    @property
    def product_upper_ratio(self) -> float:
        vals = [p.product_upper for p in self.points if p.ok and p.product_upper]
        if len(vals) < 2:
            return 1.0
        return float(max(vals) / min(vals))

    def to_rows(self) -> list[dict]:
        return [
            {
                "alpha": p.alpha,
                "upper": p.upper,
                "lower": p.lower,
                "product_upper": p.product_upper,
                "product_lower": p.product_lower,
                "N_used": p.n_used,
                "ok": p.ok,
                "message": p.message,
            }
            for p in self.points
        ]

    def to_json_dict(self) -> dict:
        return {
            "u0": self.u0_descr,
            "T": self.T,
            "N": self.n_modes,
            "normalized": self.normalized,
            "product_upper_ratio": self.product_upper_ratio,
            "rows": self.to_rows(),
        }

    def save_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def save_csv(self, path, header_comment: str | None = None) -> None:
        cols = ["alpha", "upper", "lower", "product_upper", "product_lower", "N_used"]
        with open(path, "w") as fh:
            if header_comment:
                fh.write(f"# {header_comment}\n")
            fh.write(",".join(cols) + "\n")
            for row in self.to_rows():
                fh.write(",".join(csv_cell(row[c]) for c in cols) + "\n")


#: canonical unit test set standing in for the sup over all unit u0
GLOBAL_TEST_SET = ("mode:1", "mode:2", "poly:x(1-x)")


def cost_global(alpha: float, T: float, n_modes: int, tol: float = 1e-6) -> float:
    """Estimate of the global cost sup_{||u0||=1} C(alpha, u0).

    A true operator-norm computation is out of scope; the supremum is
    lower-approximated by the maximum over the fixed test set
    ``GLOBAL_TEST_SET`` of unit initial states.
    """
    best = 0.0
    basis = make_basis(alpha, n_modes)
    for descr in GLOBAL_TEST_SET:
        mu = resolve_u0(descr, basis)
        c = mu.coefficients / np.linalg.norm(mu.coefficients)
        mu = MomentVector(alpha=alpha, coefficients=c, basis_id=basis.basis_id)
        best = max(best, cost_upper(alpha, mu, T, n_modes, tol=tol).value)
    return best


def cost_sweep(alphas, u0, T: float, n_modes: int,
               normalize: bool = True, tol: float = 1e-6) -> CostReport:
    """Run upper and lower cost estimates over an alpha grid.

    ``u0`` may be anything ``resolve_u0`` accepts except a raw
    MomentVector (the coefficients must be re-projected per alpha). With
    ``normalize`` the moment vector is scaled to unit l2 norm at each
    alpha, so points measure cost per unit of initial data. Per-alpha
    failures are recorded and the sweep continues.
    """
    if isinstance(u0, MomentVector):
        raise UsageError("cost_sweep needs a function-like u0 (callable or "
                         "descriptor); moment vectors are alpha-specific")
    limit_basis = make_limit_basis(n_modes)
    limit_coeffs = _limit_coefficients(u0, limit_basis)
    points = []
    for alpha in alphas:
        alpha = float(alpha)
        basis = make_basis(alpha, n_modes)
        mu0 = resolve_u0(u0, basis)
        if normalize:
            nrm = float(np.linalg.norm(mu0.coefficients))
            if nrm == 0.0:
                raise UsageError("u0 projects to the zero vector; cannot normalize")
            mu0 = MomentVector(alpha=alpha, coefficients=mu0.coefficients / nrm,
                               basis_id=basis.basis_id)
        lower = cost_lower(alpha, mu0, T, limit_coeffs=limit_coeffs)
        try:
            up = cost_upper(alpha, mu0, T, n_modes, tol=tol)
            points.append(CostPoint(alpha=alpha, upper=up.value, lower=lower,
                                    n_used=up.n_used, ok=True, message=""))
        except (ConditioningError, AccuracyError) as err:
            points.append(CostPoint(alpha=alpha, upper=None, lower=lower,
                                    n_used=None, ok=False, message=str(err)))
    descr = u0 if isinstance(u0, str) else getattr(u0, "__name__", "callable")
    return CostReport(points=tuple(points), u0_descr=descr, T=float(T),
                      n_modes=n_modes, normalized=normalize)
