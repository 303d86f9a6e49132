"""Sturm-Liouville spectral data for y |-> -(x^a y')' on (0,1), Dirichlet.

For a degeneracy exponent a in [0, 1) set

    nu    = (1-a)/(2-a)   in (0, 1/2],
    kappa = (2-a)/2,

and let j_{nu,n} be the positive zeros of J_nu. The eigenpairs are

    lambda_n = kappa^2 j_{nu,n}^2,
    Phi_n(x) = C_n x^{(1-a)/2} J_nu(j_{nu,n} x^kappa),
    C_n      = sqrt(2 kappa) / |J'_nu(j_{nu,n})|,

with ||Phi_n||_{L2(0,1)} = 1. At a = 0 this reduces to the classical
lambda_n = (n pi)^2, Phi_n = sqrt(2) sin(n pi x). Each mode also carries its
generalized Neumann trace at the degeneracy point,

    r_n = lim_{x->0} x^a Phi_n'(x)
        = (1-a) sqrt(2 kappa) / (2^nu Gamma(nu+1)) * j^nu / |J'_nu(j)| > 0,

which is the coupling constant between a Dirichlet boundary control at x = 0
and mode n, and satisfies r_n ~ rho * j^{nu + 1/2} for large n.

All integrals against eigenfunctions substitute y = x^kappa, which turns
Phi_m Phi_n dx into the entire integrand y J_nu(j_m y) J_nu(j_n y) dy and
removes the x^{(1-a)/2} endpoint behaviour.

The square-root eigenvalue ladder is uniformly separated over a in [0, 1):
sqrt(lambda_1) >= 3 pi / 8 and consecutive gaps are >= 7 pi / 16. Both
facts are rechecked numerically on every constructed basis and recorded in
``SpectralBasis.gap``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import bessel
from .errors import DomainError, QuadratureError, UsageError
from .quadrature import panel_rule

GAP_FIRST = 3.0 * np.pi / 8.0
GAP_CONSECUTIVE = 7.0 * np.pi / 16.0

DEFAULT_PANELS = 8
DEFAULT_NODES = 64


@dataclass(frozen=True)
class Mode:
    """One eigenmode: zero, eigenvalue, normalization, Neumann trace."""

    index: int
    zero: float
    eigenvalue: float
    norm_const: float
    neumann_trace: float


@dataclass(frozen=True)
class SpectralBasis:
    """First N eigenmodes of -(x^a y')' with Dirichlet conditions."""

    alpha: float
    nu: float
    kappa: float
    modes: tuple[Mode, ...]
    p0: float                 # p(0) = int_0^1 s^{-a} ds = 1/(1-a)
    gap: dict = field(compare=False)

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    @property
    def zeros(self) -> np.ndarray:
        return np.array([m.zero for m in self.modes])

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([m.eigenvalue for m in self.modes])

    @property
    def norm_consts(self) -> np.ndarray:
        return np.array([m.norm_const for m in self.modes])

    @property
    def neumann_traces(self) -> np.ndarray:
        return np.array([m.neumann_trace for m in self.modes])

    @property
    def basis_id(self) -> str:
        return f"alpha={self.alpha!r};N={self.n_modes}"

    def to_json_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "nu": self.nu,
            "kappa": self.kappa,
            "p0": self.p0,
            "modes": [
                {
                    "n": m.index,
                    "zero": m.zero,
                    "eigenvalue": m.eigenvalue,
                    "norm_const": m.norm_const,
                    "neumann_trace": m.neumann_trace,
                }
                for m in self.modes
            ],
        }

    def save_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


@dataclass(frozen=True)
class MomentVector:
    """Fourier-Bessel coefficients of a state against a SpectralBasis."""

    alpha: float
    coefficients: np.ndarray
    basis_id: str

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float)
        if not np.all(np.isfinite(c)):
            raise UsageError("moment coefficients must be finite")
        object.__setattr__(self, "coefficients", c)

    def __len__(self) -> int:
        return len(self.coefficients)


def unit_moment(basis: SpectralBasis, n: int) -> MomentVector:
    """Moment vector of the basis vector e_n (1-based)."""
    c = np.zeros(basis.n_modes)
    c[n - 1] = 1.0
    return MomentVector(alpha=basis.alpha, coefficients=c, basis_id=basis.basis_id)


def make_basis(alpha: float, n_modes: int) -> SpectralBasis:
    """Build the first ``n_modes`` eigenmodes for a given alpha in [0, 1)."""
    alpha = float(alpha)
    if not 0.0 <= alpha < 1.0:
        raise DomainError(f"alpha must lie in [0, 1), got {alpha}")
    if n_modes < 1:
        raise DomainError(f"need at least one mode, got {n_modes}")
    nu = (1.0 - alpha) / (2.0 - alpha)
    kappa = (2.0 - alpha) / 2.0
    trace_pref = ((1.0 - alpha) * np.sqrt(2.0 * kappa)
                  / (2.0**nu * bessel.gamma_fn(nu + 1.0)))
    modes = []
    for n in range(1, n_modes + 1):
        rec = bessel.bessel_zero(nu, n)
        j = rec.zero
        jp = abs(bessel.bessel_j_prime(nu, j))
        modes.append(Mode(
            index=n,
            zero=j,
            eigenvalue=kappa**2 * j**2,
            norm_const=np.sqrt(2.0 * kappa) / jp,
            neumann_trace=trace_pref * j**nu / jp,
        ))
    sq = kappa * np.array([m.zero for m in modes])
    gaps = np.diff(sq)
    gap = {
        "sqrt_lambda_1": float(sq[0]),
        "first_bound": GAP_FIRST,
        "min_gap": float(np.min(gaps)) if len(gaps) else float("inf"),
        "gap_bound": GAP_CONSECUTIVE,
    }
    if sq[0] < GAP_FIRST - 1e-12 or (len(gaps) and np.min(gaps) < GAP_CONSECUTIVE - 1e-12):
        raise DomainError(f"uniform gap certificate violated: {gap}")
    return SpectralBasis(alpha=alpha, nu=nu, kappa=kappa, modes=tuple(modes),
                         p0=1.0 / (1.0 - alpha), gap=gap)


def eval_eigenfunction(basis: SpectralBasis, n: int, x) -> float | np.ndarray:
    """Phi_n(x) = C_n x^{(1-a)/2} J_nu(j_n x^kappa) on [0, 1]."""
    if not 1 <= n <= basis.n_modes:
        raise UsageError(f"mode index {n} outside 1..{basis.n_modes}")
    mode = basis.modes[n - 1]
    scalar = np.isscalar(x)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any((x < 0.0) | (x > 1.0)):
        raise DomainError("eigenfunctions are defined on [0, 1]")
    vals = np.zeros_like(x)
    pos = x > 0.0
    if np.any(pos):
        xp = x[pos]
        vals[pos] = (mode.norm_const * xp ** ((1.0 - basis.alpha) / 2.0)
                     * bessel.bessel_j_many(basis.nu, mode.zero * xp**basis.kappa))
    return float(vals[0]) if scalar else vals


def _phi_scalar_precise(basis: SpectralBasis, n: int, x: float) -> float:
    """Scalar Phi_n through the certified series evaluator."""
    if x <= 0.0:
        return 0.0
    mode = basis.modes[n - 1]
    ev = bessel.bessel_j(basis.nu, mode.zero * x**basis.kappa)
    return mode.norm_const * x ** ((1.0 - basis.alpha) / 2.0) * ev.value


def _substituted_rule(basis: SpectralBasis, panels: int, nodes: int):
    """Quadrature data in the substituted variable y = x^kappa.

    int_0^1 f(x) Phi_n(x) dx
        = (C_n / kappa) int_0^1 f(y^{1/kappa}) J_nu(j_n y) y^{1/(2-a)} dy.
    """
    y, w = panel_rule(0.0, 1.0, panels, nodes)
    x = y ** (1.0 / basis.kappa)
    common = w * y ** (1.0 / (2.0 - basis.alpha)) / basis.kappa
    return y, x, common


def project(basis: SpectralBasis, f, panels: int = DEFAULT_PANELS,
            nodes: int = DEFAULT_NODES, tol: float = 1e-8) -> MomentVector:
    """Fourier-Bessel coefficients mu_n = int_0^1 f Phi_n dx.

    ``f`` must accept an ndarray of points in [0, 1]. The quadrature error
    is estimated by doubling the panel count; estimates above ``tol``
    raise ``QuadratureError`` rather than passing silently.
    """
    coarse = _project_once(basis, f, panels, nodes)
    fine = _project_once(basis, f, 2 * panels, nodes)
    err = float(np.max(np.abs(fine - coarse)))
    if err > tol:
        raise QuadratureError(
            f"projection quadrature did not converge: estimated error "
            f"{err:.3e} > tol {tol:.1e} (panels={panels}, nodes={nodes})")
    return MomentVector(alpha=basis.alpha, coefficients=fine,
                        basis_id=basis.basis_id)


def _project_once(basis, f, panels, nodes) -> np.ndarray:
    y, x, common = _substituted_rule(basis, panels, nodes)
    fx = np.asarray(f(x), dtype=float) * common
    out = np.empty(basis.n_modes)
    for i, mode in enumerate(basis.modes):
        out[i] = mode.norm_const * np.dot(fx, bessel.bessel_j_many(basis.nu, mode.zero * y))
    return out


def state_l2_norm(f, panels: int = DEFAULT_PANELS, nodes: int = DEFAULT_NODES) -> float:
    """||f||_{L2(0,1)} by direct quadrature in x (f smooth in x)."""
    x, w = panel_rule(0.0, 1.0, panels, nodes)
    return float(np.sqrt(np.dot(w, np.asarray(f(x), dtype=float) ** 2)))


def neumann_trace_numeric(basis: SpectralBasis, n: int, x_small: float) -> float:
    """Finite-difference estimate of x^a Phi_n'(x) at x = x_small.

    Converges to ``Mode.neumann_trace`` as x_small -> 0; the deviation
    decays like x^{2-a} (the next term of the ascending expansion), which
    in particular is O(x^{1-a}).
    """
    if not 0.0 < x_small <= 1e-3:
        raise DomainError("x_small must lie in (0, 1e-3]")
    h = x_small * 1e-4
    up = _phi_scalar_precise(basis, n, x_small + h)
    dn = _phi_scalar_precise(basis, n, x_small - h)
    return x_small**basis.alpha * (up - dn) / (2.0 * h)


def trace_asymptotic_prefactor(basis: SpectralBasis) -> float:
    """rho with r_n ~ rho * j_n^{nu + 1/2} as n grows."""
    a, nu, kappa = basis.alpha, basis.nu, basis.kappa
    return ((1.0 - a) * np.sqrt(2.0 * kappa)
            / (2.0**nu * bessel.gamma_fn(nu + 1.0)) * np.sqrt(np.pi / 2.0))


def source_coefficient(basis: SpectralBasis, n: int) -> float:
    """int_0^1 (p(x)/p(0)) Phi_n dx = r_n / lambda_n, p(x)/p(0) = 1 - x^{1-a}."""
    mode = basis.modes[n - 1]
    return mode.neumann_trace / mode.eigenvalue


def source_coefficient_quadrature(basis: SpectralBasis, n: int,
                                  panels: int = DEFAULT_PANELS,
                                  nodes: int = DEFAULT_NODES) -> float:
    """Independent quadrature of int (1 - x^{1-a}) Phi_n dx.

    In the substituted variable the weight is 1 - y^{2 nu}.
    """
    y, _, common = _substituted_rule(basis, panels, nodes)
    mode = basis.modes[n - 1]
    integrand = (1.0 - y ** (2.0 * basis.nu)) * bessel.bessel_j_many(basis.nu, mode.zero * y)
    return mode.norm_const * float(np.dot(common, integrand))


def gram_matrix(basis: SpectralBasis, n_max: int | None = None,
                panels: int = DEFAULT_PANELS, nodes: int = DEFAULT_NODES) -> np.ndarray:
    """Quadrature Gram of the eigenfunctions; identity up to quadrature error.

    With two eigenfunctions in the integrand the substituted weight is
    exactly y: Phi_m Phi_n dx = (C_m C_n / kappa) y J(j_m y) J(j_n y) dy.
    """
    n_max = basis.n_modes if n_max is None else n_max
    y, w = panel_rule(0.0, 1.0, panels, nodes)
    vals = np.vstack([
        basis.modes[i].norm_const * bessel.bessel_j_many(basis.nu, basis.modes[i].zero * y)
        for i in range(n_max)
    ])
    return (vals * (w * y / basis.kappa)) @ vals.T


@dataclass(frozen=True)
class LimitBasis:
    """Limit family Phi_n(x) = J_0(j_{0,n} sqrt(x)) / |J'_0(j_{0,n})|.

    Obtained from the alpha < 1 eigenfunctions by letting alpha -> 1; an
    orthonormal basis of L2(0,1). Neumann traces vanish in this limit, so
    no control synthesis is attached to it.
    """

    zeros: np.ndarray
    jprime: np.ndarray   # |J'_0(j_{0,n})|

    @property
    def n_modes(self) -> int:
        return len(self.zeros)

    def eval(self, n: int, x) -> float | np.ndarray:
        scalar = np.isscalar(x)
        x = np.atleast_1d(np.asarray(x, dtype=float))
        vals = bessel.bessel_j_many(0.0, self.zeros[n - 1] * np.sqrt(x)) / self.jprime[n - 1]
        return float(vals[0]) if scalar else vals

    def project(self, f, panels: int = DEFAULT_PANELS,
                nodes: int = DEFAULT_NODES) -> np.ndarray:
        """<f, Phi_n> = (1/|J'_0(j_n)|) int_0^1 2 y f(y^2) J_0(j_n y) dy."""
        y, w = panel_rule(0.0, 1.0, panels, nodes)
        fy = np.asarray(f(y**2), dtype=float) * 2.0 * y * w
        return np.array([
            np.dot(fy, bessel.bessel_j_many(0.0, j * y)) / jp
            for j, jp in zip(self.zeros, self.jprime)
        ])

    def gram(self, panels: int = DEFAULT_PANELS, nodes: int = DEFAULT_NODES) -> np.ndarray:
        y, w = panel_rule(0.0, 1.0, panels, nodes)
        vals = np.vstack([
            bessel.bessel_j_many(0.0, j * y) / jp
            for j, jp in zip(self.zeros, self.jprime)
        ])
        return (vals * (2.0 * y * w)) @ vals.T


def make_limit_basis(n_modes: int) -> LimitBasis:
    """Build the alpha = 1 limit family from the zeros of J_0."""
    if n_modes < 1:
        raise DomainError(f"need at least one mode, got {n_modes}")
    zeros = np.array([bessel.bessel_zero(0.0, n).zero for n in range(1, n_modes + 1)])
    jp = np.array([abs(bessel.bessel_j_prime(0.0, j)) for j in zeros])
    return LimitBasis(zeros=zeros, jprime=jp)
