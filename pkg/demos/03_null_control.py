#!/usr/bin/env python3
"""Drive an initial state to rest through the degeneracy point.

Pipeline: project u0 on the spectral basis, build the biorthogonal
family, assemble the moment-method control

    g(t) = sum_m (lambda_m / r_m) mu0_m sigma_m(t),    G(t) = int_0^t g,

then evolve the lifted modes exactly and verify the terminal state. The
boundary trace G starts and ends at zero, so the control switches on and
off smoothly.
"""

import numpy as np

from degctrl import (MomentVector, build_biortho, evolve, make_basis,
                     moment_residual, project, synthesize, terminal_error)

alpha, T, N = 0.5, 1.0, 8
basis = make_basis(alpha, N)
fam = build_biortho(basis.eigenvalues, T)

# initial condition: the bump x(1-x), normalized
mu0 = project(basis, lambda x: x * (1.0 - x))
c = mu0.coefficients / np.linalg.norm(mu0.coefficients)
mu0 = MomentVector(alpha=alpha, coefficients=c, basis_id=basis.basis_id)
target = MomentVector(alpha=alpha, coefficients=np.zeros(N),
                      basis_id=basis.basis_id)

signal = synthesize(basis, fam, mu0, target)
print(f"control norms: ||g||_L2 = {signal.norms['g_l2']:.6f}, "
      f"||G||_L2 = {signal.norms['G_l2']:.6f}, "
      f"||G||_H1 = {signal.norms['G_h1']:.6f}")
print(f"G(0) = {signal.eval_G(0.0):.1e}, |G(T)| = {abs(signal.terminal_value):.2e}")

res = moment_residual(basis, signal, mu0, target, n_extra=5)
print(f"moment residuals, controlled modes: {np.max(np.abs(res[:N])):.2e}")
print(f"truncation leakage, modes {N+1}..{N+5}: {np.max(np.abs(res[N:])):.2e}")

traj = evolve(basis, mu0, signal, grid_size=512)
print(f"closed-form vs exponential-integrator deviation: "
      f"{traj.oracle_deviation:.2e}")
err = terminal_error(traj, target)
print(f"terminal state residual (aggregate): {err.aggregate:.2e}")

print("\nmode-1 lifted amplitude along the run:")
for j in range(0, 513, 64):
    print(f"  t = {traj.t[j]:.3f}: v_1 = {traj.v[0, j]:+.6f}   G = {traj.G_trace[j]:+.6f}")

# compare with doing nothing: free decay leaves e^{-lambda_1 T} of mode 1
free = np.exp(-basis.eigenvalues[0] * T) * mu0.coefficients[0]
print(f"\nwithout control, mode 1 would still hold {free:.2e}; "
      f"with the control it ends at {traj.terminal[0]:.2e}")
