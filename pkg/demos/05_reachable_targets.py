#!/usr/bin/env python3
"""Which terminal states can the boundary control actually hit?

Steering to a nonzero target muT needs the amplified coefficients
muT_n e^{lambda_n T} under control, so the target's Fourier-Bessel
coefficients must decay fast enough. The scoring rule sums
n^{3/2} |muT_n| e^{K kappa pi n} and classifies the tail; K defaults to
the growth constant fitted on the active biorthogonal family.
"""

import numpy as np

from degctrl import (MomentVector, bound_profile, build_biortho, evolve,
                     make_basis, reachability_score, synthesize,
                     terminal_error, unit_moment)

alpha, T, N = 0.3, 1.0, 8
basis = make_basis(alpha, N)
fam = build_biortho(basis.eigenvalues, T)
K = bound_profile(fam).K
print(f"fitted growth constant K = {K:.4f}")

candidates = {
    "zero target": np.zeros(N),
    "single mode e_2": np.eye(N)[1],
    "geometric decay": np.exp(-2.0 * K * basis.kappa * np.pi * np.arange(1, N + 1)),
    "flat coefficients": np.ones(N),
}
for name, coeffs in candidates.items():
    mu = MomentVector(alpha=alpha, coefficients=coeffs, basis_id=basis.basis_id)
    score = reachability_score(mu, alpha, K)
    print(f"  {name:20s} -> {score.verdict}")

# Steer mode 1 into mode 2 and verify by simulation.
mu0 = unit_moment(basis, 1)
muT = MomentVector(alpha=alpha, coefficients=0.05 * np.eye(N)[1],
                   basis_id=basis.basis_id)
assert reachability_score(muT, alpha, K).passed
signal = synthesize(basis, fam, mu0, muT)
traj = evolve(basis, mu0, signal)
err = terminal_error(traj, muT)
print(f"\nsteering e_1 -> 0.05 e_2: ||G||_H1 = {signal.norms['G_h1']:.4f}, "
      f"terminal residual {err.aggregate:.2e}")
print("reached coefficients:", np.round(traj.terminal, 8))
