"""A walk through the linear semigroup: one mode, its matrix, and a field evolved in time.

Run with ``python3 demos/semigroup_tour.py``.
"""
import numpy as np

from dampedwave import SpectralField, StateVector, apply_semigroup, lp_norm, make_grid, semigroup_entries

# The semigroup acts on (psi, psi_t) mode by mode through a 2x2 matrix that depends on |xi| only.
r, delta, t = 1.0, 0.25, 2.0
A = semigroup_entries(np.array([r]), delta, t)
print("T(t) at r=1, delta=0.25, t=2:")
print(A.as_matrix()[0])
print("det =", A.det()[0], " e^(-2 delta t r^2) =", np.exp(-2 * delta * t * r**2))

# Composition: going to t in two steps gives the same matrix as one step.
M1 = semigroup_entries(np.array([r]), delta, 1.2).as_matrix()[0]
M2 = semigroup_entries(np.array([r]), delta, 0.8).as_matrix()[0]
print("composition residual:", np.abs(M1 @ M2 - A.as_matrix()[0]).max())

# A Gaussian bump at rest spreads out; the damping eats the high frequencies first.
grid = make_grid(2, 256, 40.0)
psi = SpectralField.from_function(grid, lambda x: np.exp(-np.sum(x**2, axis=0)))
state = StateVector(psi, psi * 0.0)
print("\n  t    sup|psi|   ||psi||_2   (delta = 0 vs 0.3)")
for t in (0.0, 1.0, 4.0, 16.0):
    a = apply_semigroup(state, 0.0, t).psi
    b = apply_semigroup(state, 0.3, t).psi
    print(f"{t:5.1f}  {lp_norm(a, np.inf):.4f}/{lp_norm(b, np.inf):.4f}  {lp_norm(a, 2):.4f}/{lp_norm(b, 2):.4f}")
