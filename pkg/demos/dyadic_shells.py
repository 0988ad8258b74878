"""Littlewood-Paley shells on a 2-D lattice and what the Besov norm sees.

Run with ``python3 demos/dyadic_shells.py``.
"""
import numpy as np

from dampedwave import BesovParams, SpectralField, besov_norm, build_partition, make_grid, shell_project

grid = make_grid(2, 512, 16.0)
P = build_partition(grid, 5)
print(f"partition error {P.partition_error():.1e}, overlap of non-neighbours {P.overlap_violation():g}")

# A sum of two bumps at different scales: each shows up in its own band of shells.
f = SpectralField.from_function(
    grid, lambda x: np.exp(-np.sum(x**2, axis=0)) + 0.2 * np.cos(16 * x[0]) * np.exp(-np.sum(x**2, axis=0) / 2)
)
print("\nshell  ||Delta_j f||_2")
for j in range(6):
    print(f"{j:5d}  {np.sqrt(np.sum(np.abs(shell_project(f, j, P).values) ** 2) * grid.h**2):.4e}")

for sigma in (0.0, 0.5, 1.0):
    print(f"B^{sigma}_(2,2) norm: {besov_norm(f, BesovParams(sigma, 2.0, 2.0, 5), P):.4f}")
