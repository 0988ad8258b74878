"""
Dyadic partition of unity on the frequency lattice and discrete Besov norms.

The cutoff chi equals 1 on |xi| <= 1 and 0 on |xi| >= 2, with the C^infinity
transition built from eta(s) = exp(-1/s).  The shells are

    phi_0 = chi,    phi_j(xi) = chi(2^-j xi) - chi(2^(1-j) xi),   j >= 1,

so phi_0 + ... + phi_J = chi(2^-J xi) holds by telescoping.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .spectral import Grid, SpectralField, lp_norm

__all__ = [
    "UnresolvedShellError",
    "SpectralLeakageError",
    "smooth_step",
    "chi",
    "phi",
    "shell_symbol",
    "DyadicPartition",
    "BesovParams",
    "build_partition",
    "max_resolved_level",
    "shell_project",
    "shell_norms",
    "besov_norm",
    "export_partition_csv",
    "LEAKAGE_TOL",
]

LEAKAGE_TOL = 1e-10


class UnresolvedShellError(ValueError):
    """The lattice Nyquist frequency does not reach the requested shells."""


class SpectralLeakageError(ValueError):
    """Spectrum above the truncation level 2^J is not negligible."""


def _eta(s):
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def smooth_step(s):
    """C^infinity step: 0 for s <= 0, 1 for s >= 1."""
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    a = _eta(s)
    b = _eta(1.0 - s)
    return a / (a + b)


def _chi(r: np.ndarray) -> np.ndarray:
    # only the transition band 1 < r < 2 needs the exponentials
    out = np.array(r <= 1.0, dtype=float)
    m = (r > 1.0) & (r < 2.0)
    s = r[m] - 1.0
    a = np.exp(-1.0 / s)
    b = np.exp(-1.0 / (1.0 - s))
    out[m] = b / (a + b)
    return out


def _scalar_or_array(out: np.ndarray):
    return out if out.ndim else float(out)


def chi(r):
    """Radial cutoff: 1 on r <= 1, 0 on r >= 2."""
    return _scalar_or_array(_chi(np.asarray(r, dtype=float)))


def phi(r):
    """Base dyadic bump supported in 1/2 < r < 2, with phi(1) = 1."""
    r = np.asarray(r, dtype=float)
    return _scalar_or_array(_chi(r) - _chi(2.0 * r))


def shell_symbol(r, j: int):
    """phi_j evaluated at radius r (powers of two keep the scaling exact)."""
    r = np.asarray(r, dtype=float)
    if j == 0:
        return _scalar_or_array(_chi(r))
    return _scalar_or_array(_chi(np.ldexp(r, -j)) - _chi(np.ldexp(r, 1 - j)))


def max_resolved_level(grid: Grid) -> int:
    """Largest J with 2^(J+1) <= Nyquist."""
    return int(np.floor(np.log2(grid.nyquist))) - 1


@dataclass(frozen=True)
class BesovParams:
    sigma: float
    p: float
    q: float
    J: int

    def __post_init__(self):
        if not self.p >= 1 or not self.q >= 1:
            raise ValueError("Besov norms are implemented for p, q >= 1")
        if self.J < 1:
            raise ValueError("truncation level J must be >= 1")


@dataclass(frozen=True, eq=False)
class DyadicPartition:
    """Shells phi_0..phi_J sampled on a grid's frequency lattice."""

    grid: Grid
    J: int
    shells: tuple = field(repr=False)

    def __len__(self):
        return self.J + 1

    def __getitem__(self, j):
        return self.shells[j]

    @cached_property
    def total(self) -> np.ndarray:
        return np.sum(self.shells, axis=0)

    def partition_error(self) -> float:
        """max |sum_j phi_j - 1| over lattice points with |xi| <= 2^J."""
        inside = self.grid.xi_radius <= 2.0**self.J
        return float(np.max(np.abs(self.total[inside] - 1.0)))

    def overlap_violation(self) -> float:
        """max |phi_j phi_k| over pairs with |j - k| > 1 (exactly zero by construction)."""
        worst = 0.0
        for j in range(len(self)):
            # the product vanishes off the support of phi_j, so only scan that
            idx = np.flatnonzero(self.shells[j])
            for k in range(j + 2, len(self)):
                if idx.size:
                    worst = max(worst, float(np.max(np.abs(self.shells[j].flat[idx] * self.shells[k].flat[idx]))))
        return worst


def build_partition(grid: Grid, J: int) -> DyadicPartition:
    if J < 1:
        raise ValueError("J must be >= 1")
    if grid.nyquist < 2.0 ** (J + 1):
        raise UnresolvedShellError(
            f"Nyquist {grid.nyquist:.4g} below 2^(J+1) = {2 ** (J + 1)}; shells not resolved"
        )
    r = grid.xi_radius
    # chi at each dyadic scale once, then telescope
    chis = [_chi(np.ldexp(r, -j)) for j in range(J + 1)]
    shells = [chis[0]] + [chis[j] - chis[j - 1] for j in range(1, J + 1)]
    for s in shells:
        s.flags.writeable = False
    return DyadicPartition(grid, J, tuple(shells))


def shell_project(v: SpectralField, j: int, partition: DyadicPartition) -> SpectralField:
    """Inverse transform of phi_j v_hat."""
    if not 0 <= j <= partition.J:
        raise IndexError(f"shell {j} outside 0..{partition.J}")
    return SpectralField.from_spectrum(v.grid, partition[j] * v.spectrum)


def leakage(spectrum: np.ndarray, grid: Grid, J: int) -> float:
    """max |spectrum| above 2^J relative to its peak."""
    a = np.abs(spectrum)
    peak = a.max()
    if peak == 0:
        return 0.0
    outside = grid.xi_radius > 2.0**J
    if not outside.any():
        return 0.0
    return float(a[outside].max() / peak)


def shell_norms(spectrum: np.ndarray, grid: Grid, partition: DyadicPartition, p: float) -> np.ndarray:
    """L^p norms of the shell projections of a spectrum, j = 0..J."""
    out = np.empty(len(partition))
    for j, s in enumerate(partition.shells):
        proj = SpectralField.from_spectrum(grid, s * spectrum)
        out[j] = lp_norm(proj, p)
    return out


def combine_shells(norms: np.ndarray, sigma: float, q: float) -> float:
    weights = 2.0 ** (sigma * np.arange(len(norms)))
    terms = weights * norms
    if np.isinf(q):
        return float(terms.max())
    m = terms.max()
    if m == 0:
        return 0.0
    return float(m * np.sum((terms / m) ** q) ** (1.0 / q))


def besov_norm(
    v: SpectralField,
    params: BesovParams,
    partition: DyadicPartition | None = None,
    leakage_tol: float = LEAKAGE_TOL,
) -> float:
    """Truncated dyadic Besov norm (sum_j 2^(j sigma q) ||P_j v||_p^q)^(1/q)."""
    if partition is None or partition.J != params.J or partition.grid != v.grid:
        partition = build_partition(v.grid, params.J)
    leak = leakage(v.spectrum, v.grid, params.J)
    if leak > leakage_tol:
        raise SpectralLeakageError(
            f"spectrum above 2^J is {leak:.2e} of its peak (tolerance {leakage_tol:.0e})"
        )
    norms = shell_norms(v.spectrum, v.grid, partition, params.p)
    return combine_shells(norms, params.sigma, params.q)


def export_partition_csv(path, J: int, radii=None) -> None:
    """Write rows (j, |xi|, phi_j(|xi|)) for plotting."""
    if radii is None:
        radii = np.linspace(0.0, 2.0 ** (J + 1), 64 * (J + 1) + 1)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["j", "xi_abs", "phi_j"])
        for j in range(J + 1):
            vals = shell_symbol(radii, j)
            for r, v in zip(radii, vals):
                w.writerow([j, repr(float(r)), repr(float(v))])
