"""Deterministic probe families standing in for "all v in L^p"."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..littlewood_paley import max_resolved_level, shell_symbol
from ..spectral import Grid, SpectralField, boundary_ratio

DEFAULT_SEED = 0x9E3779B97F4A7C15
GAUSSIAN_WIDTHS = (0.25, 0.5, 1.0, 2.0)
CARRIERS = (1.0, 2.0, 4.0, 8.0)
SPECTRAL_TOL = 1e-10
BOUNDARY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Probe:
    label: str
    kind: str
    param: float
    field: SpectralField


@dataclass(eq=False)
class ProbeFamily:
    grid: Grid
    probes: list
    dropped: list = field(default_factory=list)
    seed: int = DEFAULT_SEED

    def __iter__(self):
        return iter(self.probes)

    def __len__(self):
        return len(self.probes)

    @property
    def labels(self):
        return [p.label for p in self.probes]

    def subset(self, kinds) -> "ProbeFamily":
        keep = [p for p in self.probes if p.kind in kinds]
        return ProbeFamily(self.grid, keep, list(self.dropped), self.seed)


def _direction(n: int) -> np.ndarray:
    d = np.array([1.0, 0.5, 0.25])[:n]
    return d / np.linalg.norm(d)


def gaussian_probe(grid: Grid, width: float) -> SpectralField:
    """exp(-|x|^2 / (2 width^2))."""
    return SpectralField.from_function(grid, lambda x: np.exp(-np.sum(x**2, axis=0) / (2 * width**2)))


def modulated_probe(grid: Grid, carrier: float, width: float = 1.0) -> SpectralField:
    """Unit-width Gaussian envelope times exp(i carrier e.x) for a fixed unit vector e."""
    k = carrier * _direction(grid.n)

    def f(x):
        phase = np.tensordot(k, x, axes=(0, 0))
        return np.exp(-np.sum(x**2, axis=0) / (2 * width**2) + 1j * phase)

    return SpectralField.from_function(grid, f)


def shell_probe(grid: Grid, j: int, seed: int = DEFAULT_SEED) -> SpectralField:
    """Random field with spectrum phi_j times unit-modulus random phases.

    The raw field fills the whole torus, so it is multiplied by a Gaussian
    window of width L/16; this keeps the boundary below 1e-14 at the cost of
    smearing the shell edges by about 16/L in frequency.
    """
    rng = np.random.default_rng([seed, j])
    phases = np.exp(2j * np.pi * rng.random(grid.shape))
    raw = SpectralField.from_spectrum(grid, shell_symbol(grid.xi_radius, j) * phases).values
    s = grid.L / 16
    window = np.exp(-_radius_sq(grid) / (2 * s * s))
    vals = raw * window
    return SpectralField(grid, vals / np.abs(vals).max())


def _radius_sq(grid: Grid) -> np.ndarray:
    out = np.zeros(grid.shape)
    for axis in range(grid.n):
        sl = [np.newaxis] * grid.n
        sl[axis] = slice(None)
        out = out + grid.x1d[tuple(sl)] ** 2
    return out


def spectral_edge_ratio(v: SpectralField, band: float | None = None) -> float:
    """Spectral magnitude near the lattice edge (or above ``band``) relative to the peak."""
    a = np.abs(v.spectrum)
    peak = a.max()
    if band is None:
        edge = np.zeros(v.grid.shape, dtype=bool)
        cut = v.grid.nyquist - 2 * v.grid.dxi
        for comp in v.grid.xi_components():
            edge = edge | (np.abs(comp) >= cut)
    else:
        edge = v.grid.xi_radius > band
    if not edge.any():
        return 0.0
    return float(a[edge].max() / peak)


def probe_family(
    grid: Grid,
    widths=GAUSSIAN_WIDTHS,
    carriers=CARRIERS,
    shells=None,
    seed: int = DEFAULT_SEED,
    band: float | None = None,
    spectral_tol: float = SPECTRAL_TOL,
    boundary_tol: float = BOUNDARY_TOL,
) -> ProbeFamily:
    """Gaussians, modulated Gaussians and shell-localised random fields.

    Probes that are not resolved on ``grid`` are dropped and listed in
    ``family.dropped``: boundary magnitude above ``boundary_tol``, or spectral
    content above ``spectral_tol`` at the lattice edge (or above ``band``
    when given, as required by truncated Besov norms).
    """
    if shells is None:
        shells = range(1, max_resolved_level(grid) + 1)
    candidates = []
    for w in widths:
        candidates.append((f"gauss_w{w:g}", "gaussian", w, lambda w=w: gaussian_probe(grid, w)))
    for c in carriers:
        candidates.append((f"mod_k{c:g}", "modulated", c, lambda c=c: modulated_probe(grid, c)))
    for j in shells:
        candidates.append((f"shell_j{j}", "shell", j, lambda j=j: shell_probe(grid, j, seed)))

    probes, dropped = [], []
    for label, kind, param, make in candidates:
        v = make()
        b = boundary_ratio(v)
        s = spectral_edge_ratio(v, band)
        if b > boundary_tol:
            dropped.append((label, f"boundary ratio {b:.1e}"))
        elif s > spectral_tol:
            dropped.append((label, f"spectral edge ratio {s:.1e}"))
        else:
            probes.append(Probe(label, kind, float(param), v))
    return ProbeFamily(grid, probes, dropped, seed)
