"""
Periodic grids, scaled discrete Fourier transforms and quadrature norms.

Fourier convention
------------------
    v_hat(xi) = int v(x) exp(-i x.xi) dx,
    v(x)      = (2 pi)^-n int v_hat(xi) exp(i x.xi) dxi,

so that the Laplacian acts as multiplication by -|xi|^2.  On the box
[-L/2, L/2)^n with N points per axis both integrals are replaced by the
rectangle rule: the forward transform is ``h**n * DFT`` and the inverse is
``IDFT / h**n``.  Spatial samples are stored in natural (centred) order with
x = 0 at index N/2; spectra are stored in FFT order (``fftfreq`` layout).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np
import scipy.fft as sfft

__all__ = [
    "GridError",
    "DilationError",
    "Grid",
    "SpectralField",
    "make_grid",
    "forward_transform",
    "inverse_transform",
    "lp_norm",
    "dilate",
    "boundary_ratio",
    "fft_workers",
]


class GridError(ValueError):
    """Invalid grid parameters or a field that does not live on the grid."""


class DilationError(ValueError):
    """The dilated function is not negligible at the box boundary."""


def fft_workers() -> int:
    import os

    try:
        return max(1, int(os.environ.get("DAMPEDWAVE_WORKERS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class Grid:
    """Uniform periodic lattice on [-L/2, L/2)^n and its dual frequency lattice."""

    n: int
    N: int
    L: float

    @property
    def h(self) -> float:
        return self.L / self.N

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.n

    @property
    def dxi(self) -> float:
        """Spacing of the frequency lattice, 2 pi / L."""
        return 2.0 * np.pi / self.L

    @property
    def nyquist(self) -> float:
        return np.pi / self.h

    @property
    def cell_volume(self) -> float:
        return self.h**self.n

    @cached_property
    def x1d(self) -> np.ndarray:
        return (np.arange(self.N) - self.N // 2) * self.h

    @cached_property
    def xi1d(self) -> np.ndarray:
        """Frequencies along one axis in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.N, d=self.h)

    @cached_property
    def coords(self) -> np.ndarray:
        """Array of shape (n, N, ..., N) with the spatial coordinates."""
        return np.stack(np.meshgrid(*([self.x1d] * self.n), indexing="ij"))

    @cached_property
    def radius(self) -> np.ndarray:
        """|x| on the spatial lattice."""
        return np.sqrt(np.sum(self.coords**2, axis=0))

    @cached_property
    def xi_radius(self) -> np.ndarray:
        """|xi| on the frequency lattice (FFT order)."""
        k2 = np.zeros(self.shape)
        for axis in range(self.n):
            sl = [np.newaxis] * self.n
            sl[axis] = slice(None)
            k2 = k2 + self.xi1d[tuple(sl)] ** 2
        return np.sqrt(k2)

    def xi_components(self) -> list:
        """Broadcastable per-axis frequency arrays (FFT order)."""
        out = []
        for axis in range(self.n):
            sl = [np.newaxis] * self.n
            sl[axis] = slice(None)
            out.append(self.xi1d[tuple(sl)])
        return out

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        """Lattice points within two cells of the box faces."""
        idx = np.arange(self.N)
        edge1d = (idx < 2) | (idx >= self.N - 2)
        mask = np.zeros(self.shape, dtype=bool)
        for axis in range(self.n):
            sl = [np.newaxis] * self.n
            sl[axis] = slice(None)
            mask = mask | edge1d[tuple(sl)]
        return mask


def make_grid(n: int, N: int, L: float) -> Grid:
    """Build a grid, validating dimension, resolution and box size."""
    if n not in (1, 2, 3):
        raise GridError(f"invalid dimension n={n}; expected 1, 2 or 3")
    if int(N) != N or N < 4 or N % 2:
        raise GridError(f"N must be an even integer >= 4, got {N}")
    if not L > 0:
        raise GridError(f"box size must be positive, got L={L}")
    return Grid(int(n), int(N), float(L))


class SpectralField:
    """Complex samples of a function on a `Grid`, with a cached spectrum.

    Fields are immutable: ``values`` is a read-only array and every operation
    returns a new field.  ``analytic`` optionally holds a closed form
    ``f(x)`` (x of shape (n, ...)) used by `dilate` instead of interpolation.
    """

    def __init__(self, grid: Grid, values, analytic: Optional[Callable] = None):
        values = np.array(values, dtype=complex)
        if values.shape != grid.shape:
            raise GridError(f"values of shape {values.shape} do not match grid {grid.shape}")
        values.flags.writeable = False
        self.grid = grid
        self.values = values
        self.analytic = analytic

    @classmethod
    def from_function(cls, grid: Grid, func: Callable) -> "SpectralField":
        return cls(grid, func(grid.coords), analytic=func)

    @classmethod
    def from_spectrum(cls, grid: Grid, spectrum) -> "SpectralField":
        spectrum = np.asarray(spectrum, dtype=complex)
        field = cls(grid, _inverse(spectrum, grid))
        spec = spectrum.copy()
        spec.flags.writeable = False
        field.__dict__["spectrum"] = spec
        return field

    @cached_property
    def spectrum(self) -> np.ndarray:
        spec = _forward(self.values, self.grid)
        spec.flags.writeable = False
        return spec

    def __mul__(self, c) -> "SpectralField":
        return SpectralField(self.grid, c * self.values)

    __rmul__ = __mul__

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _check_same_grid(self, other)
        return SpectralField(self.grid, self.values + other.values)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _check_same_grid(self, other)
        return SpectralField(self.grid, self.values - other.values)

    def __repr__(self) -> str:
        return f"SpectralField(grid={self.grid})"


def _check_same_grid(a: SpectralField, b: SpectralField) -> None:
    if a.grid != b.grid:
        raise GridError("fields live on different grids")


def _forward(values: np.ndarray, grid: Grid) -> np.ndarray:
    shifted = sfft.ifftshift(values)
    return sfft.fftn(shifted, workers=fft_workers()) * grid.cell_volume


def _inverse(spectrum: np.ndarray, grid: Grid) -> np.ndarray:
    if spectrum.shape != grid.shape:
        raise GridError(f"coefficients of shape {spectrum.shape} do not match grid {grid.shape}")
    out = sfft.ifftn(spectrum, workers=fft_workers()) / grid.cell_volume
    return sfft.fftshift(out)


def forward_transform(v: SpectralField) -> np.ndarray:
    """Rectangle-rule approximation of int v(x) exp(-i x.xi) dx on the lattice."""
    return v.spectrum


def inverse_transform(coeffs, grid: Grid) -> SpectralField:
    """Exact inverse of `forward_transform` on the lattice."""
    return SpectralField.from_spectrum(grid, coeffs)


def lp_norm(v, p: float, grid: Optional[Grid] = None) -> float:
    """Rectangle-rule L^p norm; ``p = np.inf`` gives the lattice maximum.

    Accepts a `SpectralField` or a raw array together with its grid.
    """
    if isinstance(v, SpectralField):
        grid, arr = v.grid, v.values
    else:
        arr = np.asarray(v)
        if grid is None:
            raise GridError("a grid is required for raw arrays")
    if not p >= 1:
        raise ValueError(f"lp_norm needs p >= 1, got p={p}")
    a = np.abs(arr)
    peak = float(a.max()) if a.size else 0.0
    if np.isinf(p):
        return peak
    if peak == 0.0:
        return 0.0
    # scale by the peak so that large p neither overflows nor underflows
    s = np.sum((a / peak) ** p) * grid.cell_volume
    return float(peak * s ** (1.0 / p))


def boundary_ratio(v) -> float:
    """max |v| near the box faces divided by max |v|."""
    arr = np.abs(v.values)
    peak = arr.max()
    if peak == 0:
        return 0.0
    return float(arr[v.grid.boundary_mask].max() / peak)


def _interp_matrix(grid: Grid, targets: np.ndarray) -> np.ndarray:
    """Rows evaluate the trigonometric interpolant at ``targets`` (1-D).

    Targets outside the box get a zero row: the interpolated function is
    assumed negligible there (checked by the caller).
    """
    xi = grid.xi1d.copy()
    # split the Nyquist mode symmetrically so the interpolant of real data stays real
    nyq = grid.N // 2
    x0 = grid.x1d[0]
    phase = np.exp(1j * np.outer(targets - x0, xi))
    phase[:, nyq] = np.cos(np.pi / grid.h * (targets - x0))
    # samples in centred order -> DFT coefficients relative to x0
    k = np.arange(grid.N)
    dft = np.exp(-2j * np.pi * np.outer(k, k) / grid.N) / grid.N
    M = phase @ dft
    outside = (targets < -grid.L / 2) | (targets >= grid.L / 2)
    M[outside] = 0.0
    return M


def dilate(v: SpectralField, t: float, tol: float = 1e-12) -> SpectralField:
    """Return samples of x -> v(t x).

    Closed forms attached to the field are used when available, otherwise
    band-limited (trigonometric) interpolation is applied axis by axis.
    """
    if not t > 0:
        raise ValueError(f"dilation factor must be positive, got {t}")
    if t == 1:
        return v
    grid = v.grid
    if boundary_ratio(v) > tol:
        raise DilationError("field is not negligible at the box boundary")
    if v.analytic is not None:
        func = v.analytic
        out = SpectralField.from_function(grid, lambda x: func(t * x))
    else:
        M = _interp_matrix(grid, t * grid.x1d)
        arr = v.values
        for axis in range(grid.n):
            arr = np.moveaxis(np.tensordot(M, arr, axes=([1], [axis])), 0, axis)
        out = SpectralField(grid, arr)
    if boundary_ratio(out) > tol:
        raise DilationError(f"dilation by t={t} pushes the field outside the box")
    return out
