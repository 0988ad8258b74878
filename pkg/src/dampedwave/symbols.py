"""
Radial symbols of the strongly damped wave semigroup.

With the Laplacian acting as -r^2 on the Fourier side, the linear part of

    psi_tt - 2 delta Lap psi_t - Lap psi = 0

is the semigroup

    e^{-delta t r^2} [[cosh + delta r^2 S, S], [-r^2 S, cosh - delta r^2 S]],

where S = sinh(t beta)/beta, beta = r sqrt(delta^2 r^2 - 1) and cosh = cosh(t beta).
Below the branch point delta r = 1 the hyperbolic functions become
trigonometric in lambda = r sqrt(1 - delta^2 r^2).

Every exponential is arranged with a non-positive argument before it is
evaluated, so the entries are finite for arbitrary (r, delta, t).
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Callable, Union

import numpy as np

from .spectral import GridError, SpectralField

__all__ = [
    "SymbolDomainError",
    "DampedDispersion",
    "SemigroupSymbol",
    "StateVector",
    "lambda_delta",
    "lambda_derivatives",
    "beta_delta",
    "heat_factor",
    "propagator_kernel",
    "semigroup_entries",
    "apply_multiplier",
    "apply_semigroup",
    "SERIES_THRESHOLD",
]

SERIES_THRESHOLD = 1e-2
_NTERMS = 5
_SINH_COEF = np.array([1.0 / factorial(2 * k + 1) for k in range(_NTERMS)])
_COSH_COEF = np.array([1.0 / factorial(2 * k) for k in range(_NTERMS)])


class SymbolDomainError(ValueError):
    """A symbol was evaluated outside the set where it is defined."""


@dataclass(frozen=True)
class DampedDispersion:
    """Parameters (delta, t) of the damped dispersion relation."""

    delta: float
    t: float = 1.0

    def __post_init__(self):
        if self.delta < 0 or self.t < 0:
            raise SymbolDomainError("delta and t must be non-negative")

    @property
    def branch_radius(self) -> float:
        return np.inf if self.delta == 0 else 1.0 / self.delta

    def kernel(self, r):
        return propagator_kernel(r, self.delta, self.t)

    def entries(self, r):
        return semigroup_entries(r, self.delta, self.t)


def lambda_delta(r, delta: float):
    """r sqrt(1 - delta^2 r^2), defined for delta r <= 1."""
    r = np.asarray(r, dtype=float)
    arg = 1.0 - (delta * r) ** 2
    if np.any(arg < 0):
        raise SymbolDomainError("lambda_delta needs delta * r <= 1")
    out = r * np.sqrt(arg)
    return out if out.ndim else float(out)


def lambda_derivatives(r, delta: float):
    """First and second radial derivatives of `lambda_delta`."""
    r = np.asarray(r, dtype=float)
    d2r2 = (delta * r) ** 2
    if np.any(d2r2 >= 1) or np.any(r <= 0):
        raise SymbolDomainError("lambda derivatives need 0 < r and delta * r < 1")
    root = np.sqrt(1.0 - d2r2)
    d1 = (1.0 - 2.0 * d2r2) / root
    d2 = r * delta**2 * (2.0 * d2r2 - 3.0) / root**3
    if d1.ndim == 0:
        return float(d1), float(d2)
    return d1, d2


def beta_delta(r, delta: float):
    """r sqrt(delta^2 r^2 - 1), defined for delta r >= 1."""
    r = np.asarray(r, dtype=float)
    arg = (delta * r) ** 2 - 1.0
    if np.any(arg < 0):
        raise SymbolDomainError("beta_delta needs delta * r >= 1")
    out = r * np.sqrt(arg)
    return out if out.ndim else float(out)


def heat_factor(r, delta: float, t: float):
    r = np.asarray(r, dtype=float)
    out = np.exp(-delta * t * r * r)
    return out if out.ndim else float(out)


def _branches(r, delta, t):
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or delta < 0 or t < 0:
        raise SymbolDomainError("r, delta and t must be non-negative")
    r2 = r * r
    w = r2 * ((delta * r) ** 2 - 1.0)
    series = np.abs(w) * t * t < SERIES_THRESHOLD
    osc = (w < 0) & ~series
    diss = (w > 0) & ~series
    return r, r2, w, series, osc, diss


def propagator_kernel(r, delta: float, t: float):
    """e^{-delta t r^2} sinh(t beta)/beta, continuous through beta = 0.

    Uses a five-term even series near the branch point, sin(t lambda)/lambda
    below it and an overflow-free exponential form above it.
    """
    r, r2, w, series, osc, diss = _branches(r, delta, t)
    out = np.empty_like(r)
    if np.any(series):
        z = t * t * w[series]
        s = np.polynomial.polynomial.polyval(z, _SINH_COEF)
        out[series] = t * s * np.exp(-delta * t * r2[series])
    if np.any(osc):
        lam = np.sqrt(-w[osc])
        out[osc] = np.exp(-delta * t * r2[osc]) * np.sin(t * lam) / lam
    if np.any(diss):
        beta = np.sqrt(w[diss])
        dr2 = delta * r2[diss]
        slow = np.exp(-t * r2[diss] / (beta + dr2))  # beta - delta r^2 = -r^2/(beta + delta r^2)
        # the fast mode is slow * exp(-2 t beta)
        out[diss] = -slow * np.expm1(-2.0 * t * beta) / (2.0 * beta)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class SemigroupSymbol:
    """Entries of the 2x2 semigroup symbol, each already multiplied by the heat factor."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    def det(self):
        return self.a * self.d - self.b * self.c

    def as_matrix(self) -> np.ndarray:
        """Array of shape (..., 2, 2)."""
        return np.stack(
            [np.stack([self.a, self.b], axis=-1), np.stack([self.c, self.d], axis=-1)], axis=-2
        )


def semigroup_entries(r, delta: float, t: float) -> SemigroupSymbol:
    r, r2, w, series, osc, diss = _branches(r, delta, t)
    a = np.empty_like(r)
    b = np.empty_like(r)
    d = np.empty_like(r)
    if np.any(series):
        z = t * t * w[series]
        e = np.exp(-delta * t * r2[series])
        ch = np.polynomial.polynomial.polyval(z, _COSH_COEF) * e
        sh = t * np.polynomial.polynomial.polyval(z, _SINH_COEF) * e
        dr2 = delta * r2[series]
        a[series] = ch + dr2 * sh
        b[series] = sh
        d[series] = ch - dr2 * sh
    if np.any(osc):
        lam = np.sqrt(-w[osc])
        e = np.exp(-delta * t * r2[osc])
        ch = e * np.cos(t * lam)
        sh = e * np.sin(t * lam) / lam
        dr2 = delta * r2[osc]
        a[osc] = ch + dr2 * sh
        b[osc] = sh
        d[osc] = ch - dr2 * sh
    if np.any(diss):
        beta = np.sqrt(w[diss])
        dr2 = delta * r2[diss]
        bp = beta + dr2
        slow = np.exp(-t * r2[diss] / bp)
        fast = np.exp(-t * bp)
        # (beta - delta r^2)/(2 beta) = -r^2 / (2 beta (beta + delta r^2)), no cancellation
        small = r2[diss] / (2.0 * beta * bp)
        big = bp / (2.0 * beta)
        a[diss] = slow * big - fast * small
        # fast = slow * exp(-2 t beta)
        b[diss] = -slow * np.expm1(-2.0 * t * beta) / (2.0 * beta)
        d[diss] = fast * big - slow * small
    c = -r2 * b
    return SemigroupSymbol(a, b, c, d)


Symbol = Union[Callable, np.ndarray, float]


def _symbol_on_grid(v: SpectralField, h: Symbol) -> np.ndarray:
    r = v.grid.xi_radius
    if callable(h):
        vals = np.asarray(h(r))
    else:
        vals = np.asarray(h)
    vals = np.broadcast_to(vals, r.shape)
    if not np.all(np.isfinite(vals)):
        raise SymbolDomainError("symbol is not finite at some lattice radius")
    return vals


def apply_multiplier(v: SpectralField, h: Symbol) -> SpectralField:
    """Inverse transform of h(|xi|) v_hat(xi).

    ``h`` may be a callable of the radius, an array already sampled on the
    frequency lattice, or a scalar.
    """
    vals = _symbol_on_grid(v, h)
    return SpectralField.from_spectrum(v.grid, vals * v.spectrum)


@dataclass(frozen=True)
class StateVector:
    """The pair (psi, psi_t)."""

    psi: SpectralField
    psi_t: SpectralField

    def __post_init__(self):
        if self.psi.grid != self.psi_t.grid:
            raise GridError("psi and psi_t live on different grids")

    @property
    def grid(self):
        return self.psi.grid

    @classmethod
    def from_spectra(cls, grid, s0, s1) -> "StateVector":
        return cls(SpectralField.from_spectrum(grid, s0), SpectralField.from_spectrum(grid, s1))


def semigroup_spectra(s0, s1, sym: SemigroupSymbol):
    return sym.a * s0 + sym.b * s1, sym.c * s0 + sym.d * s1


def apply_semigroup(state: StateVector, delta: float, t: float) -> StateVector:
    """Apply the semigroup frequency by frequency."""
    if t == 0:
        return state
    sym = semigroup_entries(state.grid.xi_radius, delta, t)
    s0, s1 = semigroup_spectra(state.psi.spectrum, state.psi_t.spectrum, sym)
    return StateVector.from_spectra(state.grid, s0, s1)
