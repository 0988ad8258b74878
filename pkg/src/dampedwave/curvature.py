"""
Hessians of the radial phase lambda_delta(|x|) on the annulus 1/2 < |x| < 2.

For a radial function lambda(r),

    Hess = (lambda'/r) (I + (mu/r^2) x x^T),  mu = (r/lambda') (lambda'' - lambda'/r),

so the eigenvalues are lambda'/r (multiplicity n-1, on x^perp) and lambda''
(on x), and det Hess = (lambda'/r)^(n-1) lambda''.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .symbols import lambda_delta, lambda_derivatives

__all__ = [
    "DELTA_MAX",
    "SingularParameterizationError",
    "RadialPhase",
    "annulus_samples",
    "hessian_radial",
    "hessian_fd",
    "det_hessian",
    "matrix_rank",
    "rank_on_annulus",
    "max_minor",
    "minor_lower_bound",
    "curvature_report",
]

DELTA_MAX = 1.0 / (2.0 * np.sqrt(2.0))
RANK_TOL = 1e-8


class SingularParameterizationError(ValueError):
    """lambda' vanishes, so the rank-one-update form of the Hessian is undefined."""


@dataclass(frozen=True)
class RadialPhase:
    delta: float
    n: int

    def __post_init__(self):
        if not 0 <= self.delta <= DELTA_MAX:
            raise ValueError(f"delta must lie in [0, 1/(2 sqrt 2)], got {self.delta}")
        if self.n < 1:
            raise ValueError("dimension must be positive")

    def hessian(self, x):
        return hessian_radial(self.delta, x, self.n)

    def value(self, x):
        return lambda_delta(np.linalg.norm(x), self.delta)


def annulus_samples(n: int, n_radii: int = 16, n_dirs: int = 8, r_min=0.55, r_max=1.9, seed=0):
    """Points of the annulus on a radius grid times deterministic directions."""
    rng = np.random.default_rng(seed)
    radii = np.linspace(r_min, r_max, n_radii)
    if n == 1:
        dirs = np.array([[1.0], [-1.0]])
    elif n == 2:
        ang = np.linspace(0.0, 2 * np.pi, n_dirs, endpoint=False)
        dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    else:
        # a coordinate axis and the main diagonal, then random directions;
        # the diagonal is where the largest (n-1)-minor is smallest
        dirs = rng.normal(size=(max(n_dirs, 2), n))
        dirs[0] = np.eye(n)[0]
        dirs[1] = 1.0
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    return np.array([r * d for r in radii for d in dirs])


def hessian_radial(delta: float, x, n: int | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if n is not None and x.shape != (n,):
        raise ValueError(f"point of shape {x.shape} is not in dimension {n}")
    n = x.size
    r = float(np.linalg.norm(x))
    if r == 0:
        raise SingularParameterizationError("radial Hessian undefined at the origin")
    if delta == 0:
        return (np.eye(n) - np.outer(x, x) / r**2) / r
    d1, d2 = lambda_derivatives(r, delta)
    if abs(d1) <= 1e-12:
        raise SingularParameterizationError(f"lambda' vanishes at r={r}, delta={delta}")
    mu = (r / d1) * (d2 - d1 / r)
    return (d1 / r) * (np.eye(n) + (mu / r**2) * np.outer(x, x))


def hessian_fd(delta: float, x, step: float = 1e-4) -> np.ndarray:
    """Central finite-difference Hessian of lambda_delta(|x|)."""
    x = np.asarray(x, dtype=float)
    n = x.size
    f = lambda y: lambda_delta(np.linalg.norm(y), delta)
    H = np.empty((n, n))
    E = np.eye(n) * step
    f0 = f(x)
    for i in range(n):
        H[i, i] = (f(x + E[i]) - 2 * f0 + f(x - E[i])) / step**2
        for k in range(i + 1, n):
            H[i, k] = H[k, i] = (
                f(x + E[i] + E[k]) - f(x + E[i] - E[k]) - f(x - E[i] + E[k]) + f(x - E[i] - E[k])
            ) / (4 * step**2)
    return H


def det_hessian(delta: float, r: float, n: int) -> float:
    """(lambda'/r)^(n-1) lambda''."""
    if delta == 0:
        return 0.0
    d1, d2 = lambda_derivatives(r, delta)
    return (d1 / r) ** (n - 1) * d2


def matrix_rank(H: np.ndarray, tol: float = RANK_TOL) -> int:
    eig = np.linalg.eigvalsh(H)
    scale = np.max(np.abs(eig))
    if scale == 0:
        return 0
    return int(np.sum(np.abs(eig) > tol * scale))


def rank_on_annulus(delta: float, n: int, samples) -> int:
    """Minimum Hessian rank over the sample points."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("empty sample set")
    return min(matrix_rank(hessian_radial(delta, x)) for x in samples.reshape(len(samples), n))


def max_minor(H: np.ndarray, order: int) -> float:
    """Largest |minor| of the given order."""
    n = H.shape[0]
    if order == 0:
        return 1.0
    best = 0.0
    for rows in combinations(range(n), order):
        sub = H[list(rows)]
        for cols in combinations(range(n), order):
            best = max(best, abs(np.linalg.det(sub[:, list(cols)])))
    return best


def minor_lower_bound(deltas, n: int, samples):
    """min over (delta, x) of the largest |(n-1)-minor|; returns (value, delta, x)."""
    best = (np.inf, None, None)
    for delta in deltas:
        for x in np.asarray(samples, dtype=float):
            m = max_minor(hessian_radial(delta, x), n - 1)
            if m < best[0]:
                best = (m, float(delta), x.copy())
    return best


def curvature_report(deltas, n: int, samples, path=None) -> list:
    """Rows (delta, r, det, rank, min-minor-max), optionally written as CSV."""
    rows = []
    samples = np.asarray(samples, dtype=float)
    radii = np.linalg.norm(samples, axis=1)
    for delta in deltas:
        for r in np.unique(np.round(radii, 12)):
            pts = samples[np.isclose(radii, r)]
            Hs = [hessian_radial(delta, x) for x in pts]
            rows.append(
                {
                    "delta": float(delta),
                    "r": float(r),
                    "det": det_hessian(delta, r, n),
                    "rank": min(matrix_rank(H) for H in Hs),
                    "min_minor_max": min(max_minor(H, n - 1) for H in Hs),
                }
            )
    if path is not None:
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["delta", "r", "det", "rank", "min_minor_max"])
            w.writeheader()
            for row in rows:
                w.writerow({k: (repr(float(v)) if isinstance(v, float) else v) for k, v in row.items()})
    return rows
