"""
Empirical checks of the L^p - L^p' and Besov decay estimates.

True operator norms are not computable, so every check lower-bounds them with
a finite probe family and compares the measured quantity against the shape of
the bound (rate in t, dependence on delta, per-shell growth).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..littlewood_paley import (
    build_partition,
    chi,
    combine_shells,
    leakage,
    phi,
    shell_symbol,
)
from ..spectral import Grid, SpectralField, boundary_ratio, lp_norm, make_grid, dilate
from ..symbols import apply_multiplier, lambda_delta, lambda_derivatives, propagator_kernel
from ..curvature import DELTA_MAX
from .fitting import DecayFit, decay_fit, log2_slope
from .probes import ProbeFamily

__all__ = [
    "ExponentSet",
    "conjugate",
    "ZeroProbeError",
    "NonIntegrableSymbolError",
    "GridTooCoarseError",
    "measured_ratio",
    "InterpolationReport",
    "interpolation_check",
    "ShellBound",
    "shell_grid",
    "shell_sup_bounds",
    "shell_slopes",
    "littman_grid",
    "check_littman_grid",
    "LittmanScan",
    "littman_decay_scan",
    "uniformity_constant",
    "scaling_grid",
    "scaling_identity_check",
    "CorollaryScan",
    "corollary_decay_scan",
    "BesovCheck",
    "besov_estimate_check",
    "Lemma1Report",
    "lemma1_lift_check",
    "lemma1_constant",
]


class ZeroProbeError(ValueError):
    pass


class NonIntegrableSymbolError(ValueError):
    pass


class GridTooCoarseError(ValueError):
    pass


def conjugate(p: float) -> float:
    if p == 1:
        return np.inf
    if np.isinf(p):
        return 1.0
    return p / (p - 1.0)


@dataclass(frozen=True)
class ExponentSet:
    """Exponents attached to an integrability index p in dimension n."""

    p: float
    n: int

    @property
    def p_conj(self) -> float:
        return conjugate(self.p)

    @property
    def alpha(self) -> float:
        """Interpolation parameter 2/p - 1."""
        return 2.0 / self.p - 1.0

    @property
    def p_min(self) -> float:
        return (2.0 * self.n + 2.0) / (self.n + 3.0)

    @property
    def decay_exponent(self) -> float:
        """1 - 2n(1/p - 1/2)."""
        return 1.0 - 2.0 * self.n * (1.0 / self.p - 0.5)

    def admissible(self) -> bool:
        return self.p_min - 1e-12 <= self.p <= 2.0


# -- operator-norm ratios ------------------------------------------------------------


def measured_ratio(h, v: SpectralField, p: float) -> float:
    """||F^-1(h v_hat)||_{p'} / ||v||_p."""
    if not 1 <= p <= 2:
        raise ValueError("measured ratios are defined for p in [1, 2]")
    den = lp_norm(v, p)
    if den == 0:
        raise ZeroProbeError("probe is identically zero")
    return lp_norm(apply_multiplier(v, h), conjugate(p)) / den


def _symbol_array(h, grid: Grid) -> np.ndarray:
    r = grid.xi_radius
    vals = h(r) if callable(h) else h
    return np.broadcast_to(np.asarray(vals, dtype=float), r.shape)


@dataclass
class InterpolationReport:
    p: float
    alpha: float
    C1: float
    Cinf: float
    bound: float
    max_ratio: float
    ratios: dict
    slack: float
    passed: bool


def interpolation_check(h, family: ProbeFamily, p: float, cutoff_J: int | None = None,
                        slack: float = 1e-2, boundary_tol: float = 1e-6) -> InterpolationReport:
    """Compare measured ratios with the Riesz-Thorin bound C1^alpha Cinf^(1-alpha).

    Here alpha = 2/p - 1 is the weight of the L^1 -> L^inf endpoint (constant
    C1 = ||F^-1 h||_inf), so p = 1 gives C1 and p = 2 gives Cinf = sup |h|.
    ``cutoff_J`` multiplies the symbol by chi(2^-J |xi|) so that it lies in
    L^1; the same truncated symbol is used for the ratios and the constants.
    """
    grid = family.grid
    hv = np.array(_symbol_array(h, grid))
    if cutoff_J is not None:
        hv = hv * chi(np.ldexp(grid.xi_radius, -cutoff_J))
    kernel = SpectralField.from_spectrum(grid, hv)
    if boundary_ratio(kernel) > boundary_tol:
        raise NonIntegrableSymbolError(
            f"inverse transform of the symbol is {boundary_ratio(kernel):.1e} of its peak at the boundary"
        )
    C1 = lp_norm(kernel, np.inf)
    Cinf = float(np.max(np.abs(hv)))
    alpha = 2.0 / p - 1.0
    bound = C1**alpha * Cinf ** (1 - alpha)
    ratios = {pr.label: measured_ratio(hv, pr.field, p) for pr in family}
    worst = max(ratios.values())
    return InterpolationReport(p, alpha, C1, Cinf, bound, worst, ratios, slack, worst <= (1 + slack) * bound)


# -- per-shell bounds ----------------------------------------------------------------


@dataclass(frozen=True)
class ShellBound:
    j: int
    delta: float
    delta_j: float
    regime: str  # "small" when delta_j <= 1/(2 sqrt 2)
    S: float  # ||F^-1(kernel phi_j)||_inf
    M: float  # ||kernel phi_j||_inf


def shell_grid(j: int, n: int = 2, N: int | None = None) -> Grid:
    """Grid whose box holds the slowly decaying tails of shell j and resolves it."""
    if N is None:
        N = {1: 8192, 2: 1024, 3: 128}[n]
    L = 2.0 * (2.0 + 64.0 * 2.0**-j)
    return make_grid(n, N, L)


def shell_sup_bounds(delta: float, j: int, n: int = 2, grid: Grid | None = None) -> ShellBound:
    """Spatial and symbol sup norms of the t = 1 kernel on shell j."""
    if grid is None:
        grid = shell_grid(j, n)
    if grid.nyquist < 2.0 ** (j + 1):
        from ..littlewood_paley import UnresolvedShellError

        raise UnresolvedShellError(f"shell {j} needs Nyquist >= {2 ** (j + 1)}")
    r = grid.xi_radius
    sym = propagator_kernel(r, delta, 1.0) * shell_symbol(r, j)
    S = lp_norm(SpectralField.from_spectrum(grid, sym), np.inf)
    lo = 0.0 if j == 0 else 2.0 ** (j - 1)
    rr = np.linspace(lo, 2.0 ** (j + 1), 40001)
    M = float(np.max(np.abs(propagator_kernel(rr, delta, 1.0) * shell_symbol(rr, j))))
    dj = delta * 2.0**j
    return ShellBound(j, delta, dj, "small" if dj <= DELTA_MAX else "large", S, M)


def shell_slopes(bounds) -> dict:
    """log2 slopes of S_j and M_j fitted separately in each regime (j >= 1)."""
    out = {}
    for regime in ("small", "large"):
        sel = [b for b in bounds if b.regime == regime and b.j >= 1]
        if len(sel) >= 2:
            js = [b.j for b in sel]
            out[regime] = {
                "S": log2_slope(js, [b.S for b in sel]),
                "M": log2_slope(js, [b.M for b in sel]),
                "js": js,
            }
    return out


# -- oscillatory decay ---------------------------------------------------------------

LITTMAN_MARGIN = 20.0


def littman_grid(n: int, t_max: float, N: int | None = None) -> Grid:
    """L = 8 t_max with the smallest power-of-two N giving spacing <= pi/4.

    With N given the box is the largest one at spacing pi/4.
    """
    h_max = np.pi / 4
    if N is None:
        L = 8.0 * t_max
        N = 1 << int(np.ceil(np.log2(L / h_max)))
        return make_grid(n, N, L)
    return make_grid(n, N, N * h_max)


def _max_group_velocity(delta: float) -> float:
    rr = np.linspace(0.5, 2.0, 2001)[1:-1]
    return float(np.max(np.abs(lambda_derivatives(rr, delta)[0]))) if delta > 0 else 1.0


def check_littman_grid(grid: Grid, t_max: float, delta: float) -> dict:
    """Raise unless the lattice resolves supp(phi) and the box holds the wave front."""
    front = t_max * _max_group_velocity(delta)
    info = {
        "nyquist": grid.nyquist,
        "front_radius": front,
        "half_box": grid.L / 2,
        "phase_per_cell": t_max * _max_group_velocity(delta) * grid.dxi,
    }
    if grid.nyquist < 2.0:
        raise GridTooCoarseError(f"Nyquist {grid.nyquist:.3g} does not resolve supp(phi)")
    if grid.L / 2 < front + LITTMAN_MARGIN:
        raise GridTooCoarseError(
            f"wave front at radius {front:.1f} (+{LITTMAN_MARGIN:g}) does not fit in half box {grid.L / 2:.1f}"
        )
    return info


@dataclass
class LittmanScan:
    delta: float
    n: int
    times: np.ndarray
    values: np.ndarray
    fit: DecayFit | None
    grid_info: dict = field(default_factory=dict)

    def uniform_constant(self) -> float:
        return uniformity_constant(self.times, self.values, self.n)


def littman_sup(grid: Grid, delta: float, t: float, base: np.ndarray | None = None,
                lam: np.ndarray | None = None) -> float:
    if t == 0:
        return 0.0
    r = grid.xi_radius
    if base is None:
        base = phi(r)
    if lam is None:
        lam = _lambda_on_support(r, base, delta)
    spec = np.sin(t * lam) * base
    return lp_norm(SpectralField.from_spectrum(grid, spec), np.inf)


def _lambda_on_support(r, base, delta):
    lam = np.zeros_like(r)
    m = base != 0
    lam[m] = lambda_delta(r[m], delta)
    return lam


def littman_decay_scan(delta: float, n: int, times, grid: Grid | None = None) -> LittmanScan:
    """Sup norms of F^-1(sin(t lambda_delta) phi) and their log-log slope."""
    if not 0 <= delta <= DELTA_MAX + 1e-15:
        raise ValueError("Littman scans need delta in [0, 1/(2 sqrt 2)]")
    times = np.asarray(times, dtype=float)
    if grid is None:
        grid = littman_grid(n, times.max())
    info = check_littman_grid(grid, times.max(), delta)
    r = grid.xi_radius
    base = phi(r)
    lam = _lambda_on_support(r, base, delta)
    values = np.array([littman_sup(grid, delta, t, base, lam) for t in times])
    pos = times > 0
    fit = decay_fit(times[pos], values[pos]) if pos.sum() >= 6 else None
    return LittmanScan(delta, n, times, values, fit, info)


def uniformity_constant(times, values, n: int) -> float:
    """sup_t (1 + t)^((n-1)/2) * value."""
    times = np.asarray(times, dtype=float)
    return float(np.max((1 + times) ** ((n - 1) / 2) * np.asarray(values)))


# -- scaling identity ----------------------------------------------------------------


def scaling_grid(t: float, n: int = 2) -> Grid:
    """Box of side 80 with enough points to resolve v(t x) for unit-scale Gaussians."""
    return make_grid(n, 2048 if t > 4 else 1024, 80.0)


def scaling_identity_check(v: SpectralField, delta: float, t: float) -> float:
    """Relative sup discrepancy between the (delta, t) operator and its rescaled t = 1 form.

    T_{delta,t} v(x) = t [T_{delta/t,1} v(t .)](x / t), which follows from
    t beta_delta(r) = beta_{delta/t}(t r) and the dilation rule for Fourier transforms.
    """
    lhs = apply_multiplier(v, lambda r: propagator_kernel(r, delta, t))
    if t == 1:
        return 0.0
    w = dilate(v, t)
    u = apply_multiplier(w, lambda r: propagator_kernel(r, delta / t, 1.0))
    rhs = t * dilate(u, 1.0 / t).values
    return float(np.max(np.abs(lhs.values - rhs)) / np.max(np.abs(lhs.values)))


# -- decay of the propagator between L^p and L^p' ------------------------------------


def _spatial(grid: Grid, spectrum: np.ndarray) -> np.ndarray:
    return SpectralField.from_spectrum(grid, spectrum).values


@dataclass
class CorollaryScan:
    delta: float
    p: float
    n: int
    times: np.ndarray
    ratios: dict  # label -> array over times
    envelope: np.ndarray
    p2_ratios: dict
    fit: DecayFit
    target: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.fit.slope <= self.target + self.tolerance

    def p2_invariant_holds(self, rtol: float = 1e-12) -> bool:
        return all(np.all(r <= self.times * (1 + rtol)) for r in self.p2_ratios.values())


def corollary_decay_scan(delta: float, p: float, times, family: ProbeFamily,
                         tolerance: float = 0.1) -> CorollaryScan:
    """Envelope over the family of ||T v||_{p'} / ||v||_p and its fitted slope."""
    grid = family.grid
    ex = ExponentSet(p, grid.n)
    if grid.n < 2:
        raise ValueError("the L^p - L^p' decay estimate needs n > 1")
    if not ex.admissible():
        raise ValueError(f"p={p} outside [{ex.p_min:.4g}, 2]")
    times = np.asarray(times, dtype=float)
    pc = ex.p_conj
    den_p = {pr.label: lp_norm(pr.field, p) for pr in family}
    den_2 = {pr.label: lp_norm(pr.field, 2) for pr in family}
    ratios = {pr.label: np.empty(len(times)) for pr in family}
    p2 = {pr.label: np.empty(len(times)) for pr in family}
    r = grid.xi_radius
    for i, t in enumerate(times):
        K = propagator_kernel(r, delta, t)
        for pr in family:
            out = _spatial(grid, K * pr.field.spectrum)
            ratios[pr.label][i] = lp_norm(out, pc, grid) / den_p[pr.label]
            p2[pr.label][i] = lp_norm(out, 2, grid) / den_2[pr.label]
    env = np.max(np.stack(list(ratios.values())), axis=0)
    return CorollaryScan(delta, p, grid.n, times, ratios, env, p2, decay_fit(times, env),
                         ex.decay_exponent, tolerance)


# -- Besov-level estimate ------------------------------------------------------------


@dataclass
class BesovCheck:
    delta: float
    p: float
    q: float
    sigma: float
    times: np.ndarray
    ratios: dict  # label -> array over times
    max_leakage: float

    @property
    def max_over_family(self) -> np.ndarray:
        return np.max(np.stack(list(self.ratios.values())), axis=0)

    @property
    def overall_max(self) -> float:
        return float(self.max_over_family.max())


def _shell_spectra(family: ProbeFamily, partition):
    return {pr.label: [s * pr.field.spectrum for s in partition.shells] for pr in family}


def besov_estimate_check(delta: float, p: float, q: float, sigma: float, times,
                         family: ProbeFamily, J: int, partition=None, leakage_tol: float = 1e-10) -> BesovCheck:
    """Ratios of ||T v||_{B^sigma_{p'q}} to t^e max(t^sigma, t^-sigma) ||v||_{B^sigma_{pq}}."""
    grid = family.grid
    ex = ExponentSet(p, grid.n)
    if not sigma > 0 or q < 1:
        raise ValueError("need sigma > 0 and q >= 1")
    if not ex.admissible():
        raise ValueError(f"p={p} outside [{ex.p_min:.4g}, 2]")
    if partition is None:
        partition = build_partition(grid, J)
    from ..littlewood_paley import SpectralLeakageError

    worst_leak = 0.0
    for pr in family:
        leak = leakage(pr.field.spectrum, grid, J)
        worst_leak = max(worst_leak, leak)
        if leak > leakage_tol:
            raise SpectralLeakageError(f"probe {pr.label} leaks {leak:.1e} above 2^J")
    shells = _shell_spectra(family, partition)
    pc = ex.p_conj
    norm_v = {
        lab: combine_shells(np.array([lp_norm(_spatial(grid, s), p, grid) for s in sp]), sigma, q)
        for lab, sp in shells.items()
    }
    times = np.asarray(times, dtype=float)
    ratios = {lab: np.empty(len(times)) for lab in shells}
    r = grid.xi_radius
    for i, t in enumerate(times):
        K = propagator_kernel(r, delta, t)
        scale = t**ex.decay_exponent * max(t**sigma, t**-sigma)
        for lab, sp in shells.items():
            nrm = np.array([lp_norm(_spatial(grid, K * s), pc, grid) for s in sp])
            ratios[lab][i] = combine_shells(nrm, sigma, q) / (scale * norm_v[lab])
    return BesovCheck(delta, p, q, sigma, times, ratios, worst_leak)


# -- lift from shells to Besov norms -----------------------------------------


def lemma1_constant(sigma: float, q: float) -> float:
    """3^(q-1) (2^(sigma q) + 2^(-sigma q) + 1)."""
    return 3.0 ** (q - 1) * (2.0 ** (sigma * q) + 2.0 ** (-sigma * q) + 1.0)


@dataclass
class Lemma1Report:
    C_shell: float
    C_tilde: float
    besov_ratios: dict
    empirical_C_tilde: float
    passed: bool


def lemma1_lift_check(h, family: ProbeFamily, sigma: float, p: float, q: float, J: int,
                      partition=None) -> Lemma1Report:
    """Per-shell constant C from the family, then Besov ratios against C_tilde * C."""
    grid = family.grid
    if not 1 <= p <= 2:
        raise ValueError("the shell-to-Besov lift needs p in [1, 2]")
    if partition is None:
        partition = build_partition(grid, J)
    hv = np.array(_symbol_array(h, grid))
    pc = conjugate(p)
    C = 0.0
    ratios = {}
    for pr in family:
        spec = pr.field.spectrum
        nv = lp_norm(pr.field, p)
        if nv == 0:
            raise ZeroProbeError(pr.label)
        out_norms = np.array([lp_norm(_spatial(grid, hv * s * spec), pc, grid) for s in partition.shells])
        in_norms = np.array([lp_norm(_spatial(grid, s * spec), p, grid) for s in partition.shells])
        C = max(C, float(out_norms.max() / nv))
        ratios[pr.label] = combine_shells(out_norms, sigma, q) / combine_shells(in_norms, sigma, q)
    Ct = lemma1_constant(sigma, q)
    worst = max(ratios.values())
    return Lemma1Report(C, Ct, ratios, worst / C if C > 0 else 0.0, worst <= Ct * C * (1 + 1e-12))
