"""
Mild-formulation time stepping for the semilinear strongly damped wave equation.

One step of length tau is

    Psi(t + tau) = T(tau) Psi(t) + int_0^tau T(tau - s) F(Psi(t + s)) ds,
    F(psi, psi_t) = (0, f(psi)),   f(psi) = a psi + b |psi|^(r-1) psi,

with the integral replaced by the trapezoidal rule on {0, tau} and the unknown
endpoint found by Picard iteration.  T is the semigroup of `symbols`, i.e. the
linear part psi_tt - 2 delta Lap psi_t - Lap psi; the energy

    E = 1/2 ||psi_t||^2 + 1/2 ||grad psi||^2 - a/2 ||psi||^2 - b/(r+1) ||psi||_{r+1}^{r+1}

therefore satisfies dE/dt = -D with D = 2 delta ||grad psi_t||^2.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .spectral import Grid, SpectralField, lp_norm
from .symbols import StateVector, semigroup_entries, semigroup_spectra

__all__ = [
    "NonlinearityParams",
    "SolverConfig",
    "PicardDivergenceError",
    "NumericalBlowupError",
    "NonlinearityOverflowError",
    "nonlinearity_eval",
    "duhamel_step",
    "energy",
    "dissipation",
    "Trajectory",
    "evolve",
    "convergence_study",
    "write_diagnostics_csv",
]


class PicardDivergenceError(RuntimeError):
    """Fixed-point iteration did not converge; the step is too large."""


class NumericalBlowupError(RuntimeError):
    def __init__(self, step: int):
        super().__init__(f"non-finite state at step {step}")
        self.step = step


class NonlinearityOverflowError(OverflowError):
    pass


@dataclass(frozen=True)
class NonlinearityParams:
    a: float = 0.0
    b: float = 0.0
    r_exp: float = 3.0

    def __post_init__(self):
        if self.r_exp < 1:
            raise ValueError("the power r must be >= 1")

    @property
    def vanishes(self) -> bool:
        return self.a == 0 and self.b == 0


@dataclass(frozen=True)
class SolverConfig:
    tau: float
    picard_tol: float = 1e-10
    picard_max: int = 50
    quadrature: str = "trapezoidal"

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if not self.picard_tol > 0:
            raise ValueError("picard_tol must be positive")
        if self.quadrature != "trapezoidal":
            raise ValueError("only the trapezoidal rule is implemented")


def _f(psi: np.ndarray, params: NonlinearityParams) -> np.ndarray:
    out = params.a * psi
    if params.b != 0:
        with np.errstate(over="raise", invalid="raise"):
            try:
                out = out + params.b * np.abs(psi) ** (params.r_exp - 1) * psi
            except FloatingPointError as exc:
                raise NonlinearityOverflowError("nonlinearity overflowed") from exc
    return out


def nonlinearity_eval(psi: SpectralField, params: NonlinearityParams) -> SpectralField:
    """Pointwise a psi + b |psi|^(r-1) psi."""
    return SpectralField(psi.grid, _f(psi.values, params))


def _to_space(spec: np.ndarray, grid: Grid) -> np.ndarray:
    return SpectralField.from_spectrum(grid, spec).values


def _to_freq(vals: np.ndarray, grid: Grid) -> np.ndarray:
    return SpectralField(grid, vals).spectrum


def _pair_norm(s0, s1, grid: Grid) -> float:
    # L^2 norm of both components via Parseval
    return float(np.sqrt((np.sum(np.abs(s0) ** 2) + np.sum(np.abs(s1) ** 2)) / grid.L**grid.n))


class _Stepper:
    """Caches the semigroup symbol for a fixed (grid, delta, tau)."""

    def __init__(self, grid: Grid, delta: float, tau: float):
        self.grid = grid
        self.sym = semigroup_entries(grid.xi_radius, delta, tau)

    def step(self, s0, s1, params: NonlinearityParams, config: SolverConfig):
        grid = self.grid
        lin0, lin1 = semigroup_spectra(s0, s1, self.sym)
        if params.vanishes:
            return lin0, lin1, 0
        half = 0.5 * config.tau
        f_now = _to_freq(_f(_to_space(s0, grid), params), grid)
        # T(tau) (0, g) = (b g, d g)
        base0 = lin0 + half * self.sym.b * f_now
        base1 = lin1 + half * self.sym.d * f_now
        # explicit predictor: full step of the left-endpoint rule
        n0 = lin0 + config.tau * self.sym.b * f_now
        n1 = lin1 + config.tau * self.sym.d * f_now
        for it in range(1, config.picard_max + 1):
            f_new = _to_freq(_f(_to_space(n0, grid), params), grid)
            m0 = base0
            m1 = base1 + half * f_new
            diff = _pair_norm(m0 - n0, m1 - n1, grid)
            scale = _pair_norm(m0, m1, grid)
            n0, n1 = m0, m1
            if diff <= config.picard_tol * max(1.0, scale):
                return n0, n1, it
        raise PicardDivergenceError(
            f"Picard iteration did not reach {config.picard_tol:g} in {config.picard_max} iterations"
        )


def duhamel_step(state: StateVector, delta: float, tau: float, params: NonlinearityParams,
                 config: SolverConfig | None = None) -> StateVector:
    """Advance the mild formulation by one step of length tau."""
    if config is None:
        config = SolverConfig(tau)
    elif tau > config.tau:
        raise ValueError(f"step {tau} exceeds the configured maximum {config.tau}")
    stepper = _Stepper(state.grid, delta, tau)
    n0, n1, _ = stepper.step(state.psi.spectrum, state.psi_t.spectrum, params,
                             SolverConfig(tau, config.picard_tol, config.picard_max))
    return StateVector.from_spectra(state.grid, n0, n1)


def _grad_sq(spec: np.ndarray, grid: Grid) -> float:
    return float(np.sum(grid.xi_radius**2 * np.abs(spec) ** 2) / grid.L**grid.n)


def energy(state: StateVector, params: NonlinearityParams) -> float:
    """Discrete energy; the a-term is included as -a/2 ||psi||^2 (sign-indefinite for a > 0)."""
    grid = state.grid
    e = 0.5 * lp_norm(state.psi_t, 2) ** 2 + 0.5 * _grad_sq(state.psi.spectrum, grid)
    if params.a != 0:
        e -= 0.5 * params.a * lp_norm(state.psi, 2) ** 2
    if params.b != 0:
        e -= params.b / (params.r_exp + 1) * lp_norm(state.psi, params.r_exp + 1) ** (params.r_exp + 1)
    return float(e)


def dissipation(state: StateVector, delta: float) -> float:
    """2 delta ||grad psi_t||^2."""
    return 2.0 * delta * _grad_sq(state.psi_t.spectrum, state.grid)


@dataclass
class Trajectory:
    times: np.ndarray
    energy: np.ndarray
    dissipation: np.ndarray
    l2: np.ndarray
    sup: np.ndarray
    picard_iterations: np.ndarray
    final: StateVector
    snapshots: list = field(default_factory=list)

    @property
    def identity_residual(self) -> np.ndarray:
        """|dE/dt + D| with a forward difference for dE/dt and the trapezoidal mean of D."""
        dt = np.diff(self.times)
        dE = np.diff(self.energy) / dt
        D = 0.5 * (self.dissipation[1:] + self.dissipation[:-1])
        return np.abs(dE + D)

    def energy_increases(self, tol: float) -> int:
        """Number of steps where E grows by more than ``tol``."""
        return int(np.sum(np.diff(self.energy) > tol))


def evolve(state0: StateVector, delta: float, T: float, params: NonlinearityParams,
           config: SolverConfig, snapshot_every: int = 0) -> Trajectory:
    """Take m = T / tau steps, recording energy diagnostics after each one."""
    m = int(round(T / config.tau))
    if m < 1 or abs(m * config.tau - T) > 1e-9 * max(1.0, T):
        raise ValueError(f"T={T} is not a multiple of tau={config.tau}")
    grid = state0.grid
    stepper = _Stepper(grid, delta, config.tau)
    s0, s1 = state0.psi.spectrum, state0.psi_t.spectrum
    state = state0
    times = np.arange(m + 1) * config.tau
    E = np.empty(m + 1)
    D = np.empty(m + 1)
    l2 = np.empty(m + 1)
    sup = np.empty(m + 1)
    its = np.zeros(m + 1, dtype=int)
    snaps = []

    def record(k, st):
        E[k] = energy(st, params)
        D[k] = dissipation(st, delta)
        l2[k] = lp_norm(st.psi, 2)
        sup[k] = lp_norm(st.psi, np.inf)
        if snapshot_every and k % snapshot_every == 0:
            snaps.append((times[k], st))

    record(0, state)
    for k in range(1, m + 1):
        s0, s1, its[k] = stepper.step(s0, s1, params, config)
        if not (np.all(np.isfinite(s0)) and np.all(np.isfinite(s1))):
            raise NumericalBlowupError(k)
        state = StateVector.from_spectra(grid, s0, s1)
        record(k, state)
    return Trajectory(times, E, D, l2, sup, its, state, snaps)


def convergence_study(state0: StateVector, delta: float, T: float, params: NonlinearityParams,
                      divisions=(64, 128, 256, 512, 1024)) -> dict:
    """Endpoint errors against the Richardson extrapolation of the two finest runs."""
    divisions = sorted(divisions)
    finals = {}
    for m in divisions:
        tr = evolve(state0, delta, T, params, SolverConfig(T / m))
        finals[m] = (tr.final.psi.spectrum, tr.final.psi_t.spectrum)
    fine, finer = divisions[-2], divisions[-1]
    ref = tuple((4 * finals[finer][i] - finals[fine][i]) / 3 for i in range(2))
    grid = state0.grid
    taus, errs = [], []
    for m in divisions[:-1]:
        taus.append(T / m)
        errs.append(_pair_norm(finals[m][0] - ref[0], finals[m][1] - ref[1], grid))
    order = float(np.polyfit(np.log(taus), np.log(errs), 1)[0])
    return {"tau": np.array(taus), "error": np.array(errs), "order": order}


def write_diagnostics_csv(path, traj: Trajectory) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "E", "D", "psi_l2", "psi_sup"])
        for row in zip(traj.times, traj.energy, traj.dissipation, traj.l2, traj.sup):
            w.writerow([repr(float(x)) for x in row])
