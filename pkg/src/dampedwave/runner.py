"""
Named experiments: each turns an `ExperimentConfig` into checks and tables.

Every experiment returns an `Outcome`; `write_outcome` turns it into CSV
tables, ``summary.json`` and ``manifest.json`` inside the output directory.
All numbers are written with ``repr`` and JSON keys are sorted, so equal
inputs give byte-identical files.
"""
from __future__ import annotations

import csv
import hashlib
import json
import os
import platform
from dataclasses import dataclass, field

import numpy as np
import scipy

from . import __version__
from .config import ExperimentConfig
from .curvature import (
    DELTA_MAX,
    annulus_samples,
    curvature_report,
    hessian_fd,
    hessian_radial,
    minor_lower_bound,
    rank_on_annulus,
)
from .duhamel import NonlinearityParams, SolverConfig, convergence_study, evolve, write_diagnostics_csv
from .estimator.checks import (
    besov_estimate_check,
    corollary_decay_scan,
    interpolation_check,
    lemma1_lift_check,
    littman_decay_scan,
    littman_grid,
    scaling_grid,
    scaling_identity_check,
    shell_grid,
    shell_slopes,
    shell_sup_bounds,
)
from .estimator.fitting import decay_fit
from .estimator.probes import gaussian_probe, probe_family
from .io import write_snapshot
from .littlewood_paley import build_partition, export_partition_csv
from .spectral import SpectralField, make_grid
from .symbols import StateVector, propagator_kernel, semigroup_entries

__all__ = ["Check", "Outcome", "RUNNERS", "run_experiment", "write_outcome"]


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    tolerance: float
    relation: str  # how measured is compared with tolerance: "<=", ">=", ">" or "abs<="
    target: float | None = None

    @property
    def passed(self) -> bool:
        m, tol = self.measured, self.tolerance
        if not np.isfinite(m):
            return False
        if self.relation == "<=":
            return m <= tol
        if self.relation == ">=":
            return m >= tol
        if self.relation == ">":
            return m > tol
        if self.relation == "abs<=":
            return abs(m - self.target) <= tol
        raise ValueError(self.relation)

    def as_dict(self) -> dict:
        d = {
            "name": self.name,
            "measured": float(self.measured),
            "tolerance": float(self.tolerance),
            "relation": self.relation,
            "passed": bool(self.passed),
        }
        if self.target is not None:
            d["target"] = float(self.target)
        return d


@dataclass
class Outcome:
    checks: list
    tables: dict = field(default_factory=dict)  # file name -> (header, rows)
    writers: list = field(default_factory=list)  # callables taking the output dir
    info: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _grid(cfg: ExperimentConfig):
    g = cfg.grid
    return make_grid(g["n"], g["N"], g["L"])


def _decay_rows(times, values, fit):
    slope = fit.slope if fit is not None else float("nan")
    resid = fit.residual if fit is not None else float("nan")
    return [(t, v, slope, resid) for t, v in zip(times, values)]


DECAY_HEADER = ("t", "value", "fitted_slope", "residual")
SWEEP_HEADER = ("delta", "p", "C_hat", "slope", "pass")


def _tag(delta: float) -> str:
    return f"{delta:.6g}"


# -- experiments ---------------------------------------------------------------------


def partition_check(cfg: ExperimentConfig) -> Outcome:
    grid = _grid(cfg)
    J = cfg.params["J"]
    part = build_partition(grid, J)
    checks = [
        Check("partition_error", part.partition_error(), cfg.tol("partition"), "<="),
        Check("overlap_violation", part.overlap_violation(), cfg.tol("overlap"), "<="),
    ]
    out = Outcome(checks)
    out.writers.append(lambda d: export_partition_csv(os.path.join(d, "partition.csv"), J))
    return out


def symbol_invariants(cfg: ExperimentConfig) -> Outcome:
    P = cfg.params
    r = np.asarray(P["radii"])
    worst_det = worst_comp = 0.0
    finite = True
    rows = []
    for delta in P["deltas"]:
        for t in P["times"]:
            A = semigroup_entries(r, delta, t)
            M = A.as_matrix()
            finite &= bool(np.all(np.isfinite(M)))
            e = np.exp(-2.0 * delta * t * r**2)
            scale = np.maximum.reduce([e, np.abs(A.a * A.d), np.abs(A.b * A.c)])
            det_err = float(np.max(np.abs(A.det() - e) / scale))
            comp_err = 0.0
            for frac in P["composition_fractions"]:
                s = frac * t
                R = semigroup_entries(r, delta, t + s).as_matrix()
                prod = M @ semigroup_entries(r, delta, s).as_matrix()
                err = np.linalg.norm(prod - R, axis=(-2, -1)) / np.linalg.norm(R, axis=(-2, -1))
                comp_err = max(comp_err, float(np.max(err)))
            worst_det = max(worst_det, det_err)
            worst_comp = max(worst_comp, comp_err)
            rows.append((delta, t, det_err, comp_err))
    checks = [
        Check("determinant_identity", worst_det, cfg.tol("determinant"), "<="),
        Check("composition", worst_comp, cfg.tol("composition"), "<="),
        Check("all_entries_finite", float(finite), 1.0, ">="),
    ]
    return Outcome(checks, {"symbol_invariants.csv": (("delta", "t", "det_error", "composition_error"), rows)})


def shell_bounds(cfg: ExperimentConfig) -> Outcome:
    n, N = cfg.grid["n"], cfg.grid["N"]
    tol = cfg.tol("slope")
    exponents = {"small": ((n - 1) / 2, -1.0), "large": (n - 2.0, -2.0)}
    checks, tables = [], {}
    for delta in cfg.params["deltas"]:
        bounds = [shell_sup_bounds(delta, int(j), n, shell_grid(int(j), n, N)) for j in cfg.params["shells"]]
        tables[f"shell_bounds_delta{_tag(delta)}.csv"] = (
            ("j", "delta_j", "regime", "S_j", "M_j"),
            [(b.j, b.delta_j, b.regime, b.S, b.M) for b in bounds],
        )
        for regime, sl in sorted(shell_slopes(bounds).items()):
            eS, eM = exponents[regime]
            checks.append(Check(f"S_slope[delta={_tag(delta)},{regime}]", sl["S"], eS + tol, "<="))
            checks.append(Check(f"M_slope[delta={_tag(delta)},{regime}]", sl["M"], eM + tol, "<="))
    return Outcome(checks, tables)


def littman_scan(cfg: ExperimentConfig) -> Outcome:
    n = cfg.grid["n"]
    times = np.asarray(cfg.params["times"])
    grid = littman_grid(n, times.max(), cfg.grid.get("N"))
    tables, checks, sweep, consts = {}, [], [], {}
    target = -(n - 1) / 2
    for delta in cfg.params["deltas"]:
        scan = littman_decay_scan(delta, n, times, grid)
        tables[f"decay_delta{_tag(delta)}.csv"] = (DECAY_HEADER, _decay_rows(times, scan.values, scan.fit))
        consts[delta] = scan.uniform_constant()
        ok = abs(scan.fit.slope - target) <= cfg.tol("slope")
        sweep.append((delta, "inf", consts[delta], scan.fit.slope, int(ok)))
        if delta == 0:
            checks.append(Check("slope[delta=0]", scan.fit.slope, cfg.tol("slope"), "abs<=", target))
    if len(consts) > 1:
        spread = max(consts.values()) / min(consts.values())
        checks.append(Check("uniformity_ratio", spread, cfg.tol("uniformity"), "<="))
    tables["sweep.csv"] = (SWEEP_HEADER, sweep)
    return Outcome(checks, tables, info={"L": grid.L, "N": grid.N})


def _family(cfg: ExperimentConfig, grid, band=None):
    fam = probe_family(grid, seed=cfg.seed, band=band)
    if len(fam) == 0:
        raise RuntimeError("every probe was dropped; the grid does not resolve the family")
    return fam


def corollary_scan(cfg: ExperimentConfig) -> Outcome:
    grid = _grid(cfg)
    fam = _family(cfg, grid)
    P = cfg.params
    tables, checks, sweep, icpt = {}, [], [], {}
    p2_ok = True
    for delta in P["deltas"]:
        sc = corollary_decay_scan(delta, P["p"], P["times"], fam, cfg.tol("slope"))
        tables[f"decay_delta{_tag(delta)}.csv"] = (DECAY_HEADER, _decay_rows(sc.times, sc.envelope, sc.fit))
        sweep.append((delta, P["p"], sc.fit.intercept, sc.fit.slope, int(sc.passed)))
        icpt[delta] = sc.fit.intercept
        checks.append(Check(f"slope[delta={_tag(delta)}]", sc.fit.slope, sc.target + sc.tolerance, "<="))
        p2_ok &= sc.p2_invariant_holds(cfg.tol("p2_rtol"))
    checks.append(Check("p2_ratio_le_t", float(p2_ok), 1.0, ">="))
    if len(icpt) > 1:
        checks.append(Check("intercept_spread", max(icpt.values()) / min(icpt.values()),
                            cfg.tol("intercept_spread"), "<="))
    tables["sweep.csv"] = (SWEEP_HEADER, sweep)
    return Outcome(checks, tables, info={"probes": fam.labels, "dropped": [d[0] for d in fam.dropped]})


def besov_scan(cfg: ExperimentConfig) -> Outcome:
    grid = _grid(cfg)
    P = cfg.params
    fam = _family(cfg, grid, band=2.0 ** P["J"])
    part = build_partition(grid, P["J"])
    tables, checks, maxima = {}, [], {}
    times = np.asarray(P["times"])
    for delta in P["deltas"]:
        bc = besov_estimate_check(delta, P["p"], P["q"], P["sigma"], times, fam, P["J"], part)
        env = bc.max_over_family
        fit = None
        if len(times) >= 6 and np.all(env > 0):
            fit = decay_fit(times, env)
        tables[f"besov_delta{_tag(delta)}.csv"] = (DECAY_HEADER, _decay_rows(times, env, fit))
        maxima[delta] = bc.overall_max
    checks.append(Check("ratio_finite", float(all(np.isfinite(v) for v in maxima.values())), 1.0, ">="))
    if len(maxima) > 1:
        checks.append(Check("delta_spread", max(maxima.values()) / min(maxima.values()),
                            cfg.tol("delta_spread"), "<="))
    tables["maxima.csv"] = (("delta", "max_ratio"), sorted(maxima.items()))
    return Outcome(checks, tables, info={"probes": fam.labels})


def lemma1_check(cfg: ExperimentConfig) -> Outcome:
    grid = _grid(cfg)
    P = cfg.params
    fam = _family(cfg, grid, band=2.0 ** P["J"])
    delta, t = P["delta"], P["t"]
    rep = lemma1_lift_check(lambda r: propagator_kernel(r, delta, t), fam, P["sigma"], P["p"], P["q"], P["J"])
    worst = max(rep.besov_ratios.values())
    bound = rep.C_tilde * rep.C_shell * (1 + cfg.tol("rtol"))
    checks = [Check("besov_ratio_vs_lifted_bound", worst, bound, "<=")]
    rows = [(lab, val) for lab, val in sorted(rep.besov_ratios.items())]
    return Outcome(checks, {"lemma1.csv": (("probe", "besov_ratio"), rows)},
                   info={"C_shell": rep.C_shell, "C_tilde": rep.C_tilde})


def interpolation(cfg: ExperimentConfig) -> Outcome:
    grid = _grid(cfg)
    fam = _family(cfg, grid)
    P = cfg.params
    rows, violations, worst = [], 0, 0.0
    for delta in P["deltas"]:
        for t in P["times"]:
            h = lambda r, d=delta, tt=t: propagator_kernel(r, d, tt)
            for p in P["ps"]:
                rep = interpolation_check(h, fam, p, P["cutoff_J"], cfg.tol("slack"))
                violations += not rep.passed
                worst = max(worst, rep.max_ratio / rep.bound)
                rows.append((delta, t, p, rep.C1, rep.Cinf, rep.bound, rep.max_ratio, int(rep.passed)))
    checks = [
        Check("violations", violations, 0, "<="),
        Check("worst_ratio_over_bound", worst, 1 + cfg.tol("slack"), "<="),
    ]
    header = ("delta", "t", "p", "C1", "Cinf", "bound", "max_ratio", "pass")
    return Outcome(checks, {"interpolation.csv": (header, rows)})


def scaling(cfg: ExperimentConfig) -> Outcome:
    n = cfg.grid["n"]
    P = cfg.params
    rows, worst = [], 0.0
    for t in P["times"]:
        grid = scaling_grid(t, n)
        for w in P["widths"]:
            v = gaussian_probe(grid, w)
            for delta in P["deltas"]:
                err = scaling_identity_check(v, delta, t)
                worst = max(worst, err)
                rows.append((delta, t, w, err))
    rows.sort()
    return Outcome([Check("max_relative_error", worst, cfg.tol("relative"), "<=")],
                   {"scaling.csv": (("delta", "t", "width", "rel_error"), rows)})


def curvature(cfg: ExperimentConfig) -> Outcome:
    P = cfg.params
    checks, tables = [], {}
    for n in P["dims"]:
        n = int(n)
        pts = annulus_samples(n, int(P["n_radii"]), int(P["n_dirs"]), seed=cfg.seed % 2**32)
        fd_err = 0.0
        for delta in P["deltas"]:
            for x in pts:
                H = hessian_radial(delta, x)
                fd_err = max(fd_err, float(np.max(np.abs(H - hessian_fd(delta, x))) / max(1.0, np.max(np.abs(H)))))
        checks.append(Check(f"fd_error[n={n}]", fd_err, cfg.tol("finite_difference"), "<="))
        for delta in P["deltas"]:
            expected = n - 1 if delta == 0 else n
            checks.append(Check(f"rank[n={n},delta={_tag(delta)}]", rank_on_annulus(delta, n, pts),
                                0, "abs<=", expected))
        idem = 0.0
        for x in pts:
            Pm = np.linalg.norm(x) * hessian_radial(0.0, x)
            idem = max(idem, float(np.max(np.abs(Pm @ Pm - Pm))))
        checks.append(Check(f"idempotency[n={n}]", idem, cfg.tol("idempotency"), "<="))
        m, _, _ = minor_lower_bound(P["deltas"], n, pts)
        checks.append(Check(f"minor_lower_bound[n={n}]", m, 0.0, ">"))
        rows = curvature_report(P["deltas"], n, pts)
        tables[f"curvature_n{n}.csv"] = (
            ("delta", "r", "det", "rank", "min_minor_max"),
            [(r["delta"], r["r"], r["det"], r["rank"], r["min_minor_max"]) for r in rows],
        )
    return Outcome(checks, tables, info={"delta_max": DELTA_MAX})


def _initial_state(cfg: ExperimentConfig) -> StateVector:
    grid = _grid(cfg)
    P = cfg.params
    amp, w = P["amplitude"], P["width"]
    psi = SpectralField.from_function(grid, lambda x: amp * np.exp(-np.sum(x**2, axis=0) / (2 * w * w)))
    return StateVector(psi, psi * 0.0)


def _nonlinearity(cfg: ExperimentConfig) -> NonlinearityParams:
    P = cfg.params
    return NonlinearityParams(P["a"], P["b"], P["r_exp"])


def solve(cfg: ExperimentConfig) -> Outcome:
    P = cfg.params
    params = _nonlinearity(cfg)
    st = _initial_state(cfg)
    tr = evolve(st, P["delta"], P["T"], params, SolverConfig(P["tau"]), snapshot_every=int(P["snapshot_every"]))
    E0 = tr.energy[0]
    checks = []
    if P["delta"] > 0 and params.a == 0 and params.b <= 0:
        tol = cfg.tol("monotone") * abs(E0)
        checks.append(Check("energy_increase_steps", tr.energy_increases(tol), 0, "<="))
    if P["delta"] == 0 and params.vanishes:
        drift = float(np.max(np.abs(tr.energy - E0)) / abs(E0))
        checks.append(Check("energy_drift", drift, cfg.tol("conservation"), "<="))
    checks.append(Check("final_state_finite", float(np.all(np.isfinite(tr.final.psi.values))), 1.0, ">="))

    def dump(d):
        write_diagnostics_csv(os.path.join(d, "diagnostics.csv"), tr)
        if tr.snapshots:
            sdir = os.path.join(d, "snapshots")
            os.makedirs(sdir, exist_ok=True)
            for k, (t, s) in enumerate(tr.snapshots):
                write_snapshot(os.path.join(sdir, f"state_{k:05d}.bin"), [s.psi, s.psi_t])

    return Outcome(checks, writers=[dump],
                   info={"max_identity_residual": float(tr.identity_residual.max()),
                         "max_picard_iterations": int(tr.picard_iterations.max())})


def convergence(cfg: ExperimentConfig) -> Outcome:
    P = cfg.params
    res = convergence_study(_initial_state(cfg), P["delta"], P["T"], _nonlinearity(cfg),
                            tuple(int(m) for m in P["divisions"]))
    checks = [Check("order", res["order"], cfg.tol("order_tol"), "abs<=", cfg.tol("order"))]
    rows = list(zip(res["tau"], res["error"]))
    return Outcome(checks, {"convergence.csv": (("tau", "error"), rows)})


RUNNERS = {
    "partition-check": partition_check,
    "symbol-invariants": symbol_invariants,
    "shell-bounds": shell_bounds,
    "littman-scan": littman_scan,
    "corollary-scan": corollary_scan,
    "besov-scan": besov_scan,
    "lemma1-check": lemma1_check,
    "interpolation-check": interpolation,
    "scaling-check": scaling,
    "curvature-report": curvature,
    "solve": solve,
    "convergence-study": convergence,
}


def run_experiment(cfg: ExperimentConfig) -> Outcome:
    return RUNNERS[cfg.name](cfg)


# -- output --------------------------------------------------------------------------


def _cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(x)
    return x


def write_outcome(cfg: ExperimentConfig, outcome: Outcome) -> dict:
    """Write tables, summary.json and manifest.json; returns the summary."""
    d = cfg.output
    os.makedirs(d, exist_ok=True)
    for fname, (header, rows) in sorted(outcome.tables.items()):
        with open(os.path.join(d, fname), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_cell(x) for x in row])
    for writer in outcome.writers:
        writer(d)
    summary = {
        "experiment": cfg.name,
        "passed": bool(outcome.passed),
        "checks": sorted((c.as_dict() for c in outcome.checks), key=lambda c: c["name"]),
        "info": _jsonable(outcome.info),
    }
    with open(os.path.join(d, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(d, "config.ini"), "w") as fh:
        fh.write(cfg.text)
    files = {}
    for root, _, names in os.walk(d):
        for name in names:
            if name == "manifest.json":
                continue
            full = os.path.join(root, name)
            files[os.path.relpath(full, d).replace(os.sep, "/")] = _sha256(full)
    manifest = {
        "experiment": cfg.name,
        "config_sha256": cfg.digest,
        "seed": cfg.seed,
        "versions": {
            "dampedwave": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "files": dict(sorted(files.items())),
    }
    with open(os.path.join(d, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary
