import numpy as np
import pytest

from dampedwave.estimator import (
    DEFAULT_SEED,
    ExponentSet,
    GridTooCoarseError,
    NonIntegrableSymbolError,
    Probe,
    ProbeFamily,
    ZeroProbeError,
    besov_estimate_check,
    check_littman_grid,
    conjugate,
    corollary_decay_scan,
    decay_fit,
    gaussian_probe,
    interpolation_check,
    lemma1_constant,
    lemma1_lift_check,
    littman_decay_scan,
    littman_grid,
    log2_slope,
    measured_ratio,
    modulated_probe,
    probe_family,
    scaling_grid,
    scaling_identity_check,
    shell_probe,
    shell_sup_bounds,
    uniformity_constant,
)
from dampedwave.littlewood_paley import SpectralLeakageError, UnresolvedShellError, chi
from dampedwave.spectral import SpectralField, boundary_ratio, lp_norm, make_grid
from dampedwave.symbols import heat_factor, propagator_kernel


class TestExponents:
    def test_conjugates(self):
        assert conjugate(1) == np.inf and conjugate(np.inf) == 1 and conjugate(2) == 2
        assert conjugate(1.2) == pytest.approx(6.0)

    def test_two_dimensional_endpoint(self):
        ex = ExponentSet(6 / 5, 2)
        assert ex.p_min == pytest.approx(6 / 5)
        assert ex.decay_exponent == pytest.approx(-1 / 3)
        assert ex.alpha == pytest.approx(2 / 3)
        assert 1 / ex.p + 1 / ex.p_conj == pytest.approx(1.0)
        assert ex.admissible()

    def test_three_dimensional(self):
        ex = ExponentSet(4 / 3, 3)
        assert ex.p_min == pytest.approx(4 / 3)
        assert ex.decay_exponent == pytest.approx(-0.5)

    @pytest.mark.parametrize("n", [1, 2, 3, 5])
    def test_p_two(self, n):
        ex = ExponentSet(2.0, n)
        assert ex.decay_exponent == 1.0 and ex.alpha == 0.0 and ex.admissible()

    def test_inadmissible(self):
        assert not ExponentSet(1.1, 2).admissible()
        assert not ExponentSet(2.5, 2).admissible()


class TestDecayFit:
    t = np.geomspace(10, 200, 12)

    def test_exact_power_law(self):
        fit = decay_fit(self.t, 3 * self.t**-0.5)
        assert fit.slope == pytest.approx(-0.5, abs=1e-12)
        assert fit.intercept == pytest.approx(3.0, rel=1e-12)
        assert fit.residual < 1e-12
        np.testing.assert_allclose(fit.predict(self.t), 3 * self.t**-0.5, rtol=1e-12)

    def test_identity(self):
        assert decay_fit(self.t, self.t).slope == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_noisy_power_law(self, seed):
        rng = np.random.default_rng(seed)
        vals = 2 * self.t**-1.0 * (1 + 0.05 * rng.standard_normal(self.t.size))
        fit = decay_fit(self.t, vals)
        assert fit.slope == pytest.approx(-1.0, abs=0.05)
        assert 0 < fit.residual < 0.1

    def test_errors(self):
        with pytest.raises(ValueError):
            decay_fit(self.t, -self.t)
        with pytest.raises(ValueError):
            decay_fit(self.t[:5], self.t[:5])
        with pytest.raises(ValueError):
            decay_fit(self.t, self.t[:-1])

    def test_log2_slope(self):
        assert log2_slope([1, 2, 3], [2, 4, 8]) == pytest.approx(1.0)


class TestProbes:
    grid = make_grid(2, 256, 48.0)

    def test_family_composition_and_invariants(self):
        fam = probe_family(self.grid)
        kinds = {p.kind for p in fam}
        assert kinds == {"gaussian", "modulated", "shell"}
        for pr in fam:
            assert boundary_ratio(pr.field) < 1e-12
            assert lp_norm(pr.field, np.inf) > 0
        assert len(fam) + len(fam.dropped) == 4 + 4 + 3

    def test_unresolved_probes_are_dropped(self):
        # Nyquist ~3 cannot carry the carrier-8 modulated Gaussian
        fam = probe_family(make_grid(2, 64, 64.0))
        labels = [d[0] for d in fam.dropped]
        assert "mod_k8" in labels
        assert "mod_k8" not in fam.labels

    def test_deterministic_shell_probes(self):
        a = shell_probe(self.grid, 2)
        b = shell_probe(self.grid, 2)
        c = shell_probe(self.grid, 2, seed=DEFAULT_SEED + 1)
        np.testing.assert_array_equal(a.values, b.values)
        assert np.max(np.abs(a.values - c.values)) > 0.1

    def test_subset(self):
        full = probe_family(self.grid)
        fam = full.subset({"gaussian"})
        assert fam.labels == [p.label for p in full if p.kind == "gaussian"]
        assert "gauss_w1" in fam.labels and fam.dropped == full.dropped

    def test_modulated_probe_modulus(self):
        v = modulated_probe(self.grid, 4.0)
        np.testing.assert_allclose(np.abs(v.values), gaussian_probe(self.grid, 1.0).values, atol=1e-15)


class TestMeasuredRatio:
    grid = make_grid(2, 256, 48.0)

    def test_identity_and_zero(self):
        v = shell_probe(self.grid, 2)
        assert measured_ratio(lambda r: 1 + 0 * r, v, 2) == pytest.approx(1.0, rel=1e-12)
        assert measured_ratio(lambda r: 0 * r, v, 1.5) == 0.0

    @pytest.mark.parametrize("w", [0.5, 1.0, 2.0])
    def test_heat_symbol_at_p_one(self, w):
        h = lambda r: np.exp(-r**2)
        coarse = measured_ratio(h, gaussian_probe(self.grid, w), 1)
        # same quantity at four times the resolution in each direction
        fine_grid = make_grid(2, 1024, 48.0)
        fine = measured_ratio(h, gaussian_probe(fine_grid, w), 1)
        # sup of w^2/(w^2+2) exp(-|x|^2/(2(w^2+2))) over the L^1 norm 2 pi w^2
        exact = 1 / (2 * np.pi * (w**2 + 2))
        assert coarse == pytest.approx(fine, rel=1e-6)
        assert coarse == pytest.approx(exact, rel=1e-6)

    def test_errors(self):
        v = gaussian_probe(self.grid, 1.0)
        with pytest.raises(ZeroProbeError):
            measured_ratio(lambda r: r, v * 0.0, 1.5)
        with pytest.raises(ValueError):
            measured_ratio(lambda r: r, v, 2.5)

    def test_propagator_ratio_at_most_t_for_p_two(self):
        fam = probe_family(self.grid)
        for delta, t in [(0.0, 3.0), (0.1, 2.0), (1.0, 0.5)]:
            h = lambda r: propagator_kernel(r, delta, t)
            for pr in fam:
                assert measured_ratio(h, pr.field, 2) <= t * (1 + 1e-12)


class TestInterpolation:
    family = probe_family(make_grid(2, 256, 48.0))

    def test_heat_factor_all_exponents(self):
        h = lambda r: heat_factor(r, 0.3, 1.0)
        for p in (1, 6 / 5, 3 / 2, 2):
            rep = interpolation_check(h, self.family, p)
            assert rep.passed, (p, rep.max_ratio, rep.bound)

    def test_endpoints(self):
        h = lambda r: heat_factor(r, 0.3, 1.0)
        r1 = interpolation_check(h, self.family, 1)
        r2 = interpolation_check(h, self.family, 2)
        assert r1.alpha == 1 and r1.bound == pytest.approx(r1.C1)
        assert r2.alpha == 0 and r2.bound == pytest.approx(r2.Cinf)
        # Parseval: the L^2 ratio never exceeds the symbol sup
        assert r2.max_ratio <= r2.Cinf * (1 + 1e-12)
        # Young: the L^1 -> L^inf ratio never exceeds the kernel sup
        assert r1.max_ratio <= r1.C1 * (1 + 1e-12)

    def test_propagator_golden_case(self):
        h = lambda r: propagator_kernel(r, 0.1, 2.0)
        rep = interpolation_check(h, self.family, 6 / 5, cutoff_J=4)
        assert rep.passed
        assert rep.max_ratio <= rep.bound

    def test_non_integrable_symbol(self):
        with pytest.raises(NonIntegrableSymbolError):
            interpolation_check(lambda r: propagator_kernel(r, 0.0, 2.0), self.family, 1.5)


class TestShellBounds:
    def test_zero_shell_uniform_in_delta(self):
        bs = [shell_sup_bounds(d, 0, grid=make_grid(2, 256, 132.0)) for d in (0.0, 1e-2, 0.1, 1.0, 10.0)]
        S = [b.S for b in bs]
        M = [b.M for b in bs]
        assert max(M) <= 1.0 and max(S) <= 1.0
        assert min(S) > 0.01 and min(M) > 0.3

    def test_regime_flag(self):
        g = make_grid(2, 128, 20.0)
        assert shell_sup_bounds(2.0**-6, 3, grid=g).regime == "small"
        assert shell_sup_bounds(2.0**-6, 3, grid=g).delta_j == pytest.approx(1 / 8)
        assert shell_sup_bounds(0.1, 3, grid=g).regime == "large"

    def test_unresolved(self):
        with pytest.raises(UnresolvedShellError):
            shell_sup_bounds(0.0, 5, grid=make_grid(2, 64, 20.0))


class TestLittman:
    def test_time_zero(self):
        g = littman_grid(2, 30.0)
        scan = littman_decay_scan(0.0, 2, [0.0, 5, 10, 15, 20, 25, 30], grid=g)
        assert scan.values[0] == 0.0
        assert scan.fit is not None and len(scan.fit.times) == 6

    def test_grid_rule(self):
        g = littman_grid(2, 100.0)
        assert g.L >= 800 and g.h <= np.pi / 4
        g3 = littman_grid(3, 60.0, N=256)
        assert g3.h == pytest.approx(np.pi / 4)

    def test_too_coarse(self):
        g = make_grid(2, 64, 40.0)
        with pytest.raises(GridTooCoarseError):
            check_littman_grid(g, 200.0, 0.0)
        with pytest.raises(GridTooCoarseError):
            check_littman_grid(make_grid(2, 8, 40.0), 1.0, 0.0)

    def test_delta_range(self):
        with pytest.raises(ValueError):
            littman_decay_scan(0.5, 2, np.geomspace(1, 10, 6))

    def test_uniformity_constant(self):
        assert uniformity_constant([0, 3], [2.0, 1.0], 2) == 2.0


class TestScaling:
    grid = scaling_grid(2.0)

    def test_unit_time(self):
        assert scaling_identity_check(gaussian_probe(self.grid, 1.0), 0.3, 1.0) == 0.0

    @pytest.mark.parametrize("delta", [0.0, 0.1])
    def test_moderate_time(self, delta):
        assert scaling_identity_check(gaussian_probe(self.grid, 1.0), delta, 2.0) <= 1e-6


class TestCorollary:
    grid = make_grid(2, 256, 96.0)

    def test_p_two_invariant_and_guards(self):
        fam = probe_family(self.grid, shells=[1, 2])
        scan = corollary_decay_scan(0.1, 6 / 5, np.geomspace(1, 16, 6), fam)
        assert scan.p2_invariant_holds()
        assert scan.target == pytest.approx(-1 / 3)
        with pytest.raises(ValueError):
            corollary_decay_scan(0.1, 1.1, [1, 2, 3, 4, 5, 6], fam)
        with pytest.raises(ValueError):
            corollary_decay_scan(0.1, 1.5, [1, 2, 3, 4, 5, 6], probe_family(make_grid(1, 256, 96.0)))


class TestBesovCheck:
    grid = make_grid(2, 256, 48.0)

    def low_frequency_family(self):
        v = SpectralField.from_spectrum(self.grid, chi(4 * self.grid.xi_radius))
        return ProbeFamily(self.grid, [Probe("low", "custom", 0.0, v)])

    def test_zero_shell_probe_reduces_to_lp(self):
        fam = self.low_frequency_family()
        times = [0.5, 1.0, 2.0]
        chk = besov_estimate_check(0.1, 2.0, 2, 1.0, times, fam, J=3)
        v = fam.probes[0].field
        for i, t in enumerate(times):
            Tv = SpectralField.from_spectrum(self.grid, propagator_kernel(self.grid.xi_radius, 0.1, t) * v.spectrum)
            expected = lp_norm(Tv, 2) / (t * max(t, 1 / t) * lp_norm(v, 2))
            assert chk.ratios["low"][i] == pytest.approx(expected, rel=1e-12)

    def test_leakage_and_guards(self):
        fam = probe_family(self.grid, shells=[1, 2, 3])
        with pytest.raises(SpectralLeakageError):
            besov_estimate_check(0.1, 1.2, 2, 1.0, [1.0], fam, J=2)
        with pytest.raises(ValueError):
            besov_estimate_check(0.1, 1.2, 2, 0.0, [1.0], fam, J=3)


class TestLemma1:
    grid = make_grid(2, 256, 48.0)

    def test_constant(self):
        assert lemma1_constant(1.0, 2.0) == pytest.approx(3 * (4 + 0.25 + 1))

    def test_identity_symbol(self):
        fam = probe_family(self.grid, carriers=(1.0, 2.0), shells=[1, 2])
        rep = lemma1_lift_check(lambda r: 1 + 0 * r, fam, 1.0, 2.0, 2.0, J=3)
        for val in rep.besov_ratios.values():
            assert val == pytest.approx(1.0, rel=1e-12)
        assert rep.passed

    def test_propagator_golden_case(self):
        fam = probe_family(self.grid, shells=[1, 2])
        h = lambda r: propagator_kernel(r, 0.1, 1.0)
        rep = lemma1_lift_check(h, fam, 1.0, 6 / 5, 2.0, J=3)
        assert rep.passed
        assert 0 < rep.empirical_C_tilde < rep.C_tilde
