import csv

import numpy as np
import pytest

from dampedwave.curvature import (
    DELTA_MAX,
    RadialPhase,
    SingularParameterizationError,
    annulus_samples,
    curvature_report,
    det_hessian,
    hessian_fd,
    hessian_radial,
    matrix_rank,
    max_minor,
    minor_lower_bound,
    rank_on_annulus,
)
from dampedwave.symbols import lambda_derivatives

DELTAS = (0.0, 0.05, 0.2, DELTA_MAX - 1e-3)


def random_annulus_points(n, k, seed=0):
    rng = np.random.default_rng(seed)
    d = rng.normal(size=(k, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return d * rng.uniform(0.55, 1.9, size=(k, 1))


class TestHessian:
    def test_undamped_unit_point(self):
        np.testing.assert_array_equal(hessian_radial(0.0, [1.0, 0.0]), [[0, 0], [0, 1]])

    def test_matches_finite_differences(self):
        x = np.array([1.0, 0.0])
        np.testing.assert_allclose(hessian_radial(0.25, x), hessian_fd(0.25, x), atol=1e-6)

    @pytest.mark.parametrize("n", [2, 3])
    def test_idempotent_and_trace_at_zero_damping(self, n):
        for x in random_annulus_points(n, 50, n):
            r = np.linalg.norm(x)
            A = r * hessian_radial(0.0, x)
            assert np.linalg.norm(A @ A - A) <= 1e-12
            assert np.trace(A) == pytest.approx(n - 1, abs=1e-13)

    @pytest.mark.parametrize("n", [2, 3])
    def test_eigenstructure(self, n):
        for delta in (0.05, 0.2, 0.3):
            for x in random_annulus_points(n, 20, 7):
                r = np.linalg.norm(x)
                H = hessian_radial(delta, x)
                d1, d2 = lambda_derivatives(r, delta)
                np.testing.assert_allclose(H @ (x / r), d2 * x / r, atol=1e-8)
                eig = np.sort(np.linalg.eigvalsh(H))
                expected = np.sort([d1 / r] * (n - 1) + [d2])
                np.testing.assert_allclose(eig, expected, atol=1e-8)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            hessian_radial(0.1, [1.0, 0.0], n=3)

    def test_origin_and_vanishing_gradient(self):
        with pytest.raises(SingularParameterizationError):
            hessian_radial(0.1, [0.0, 0.0])
        with pytest.raises(SingularParameterizationError):
            hessian_radial(DELTA_MAX, [2.0, 0.0])

    def test_radial_phase(self):
        with pytest.raises(ValueError):
            RadialPhase(0.5, 2)
        ph = RadialPhase(0.2, 3)
        x = np.array([0.3, 0.4, 1.2])
        np.testing.assert_array_equal(ph.hessian(x), hessian_radial(0.2, x))
        assert ph.value(np.array([1.0, 0, 0])) == pytest.approx(np.sqrt(0.96))


class TestDeterminant:
    def test_zero_damping(self):
        for n in (1, 2, 3):
            assert det_hessian(0.0, 1.3, n) == 0.0

    def test_example_value(self):
        # exact value is -161/900; the rounded figure 0.90369 * -0.19796 is -0.17890
        assert det_hessian(0.25, 1.0, 2) == pytest.approx(-161 / 900, rel=1e-13)
        assert det_hessian(0.25, 1.0, 2) == pytest.approx(-0.17890, abs=2e-5)
        assert np.linalg.det(hessian_fd(0.25, [1.0, 0.0])) == pytest.approx(-161 / 900, abs=1e-6)

    @pytest.mark.parametrize("n", [2, 3])
    def test_product_formula_against_dense_determinant(self, n):
        rng = np.random.default_rng(n)
        for x in random_annulus_points(n, 40, 11):
            delta = rng.uniform(0.01, DELTA_MAX - 1e-3)
            r = np.linalg.norm(x)
            assert np.linalg.det(hessian_radial(delta, x)) == pytest.approx(det_hessian(delta, r, n), abs=1e-8)


class TestRank:
    def test_examples(self):
        s3 = annulus_samples(3, n_radii=6, n_dirs=8)
        assert rank_on_annulus(0.0, 3, s3) == 2
        assert rank_on_annulus(0.2, 3, s3) == 3
        assert rank_on_annulus(0.0, 1, annulus_samples(1, n_radii=6)) == 0

    @pytest.mark.parametrize("n", [2, 3])
    def test_rank_classification(self, n):
        s = annulus_samples(n, n_radii=16, n_dirs=12)
        assert rank_on_annulus(0.0, n, s) == n - 1
        for delta in DELTAS[1:]:
            assert rank_on_annulus(delta, n, s) == n

    def test_zero_matrix_and_empty(self):
        assert matrix_rank(np.zeros((3, 3))) == 0
        with pytest.raises(ValueError):
            rank_on_annulus(0.1, 2, np.empty((0, 2)))

    def test_samples_inside_closed_subannulus(self):
        for n in (1, 2, 3):
            r = np.linalg.norm(annulus_samples(n, 16, 8), axis=1)
            assert r.min() >= 0.55 - 1e-15 and r.max() <= 1.9 + 1e-15


class TestMinors:
    def test_order_one_minors_are_entries(self):
        H = hessian_radial(0.0, [1.0, 0.0])
        assert max_minor(H, 1) == 1.0
        assert max_minor(H, 0) == 1.0

    def test_order_n_minor_is_determinant(self):
        H = hessian_radial(0.2, [0.3, 0.5, 0.9])
        assert max_minor(H, 3) == pytest.approx(abs(np.linalg.det(H)), rel=1e-12)

    @pytest.mark.parametrize("n", [2, 3])
    def test_positive_and_stable_under_refinement(self, n):
        deltas = np.linspace(0, DELTA_MAX, 9)
        coarse = minor_lower_bound(deltas, n, annulus_samples(n, 16, 8))
        fine = minor_lower_bound(deltas, n, annulus_samples(n, 32, 16))
        assert coarse[0] > 0
        assert fine[0] == pytest.approx(coarse[0], rel=0.01)
        assert coarse[1] in deltas


def test_report_csv(tmp_path):
    path = tmp_path / "curv.csv"
    s = annulus_samples(2, n_radii=3, n_dirs=4)
    rows = curvature_report([0.0, 0.2], 2, s, path=path)
    assert len(rows) == 6
    assert [r["rank"] for r in rows] == [1, 1, 1, 2, 2, 2]
    back = list(csv.DictReader(open(path)))
    assert list(back[0]) == ["delta", "r", "det", "rank", "min_minor_max"]
    assert float(back[4]["det"]) == rows[4]["det"]
