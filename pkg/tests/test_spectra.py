import math

import numpy as np
import pytest

import gaugelab as gl
from gaugelab.errors import HypothesisViolationError

import oracles


def bisect_oracle_zero(fn, lo, hi, iters=60):
    flo = fn(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if flo * fn(mid) < 0:
            hi = mid
        else:
            lo, flo = mid, fn(mid)
    return 0.5 * (lo + hi)


class TestChiHat:
    def test_interval_zeros_at_half_integers(self):
        interval = gl.cube_body(1, 1.0)
        for k in (1, 2, 3, 7):
            assert gl.chi_hat(interval, [k / 2]) == pytest.approx(0.0, abs=1e-14)
        assert gl.chi_hat(interval, [0.0]) == pytest.approx(2.0, abs=1e-14)

    def test_square_product_zero_line(self, unit_square):
        for y in (0.0, 0.37, 2.2):
            assert gl.chi_hat(unit_square, [0.5, y]) == pytest.approx(0.0, abs=1e-14)

    def test_disk_first_zero_matches_quadrature_oracle(self, unit_disk):
        oracle_zero = bisect_oracle_zero(oracles.disk_profile_quadrature, 0.5, 0.7)
        assert oracle_zero == pytest.approx(0.609835, abs=1e-4)
        assert gl.chi_hat(unit_disk, [oracle_zero, 0.0]) == pytest.approx(0.0, abs=1e-6)

    def test_volume_at_zero_closed_forms(self, unit_disk, unit_square):
        assert gl.chi_hat(unit_square, [0.0, 0.0]) == pytest.approx(4.0, abs=1e-12)
        assert gl.chi_hat(unit_disk, [0.0, 0.0]) == pytest.approx(math.pi, abs=1e-12)
        ball3 = gl.ball_body(3)
        assert gl.chi_hat(ball3, np.zeros(3)) == pytest.approx(4 * math.pi / 3, abs=1e-12)
        ell = gl.Ellipsoid([1.5, 0.5])
        assert gl.chi_hat(ell, [0.0, 0.0]) == pytest.approx(0.75 * math.pi, abs=1e-12)

    def test_volume_at_zero_angular_quadrature(self):
        hexagon = gl.regular_polygon_body(6)
        assert gl.chi_hat(hexagon, [0.0, 0.0], 4096) == pytest.approx(
            3 * math.sqrt(3) / 2, abs=1e-6)
        se = gl.RadialBody(p=3, axes=[1.0, 1.0])
        from scipy.special import gamma
        exact = 4 * gamma(4 / 3) ** 2 / gamma(5 / 3)
        assert gl.chi_hat(se, [0.0, 0.0], 8192) == pytest.approx(exact, abs=1e-6)

    def test_even_in_frequency(self, unit_disk):
        hexagon = gl.regular_polygon_body(6)
        rng = np.random.default_rng(8)
        for body in (unit_disk, hexagon):
            for xi in rng.normal(size=(6, 2)):
                assert gl.chi_hat(body, xi) == gl.chi_hat(body, -xi)

    def test_polar_matches_closed_form_on_disk(self, unit_disk):
        # run the generic angular quadrature on a ball-shaped radial body
        roundish = gl.RadialBody(p=2, axes=[1.0, 1.0])
        for r in (0.3, 1.7, 4.4):
            assert gl.chi_hat(roundish, [r, 0.0], 4096) == pytest.approx(
                gl.chi_hat(unit_disk, [r, 0.0]), abs=1e-9)

    def test_polar_matches_closed_forms_in_three_dimensions(self):
        roundish = gl.RadialBody(p=2, axes=[1.0, 1.0, 1.0])
        ball = gl.ball_body(3)
        assert gl.chi_hat(roundish, np.zeros(3), 40_000) == pytest.approx(
            gl.chi_hat(ball, np.zeros(3)), abs=1e-12)
        for r, tol in ((0.4, 1e-6), (1.3, 1e-4)):
            assert gl.chi_hat(roundish, [r, 0.0, 0.0], 40_000) == pytest.approx(
                gl.chi_hat(ball, [r, 0.0, 0.0]), abs=tol)
        cube = gl.cube_body(3, 0.7)
        from gaugelab.spectra import _chi_hat_polar_3d
        xi = np.array([0.3, 0.2, -0.1])
        assert _chi_hat_polar_3d(cube, xi, 81_920) == pytest.approx(
            gl.chi_hat(cube, xi), abs=1e-4)


class TestZeroScan:
    def test_interval_exact_spacing(self):
        led = gl.radial_zero_scan(gl.cube_body(1, 1.0), (0.2, 6.2), 2000)
        expect = np.arange(1, len(led.zeros) + 1) * 0.5
        np.testing.assert_allclose(led.zeros, expect, atol=1e-9)
        np.testing.assert_allclose(led.spacings, 0.5, atol=1e-9)
        assert not led.approximate

    def test_disk_tail_spacing(self, unit_disk):
        led = gl.radial_zero_scan(unit_disk, (0.5, 10.0), 4000)
        assert led.zeros[0] == pytest.approx(0.609835, abs=1e-5)
        mean, dev = led.tail_spacing()
        assert mean == pytest.approx(0.5, abs=0.01)
        assert dev <= 0.02 * mean

    def test_ball3_tail_spacing(self):
        led = gl.radial_zero_scan(gl.ball_body(3), (0.5, 10.0), 4000)
        mean, dev = led.tail_spacing()
        assert mean == pytest.approx(0.5, abs=0.01)
        assert dev <= 0.02 * mean

    def test_rescaled_phase_offsets_grow_linearly_with_dimension(self):
        # 2 pi z mod pi settles at (d-1) pi/4 for the d-ball profile
        for d, offset in ((1, 0.0), (2, math.pi / 4), (3, math.pi / 2)):
            led = gl.radial_zero_scan(gl.ball_body(d), (0.5, 12.0), 6000)
            phase = led.tail_phase()
            delta = abs(phase - offset) % math.pi
            assert min(delta, math.pi - delta) < 0.03

    def test_zero_residuals_certified(self, unit_disk):
        led = gl.radial_zero_scan(unit_disk, (0.5, 10.0), 4000)
        vals = [abs(gl.chi_hat(unit_disk, [z, 0.0])) for z in led.zeros]
        assert max(vals) <= 1e-8
        # brackets carry a true sign change
        for (lo, hi) in led.brackets:
            assert gl.chi_hat(unit_disk, [lo, 0.0]) * gl.chi_hat(unit_disk, [hi, 0.0]) < 0

    def test_window_without_zeros(self, unit_disk):
        led = gl.radial_zero_scan(unit_disk, (0.01, 0.5), 500)
        assert led.zeros.size == 0

    def test_near_ball_flagged_approximate(self):
        led = gl.radial_zero_scan(gl.Ellipsoid([1.0, 0.999]), (0.5, 3.0), 600)
        assert led.approximate


class TestOrthogonality:
    def test_lattice_is_a_cube_spectrum(self, half_cube):
        lat = gl.lattice_points(2, -5, 5)
        assert gl.orthogonality_residual(lat, half_cube) <= 1e-10

    def test_jitter_breaks_orthogonality(self, half_cube):
        rng = np.random.default_rng(3)
        lat = gl.lattice_points(2, -5, 5)
        jit = gl.PointSet(lat.points + rng.normal(0, 0.1, lat.points.shape))
        assert gl.orthogonality_residual(jit, half_cube) > 0.01

    def test_single_point_has_no_pairs(self, half_cube):
        assert gl.orthogonality_residual(gl.PointSet([[0.0, 0.0]]), half_cube) == 0.0


class TestSpectrumPipeline:
    def test_synthetic_zero_shell_stress_input(self, unit_disk):
        led = gl.radial_zero_scan(unit_disk, (0.5, 6.0), 2400)
        pts = [[0.0, 0.0]]
        for k, z in enumerate(led.zeros):
            ang = 0.7 * k
            pts.append([z * math.cos(ang), z * math.sin(ang)])
        result = gl.spectrum_gap_pipeline(gl.PointSet(pts), unit_disk, 0.05)
        assert len(result.sparsified) > 2
        assert result.report.distances.size > 0
        assert len(result.report.gaps) > 0

    def test_lattice_with_cube_dual_runs(self, half_cube):
        lat = gl.lattice_points(2, -6, 6)
        result = gl.spectrum_gap_pipeline(lat, half_cube, 2.0, ortho_tol=1e-9)
        assert result.residual <= 1e-9
        assert len(result.sparsified) > 0
        # dual distances recomputed directly
        P = result.sparsified.points
        brute = set()
        for i in range(len(P)):
            for j in range(i + 1, len(P)):
                brute.add(round(half_cube.dual_gauge(P[i] - P[j]), 9))
        brute.add(0.0)
        assert len(result.report.distances) == len(brute)

    def test_orthogonality_gate(self, half_cube):
        rng = np.random.default_rng(4)
        pts = gl.PointSet(rng.uniform(-5, 5, size=(30, 2)))
        with pytest.raises(HypothesisViolationError):
            gl.spectrum_gap_pipeline(pts, half_cube, 1.0, ortho_tol=1e-9)

    def test_empty_after_sparsify(self, half_cube):
        pts = gl.PointSet([[2.0, 0.0], [0.0, 2.0]])  # both in odd cubes for R=2
        result = gl.spectrum_gap_pipeline(pts, half_cube, 2.0)
        assert len(result.sparsified) == 0
        assert result.report.distances.size == 0
        assert result.report.gaps == []
