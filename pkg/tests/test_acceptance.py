"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines and timings.
"""

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

import gaugelab as gl

import oracles


@contextmanager
def criterion(number, name, budget_seconds):
    start = time.perf_counter()
    try:
        yield
    except Exception:
        print(f"ACCEPTANCE {number} {name}: FAIL"
              f" ({time.perf_counter() - start:.1f}s)")
        raise
    elapsed = time.perf_counter() - start
    status = "PASS" if elapsed < budget_seconds else "FAIL (over time budget)"
    print(f"ACCEPTANCE {number} {name}: {status} ({elapsed:.1f}s)")
    assert elapsed < budget_seconds


def test_01_gauge_oracle_suite():
    with criterion(1, "gauge oracle suite", 10.0):
        rng = np.random.default_rng(1001)
        bodies = [gl.cube_body(2, 0.5), gl.ball_body(2), gl.Ellipsoid([2.0, 1.0]),
                  gl.Ellipsoid([0.8, 1.7]), gl.ball_body(3),
                  gl.random_symmetric_polytope(2, 4, seed=1),
                  gl.random_symmetric_polytope(2, 6, seed=2),
                  gl.random_symmetric_polytope(3, 8, seed=3)]
        per = 1000 // len(bodies)
        checked = 0
        for body in bodies:
            pts = rng.uniform(-3, 3, size=(per, body.dim))
            for x in pts:
                got = body.gauge(x)
                want = oracles.bisection_gauge(body, x)
                assert abs(got - want) <= 1e-9
                checked += 1
        assert checked >= 1000 - len(bodies)


def test_02_projection_identity():
    with criterion(2, "projection transform identity", 5.0):
        rng = np.random.default_rng(2002)
        for _ in range(100):
            n = int(rng.integers(3, 25))
            mu = gl.AtomicMeasure(rng.uniform(-2, 2, size=(n, 2)),
                                  rng.uniform(0.05, 1.0, size=n))
            ang = rng.uniform(0, 2 * math.pi)
            eta = np.array([math.cos(ang), math.sin(ang)])
            t = rng.uniform(-10, 10)
            line = gl.project_measure(mu, eta)
            assert abs(line.ft(t) - gl.ft_measure(mu, t * eta)) <= 1e-10 * mu.abs_mass


def test_03_wiener_audit_square(unit_square, square_measure):
    with criterion(3, "square facet-pair time average", 30.0):
        res = gl.polytope_bound_audit(unit_square, square_measure, 200.0)
        assert res.n_directions == 2
        assert res.wiener_value == pytest.approx(0.125, rel=0.05)
        assert res.wiener_sqrt >= 1.0 / (2 * math.sqrt(2)) - 0.02


def test_04_circle_cap_measure_goodness(five_cap_measure):
    with criterion(4, "five-cap circle measure goodness", 120.0):
        R, report = gl.stabilized_goodness(five_cap_measure, 0.05)
        assert report.eps_hat <= 1.0 / 5 + 0.05


def test_05_directional_decay(unit_disk):
    with criterion(5, "directional decay of boundary pieces", 60.0):
        mesh = gl.triangulate_boundary(unit_disk, 8192)
        ang = np.arctan2(mesh.normals[:, 1], mesh.normals[:, 0])
        piece = gl.from_mesh(mesh.restrict((ang > 0) & (ang < math.pi / 2)))
        grid = np.linspace(0.05, math.pi / 2 - 0.05, 30)
        thetas = np.stack([np.cos(grid), np.sin(grid)], axis=1)
        scan = gl.decay_scan(piece, thetas, 0.3, [10.0, 40.0])
        assert scan.envelope[1] < scan.envelope[0]
        assert np.all(scan.envelope < piece.total_mass)

        seg = gl.segment_measure([0.2, 0.1], [0.0, 1.0], 1.0, 4096, normal=[1.0, 0.0])
        vals = np.abs(gl.ft_profile(seg, [1.0, 0.0], [2.0, 11.0, 37.0]))
        np.testing.assert_allclose(vals, seg.total_mass, atol=1e-12)


def test_06_positivity_machine(unit_disk):
    with criterion(6, "three-band positivity machine", 300.0):
        sigma = gl.from_mesh(gl.triangulate_boundary(unit_disk, 512), normalize=True)
        consts = gl.BourgainConstants(2)
        delta = 0.05
        rng = np.random.default_rng(6006)
        for seed in range(10):
            f = gl.random_indicator(2, 256, 0.3 * math.pi, seed=seed)
            t = float(rng.uniform(0.25, 0.6))
            assert t <= 4 * math.pi * delta
            sr = gl.split_integrals(f, sigma, t, delta)
            direct = gl.direct_correlation(f, sigma, t)
            assert sr.i1 + sr.i2 + sr.i3 == sr.total
            assert sr.total == pytest.approx(direct, rel=0.02)
            assert sr.i1 >= consts.i1_constant * f.measure ** 2

        f = gl.random_indicator(2, 256, 0.3 * math.pi, seed=7)
        plan = gl.LacunaryPlan.geometric(delta, 1 / delta, d=2, eps=f.measure)
        res = gl.lacunary_search(f, sigma, plan)
        assert res.found and res.direct > 0


def test_07_pigeonhole_bound():
    with criterion(7, "lacunary band pigeonhole bound", 1.0):
        delta = 0.1
        plan = gl.LacunaryPlan(2.0 ** -np.arange(1, 61), delta, 1 / delta)
        rng = np.random.default_rng(7007)
        xs = np.exp(rng.uniform(math.log(delta), math.log(1 / delta), 10_000))
        counts = np.array([gl.pigeonhole_count(x, plan) for x in xs])
        bound = 2 / math.log(2) * math.log(1 / delta)
        assert counts.max() <= 6
        assert 6 <= bound < 7


def test_08_cube_lattice_witnesses(half_cube):
    with criterion(8, "cube-lattice separation and gap transfer", 30.0):
        lat = gl.lattice_points(2, -10, 10)
        rep = gl.distance_set(lat, half_cube, 20.0)
        np.testing.assert_allclose(rep.distances, np.arange(0, 21, 2), atol=1e-12)
        assert rep.separated and rep.separation_witness == pytest.approx(2.0)

        eps = 2.0
        s = eps / 10
        patch = gl.lattice_points(2, 0, 4)
        thick = gl.thicken(patch, half_cube, s, 4, seed=808)
        P = thick.points
        centers = np.repeat(patch.points, 4, axis=0)
        for i in range(len(P)):
            d_pts = half_cube.gauge_many(P - P[i][None, :])
            d_ctr = half_cube.gauge_many(centers - centers[i][None, :])
            assert np.max(np.abs(d_pts - d_ctr)) <= 2 * s + 1e-12
        trep = gl.distance_set(thick, half_cube, 8.0)
        for x in (0.0, 2.0, 4.0, 6.0):
            middle = (trep.distances > x + eps / 5) & (trep.distances < x + 4 * eps / 5)
            assert not np.any(middle)


def test_09_zero_spacing(unit_disk):
    with criterion(9, "indicator transform zero spacing", 30.0):
        led1 = gl.radial_zero_scan(gl.cube_body(1, 1.0), (0.2, 6.2), 2000)
        np.testing.assert_allclose(
            led1.zeros, np.arange(1, len(led1.zeros) + 1) * 0.5, atol=1e-9)

        led2 = gl.radial_zero_scan(unit_disk, (0.5, 10.0), 4000)
        mean, dev = led2.tail_spacing()
        assert dev <= 0.02 * mean
