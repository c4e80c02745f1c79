import math

import numpy as np
import pytest

from gpsparsify.bench import (a_n, disk_measure, first_m, gen_coordinate_example,
                              gen_random_unit_cloud, gen_regular_polygon, gen_shifted_polytope,
                              gen_symmetric_cloud, inscribed_polygon, polygon_measure)
from gpsparsify.mc import McConfig, estimate_width

from conftest import within

# E max of n iid N(0,1): density-form quadrature n x phi(x) Phi(x)^(n-1) in mpmath, 30 digits
A_N_ORACLE = {2: 0.56418958354776, 3: 0.84628437532163, 16: 1.7659913930548,
              64: 2.3437334650794, 256: 2.8268632789392, 1024: 3.2482396013754,
              4096: 3.6260821777691, 65536: 4.2911293158965}


@pytest.mark.parametrize("n", sorted(A_N_ORACLE))
def test_a_n_oracle(n):
    assert a_n(n) == pytest.approx(A_N_ORACLE[n], abs=1e-9)


def test_a_n_small_cases():
    assert a_n(1) == 0.0
    assert a_n(2) == pytest.approx(1 / math.sqrt(math.pi), abs=1e-12)
    with pytest.raises(ValueError):
        a_n(0)


def test_a_n_strictly_increasing():
    vals = [a_n(n) for n in range(1, 65)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_a_n_large_n_window():
    n = 2 ** 16
    s, L = math.sqrt(2 * math.log(n)), math.log(n)
    assert s * (1 - 4 / L) <= a_n(n) <= s * (1 + 4 / L)


class TestCoordinateExample:
    def test_n2(self):
        np.testing.assert_allclose(gen_coordinate_example(2).dense(), np.eye(2) / 0.56418958354776,
                                   rtol=1e-12)

    @pytest.mark.parametrize("n", [2, 64, 2048])
    def test_unit_width(self, n, cfg):
        T = gen_coordinate_example(n)
        assert within(estimate_width(T, cfg), 1.0)

    def test_orthogonal_equal_norm(self):
        P = gen_coordinate_example(50).dense()
        G = P @ P.T
        np.testing.assert_allclose(G, np.eye(50) * G[0, 0], atol=1e-15)

    def test_sparse_switch(self):
        assert gen_coordinate_example(2048).is_sparse
        assert not gen_coordinate_example(64).is_sparse


class TestShiftedPolytope:
    def test_offsets_exactly_one(self):
        K = gen_shifted_polytope(64)
        np.testing.assert_allclose(K.offsets, 1.0, atol=1e-12)

    def test_n2(self):
        K = gen_shifted_polytope(2)
        assert len(K) == 2 and K.dim == 3

    def test_origin_inside(self):
        assert gen_shifted_polytope(10).contains(np.zeros(11))

    def test_sparse_matches_dense(self):
        a, b = gen_shifted_polytope(20, sparse=True), gen_shifted_polytope(20, sparse=False)
        g = np.random.default_rng(0).standard_normal((300, 21)) * 2
        np.testing.assert_array_equal(a.contains_batch(g), b.contains_batch(g))


class TestClouds:
    def test_unit_norms(self):
        np.testing.assert_allclose(gen_random_unit_cloud(7, 30, 0).norms, 1.0, atol=1e-9)

    def test_seeded(self):
        a, b = gen_random_unit_cloud(5, 9, 4), gen_random_unit_cloud(5, 9, 4)
        assert np.array_equal(a.dense(), b.dense())
        assert not np.array_equal(a.dense(), gen_random_unit_cloud(5, 9, 5).dense())

    def test_planar_cloud_width(self, cfg):
        # oracle: 4e6 draws from an independent stream, 1.25149 +/- 0.00033
        w = estimate_width(gen_random_unit_cloud(2, 64, 0), cfg).mean
        assert 0.9 * 1.2514900842946355 <= w <= 1.1 * 1.2514900842946355

    def test_symmetric_cloud(self):
        from gpsparsify.core import is_symmetric
        assert is_symmetric(gen_symmetric_cloud(4, 10, 1))


class TestPolygons:
    def test_octagon_measure_oracle(self):
        # mpmath triangle-decomposition quadrature
        assert polygon_measure(8, math.cos(math.pi / 8)) == pytest.approx(0.36232615327505, abs=1e-12)
        assert polygon_measure(32, 1.0) == pytest.approx(0.39444601059412, abs=1e-12)

    def test_polygon_approaches_disk(self):
        assert polygon_measure(4096, 1.0) == pytest.approx(disk_measure(1.0), abs=1e-6)

    def test_inscribed_vertices_on_circle(self):
        P = inscribed_polygon(12)
        assert P.offsets[0] == pytest.approx(math.cos(math.pi / 12))

    def test_polygon_rejects_degenerate(self):
        with pytest.raises(ValueError):
            gen_regular_polygon(2)


def test_first_m():
    assert first_m(4096, 0.5) == 64
    assert first_m(10, 1.0) == 1
