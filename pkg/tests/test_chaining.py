import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from gpsparsify.chaining import (AdmissibleSequence, Part, allocate, build_admissible_sequence,
                                 default_depth, farthest_first, gamma2_upper, level_budget,
                                 level_diameters)
from gpsparsify.core import VectorSet, diameter


def cloud(n, dim, seed):
    return VectorSet(np.random.default_rng(seed).standard_normal((n, dim)))


def test_level_budget():
    assert [level_budget(h, 10 ** 9) for h in range(5)] == [2, 4, 16, 256, 65536]
    assert level_budget(3, 100) == 100
    assert level_budget(9, 7) == 7


def test_default_depth_reaches_singletons():
    for n in (1, 2, 3, 5, 17, 300):
        assert level_budget(default_depth(n) - 1, n) == n


@given(st.integers(1, 2000), st.lists(st.integers(1, 50), min_size=1, max_size=30))
def test_allocate_contract(budget, sizes):
    alloc = allocate(budget, sizes)
    assert len(alloc) == len(sizes)
    assert all(1 <= a <= s for a, s in zip(alloc, sizes))
    assert sum(alloc) == max(len(sizes), min(budget, sum(sizes)))


class TestSequence:
    def test_singleton(self):
        seq = build_admissible_sequence(VectorSet([[1.0, 2.0]]))
        for level in seq.levels:
            assert len(level) == 1 and level[0].indices.tolist() == [0]

    def test_four_points_level_one(self):
        seq = build_admissible_sequence(cloud(4, 2, 0), h_max=1)
        assert sorted(len(p) for p in seq.levels[1]) == [1, 1, 1, 1]

    def test_two_clusters_not_mixed(self):
        # k-center oracle: with two centers 100x further apart than the cluster
        # diameter, farthest-first picks one center per cluster
        r = np.random.default_rng(3)
        a = r.standard_normal((8, 3)) * 0.01
        gap = 100.0 * diameter(a)
        T = VectorSet(np.vstack([a, a[::-1] + np.array([gap, 0.0, 0.0])]))
        seq = build_admissible_sequence(T)
        for part in seq.levels[1]:
            assert len({int(i) // 8 for i in part.indices}) == 1

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 80), st.integers(1, 5), st.integers(0, 10 ** 6))
    def test_validates_and_refines(self, n, dim, seed):
        T = cloud(n, dim, seed)
        seq = build_admissible_sequence(T)
        seq.validate(n)
        diams = [d.max() for d in level_diameters(T, seq)]
        assert all(b <= a + 1e-12 for a, b in zip(diams, diams[1:]))
        assert len(seq.levels[-1]) == n

    def test_validate_catches_violations(self):
        parts = [Part(np.array([0, 1, 2]), 0, 1.0)]
        AdmissibleSequence([parts, [Part(np.array([0]), 0, 0.0), Part(np.array([1]), 1, 0.0),
                                    Part(np.array([2]), 2, 0.0)]], 3).validate()
        crossing = AdmissibleSequence([parts, [Part(np.array([0, 1]), 0, 1.0),
                                               Part(np.array([2]), 2, 0.0)],
                                       [Part(np.array([0]), 0, 0.0), Part(np.array([1, 2]), 1, 1.0)]], 3)
        with pytest.raises(ValueError, match="refine"):
            crossing.validate()
        over = AdmissibleSequence([[Part(np.array([0]), 0, 0.0), Part(np.array([1]), 1, 0.0),
                                    Part(np.array([2]), 2, 0.0)]], 3)
        with pytest.raises(ValueError):
            over.validate()
        missing = AdmissibleSequence([parts, [Part(np.array([0, 1]), 0, 1.0)]], 3)
        with pytest.raises(ValueError):
            missing.validate()
        off_center = AdmissibleSequence([[Part(np.array([0, 1, 2]), 5, 1.0)]], 3)
        with pytest.raises(ValueError):
            off_center.validate()

    def test_sparse_storage_same_partition(self):
        dense = np.random.default_rng(2).standard_normal((40, 6))
        dense[np.abs(dense) < 1.0] = 0.0
        a = build_admissible_sequence(VectorSet(dense))
        b = build_admissible_sequence(VectorSet(sp.csr_matrix(dense)))
        for la, lb in zip(a.levels, b.levels):
            assert [p.indices.tolist() for p in la] == [p.indices.tolist() for p in lb]


class TestFarthestFirst:
    def test_first_center_lowest_index(self):
        T = cloud(10, 2, 1)
        parts = farthest_first(T, np.arange(10), 3)
        assert 0 in [p.center for p in parts]

    def test_duplicates_stop_early(self):
        T = VectorSet(np.array([[0.0, 0.0]] * 5 + [[1.0, 0.0]]))
        parts = farthest_first(T, np.arange(6), 4)
        assert len(parts) == 2

    def test_radius_is_max_distance(self):
        T = cloud(30, 3, 4)
        for p in farthest_first(T, np.arange(30), 5):
            d = np.linalg.norm(T.dense()[p.indices] - T.dense()[p.center], axis=1)
            assert p.radius == pytest.approx(d.max())


class TestGamma2:
    def test_singleton_zero(self):
        T = VectorSet([[3.0, 1.0]])
        assert gamma2_upper(T, build_admissible_sequence(T)) == 0.0

    def test_symmetric_pair(self):
        T = VectorSet([[1.0, 0.0], [-1.0, 0.0]])
        seq = AdmissibleSequence([[Part(np.array([0, 1]), 0, 2.0)],
                                  [Part(np.array([0]), 0, 0.0), Part(np.array([1]), 1, 0.0)]], 2)
        assert gamma2_upper(T, seq) == 2.0

    @settings(max_examples=20, deadline=None)
    @given(st.integers(2, 60), st.integers(0, 10 ** 6))
    def test_at_least_diameter(self, n, seed):
        T = cloud(n, 3, seed)
        assert gamma2_upper(T, build_admissible_sequence(T)) >= diameter(T) - 1e-12

    @settings(max_examples=20, deadline=None)
    @given(st.integers(2, 60), st.integers(0, 10 ** 6), st.integers(0, 3))
    def test_deepening_bounded_by_tail(self, n, seed, h):
        T = cloud(n, 3, seed)
        shallow = build_admissible_sequence(T, h_max=h)
        deep = build_admissible_sequence(T, h_max=h + 1)
        tail = 2.0 ** ((h + 1) / 2) * level_diameters(T, shallow)[h].max()
        assert gamma2_upper(T, deep) <= gamma2_upper(T, shallow) + tail + 1e-9
