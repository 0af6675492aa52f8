"""Measure-level tests: frozen spot values, dual-route CKA checks, properties."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from embedsim import simmath
from embedsim.errors import ValidationError


class TestCenterColumns:
    def test_two_point_column(self):
        out = simmath.center_columns(np.array([[1.0], [3.0]]))
        assert np.array_equal(out, np.array([[-1.0], [1.0]]))

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal((40, 7))
        once = simmath.center_columns(x)
        twice = simmath.center_columns(once)
        assert np.abs(once - twice).max() < 1e-12

    def test_constant_column(self):
        out = simmath.center_columns(np.array([[5.0], [5.0], [5.0]]))
        assert np.array_equal(out, np.zeros((3, 1)))

    def test_column_sums_vanish(self):
        rng = np.random.default_rng(1)
        x = (rng.standard_normal((300, 20)) * 50).astype(np.float32)
        out = simmath.center_columns(x)
        assert np.abs(out.sum(axis=0)).max() <= 1e-6 * x.shape[0]

    def test_input_unmodified(self):
        x = np.ones((3, 2))
        simmath.center_columns(x)
        assert np.array_equal(x, np.ones((3, 2)))

    def test_needs_two_rows(self):
        with pytest.raises(ValidationError):
            simmath.center_columns(np.ones((1, 3)))


def random_pair(rng, n=None, da=None, db=None):
    n = n or int(rng.integers(2, 65))
    da = da or int(rng.integers(1, 33))
    db = db or int(rng.integers(1, 33))
    return (
        rng.standard_normal((n, da)),
        rng.standard_normal((n, db)),
    )


class TestLinearCKA:
    def test_self_similarity_is_one(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            x, _ = random_pair(rng)
            assert abs(simmath.linear_cka(x, x) - 1.0) <= 1e-9

    def test_matches_gram_oracle(self):
        """Feature-space path against the explicit Gram/HSIC route."""
        rng = np.random.default_rng(3)
        worst = 0.0
        for _ in range(100):
            x, y = random_pair(rng)
            worst = max(worst, abs(simmath.linear_cka(x, y) - simmath.cka_gram_oracle(x, y)))
        assert worst <= 1e-8

    def test_orthogonal_invariance(self):
        rng = np.random.default_rng(4)
        x, y = random_pair(rng, n=30, da=8, db=5)
        q, _ = np.linalg.qr(rng.standard_normal((8, 8)))
        assert abs(simmath.linear_cka(x @ q, y) - simmath.linear_cka(x, y)) <= 1e-6

    def test_scale_invariance(self):
        rng = np.random.default_rng(5)
        x, y = random_pair(rng, n=30)
        base = simmath.linear_cka(x, y)
        for c in (0.001, -3.0, 1e4):
            assert abs(simmath.linear_cka(c * x, y) - base) <= 1e-9

    def test_joint_permutation_invariance(self):
        rng = np.random.default_rng(6)
        x, y = random_pair(rng, n=50)
        perm = rng.permutation(50)
        assert abs(simmath.linear_cka(x[perm], y[perm]) - simmath.linear_cka(x, y)) <= 1e-9

    def test_blocking_and_threads_do_not_change_result(self):
        rng = np.random.default_rng(7)
        x, y = random_pair(rng, n=100, da=12, db=9)
        base = simmath.linear_cka(x, y)
        # a different block size regroups the summation: tolerance applies
        blocked = simmath.linear_cka(x, y, block_size=7)
        assert abs(blocked - base) <= 1e-9
        # at fixed block size, thread count must not change a single bit
        for threads in (2, 3, 8):
            assert simmath.linear_cka(x, y, block_size=7, threads=threads) == blocked

    def test_float32_inputs_accumulate_in_float64(self):
        rng = np.random.default_rng(8)
        x, y = random_pair(rng, n=64)
        a = simmath.linear_cka(x.astype(np.float32), y.astype(np.float32))
        b = simmath.linear_cka(x, y)
        assert abs(a - b) < 1e-3  # only storage precision differs

    def test_row_mismatch(self):
        with pytest.raises(ValidationError, match="mismatch"):
            simmath.linear_cka(np.ones((4, 2)), np.ones((5, 2)))

    def test_constant_matrix_is_degenerate(self):
        rng = np.random.default_rng(9)
        y = rng.standard_normal((10, 3))
        with pytest.raises(ValidationError, match="degenerate"):
            simmath.linear_cka(np.ones((10, 2)), y)


class TestGramOracle:
    def test_self_similarity(self):
        rng = np.random.default_rng(10)
        x = rng.standard_normal((12, 4))
        assert abs(simmath.cka_gram_oracle(x, x) - 1.0) <= 1e-9

    def test_one_dim_sign_and_scale(self):
        """Anti-correlated 1-D embeddings are equivalent under a linear kernel."""
        x = np.array([[1.0], [-1.0]])
        y = np.array([[-2.0], [2.0]])
        assert abs(simmath.cka_gram_oracle(x, y) - 1.0) <= 1e-9

    def test_size_cap(self):
        with pytest.raises(ValidationError, match="4096"):
            simmath.cka_gram_oracle(np.ones((5000, 1)), np.ones((5000, 1)))


class TestJaccard:
    def test_identical_sets(self):
        s = {("d", i) for i in range(10)}
        assert simmath.jaccard(s, set(s)) == 1.0

    def test_disjoint_sets(self):
        assert simmath.jaccard({1, 2, 3}, {4, 5, 6}) == 0.0

    def test_half_overlap_of_top10(self):
        a = set(range(10))
        b = set(range(5, 15))
        assert simmath.jaccard(a, b) == pytest.approx(5 / 15, abs=0)

    def test_both_empty_count_as_identical(self):
        assert simmath.jaccard(set(), set()) == 1.0

    def test_one_empty(self):
        assert simmath.jaccard({1}, set()) == 0.0


class TestRankPair:
    def test_spot_values(self):
        assert simmath.rank_pair(1, 1) == 1.0
        assert simmath.rank_pair(2, 2) == 0.5
        assert simmath.rank_pair(1, 3) == 2.0 / ((1 + 2) * (1 + 3))

    def test_symmetry_exact(self):
        for r in range(1, 20):
            for r2 in range(1, 20):
                assert simmath.rank_pair(r, r2) == simmath.rank_pair(r2, r)

    def test_rank_validation(self):
        with pytest.raises(ValidationError):
            simmath.rank_pair(0, 1)


class TestRankSim:
    def test_identical_lists(self):
        assert simmath.rank_sim(["a", "b", "c"], ["a", "b", "c"]) == 1.0

    def test_swapped_top_two(self):
        """Hand evaluation: three common items each contribute 1/3, H(3)=11/6."""
        got = simmath.rank_sim(["a", "b", "c"], ["b", "a", "c"])
        assert abs(got - 6 / 11) <= 1e-12

    def test_disjoint(self):
        assert simmath.rank_sim(["a"], ["b"]) == 0.0

    def test_identical_prefix_scores_one(self):
        # common items at identical ranks 1..m, plus unique tails
        a = ["x", "y", "z", "a1", "a2"]
        b = ["x", "y", "z", "b1", "b2"]
        assert simmath.rank_sim(a, b) == 1.0

    def test_deep_identical_item_cannot_exceed_one(self):
        a = ["x", "y", "a1", "a2", "shared"]
        b = ["x", "y", "b1", "b2", "shared"]
        assert simmath.rank_sim(a, b) <= 1.0

    def test_duplicate_items_rejected(self):
        with pytest.raises(ValidationError):
            simmath.rank_sim(["a", "a"], ["a", "b"])

    def test_harmonic_number(self):
        assert simmath.harmonic_number(1) == 1.0
        assert simmath.harmonic_number(3) == 1.0 + 0.5 + 1.0 / 3


# ---------------------------------------------------------------------------
# Property tests
# ---------------------------------------------------------------------------

ranked_lists = st.lists(st.integers(0, 40), unique=True, min_size=0, max_size=25)


class TestProperties:
    @given(ranked_lists, ranked_lists)
    def test_rank_sim_symmetric_and_bounded(self, a, b):
        s1 = simmath.rank_sim(a, b)
        s2 = simmath.rank_sim(b, a)
        assert s1 == s2
        assert 0.0 <= s1 <= 1.0

    @given(ranked_lists, ranked_lists)
    def test_jaccard_symmetric_and_bounded(self, a, b):
        s1 = simmath.jaccard(a, b)
        assert s1 == simmath.jaccard(b, a)
        assert 0.0 <= s1 <= 1.0

    @given(st.integers(0, 2**32), st.integers(2, 24), st.integers(1, 6), st.integers(1, 6))
    @settings(max_examples=40, deadline=None)
    def test_cka_symmetric_and_bounded(self, seed, n, da, db):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((n, da))
        y = rng.standard_normal((n, db))
        s_xy = simmath.linear_cka(x, y)
        s_yx = simmath.linear_cka(y, x)
        assert abs(s_xy - s_yx) <= 1e-12
        assert 0.0 <= s_xy <= 1.0

    @given(st.integers(0, 2**32))
    @settings(max_examples=30, deadline=None)
    def test_jaccard_full_prefix_is_one(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 30))
        items = [f"c{i}" for i in range(n)]
        a = list(rng.permutation(items))
        b = list(rng.permutation(items))
        assert simmath.jaccard(a, b) == 1.0
