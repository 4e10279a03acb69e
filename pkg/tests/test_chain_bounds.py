import numpy as np
import pytest

from aricluster import (
    InputError,
    IntervalPartition,
    build_simes_context,
    chain_bounds_with_cutoff,
    compute_tdn_bounds,
    naive_chain_bounds,
    naive_d,
    sort_pvalues,
)


class TestKnownChains:
    def test_reference_chain(self):
        assert compute_tdn_bounds([3, 1, 5, 3, 6]).tolist() == [0, 1, 1, 1, 1]
        assert naive_chain_bounds([3, 1, 5, 3, 6]).tolist() == [0, 1, 1, 1, 1]

    def test_all_values_exceed_length(self):
        ell = 7
        c = [ell + 1] * ell
        assert compute_tdn_bounds(c).tolist() == [0] * ell

    def test_all_ones_counts_up(self):
        ell = 9
        assert compute_tdn_bounds([1] * ell).tolist() == list(range(1, ell + 1))

    def test_two_twos(self):
        assert naive_chain_bounds([2, 2]).tolist() == [0, 1]
        assert compute_tdn_bounds([2, 2]).tolist() == [0, 1]

    def test_singleton(self):
        assert naive_chain_bounds([1]).tolist() == [1]
        assert compute_tdn_bounds([1]).tolist() == [1]

    def test_validate_path_agrees(self):
        rng = np.random.default_rng(5)
        for _ in range(25):
            ell = int(rng.integers(1, 40))
            c = rng.integers(1, 2 * ell + 1, ell)
            assert np.array_equal(
                compute_tdn_bounds(c), compute_tdn_bounds(c, validate=True)
            )


class TestValidation:
    def test_rejects_empty(self):
        with pytest.raises(InputError):
            compute_tdn_bounds([])

    def test_rejects_non_positive(self):
        with pytest.raises(InputError):
            compute_tdn_bounds([1, 0, 2])

    def test_rejects_fractional(self):
        with pytest.raises(InputError):
            compute_tdn_bounds([1.5, 2.0])

    def test_accepts_integral_floats(self):
        assert compute_tdn_bounds([1.0, 1.0]).tolist() == [1, 2]


class TestOracleEquivalence:
    def test_thousand_random_chains(self):
        rng = np.random.default_rng(12)
        for _ in range(1000):
            ell = int(rng.integers(1, 201))
            c = rng.integers(1, 2 * ell + 1, ell)
            assert np.array_equal(compute_tdn_bounds(c), naive_chain_bounds(c))

    def test_step_property(self):
        rng = np.random.default_rng(13)
        for _ in range(200):
            ell = int(rng.integers(1, 120))
            c = rng.integers(1, 2 * ell + 1, ell)
            d = compute_tdn_bounds(c)
            steps = np.diff(np.concatenate([[0], d]))
            assert set(steps.tolist()) <= {0, 1}

    @pytest.mark.parametrize("alpha", [0.01, 0.05, 0.2])
    def test_statistical_equivalence_with_set_bounds(self, alpha):
        # feeding the discretised values of a chain's members through the
        # interval pass reproduces the direct set bound of every prefix
        rng = np.random.default_rng(int(alpha * 1000))
        for _ in range(70):
            m = int(rng.integers(1, 101))
            raw = rng.random(m) ** int(rng.integers(1, 4))
            sp = sort_pvalues(raw, alpha)
            ctx = build_simes_context(sp)
            k = int(rng.integers(1, m + 1))
            chain = rng.permutation(m)[:k]
            d = compute_tdn_bounds(ctx.c[chain])
            for i in (0, k // 2, k - 1):
                assert d[i] == naive_d(chain[: i + 1], ctx)


class TestRankCutoff:
    def test_output_identical_with_cutoff(self):
        rng = np.random.default_rng(21)
        for _ in range(80):
            m = int(rng.integers(1, 101))
            raw = rng.random(m) ** 2
            sp = sort_pvalues(raw, float(rng.choice([0.01, 0.05, 0.2])))
            ctx = build_simes_context(sp)
            k = int(rng.integers(1, m + 1))
            chain = rng.permutation(m)[:k]
            plain = compute_tdn_bounds(ctx.c[chain])
            shrunk = chain_bounds_with_cutoff(ctx.c[chain], chain, ctx.zeta)
            assert np.array_equal(plain, shrunk)

    def test_cutoff_zero_empties_chain(self):
        out = chain_bounds_with_cutoff([1, 1, 1], [0, 1, 2], 0)
        assert out.tolist() == [0, 0, 0]


class TestIntervalPartition:
    def test_initial_state(self):
        part = IntervalPartition(4)
        part.check()
        assert part.intervals() == [(1, 1), (2, 2), (3, 3), (4, 4)]

    def test_merge_left_tracks_minimum(self):
        part = IntervalPartition(5)
        root = part.merge_left(part.find(3))
        part.check()
        assert part.minimum(root) == 2
        assert (2, 3) in part.intervals()
        root = part.merge_left(part.find(2))
        part.check()
        assert part.minimum(root) == 1
        assert part.intervals() == [(1, 3), (4, 4), (5, 5)]

    def test_leftmost_merge_is_error(self):
        part = IntervalPartition(3)
        with pytest.raises(InputError):
            part.merge_left(part.find(1))

    def test_out_of_range_find(self):
        part = IntervalPartition(3)
        with pytest.raises(InputError):
            part.find(0)
        with pytest.raises(InputError):
            part.find(4)
