import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sddq import ValidationError, wasserstein_1d, wasserstein_oracle

finite_floats = st.floats(min_value=-50, max_value=50, allow_nan=False)
small_dist = st.lists(finite_floats, min_size=1, max_size=12)


class TestClosedForm:
    def test_identical(self):
        assert wasserstein_1d([0.0, 1.0], [0.0, 1.0]) == 0.0

    def test_two_point_masses(self):
        assert wasserstein_1d([0.8], [0.2]) == pytest.approx(0.6)

    def test_two_vs_two(self):
        # optimum is the monotone matching (|0.2-0.4| + |0.8-0.6|) / 2,
        # cross-checked against the coupling oracle
        value = wasserstein_1d([0.2, 0.8], [0.4, 0.6])
        assert value == pytest.approx(0.2)
        assert value == pytest.approx(wasserstein_oracle([0.2, 0.8], [0.4, 0.6]))

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            wasserstein_1d([], [1.0])

    def test_non_finite_rejected(self):
        with pytest.raises(ValidationError):
            wasserstein_1d([np.inf], [1.0])


class TestOracle:
    def test_same_point(self):
        assert wasserstein_oracle([0.5], [0.5]) == 0.0

    def test_order_irrelevant(self):
        assert wasserstein_oracle([0.0, 1.0], [1.0, 0.0]) == 0.0

    def test_mass_split(self):
        # unique coupling splits q's unit mass: (|0.1-0.5| + |0.9-0.5|) / 2
        assert wasserstein_oracle([0.1, 0.9], [0.5]) == pytest.approx(0.4)

    def test_size_cap(self):
        with pytest.raises(ValidationError, match="size cap"):
            wasserstein_oracle(np.zeros(101), np.zeros(101))

    def test_matches_closed_form_small(self):
        rng = np.random.default_rng(3)
        for _ in range(60):
            p = rng.normal(0, 1, rng.integers(1, 9))
            q = rng.normal(0.5, 2, rng.integers(1, 9))
            assert abs(wasserstein_1d(p, q) - wasserstein_oracle(p, q)) <= 1e-9

    def test_lp_branch_beyond_permutation_cap(self):
        rng = np.random.default_rng(4)
        p = rng.normal(0, 1, 12)
        q = rng.normal(0, 1, 12)
        assert wasserstein_oracle(p, q) == pytest.approx(wasserstein_1d(p, q), abs=1e-9)


class TestMetricProperties:
    @given(small_dist)
    def test_identity(self, p):
        assert wasserstein_1d(p, p) <= 1e-12

    @given(small_dist, small_dist)
    def test_symmetry(self, p, q):
        assert wasserstein_1d(p, q) == pytest.approx(wasserstein_1d(q, p), abs=1e-9)

    @given(small_dist, small_dist, small_dist)
    @settings(max_examples=60)
    def test_triangle(self, p, q, r):
        d_pr = wasserstein_1d(p, r)
        d_pq = wasserstein_1d(p, q)
        d_qr = wasserstein_1d(q, r)
        assert d_pr <= d_pq + d_qr + 1e-9

    @given(small_dist, small_dist, st.floats(min_value=-100, max_value=100))
    def test_translation_invariance(self, p, q, c):
        base = wasserstein_1d(p, q)
        shifted = wasserstein_1d(np.asarray(p) + c, np.asarray(q) + c)
        assert shifted == pytest.approx(base, abs=1e-12 + 1e-12 * abs(c))

    def test_separation_shift_exact(self):
        # same support shifted by c: sorted matching pays exactly |c|
        rng = np.random.default_rng(8)
        p = rng.normal(0, 1, 10)
        q = rng.permutation(p)
        for c in (0.5, -3.0, 42.0):
            assert wasserstein_1d(p, q + c) == pytest.approx(abs(c), abs=1e-12)

    def test_separation_shift_limit(self):
        rng = np.random.default_rng(9)
        p = rng.normal(0, 1, 8)
        q = rng.normal(0, 1, 8)
        c = 1e6
        # far-apart supports cost |c| plus the (bounded) mean offset
        assert abs(wasserstein_1d(p, q + c) - c) <= np.abs(q.mean() - p.mean()) + 1e-6

    def test_nonnegative_and_scale_covariant(self):
        rng = np.random.default_rng(10)
        p = rng.normal(0, 1, 7)
        q = rng.normal(1, 1, 5)
        w = wasserstein_1d(p, q)
        assert w >= 0
        for c in (0.5, 3.0):
            assert wasserstein_1d(c * p, c * q) == pytest.approx(c * w, rel=1e-12)
