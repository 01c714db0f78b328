import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from chanprot import numerics
from oracles import direct_circconv, direct_dft

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False, allow_subnormal=False)
vectors = st.integers(1, 64).flatmap(lambda m: arrays(np.float64, m, elements=finite))


class TestFFT:
    def test_zero_vector(self):
        assert np.all(numerics.fft(np.zeros(8)) == 0)

    def test_impulse_is_flat(self):
        v = np.zeros(8)
        v[0] = 1.0
        np.testing.assert_allclose(numerics.fft(v), np.ones(8), atol=1e-15)

    def test_matches_direct_dft(self, rng):
        v = rng.standard_normal(16)
        ref = direct_dft(v)
        err = np.linalg.norm(numerics.fft(v) - ref) / np.linalg.norm(ref)
        assert err <= 1e-10

    def test_non_power_of_two(self, rng):
        v = rng.standard_normal(12) + 1j * rng.standard_normal(12)
        np.testing.assert_allclose(numerics.fft(v), direct_dft(v), atol=1e-10)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            numerics.fft([])

    @given(vectors)
    def test_round_trip(self, v):
        back = numerics.ifft(numerics.fft(v))
        assert np.linalg.norm(back - v) <= 1e-10 * np.linalg.norm(v) + 1e-300

    @given(vectors)
    def test_parseval(self, v):
        # unnormalized forward transform: sum |V|^2 = m sum |v|^2
        lhs = np.sum(np.abs(numerics.fft(v)) ** 2) / v.size
        assert abs(lhs - np.sum(v**2)) <= 1e-10 * np.sum(v**2) + 1e-300


class TestCircshift:
    def test_single_rotation(self):
        assert numerics.circshift([1, 2, 3, 4], 1).tolist() == [4, 1, 2, 3]

    @pytest.mark.parametrize("s", [0, 4, -8])
    def test_full_periods(self, s):
        assert numerics.circshift([1, 2, 3, 4], s).tolist() == [1, 2, 3, 4]

    @given(vectors, st.integers(-100, 100), st.integers(-100, 100))
    def test_composition_adds(self, v, s, t):
        both = numerics.circshift(numerics.circshift(v, s), t)
        assert np.array_equal(both, numerics.circshift(v, s + t))

    @given(vectors, st.integers(-100, 100))
    def test_inverse(self, v, s):
        assert np.array_equal(numerics.circshift(numerics.circshift(v, s), -s), v)


class TestCircconv:
    def test_frozen_small_case(self):
        # hand-computed: out[j] = sum_t a[t] b[j - t]
        out = numerics.circconv([1.0, 2.0, 3.0], [0.0, 1.0, 0.5])
        np.testing.assert_allclose(out, [4.0, 2.5, 2.5], atol=1e-14)

    def test_identity_element(self, rng):
        v = rng.standard_normal(10)
        d = np.zeros(10)
        d[0] = 1
        np.testing.assert_allclose(numerics.circconv(v, d), v, atol=1e-14)

    def test_unit_delay(self, rng):
        v = rng.standard_normal(10)
        d = np.zeros(10)
        d[1] = 1
        np.testing.assert_allclose(numerics.circconv(v, d), numerics.circshift(v, 1), atol=1e-14)

    def test_matches_double_sum(self, rng):
        a, b = rng.standard_normal(12), rng.standard_normal(12)
        ref = direct_circconv(a, b)
        assert np.linalg.norm(numerics.circconv(a, b) - ref) <= 1e-10 * np.linalg.norm(ref)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            numerics.circconv(np.ones(3), np.ones(4))

    def test_circcorr_is_adjoint(self, rng):
        a, b, c = (rng.standard_normal(9) for _ in range(3))
        assert np.isclose(numerics.circconv(a, b) @ c, b @ numerics.circcorr(a, c))

    @given(st.integers(1, 32).flatmap(
        lambda m: st.tuples(arrays(np.float64, m, elements=finite),
                            arrays(np.float64, m, elements=finite))))
    def test_commutative_and_oracle(self, pair):
        a, b = pair
        ab = numerics.circconv(a, b)
        ref = direct_circconv(a, b)
        scale = np.linalg.norm(a) * np.linalg.norm(b) + 1e-300
        assert np.linalg.norm(ab - numerics.circconv(b, a)) <= 1e-10 * scale
        assert np.linalg.norm(ab - ref) <= 1e-10 * scale


class TestQR:
    def test_identity(self):
        f = numerics.qr(np.eye(4))
        np.testing.assert_allclose(f.q, np.eye(4), atol=1e-15)
        np.testing.assert_allclose(f.r, np.eye(4), atol=1e-15)

    def test_duplicate_columns(self, rng):
        M = rng.standard_normal((6, 3))
        M[:, 2] = M[:, 0]
        with pytest.raises(numerics.RankDeficientError):
            numerics.qr(M)

    def test_wide_rejected(self):
        with pytest.raises(ValueError):
            numerics.qr(np.ones((2, 3)))

    def test_random_reconstruction(self, rng):
        M = rng.standard_normal((20, 5))
        f = numerics.qr(M)
        assert np.max(np.abs(f.q @ f.r - M)) <= 1e-10 * np.max(np.abs(M))
        assert np.max(np.abs(f.q.T @ f.q - np.eye(5))) <= 1e-10
        assert np.all(np.diag(f.r) > 0)
        assert np.allclose(np.tril(f.r, -1), 0)


class TestLstsq:
    def test_identity(self, rng):
        y = rng.standard_normal(5)
        np.testing.assert_allclose(numerics.lstsq(np.eye(5), y), y, atol=1e-15)

    def test_consistent_system(self, rng):
        M = rng.standard_normal((15, 4))
        x = rng.standard_normal(4)
        xh = numerics.lstsq(M, M @ x)
        assert np.linalg.norm(M @ xh - M @ x) <= 1e-10 * np.linalg.norm(M @ x)

    def test_normal_equations_oracle(self, rng):
        M = rng.standard_normal((30, 6))
        y = rng.standard_normal(30)
        ref = np.linalg.solve(M.T @ M, M.T @ y)
        np.testing.assert_allclose(numerics.lstsq(M, y), ref, rtol=1e-8, atol=1e-8)

    def test_accepts_factors(self, rng):
        M = rng.standard_normal((10, 3))
        y = rng.standard_normal(10)
        np.testing.assert_allclose(numerics.lstsq(numerics.qr(M), y), numerics.lstsq(M, y))

    def test_rank_deficiency_propagates(self):
        with pytest.raises(numerics.RankDeficientError):
            numerics.lstsq(np.ones((5, 2)), np.ones(5))

    @given(st.integers(0, 2**32 - 1), st.integers(1, 8), st.integers(0, 20))
    def test_residual_orthogonal(self, seed, n, extra):
        g = np.random.default_rng(seed)
        M = g.standard_normal((n + extra + 1, n))
        y = g.standard_normal(n + extra + 1)
        x = numerics.lstsq(M, y)
        grad = M.T @ (M @ x - y)
        assert np.max(np.abs(grad)) <= 1e-8 * np.max(np.abs(M.T @ y)) + 1e-12
