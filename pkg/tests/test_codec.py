import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chanprot.codec import CodingMatrix, encode, generate_coding_matrix


def test_deterministic_per_seed():
    a = generate_coding_matrix(64, 8, 5)
    b = generate_coding_matrix(64, 8, 5)
    assert np.array_equal(a.matrix, b.matrix)
    assert not np.array_equal(a.matrix, generate_coding_matrix(64, 8, 6).matrix)


def test_entry_mean_within_clt_bound():
    m, n = 256, 32
    A = generate_coding_matrix(m, n, 11).matrix
    assert abs(A.mean()) <= 4 * np.sqrt(1.0 / (m * m * n))


def test_column_variance_sanity():
    m = 256
    A = generate_coding_matrix(m, 16, 3).matrix
    var = A.var(axis=0)
    assert np.all((var >= 0.5 / m) & (var <= 1.5 / m))


@pytest.mark.parametrize("m,n", [(4, 8), (8, 8), (5, 0)])
def test_must_expand(m, n):
    with pytest.raises(ValueError):
        generate_coding_matrix(m, n, 0)


def test_matrix_is_read_only():
    A = generate_coding_matrix(16, 4, 0)
    with pytest.raises(ValueError):
        A.matrix[0, 0] = 1.0


class TestEncode:
    A = generate_coding_matrix(40, 6, 1)

    def test_zero(self):
        assert np.all(encode(self.A, np.zeros(6)) == 0)

    def test_basis_vector_picks_column(self):
        for j in range(6):
            e = np.zeros(6)
            e[j] = 1
            assert np.array_equal(encode(self.A, e), self.A.matrix[:, j])

    def test_naive_matvec_oracle(self, rng):
        x = rng.standard_normal(6)
        ref = [sum(self.A.matrix[i, j] * x[j] for j in range(6)) for i in range(40)]
        np.testing.assert_allclose(encode(self.A, x), ref, rtol=1e-12, atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            encode(self.A, np.ones(5))

    @given(st.integers(0, 2**32 - 1), st.floats(-10, 10), st.floats(-10, 10))
    def test_linear(self, seed, a, b):
        g = np.random.default_rng(seed)
        x1, x2 = g.standard_normal(6), g.standard_normal(6)
        lhs = encode(self.A, a * x1 + b * x2)
        rhs = a * encode(self.A, x1) + b * encode(self.A, x2)
        assert np.linalg.norm(lhs - rhs) <= 1e-12 * (np.linalg.norm(rhs) + np.linalg.norm(lhs)) + 1e-12


def test_norm_concentration():
    g = np.random.default_rng(2)
    A = generate_coding_matrix(256, 16, 7)
    for _ in range(20):
        x = g.standard_normal(16)
        x /= np.linalg.norm(x)
        assert 0.7 <= np.linalg.norm(encode(A, x)) <= 1.3


def test_loaded_matrix_has_no_seed():
    A = CodingMatrix(np.ones((4, 2)) + np.eye(4, 2))
    assert A.seed is None and (A.m, A.n) == (4, 2)
