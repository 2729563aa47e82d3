import math

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, strategies as st

from transient_bounds.errors import (
    ExpmOverflowError,
    InvalidInputError,
    NearSpectrumError,
)
from transient_bounds.linop import (
    MatrixOperator,
    expm,
    expm_dense,
    op_norm,
    parse_norm_index,
    resolvent,
    resolvent_norm,
    resolvent_norms,
    symtri_eig,
)

rng = np.random.default_rng(12345)


def check_decomposition(M, dec):
    n = M.dim
    q, lam = dec.eigenvectors, dec.eigenvalues
    assert np.all(np.diff(lam) >= 0)
    assert np.abs(q.T @ q - np.eye(n)).max() <= 1e-10 * n
    resid = np.abs(M.to_dense() @ q - q * lam).max()
    assert resid <= 1e-8 * max(np.abs(lam).max(), 1.0) * n


class TestOperator:
    def test_symtridiag_lengths(self):
        with pytest.raises(InvalidInputError):
            MatrixOperator.symtridiag([1, 2, 3], [1, 2, 3])

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidInputError):
            MatrixOperator.dense([[1.0, np.nan], [0, 1]])

    @pytest.mark.parametrize("p,expected", [("1", 1.0), (2, 2.0), ("inf", math.inf), (np.inf, math.inf)])
    def test_norm_index(self, p, expected):
        assert parse_norm_index(p) == expected

    def test_bad_norm_index(self):
        with pytest.raises(Exception):
            parse_norm_index(3)

    def test_entries_read_only(self):
        M = MatrixOperator.dense(np.eye(3))
        with pytest.raises(ValueError):
            M.entries[0, 0] = 5.0


class TestOpNorm:
    @pytest.mark.parametrize("p", [1, 2, "inf"])
    def test_identity(self, p):
        assert op_norm(np.eye(7), p) == pytest.approx(1.0)

    def test_nilpotent_l2(self):
        assert op_norm(np.array([[0.0, 1.0], [0.0, 0.0]]), 2) == pytest.approx(1.0, rel=1e-14)

    def test_column_sum(self):
        assert op_norm(np.array([[1.0, -2.0], [3.0, 4.0]]), 1) == 6.0

    def test_row_sum(self):
        assert op_norm(np.array([[1.0, -2.0], [3.0, 4.0]]), "inf") == 7.0

    def test_non_finite(self):
        with pytest.raises(InvalidInputError):
            op_norm(np.array([[np.inf]]), 1)

    def test_operator_uses_own_index(self):
        M = MatrixOperator.dense([[1.0, -2.0], [3.0, 4.0]], p=1)
        assert op_norm(M) == 6.0

    @given(st.integers(2, 12), st.integers(0, 2**31 - 1))
    def test_symmetric_l2_is_max_abs_eig(self, n, seed):
        g = np.random.default_rng(seed).normal(size=(n, n))
        s = g + g.T
        assert op_norm(s, 2) == pytest.approx(np.abs(np.linalg.eigvalsh(s)).max(), rel=1e-10)

    def test_l2_matches_svd(self):
        a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        assert op_norm(a, 2) == pytest.approx(np.linalg.norm(a, 2), rel=1e-10)


class TestSymtriEig:
    def test_two_by_two(self):
        dec = symtri_eig(MatrixOperator.symtridiag([2.0, 2.0], [-1.0]))
        assert dec.eigenvalues == pytest.approx([1.0, 3.0], abs=1e-14)

    def test_diagonal(self):
        dec = symtri_eig(MatrixOperator.symtridiag(np.full(6, 3.5), np.zeros(5)))
        assert np.allclose(dec.eigenvalues, 3.5, atol=1e-15)

    def test_free_laplacian_closed_form(self):
        n = 5
        M = MatrixOperator.symtridiag(np.full(n, 2.0), np.full(n - 1, -1.0))
        dec = symtri_eig(M)
        k = np.arange(1, n + 1)
        assert dec.eigenvalues == pytest.approx(2 - 2 * np.cos(k * np.pi / (n + 1)), abs=1e-13)
        assert dec.eigenvalues == pytest.approx(np.linalg.eigvalsh(M.to_dense()), abs=1e-13)
        check_decomposition(M, dec)

    def test_single(self):
        dec = symtri_eig(MatrixOperator.symtridiag([4.0], []))
        assert dec.eigenvalues.tolist() == [4.0]

    def test_deterministic(self):
        d, e = rng.normal(size=40), rng.normal(size=39)
        M = MatrixOperator.symtridiag(d, e)
        a, b = symtri_eig(M), symtri_eig(M)
        assert np.array_equal(a.eigenvalues, b.eigenvalues)
        assert np.array_equal(a.eigenvectors, b.eigenvectors)

    def test_large_against_lapack(self):
        n = 600
        d, e = rng.normal(size=n), rng.normal(size=n - 1)
        M = MatrixOperator.symtridiag(d, e)
        dec = symtri_eig(M)
        ref = sla.eigh_tridiagonal(d, e, eigvals_only=True)
        assert np.abs(dec.eigenvalues - ref).max() < 1e-12
        check_decomposition(M, dec)

    @given(st.integers(1, 30), st.integers(0, 2**31 - 1))
    def test_invariants(self, n, seed):
        g = np.random.default_rng(seed)
        M = MatrixOperator.symtridiag(g.normal(size=n) * 3, g.normal(size=n - 1))
        dec = symtri_eig(M)
        check_decomposition(M, dec)
        assert dec.eigenvalues.sum() == pytest.approx(M.diag.sum(), rel=1e-10, abs=1e-12)

    def test_rejects_dense(self):
        with pytest.raises(InvalidInputError):
            symtri_eig(MatrixOperator.dense(np.eye(2)))


class TestExpm:
    def test_zero_time(self):
        M = MatrixOperator.dense(rng.normal(size=(4, 4)))
        assert np.array_equal(expm(M, 0.0), np.eye(4))

    def test_nilpotent(self):
        A = MatrixOperator.dense([[0.0, 1.0], [0.0, 0.0]])
        assert np.allclose(expm(A, 3.0), [[1.0, 3.0], [0.0, 1.0]], atol=1e-14)

    def test_jordan_l1_series(self):
        n, t = 5, 1.7
        A = MatrixOperator.dense(np.eye(n, k=1), p=1)
        series = sum(t ** k / math.factorial(k) for k in range(n))
        assert op_norm(expm(A, t), 1) == pytest.approx(series, rel=1e-13)

    @given(st.integers(1, 8), st.floats(0.0, 3.0), st.integers(0, 2**31 - 1))
    def test_against_scipy(self, n, t, seed):
        a = np.random.default_rng(seed).normal(size=(n, n)) * 2
        ours = expm(MatrixOperator.dense(a), t)
        ref = sla.expm(a * t)
        assert np.abs(ours - ref).max() <= 1e-11 * max(np.abs(ref).max(), 1.0)

    def test_complex(self):
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        assert np.allclose(expm_dense(a), sla.expm(a), rtol=1e-12, atol=1e-13)

    def test_overflow(self):
        A = MatrixOperator.dense([[800.0, 0.0], [0.0, 1.0]])
        with pytest.raises(ExpmOverflowError) as info:
            expm(A, 2.0)
        assert info.value.t == 2.0

    def test_heavy_scaling_triangular(self):
        A = MatrixOperator.dense(np.eye(3, k=1))
        t = 1e150
        E = expm(A, t)
        assert E[0, 0] == 1.0 and E[0, 1] == pytest.approx(t) and E[0, 2] == pytest.approx(t * t / 2)

    def test_negative_time(self):
        with pytest.raises(Exception):
            expm(MatrixOperator.dense(np.eye(2)), -1.0)

    @given(st.floats(0, 5), st.floats(0, 5), st.integers(0, 2**31 - 1))
    def test_semigroup_property_symtridiag(self, t1, t2, seed):
        g = np.random.default_rng(seed)
        M = MatrixOperator.symtridiag(-np.abs(g.normal(size=8)), g.normal(size=7) * 0.5)
        whole = expm(M, t1 + t2)
        prod = expm(M, t1) @ expm(M, t2)
        assert np.abs(whole - prod).max() <= 1e-9 * np.abs(whole).max()

    def test_symtridiag_path_matches_dense(self):
        d, e = rng.normal(size=10), rng.normal(size=9)
        M = MatrixOperator.symtridiag(d, e)
        assert np.allclose(expm(M, 0.7), sla.expm(M.to_dense() * 0.7), rtol=1e-11, atol=1e-13)


class TestResolvent:
    def test_normal_distance(self):
        A = MatrixOperator.dense(np.diag([-1.0, -2.0]))
        assert resolvent_norm(A, 0.0, 2) == pytest.approx(1.0, rel=1e-14)

    @pytest.mark.parametrize("z", [0.3, 1.0, 2.0 + 1.0j, -0.5j, 3.0 - 4.0j])
    def test_jordan_closed_form(self, z):
        A = MatrixOperator.dense([[0.0, 1.0], [0.0, 0.0]])
        r = abs(z)
        expected = 1 / (2 * r * r) + math.sqrt(1 + 1 / (4 * r * r)) / r
        assert resolvent_norm(A, z, 2) == pytest.approx(expected, rel=1e-12)

    def test_random_l1_against_inverse(self):
        a = rng.normal(size=(4, 4))
        A = MatrixOperator.dense(a)
        z = 5 + 1j
        explicit = np.abs(np.linalg.inv(z * np.eye(4) - a)).sum(axis=0).max()
        assert resolvent_norm(A, z, 1) == pytest.approx(explicit, rel=1e-10)

    @given(st.integers(2, 50), st.integers(0, 2**31 - 1))
    def test_l1_columns_vs_inverse(self, n, seed):
        g = np.random.default_rng(seed)
        a = g.normal(size=(n, n))
        z = complex(g.uniform(-3, 3), g.uniform(0.5, 3))
        A = MatrixOperator.dense(a)
        assert resolvent_norm(A, z, 1) == pytest.approx(op_norm(resolvent(A, z), 1), rel=1e-10)

    def test_near_spectrum(self):
        A = MatrixOperator.dense(np.diag([-1.0, -2.0]))
        with pytest.raises(NearSpectrumError) as info:
            resolvent_norm(A, -1.0, 2)
        assert info.value.condition > 1e14 or math.isinf(info.value.condition)

    def test_huge_but_meaningful(self):
        A = MatrixOperator.dense(np.diag([-1.0, -2.0]))
        assert resolvent_norm(A, -1.0 + 1e-9, 2) == pytest.approx(1e9, rel=1e-6)

    def test_batched(self):
        a = rng.normal(size=(5, 5))
        A = MatrixOperator.dense(a)
        zs = np.array([2 + 1j, -3j, 4.0, 1 + 1j])
        batched = resolvent_norms(A, zs, 2)
        single = [resolvent_norm(A, z, 2) for z in zs]
        assert batched == pytest.approx(single, rel=1e-10)
