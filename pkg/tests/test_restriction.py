import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from transient_bounds.errors import (
    DefectiveMatrixError,
    LinearDependenceError,
    UnsupportedNormError,
)
from transient_bounds.linop import MatrixOperator, expm, op_norm
from transient_bounds.restriction import (
    eigen_span,
    ordered_eigenpairs,
    projected_semigroup_norm,
    projection_norm,
    restricted_norm,
    span_convergence,
)


def random_stable(seed, n):
    g = np.random.default_rng(seed)
    a = g.normal(size=(n, n))
    return a - (np.linalg.eigvals(a).real.max() + 0.5) * np.eye(n)


class TestRestrictedNorm:
    def test_single_eigenvector(self):
        A = MatrixOperator.dense([[-1.0, 5.0], [0.0, -2.0]])
        lam, _ = ordered_eigenpairs(A)
        span = eigen_span(A, [0])
        for t in (0.0, 0.5, 3.0):
            assert restricted_norm(span, t) == pytest.approx(abs(np.exp(lam[0] * t)), rel=1e-12)

    def test_orthonormal_case(self):
        A = MatrixOperator.dense(np.diag([-0.5, -1.0, -3.0]))
        span = eigen_span(A)
        assert np.allclose(span.gram, np.eye(3))
        assert restricted_norm(span, 2.0) == pytest.approx(math.exp(-1.0), rel=1e-12)

    def test_random_sphere_oracle(self):
        a = np.array([[-1.0, 5.0], [0.0, -2.0]])
        span = eigen_span(MatrixOperator.dense(a))
        g = np.random.default_rng(11)
        v = g.normal(size=(2, 100_000)) + 1j * g.normal(size=(2, 100_000))
        E = expm(MatrixOperator.dense(a), 1.0)
        brute = (np.linalg.norm(E @ v, axis=0) / np.linalg.norm(v, axis=0)).max()
        assert restricted_norm(span, 1.0) == pytest.approx(brute, rel=1e-3)

    def test_time_zero(self):
        A = MatrixOperator.dense(random_stable(1, 5))
        for idx in ([0], [1, 3], [0, 1, 2, 3, 4]):
            assert restricted_norm(eigen_span(A, idx), 0.0) == pytest.approx(1.0, rel=1e-10)

    def test_l1_refused(self):
        A = MatrixOperator.dense([[-1.0, 5.0], [0.0, -2.0]], p=1)
        with pytest.raises(UnsupportedNormError):
            restricted_norm(eigen_span(A), 1.0)

    def test_dependent_vectors(self):
        A = MatrixOperator.dense([[0.0, 1.0], [0.0, 0.0]])
        with pytest.raises(LinearDependenceError):
            eigen_span(A)

    def test_ordering(self):
        A = MatrixOperator.dense(np.diag([-3.0, -1.0, -2.0]))
        lam, _ = ordered_eigenpairs(A)
        assert lam.real.tolist() == [-1.0, -2.0, -3.0]

    @given(st.integers(2, 6), st.integers(0, 2**31 - 1), st.floats(0, 4))
    def test_lower_bound_property(self, n, seed, t):
        A = MatrixOperator.dense(random_stable(seed, n))
        g = np.random.default_rng(seed + 1)
        k = int(g.integers(1, n + 1))
        idx = sorted(g.choice(n, size=k, replace=False).tolist())
        try:
            span = eigen_span(A, idx)
        except LinearDependenceError:
            return
        assert restricted_norm(span, t) <= op_norm(expm(A, t), 2) + 1e-9

    @given(st.integers(2, 6), st.integers(0, 2**31 - 1), st.floats(0, 4))
    def test_full_span_equality(self, n, seed, t):
        A = MatrixOperator.dense(random_stable(seed, n))
        _, vec = ordered_eigenpairs(A)
        if np.linalg.cond(vec) >= 1e6:
            return
        full = op_norm(expm(A, t), 2)
        assert restricted_norm(eigen_span(A), t) == pytest.approx(full, rel=1e-8)


class TestConvergence:
    def test_normal(self):
        g = np.random.default_rng(4)
        q, _ = np.linalg.qr(g.normal(size=(5, 5)))
        A = MatrixOperator.dense(q @ np.diag([-0.1, -0.5, -1, -2, -3]) @ q.T)
        rep = span_convergence(A, t_grid=[0.5, 2.0])
        assert rep.norms[-1] == pytest.approx(rep.full_norms, rel=1e-10)

    def test_shifted_jordan_like(self):
        a = np.diag([-0.1, -0.2, -0.3, -0.4]) + np.diag([2.0, 2.0, 2.0], 1)
        rep = span_convergence(MatrixOperator.dense(a), t_grid=[1.0])
        assert rep.monotone and rep.bounded
        assert np.all(np.diff(rep.norms[:, 0]) >= -1e-10)
        assert rep.norms[-1, 0] == pytest.approx(rep.full_norms[0], rel=1e-8)

    def test_defective(self):
        with pytest.raises(DefectiveMatrixError):
            span_convergence(MatrixOperator.dense([[0.0, 1.0], [0.0, 0.0]]))

    def test_l1_refused(self):
        with pytest.raises(UnsupportedNormError):
            span_convergence(MatrixOperator.dense(np.eye(2), p=1))

    def test_projection_distinct_from_restriction(self):
        A = MatrixOperator.dense([[-1.0, 5.0], [0.0, -2.0]])
        P1 = projection_norm(A, 0)
        assert P1 > 1
        lam, vec = ordered_eigenpairs(A)
        # explicit P1 from the left and right eigenvectors
        left = np.linalg.inv(vec)
        P = np.outer(vec[:, 0], left[0])
        assert P1 == pytest.approx(np.linalg.norm(P, 2), rel=1e-12)
        for t in (0.5, 1.0):
            proj = projected_semigroup_norm(A, 0, t)
            assert proj == pytest.approx(P1 * math.exp(lam[0].real * t), rel=1e-12)
            assert proj > restricted_norm(eigen_span(A, [0]), t) * (1 + 1e-6)
