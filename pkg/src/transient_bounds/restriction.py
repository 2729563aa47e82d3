"""Lower bounds on ``||e^{At}||_2`` from restrictions to eigenvector spans.

If ``f_1..f_k`` are eigenvectors of ``A`` with eigenvalues ``lambda_r`` and
``B_{rs} = <f_s, f_r>`` is their Gram matrix, then the restriction of
``e^{At}`` to their span has norm ``||B^{1/2} diag(e^{lambda_r t}) B^{-1/2}||``.
This is a Hilbert-space identity: restricted norms in l^1 are refused, since
unit balls of subspaces of l^1 are polytopes with many faces.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DefectiveMatrixError,
    InvalidInputError,
    LinearDependenceError,
    UnsupportedNormError,
)
from .linop import MatrixOperator, expm, op_norm

__all__ = [
    "EigenSpan",
    "ConvergenceReport",
    "ordered_eigenpairs",
    "eigen_span",
    "restricted_norm",
    "span_convergence",
    "projection_norm",
    "projected_semigroup_norm",
]


@dataclass(frozen=True)
class EigenSpan:
    eigenvalues: np.ndarray
    vectors: np.ndarray
    gram: np.ndarray
    norm_index: float = 2.0

    @property
    def k(self) -> int:
        return self.eigenvalues.size


def ordered_eigenpairs(A: MatrixOperator):
    """Eigenpairs sorted by descending real part, ties by descending ``|Im|``.

    Eigenvectors have unit Euclidean norm.
    """
    lam, vec = np.linalg.eig(A.to_dense())
    order = np.lexsort((-np.abs(lam.imag), -lam.real))
    vec = vec[:, order]
    return lam[order], vec / np.linalg.norm(vec, axis=0)


def eigen_span(A: MatrixOperator, indices: Optional[Sequence[int]] = None,
               k: Optional[int] = None) -> EigenSpan:
    """Span of selected eigenvectors of ``A``.

    ``indices`` refer to the order of :func:`ordered_eigenpairs`; by default
    the first ``k`` (all if ``k`` is None).
    """
    lam, vec = ordered_eigenpairs(A)
    if indices is None:
        indices = range(A.dim if k is None else k)
    idx = np.asarray(list(indices), dtype=int)
    if idx.size == 0:
        raise InvalidInputError("empty eigenvector selection")
    lam, f = lam[idx], vec[:, idx]
    scale = max(1.0, op_norm(A.to_dense(), 2))
    resid = np.abs(A.to_dense() @ f - f * lam).max()
    if resid > 1e-8 * scale:
        raise InvalidInputError(f"eigenpair residual {resid:.3g} too large")
    gram = f.conj().T @ f
    w = np.linalg.eigvalsh(gram)
    if w[0] <= 1e-12 * np.trace(gram).real / idx.size:
        raise LinearDependenceError("selected eigenvectors are numerically dependent")
    return EigenSpan(lam, f, gram, A.norm_index)


def _gram_root(gram):
    w, u = np.linalg.eigh(gram)
    if w[0] <= 0:
        raise LinearDependenceError("Gram matrix is not positive definite")
    root = (u * np.sqrt(w)) @ u.conj().T
    inv_root = (u / np.sqrt(w)) @ u.conj().T
    return root, inv_root


def restricted_norm(span: EigenSpan, t: float) -> float:
    """``||e^{At}||`` restricted to the span, in the Euclidean norm."""
    if span.norm_index != 2:
        raise UnsupportedNormError("restricted norms are only available in l^2")
    if t < 0:
        raise InvalidInputError("t must be non-negative")
    root, inv_root = _gram_root(span.gram)
    d = np.exp(span.eigenvalues * t)
    return op_norm((root * d) @ inv_root, 2)


@dataclass(frozen=True)
class ConvergenceReport:
    times: np.ndarray
    norms: np.ndarray          # shape (order, len(times)); row k-1 uses k eigenvectors
    full_norms: np.ndarray
    monotone: bool
    bounded: bool


def span_convergence(A: MatrixOperator, order: Optional[int] = None,
                     t_grid: Sequence[float] = (1.0,)) -> ConvergenceReport:
    """Restricted norms for nested spans of 1..order eigenvectors.

    Raises ``DefectiveMatrixError`` if the eigenvector matrix has condition
    number above 1e12.
    """
    if A.norm_index != 2:
        raise UnsupportedNormError("restricted norms are only available in l^2")
    order = A.dim if order is None else int(order)
    lam, vec = ordered_eigenpairs(A)
    if np.linalg.cond(vec) > 1e12:
        raise DefectiveMatrixError("eigenvector matrix is too ill-conditioned")
    times = np.asarray(t_grid, dtype=float)
    norms = np.empty((order, times.size))
    for k in range(1, order + 1):
        f = vec[:, :k]
        span = EigenSpan(lam[:k], f, f.conj().T @ f, 2.0)
        norms[k - 1] = [restricted_norm(span, t) for t in times]
    full = np.array([op_norm(expm(A, t), 2) for t in times])
    monotone = bool(np.all(np.diff(norms, axis=0) >= -1e-10))
    bounded = bool(np.all(norms <= full + 1e-9))
    return ConvergenceReport(times, norms, full, monotone, bounded)


def projection_norm(A: MatrixOperator, index: int = 0) -> float:
    """2-norm of the spectral projection onto eigenpair ``index`` (simple eigenvalue)."""
    a = A.to_dense()
    lam, vec = ordered_eigenpairs(A)
    lam_left, left = np.linalg.eig(a.conj().T)
    j = int(np.argmin(np.abs(lam_left.conj() - lam[index])))
    v, w = vec[:, index], left[:, j]
    return float(np.linalg.norm(v) * np.linalg.norm(w) / abs(np.vdot(w, v)))


def projected_semigroup_norm(A: MatrixOperator, index: int, t: float) -> float:
    """``||P e^{At} P|| = ||P|| |e^{lambda t}|`` for the projection ``P`` of eigenpair ``index``."""
    lam, _ = ordered_eigenpairs(A)
    return projection_norm(A, index) * float(abs(np.exp(lam[index] * t)))
