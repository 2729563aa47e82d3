"""Dense and symmetric-tridiagonal linear algebra.

Operator norms, a symmetric tridiagonal eigensolver (implicit QL with
Wilkinson shifts), matrix exponentials and resolvent norms. Everything here
is a pure function of its inputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from numba import njit

from .errors import (
    ConvergenceError,
    ExpmOverflowError,
    InvalidInputError,
    NearSpectrumError,
)

__all__ = [
    "MatrixOperator",
    "EigenDecomposition",
    "parse_norm_index",
    "op_norm",
    "symtri_eig",
    "expm",
    "expm_dense",
    "resolvent",
    "resolvent_norm",
    "resolvent_norms",
    "NEAR_SPECTRUM_CONDITION",
]

NEAR_SPECTRUM_CONDITION = 1e14
QL_MAX_ITERATIONS = 50

KINDS = ("dense-real", "dense-complex", "sym-tridiag")


def parse_norm_index(p) -> float:
    """Normalise a norm index to one of ``1.0``, ``2.0`` or ``inf``."""
    if isinstance(p, str):
        key = p.strip().lower()
        if key in ("inf", "infinity", "oo", "max"):
            return math.inf
        try:
            p = float(key)
        except ValueError:
            raise InvalidInputError(f"unknown norm index {p!r}") from None
    p = float(p)
    if p not in (1.0, 2.0, math.inf):
        raise InvalidInputError(f"norm index must be 1, 2 or inf, got {p}")
    return p


def _frozen(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MatrixOperator:
    """A generator matrix together with the norm it is measured in.

    Use :meth:`dense` or :meth:`symtridiag` to construct. Arrays are stored
    read-only.
    """

    kind: str
    dim: int
    norm_index: float
    entries: Optional[np.ndarray] = field(default=None, repr=False)
    diag: Optional[np.ndarray] = field(default=None, repr=False)
    offdiag: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown matrix kind {self.kind!r}")
        object.__setattr__(self, "norm_index", parse_norm_index(self.norm_index))
        if self.dim < 1:
            raise InvalidInputError("dimension must be positive")
        if self.kind == "sym-tridiag":
            if self.diag is None or self.offdiag is None:
                raise InvalidInputError("sym-tridiag needs diag and offdiag")
            if self.diag.shape != (self.dim,) or self.offdiag.shape != (self.dim - 1,):
                raise InvalidInputError(
                    f"sym-tridiag of size {self.dim} needs {self.dim} diagonal and "
                    f"{self.dim - 1} off-diagonal entries, got "
                    f"{self.diag.shape} and {self.offdiag.shape}"
                )
        elif self.entries is None or self.entries.shape != (self.dim, self.dim):
            raise InvalidInputError("dense operator needs a square entries array")

    @classmethod
    def dense(cls, entries, p=2) -> "MatrixOperator":
        a = np.asarray(entries)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InvalidInputError(f"expected a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvalidInputError("matrix has non-finite entries")
        if np.iscomplexobj(a):
            kind, a = "dense-complex", a.astype(complex)
        else:
            kind, a = "dense-real", a.astype(float)
        return cls(kind=kind, dim=a.shape[0], norm_index=p, entries=_frozen(a))

    @classmethod
    def symtridiag(cls, diag, offdiag, p=2) -> "MatrixOperator":
        d = np.asarray(diag, dtype=float).ravel()
        e = np.asarray(offdiag, dtype=float).ravel()
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))):
            raise InvalidInputError("matrix has non-finite entries")
        return cls(kind="sym-tridiag", dim=d.size, norm_index=p,
                   diag=_frozen(d), offdiag=_frozen(e))

    @property
    def is_symtridiag(self) -> bool:
        return self.kind == "sym-tridiag"

    def to_dense(self) -> np.ndarray:
        if self.kind == "sym-tridiag":
            return (np.diag(self.diag) + np.diag(self.offdiag, 1)
                    + np.diag(self.offdiag, -1))
        return np.array(self.entries)

    def with_norm(self, p) -> "MatrixOperator":
        return MatrixOperator(kind=self.kind, dim=self.dim, norm_index=p,
                              entries=self.entries, diag=self.diag,
                              offdiag=self.offdiag)

    def __neg__(self) -> "MatrixOperator":
        if self.kind == "sym-tridiag":
            return MatrixOperator.symtridiag(-self.diag, -self.offdiag, self.norm_index)
        return MatrixOperator.dense(-self.entries, self.norm_index)


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        q = self.eigenvectors
        return (q * self.eigenvalues) @ q.T


def _as_array(M) -> np.ndarray:
    if isinstance(M, MatrixOperator):
        return M.to_dense()
    a = np.asarray(M)
    if a.ndim != 2:
        raise InvalidInputError(f"expected a matrix, got shape {a.shape}")
    return a


def op_norm(M: Union[MatrixOperator, np.ndarray], p=None) -> float:
    """Operator norm of ``M`` induced by the l^p vector norm.

    ``p`` defaults to ``M.norm_index`` for a :class:`MatrixOperator` and to 2
    for a plain array. The 2-norm is the square root of the largest
    eigenvalue of ``M^H M``.
    """
    if p is None:
        p = M.norm_index if isinstance(M, MatrixOperator) else 2
    p = parse_norm_index(p)
    if isinstance(M, MatrixOperator) and M.is_symtridiag and p == 2:
        lam = symtri_eig(M).eigenvalues
        return float(max(abs(lam[0]), abs(lam[-1])))
    a = _as_array(M)
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix has non-finite entries")
    if a.size == 0:
        return 0.0
    if p == 1:
        return float(np.abs(a).sum(axis=0).max())
    if p == math.inf:
        return float(np.abs(a).sum(axis=1).max())
    gram = a.conj().T @ a
    top = np.linalg.eigvalsh(gram)[-1]
    return float(math.sqrt(max(top, 0.0)))


@njit(cache=True)
def _tql2(d, e, z, max_iter):
    # d: diagonal (overwritten by eigenvalues); e: off-diagonal padded with a
    # trailing zero, e[i] couples i and i+1; z: rows are eigenvectors.
    n = d.shape[0]
    eps = np.finfo(np.float64).eps
    for l in range(n):
        it = 0
        while True:
            m = n - 1
            for mm in range(l, n - 1):
                dd = abs(d[mm]) + abs(d[mm + 1])
                if abs(e[mm]) <= eps * dd:
                    m = mm
                    break
            if m == l:
                break
            if it == max_iter:
                return l
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + (r if g >= 0.0 else -r))
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = False
            i = m - 1
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                for k in range(n):
                    f = z[i + 1, k]
                    z[i + 1, k] = s * z[i, k] + c * f
                    z[i, k] = c * z[i, k] - s * f
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return -1


def symtri_eig(M: MatrixOperator) -> EigenDecomposition:
    """Full eigendecomposition of a symmetric tridiagonal operator.

    Implicit QL iteration with Wilkinson shifts, at most 50 sweeps per
    eigenvalue. Eigenvalues are returned in ascending order and the
    eigenvectors are the columns of ``eigenvectors``; each column is signed
    so that its largest-magnitude entry is positive, which makes the output
    deterministic.

    Raises
    ------
    ConvergenceError
        If some eigenvalue fails to converge; ``err.index`` names it.
    """
    if not isinstance(M, MatrixOperator) or not M.is_symtridiag:
        raise InvalidInputError("symtri_eig needs a sym-tridiag MatrixOperator")
    n = M.dim
    d = np.array(M.diag, dtype=np.float64)
    e = np.zeros(n, dtype=np.float64)
    e[: n - 1] = M.offdiag
    z = np.eye(n)
    failed = _tql2(d, e, z, QL_MAX_ITERATIONS)
    if failed >= 0:
        raise ConvergenceError(
            f"QL iteration did not converge for eigenvalue {failed} after "
            f"{QL_MAX_ITERATIONS} iterations", index=int(failed))
    order = np.argsort(d, kind="stable")
    lam = d[order]
    q = z[order].T.copy()
    pivots = np.abs(q).argmax(axis=0)
    signs = np.sign(q[pivots, np.arange(n)])
    signs[signs == 0] = 1.0
    q *= signs
    return EigenDecomposition(_frozen(lam), _frozen(q))


# Degree-13 Pade coefficients and the matching scaling threshold.
_PADE13_B = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
    960960.0, 16380.0, 182.0, 1.0,
)
_THETA13 = 5.371920351148152


def expm_dense(a: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a [13/13] Pade approximant."""
    a = np.asarray(a)
    n = a.shape[0]
    dtype = np.result_type(a.dtype, np.float64)
    a = a.astype(dtype)
    ident = np.eye(n, dtype=dtype)
    norm1 = np.abs(a).sum(axis=0).max() if n else 0.0
    s = 0
    if norm1 > _THETA13:
        s = int(math.ceil(math.log2(norm1 / _THETA13)))
        a = a / (2.0 ** s)
    b = _PADE13_B
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a2 @ a4
    u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
             + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
    v = (a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2)
         + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident)
    r = np.linalg.solve(v - u, v + u)
    # for triangular input the diagonal is known exactly; resetting it after
    # each squaring stops (1 - eps)^(2^s) from decaying under heavy scaling
    triangular = n > 1 and (not np.any(np.tril(a, -1)) or not np.any(np.triu(a, 1)))
    diag = np.diag(a).copy()
    if triangular:
        np.fill_diagonal(r, np.exp(diag))
    for _ in range(s):
        r = r @ r
        if triangular:
            diag *= 2.0
            np.fill_diagonal(r, np.exp(diag))
    return r


def expm(M: MatrixOperator, t: float = 1.0) -> np.ndarray:
    """``exp(t M)`` as a dense array.

    Symmetric tridiagonal operators go through :func:`symtri_eig`; dense ones
    through :func:`expm_dense`.
    """
    t = float(t)
    if t < 0:
        raise InvalidInputError("expm needs t >= 0")
    if t == 0:
        dtype = complex if M.kind == "dense-complex" else float
        return np.eye(M.dim, dtype=dtype)
    with np.errstate(over="ignore", invalid="ignore"):
        if M.is_symtridiag:
            eig = symtri_eig(M)
            q = eig.eigenvectors
            out = (q * np.exp(eig.eigenvalues * t)) @ q.T
        else:
            out = expm_dense(M.entries * t)
    if not np.all(np.isfinite(out)):
        raise ExpmOverflowError(f"matrix exponential overflowed at t={t}", t=t)
    return out


def resolvent(A: MatrixOperator, z: complex) -> np.ndarray:
    """Dense ``(zI - A)^{-1}``, without any conditioning check."""
    a = A.to_dense()
    shifted = z * np.eye(A.dim) - a
    if np.isrealobj(shifted):
        shifted = shifted.astype(float)
    return np.linalg.inv(shifted)


def resolvent_norm(A: MatrixOperator, z: complex, p=None) -> float:
    """``||(zI - A)^{-1}||_p`` from the explicitly inverted shift.

    Raises ``NearSpectrumError`` when the condition number of ``zI - A``
    exceeds ``NEAR_SPECTRUM_CONDITION``; the exception carries enough
    information to recover the (unreliable) norm.
    """
    if p is None:
        p = A.norm_index
    p = parse_norm_index(p)
    z = complex(z)
    if z.imag == 0:
        z = z.real
    a = A.to_dense()
    shifted = z * np.eye(A.dim) - a
    shift_norm = op_norm(shifted, p)
    try:
        inv = np.linalg.inv(shifted)
    except np.linalg.LinAlgError:
        raise NearSpectrumError(f"zI - A is singular at z={z}", z=z,
                                condition=math.inf, shift_norm=shift_norm) from None
    if not np.all(np.isfinite(inv)):
        raise NearSpectrumError(f"zI - A is singular at z={z}", z=z,
                                condition=math.inf, shift_norm=shift_norm)
    inv_norm = op_norm(inv, p)
    condition = shift_norm * inv_norm
    if condition > NEAR_SPECTRUM_CONDITION:
        raise NearSpectrumError(
            f"z={z} is numerically on the spectrum (condition {condition:.3g})",
            z=z, condition=condition, shift_norm=shift_norm)
    return inv_norm


def _batched_norms(stack: np.ndarray, p: float) -> np.ndarray:
    if p == 1:
        return np.abs(stack).sum(axis=-2).max(axis=-1)
    if p == math.inf:
        return np.abs(stack).sum(axis=-1).max(axis=-1)
    gram = np.conj(np.swapaxes(stack, -1, -2)) @ stack
    return np.sqrt(np.maximum(np.linalg.eigvalsh(gram)[..., -1], 0.0))


def resolvent_norms(A: MatrixOperator, zs, p=None, chunk: int = 4096) -> np.ndarray:
    """Vectorised ``||(zI - A)^{-1}||_p`` over an array of shifts.

    No conditioning guard: exactly singular shifts give ``inf``. Intended for
    grid sweeps over small dense generators.
    """
    if p is None:
        p = A.norm_index
    p = parse_norm_index(p)
    zs = np.asarray(zs, dtype=complex).ravel()
    a = A.to_dense().astype(complex)
    ident = np.eye(A.dim)
    out = np.empty(zs.size)
    for start in range(0, zs.size, chunk):
        block = zs[start:start + chunk]
        stack = block[:, None, None] * ident - a
        with np.errstate(all="ignore"):
            try:
                inv = np.linalg.inv(stack)
                vals = _batched_norms(inv, p)
            except np.linalg.LinAlgError:
                vals = np.empty(block.size)
                for i, s in enumerate(stack):
                    try:
                        vals[i] = _batched_norms(np.linalg.inv(s)[None], p)[0]
                    except np.linalg.LinAlgError:
                        vals[i] = math.inf
        vals[~np.isfinite(vals)] = math.inf
        out[start:start + block.size] = vals
    return out
