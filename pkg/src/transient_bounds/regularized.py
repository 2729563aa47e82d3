"""The regularised family ``T~_t = h e^{At} R_a`` and spectral mapping for matrices.

``h = 1/||R_a||`` makes ``||T~_0|| = 1``. Its resolvent is
``R~_z = h R_z R_a = h (R_z - R_a)/(a - z)``.

For ``f(t) = sum_r alpha_r e^{-beta_r t}`` the operator
``X_f = int_0^inf f(t) e^{At} dt = sum_r alpha_r R_{beta_r}`` has spectrum
``{f^(lambda) : lambda in Spec(A)}`` with ``f^(z) = sum_r alpha_r/(beta_r - z)``.
For a matrix the extra point ``0`` of the unbounded-generator statement does
not occur.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DomainError, NearSpectrumError
from .linop import MatrixOperator, expm, op_norm, parse_norm_index, resolvent

__all__ = [
    "RegularizedFamily",
    "ExponentialMixture",
    "regularized_family",
    "regularized_norm",
    "short_time_bound",
    "regularized_resolvent",
    "spectral_mapping_check",
    "regularized_spectrum_check",
    "SpectralMatch",
]


@dataclass(frozen=True)
class RegularizedFamily:
    A: MatrixOperator
    a: float
    h: float
    norm_index: float
    R_a: np.ndarray


def regularized_family(A: MatrixOperator, a: float, p=None) -> RegularizedFamily:
    p = parse_norm_index(A.norm_index if p is None else p)
    a = float(a)
    eig = np.linalg.eigvals(A.to_dense())
    if a <= eig.real.max():
        raise DomainError("shift a must exceed the spectral abscissa")
    if np.min(np.abs(eig - a)) < 1e-10:
        raise NearSpectrumError(f"a={a} is within 1e-10 of the spectrum", z=a,
                                condition=math.inf)
    R_a = resolvent(A, a)
    return RegularizedFamily(A, a, 1.0 / op_norm(R_a, p), p, R_a)


def regularized_norm(fam: RegularizedFamily, t: float) -> float:
    """``||h e^{At} R_a||_p``."""
    if t < 0:
        raise DomainError("t must be non-negative")
    if t == 0:
        return 1.0
    return fam.h * op_norm(expm(fam.A, t) @ fam.R_a, fam.norm_index)


def short_time_bound(fam: RegularizedFamily, t: float, L_t: float) -> float:
    """``1 + t L(t) (a + 1/||R_a||)``, an upper bound on ``||T~_t||``.

    ``L_t`` is the running supremum of ``||e^{As}||`` over ``s in [0, t]``.
    """
    return 1.0 + t * L_t * (fam.a + fam.h)


@dataclass(frozen=True)
class RegularizedResolvent:
    matrix: np.ndarray
    norm: float
    mismatch: float


def regularized_resolvent(fam: RegularizedFamily, z: complex) -> RegularizedResolvent:
    """``h R_z R_a`` in product and difference form.

    ``mismatch`` is the relative max-entry difference between the two forms;
    at ``z = a`` the difference quotient is replaced by its limit ``h R_a^2``.
    """
    z = complex(z)
    if abs(z - fam.a) == 0:
        m = fam.h * fam.R_a @ fam.R_a
        return RegularizedResolvent(m, op_norm(m, fam.norm_index), 0.0)
    R_z = resolvent(fam.A, z)
    product = fam.h * R_z @ fam.R_a
    difference = fam.h * (R_z - fam.R_a) / (fam.a - z)
    scale = max(np.abs(product).max(), 1e-300)
    mismatch = float(np.abs(product - difference).max() / scale)
    return RegularizedResolvent(product, op_norm(product, fam.norm_index), mismatch)


@dataclass(frozen=True)
class ExponentialMixture:
    """``f(t) = sum_r alpha_r exp(-beta_r t)`` with ``Re beta_r > 0``."""

    terms: Tuple[Tuple[complex, complex], ...]

    def __post_init__(self):
        if not self.terms:
            raise DomainError("mixture needs at least one term")
        for _, beta in self.terms:
            if complex(beta).real <= 0:
                raise DomainError(f"Re(beta) must be positive, got {beta}")

    def transform(self, z):
        """``f^(z) = int_0^inf f(t) e^{zt} dt = sum_r alpha_r / (beta_r - z)``."""
        z = np.asarray(z, dtype=complex)
        return sum(complex(al) / (complex(be) - z) for al, be in self.terms)

    def operator(self, A: MatrixOperator) -> np.ndarray:
        return sum(complex(al) * resolvent(A, complex(be)) for al, be in self.terms)


@dataclass(frozen=True)
class SpectralMatch:
    computed: np.ndarray
    predicted: np.ndarray
    max_mismatch: float
    ok: bool


def _match(computed, predicted, tol):
    cost = np.abs(computed[:, None] - predicted[None, :])
    rows, cols = linear_sum_assignment(cost)
    mism = float(cost[rows, cols].max())
    return SpectralMatch(computed, predicted[cols], mism, mism <= tol)


def spectral_mapping_check(A: MatrixOperator, f: ExponentialMixture,
                           tol: float = 1e-8) -> SpectralMatch:
    """Compare ``Spec(X_f)`` with ``f^(Spec(A))`` as multisets."""
    lam = np.linalg.eigvals(A.to_dense())
    if lam.real.max() > 1e-12:
        raise DomainError("spectral mapping check needs spectral abscissa <= 0")
    computed = np.linalg.eigvals(f.operator(A))
    predicted = np.atleast_1d(f.transform(lam))
    return _match(computed, predicted, tol)


def regularized_spectrum_check(fam: RegularizedFamily, t: float,
                               tol: float = 1e-8) -> SpectralMatch:
    """``Spec(h e^{At} R_a) = {h e^{lambda t} / (a - lambda)}`` for a matrix ``A``."""
    lam = np.linalg.eigvals(fam.A.to_dense())
    computed = np.linalg.eigvals(fam.h * expm(fam.A, t) @ fam.R_a)
    predicted = fam.h * np.exp(lam * t) / (fam.a - lam)
    return _match(computed, predicted, tol)
