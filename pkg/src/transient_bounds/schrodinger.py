"""Discretised critical Schrodinger semigroup on l^1.

The family is ``M1 = D M2 D^{-1}`` on ``C^n``: ``M2`` is the symmetric
tridiagonal matrix with off-diagonal ``-1`` and diagonal ``2 - v_r``, where

    s_r = (1 + 1/r)^{1/2},   v_1 = 2 - s_1,   v_r = 2 - 1/s_{r-1} - s_r,

and ``D = diag(r^{(N-1)/2})``. ``M2`` is non-negative (discrete Hardy
inequality) so ``exp(-M2 t)`` is an l^2 contraction, yet ``||exp(-M1 t)||_1``
grows like ``t^{(N-2)/4}`` over a long transient.

The same ``v_r`` serves every spatial dimension ``N``: at the critical
coupling ``(N-2)^2/4`` the effective radial potential is
``(N-1)(N-3)/(4r^2) - (N-2)^2/(4r^2) = -1/(4r^2)`` independently of ``N``;
only ``D`` changes. The continuum resonance exponents
``alpha_+- = (N-2)/2`` coincide at criticality (``beta = 1``); the
discrete zero-energy resonance of ``M1`` with ``N = 3`` is ``g_r = r^{1/2}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import minimize_scalar

from ._parallel import pmap
from .errors import DomainError, MultiplicityError
from .growth import ResolventProfile
from .linop import EigenDecomposition, MatrixOperator, symtri_eig

__all__ = [
    "SchrodingerFamily",
    "ProjectionReport",
    "NormMax",
    "FitResult",
    "MonotonicityReport",
    "ContractionReport",
    "Crossing",
    "build_family",
    "schrodinger_model",
    "m1_exp_matrix",
    "m1_exp_norm",
    "m1_exp_norms",
    "m1_norm_max",
    "m1_c_of_a",
    "m1_c_profile",
    "projection_report",
    "growth_fit",
    "kernel_monotonicity_check",
    "contraction_check_v0",
    "unit_crossing_time",
    "hardy_form",
]


@dataclass(frozen=True)
class SchrodingerFamily:
    n: int
    N_dim: int
    s_seq: np.ndarray
    v_seq: np.ndarray
    M2: MatrixOperator
    D: np.ndarray
    c_crit: float
    potential: str = "critical"
    eig: EigenDecomposition = field(repr=False, default=None)

    @property
    def M1(self) -> np.ndarray:
        return self.D[:, None] * self.M2.to_dense() / self.D[None, :]

    @property
    def generator(self) -> MatrixOperator:
        """``-M1`` as a dense operator in the l^1 norm."""
        return MatrixOperator.dense(-self.M1, p=1)


def build_family(n: int, N_dim: int = 3, potential: str = "critical") -> SchrodingerFamily:
    """Construct ``M2``, ``D`` and the eigendecomposition of ``M2``.

    ``potential="zero"`` replaces every ``v_r`` by 0; that variant generates
    an l^1 contraction semigroup.
    """
    if n < 2:
        raise DomainError("need n >= 2")
    if N_dim < 3:
        raise DomainError("need N_dim >= 3")
    if potential not in ("critical", "zero"):
        raise DomainError(f"unknown potential {potential!r}")
    r = np.arange(1, n + 1, dtype=float)
    s = np.sqrt(1.0 + 1.0 / r)
    v = np.empty(n)
    v[0] = 2.0 - s[0]
    v[1:] = 2.0 - 1.0 / s[:-1] - s[1:]
    if potential == "zero":
        v = np.zeros(n)
    M2 = MatrixOperator.symtridiag(2.0 - v, -np.ones(n - 1), p=2)
    D = r ** ((N_dim - 1) / 2.0)
    for a in (s, v, D):
        a.setflags(write=False)
    return SchrodingerFamily(n=n, N_dim=N_dim, s_seq=s, v_seq=v, M2=M2, D=D,
                             c_crit=(N_dim - 2) ** 2 / 4.0, potential=potential,
                             eig=symtri_eig(M2))


def schrodinger_model(fam: SchrodingerFamily):
    from .models import SemigroupModel
    lam = fam.eig.eigenvalues
    return SemigroupModel(
        id="schrodinger", norm_index=1, generator=fam.generator,
        exact_norm=lambda t: m1_exp_norm(fam, t),
        known_constants={"s": -float(lam[0]), "s0": -float(lam[0]),
                         "omega0": -float(lam[0])},
        positivity_preserving=True,
        params={"n": fam.n, "N_dim": fam.N_dim},
        description="discrete critical Schrodinger generator -M1 on l1",
    )


def m1_exp_matrix(fam: SchrodingerFamily, t: float) -> np.ndarray:
    """``exp(-M1 t) = D Q exp(-Lambda t) Q^T D^{-1}``."""
    if t < 0:
        raise DomainError("t must be non-negative")
    if t == 0:
        return np.eye(fam.n)
    q = fam.eig.eigenvectors
    left = (fam.D[:, None] * q) * np.exp(-fam.eig.eigenvalues * t)
    return left @ (q.T / fam.D[None, :])


def m1_exp_norm(fam: SchrodingerFamily, t: float) -> float:
    """``||exp(-M1 t)||_1`` (largest column sum; entries are non-negative)."""
    if t == 0:
        return 1.0
    return float(np.abs(m1_exp_matrix(fam, t)).sum(axis=0).max())


def m1_exp_norms(fam: SchrodingerFamily, times: Sequence[float]) -> np.ndarray:
    return np.array(pmap(lambda t: m1_exp_norm(fam, t), times))


@dataclass(frozen=True)
class NormMax:
    t_star: float
    max_norm: float
    at_boundary: bool


def m1_norm_max(fam: SchrodingerFamily, t_lo: float = 1.0, t_hi: float = 1e6,
                count: int = 400) -> NormMax:
    """Maximise ``||exp(-M1 t)||_1`` over ``t``.

    Log-grid scan followed by bounded Brent refinement in ``log t`` on the
    bracketing triple.
    """
    ts = np.logspace(math.log10(t_lo), math.log10(t_hi), count)
    vals = m1_exp_norms(fam, ts)
    k = int(np.argmax(vals))
    if k in (0, ts.size - 1):
        return NormMax(float(ts[k]), float(vals[k]), True)
    res = minimize_scalar(lambda u: -m1_exp_norm(fam, math.exp(u)),
                          bounds=(math.log(ts[k - 1]), math.log(ts[k + 1])),
                          method="bounded", options={"xatol": 1e-8})
    if -res.fun >= vals[k]:
        return NormMax(float(math.exp(res.x)), float(-res.fun), False)
    return NormMax(float(ts[k]), float(vals[k]), False)


def m1_c_of_a(fam: SchrodingerFamily, a: float) -> float:
    """``c(a) = a ||(aI + M1)^{-1}||_1``.

    ``(aI + M1)^{-1} = D (aI + M2)^{-1} D^{-1}``; the middle factor comes
    from ``n`` tridiagonal solves.
    """
    if a <= 0:
        raise DomainError("a must be positive")
    n = fam.n
    ab = np.zeros((3, n))
    ab[0, 1:] = fam.M2.offdiag
    ab[1] = fam.M2.diag + a
    ab[2, :-1] = fam.M2.offdiag
    inv = solve_banded((1, 1), ab, np.eye(n), check_finite=False)
    res = fam.D[:, None] * inv / fam.D[None, :]
    return float(a * np.abs(res).sum(axis=0).max())


def m1_c_profile(fam: SchrodingerFamily, a_grid) -> ResolventProfile:
    a_grid = np.asarray(a_grid, dtype=float)
    return ResolventProfile(a_grid, np.array(pmap(lambda a: m1_c_of_a(fam, a), a_grid)),
                            positivity_preserving=True)


@dataclass(frozen=True)
class ProjectionReport:
    n: int
    lambda_min: float
    proj_norm: float
    ratio: float


def projection_report(fam: SchrodingerFamily) -> ProjectionReport:
    """Smallest eigenvalue and the l^1 norm of its spectral projection for ``M1``.

    ``||P|| = ||D f||_1 ||D^{-1} f||_inf / <f, f>`` for the ``M2``
    eigenvector ``f``.
    """
    lam = fam.eig.eigenvalues
    gap = lam[1] - lam[0]
    if gap <= 1e-14 * max(abs(lam[-1]), 1.0):
        raise MultiplicityError(f"smallest eigenvalue is not simple (gap {gap:.3g})")
    f = fam.eig.eigenvectors[:, 0]
    pn = np.abs(fam.D * f).sum() * np.abs(f / fam.D).max() / (f @ f)
    return ProjectionReport(fam.n, float(lam[0]), float(pn), float(pn / math.sqrt(fam.n)))


@dataclass(frozen=True)
class FitResult:
    k_low: float
    k_high: float
    stable: bool
    times: np.ndarray = field(repr=False)
    k_values: np.ndarray = field(repr=False)


def growth_fit(fam: SchrodingerFamily, window: Tuple[float, float],
               exponent: Optional[float] = None, count: int = 50,
               stable_spread: float = 0.05) -> FitResult:
    """Bracket ``||exp(-M1 t)||_1`` between ``(k_low t)^e`` and ``(k_high t)^e``.

    ``e`` defaults to ``(N-2)/4``. ``stable`` is False when the relative
    spread of ``k(t) = norm^{1/e} / t`` over the window exceeds
    ``stable_spread``, i.e. when the norm is not behaving like a power law
    with that exponent.
    """
    if exponent is None:
        exponent = (fam.N_dim - 2) / 4.0
    if exponent <= 0:
        raise DomainError("exponent must be positive")
    t_lo, t_hi = window
    if t_lo < 1 or t_hi <= t_lo:
        raise DomainError("window must satisfy 1 <= t_lo < t_hi")
    ts = np.logspace(math.log10(t_lo), math.log10(t_hi), count)
    k = m1_exp_norms(fam, ts) ** (1.0 / exponent) / ts
    lo, hi = float(k.min()), float(k.max())
    stable = (hi - lo) <= stable_spread * 0.5 * (hi + lo)
    return FitResult(lo, hi, bool(stable), ts, k)


@dataclass
class MonotonicityReport:
    ok: bool
    min_entry: float
    violations: List[tuple] = field(default_factory=list)


def kernel_monotonicity_check(n_list: Sequence[int], t: float, N_dim: int = 3,
                              tol: float = 1e-10, positivity_tol: float = 1e-12
                              ) -> MonotonicityReport:
    """Entrywise ``exp(-M_{1,n} t) <= exp(-M_{1,n'} t)`` for consecutive ``n < n'``.

    Also checks that every entry is non-negative (to ``positivity_tol``).
    Violations are recorded as ``(n, n', i, j, excess)`` or
    ``("negative", n, i, j, value)``.
    """
    n_list = list(n_list)
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise DomainError("n_list must be strictly ascending")
    mats = [m1_exp_matrix(build_family(n, N_dim), t) for n in n_list]
    report = MonotonicityReport(ok=True, min_entry=min(float(m.min()) for m in mats))
    for n, m in zip(n_list, mats):
        for i, j in zip(*np.nonzero(m < -positivity_tol)):
            report.violations.append(("negative", n, int(i), int(j), float(m[i, j])))
    for (n, m), (n2, m2) in zip(zip(n_list, mats), zip(n_list[1:], mats[1:])):
        excess = m - m2[:n, :n]
        for i, j in zip(*np.nonzero(excess > tol)):
            report.violations.append((n, n2, int(i), int(j), float(excess[i, j])))
    report.ok = not report.violations
    return report


@dataclass
class ContractionReport:
    ok: bool
    min_column_sum: float
    norms: np.ndarray


def contraction_check_v0(n: int, t_grid: Sequence[float], N_dim: int = 3) -> ContractionReport:
    """With ``v = 0`` the columns of ``M1`` sum to ``>= 0`` and ``exp(-M1 t)`` contracts l^1."""
    fam = build_family(n, N_dim, potential="zero")
    colsum = float(fam.M1.sum(axis=0).min())
    norms = m1_exp_norms(fam, list(t_grid))
    ok = colsum >= -1e-12 and bool(np.all(norms <= 1.0 + 1e-9))
    return ContractionReport(ok, colsum, norms)


@dataclass(frozen=True)
class Crossing:
    t: float
    found: bool


def unit_crossing_time(fam: SchrodingerFamily, t_max: float = 1e8,
                       rtol: float = 1e-6) -> Crossing:
    """Largest ``t`` with ``||exp(-M1 t)||_1 = 1``.

    Returns ``t = 0`` when the norm never exceeds 1 on the scan, and
    ``found=False`` when it still exceeds 1 at ``t_max``.
    """
    if fam.eig.eigenvalues[0] <= 0:
        raise DomainError("need all eigenvalues positive")
    ts = np.logspace(-3, math.log10(t_max), 601)
    above = m1_exp_norms(fam, ts) > 1.0 + 1e-12
    if not np.any(above):
        return Crossing(0.0, True)
    k = int(np.nonzero(above)[0][-1])
    if k == ts.size - 1:
        return Crossing(float(t_max), False)
    lo, hi = ts[k], ts[k + 1]
    while hi - lo > rtol * hi:
        mid = math.sqrt(lo * hi)
        if m1_exp_norm(fam, mid) > 1.0:
            lo = mid
        else:
            hi = mid
    return Crossing(float(0.5 * (lo + hi)), True)


def hardy_form(fam: SchrodingerFamily, a) -> float:
    """Sum-of-squares form of ``<M2 a, a>``:

    ``sum_{r=2}^n |s_{r-1}^{1/2} a_{r-1} - s_{r-1}^{-1/2} a_r|^2 + |s_n^{1/2} a_n|^2``.
    """
    a = np.asarray(a)
    s = fam.s_seq
    diffs = np.sqrt(s[:-1]) * a[:-1] - a[1:] / np.sqrt(s[:-1])
    return float(np.sum(np.abs(diffs) ** 2) + s[-1] * abs(a[-1]) ** 2)
