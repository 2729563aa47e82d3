"""Regularisations of ``t -> ||T_t||`` and resolvent-based lower bounds.

Given samples of a semigroup norm this module builds the running supremum
``L(t)`` and the log-concave envelope ``N(t)``, their Legendre-type transform
``M(omega)``, and lower bounds on ``N`` that only need the scaled resolvent
profile ``c(a) = a sup_b ||R_{a+ib}||``. It also computes the classical
growth constants of a matrix generator (spectral and pseudospectral
abscissas, logarithmic norm, Kreiss constant).

All bounds assume the normalisation ``omega_0 = 0`` unless stated otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import DomainError, EmptyProfileError, HypothesisError, InvalidInputError
from .linop import (
    MatrixOperator,
    parse_norm_index,
    op_norm,
    resolvent_norm,
    resolvent_norms,
)

__all__ = [
    "NormCurve",
    "EnvelopeCurve",
    "LegendreProfile",
    "ResolventProfile",
    "GrowthConstants",
    "HatBound",
    "KreissResult",
    "running_sup",
    "concave_envelope",
    "legendre",
    "legendre_invert",
    "lower_bound_single",
    "tw_lower_bound",
    "dyadic_grid",
    "c_profile",
    "lower_bound_curve",
    "hat_c_bound",
    "hat_c_curve",
    "log_norm",
    "spectral_abscissa",
    "kreiss_constant",
    "pseudo_abscissa",
    "growth_constants",
]

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
KREISS_DIVERGENCE = 1e8


@dataclass(frozen=True)
class NormCurve:
    """Samples ``values[i] = ||T_{times[i]}||`` on a strictly increasing grid."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float).ravel()
        v = np.asarray(self.values, dtype=float).ravel()
        if t.size == 0 or t.shape != v.shape:
            raise InvalidInputError("times and values must be nonempty and equal length")
        if np.any(np.diff(t) <= 0):
            raise InvalidInputError("times must be strictly increasing")
        if t[0] < 0:
            raise InvalidInputError("times must be non-negative")
        if np.any(~np.isfinite(v)) or np.any(v <= 0):
            raise InvalidInputError("norm values must be finite and positive")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, fn, times) -> "NormCurve":
        times = np.asarray(times, dtype=float)
        return cls(times, np.array([fn(t) for t in times]))


@dataclass(frozen=True)
class EnvelopeCurve:
    """``L`` or ``N`` evaluated on the sample times of ``base``.

    For ``kind == "N"``, ``knots`` holds the indices of the hull vertices and
    :meth:`evaluate` interpolates linearly in log space between them.
    """

    base: NormCurve
    kind: str
    values: np.ndarray
    knots: Optional[np.ndarray] = None
    normalized: bool = True

    def evaluate(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        times = self.base.times
        if np.any(t < times[0] - 1e-12) or np.any(t > times[-1] + 1e-12):
            raise DomainError("envelope is only defined on the sampled window")
        if self.kind == "L":
            idx = np.searchsorted(times, t, side="right") - 1
            return self.values[np.clip(idx, 0, times.size - 1)]
        kt = times[self.knots]
        return np.exp(np.interp(t, kt, np.log(self.values[self.knots])))


def running_sup(curve: NormCurve) -> EnvelopeCurve:
    """``L(t_i) = max_{j <= i} ||T_{t_j}||``."""
    return EnvelopeCurve(curve, "L", np.maximum.accumulate(curve.values))


def _upper_hull(x, y):
    hull = []
    for i in range(x.size):
        while len(hull) >= 2:
            i0, i1 = hull[-2], hull[-1]
            # drop i1 if it lies on or below the chord i0 -> i
            cross = (x[i1] - x[i0]) * (y[i] - y[i0]) - (y[i1] - y[i0]) * (x[i] - x[i0])
            if cross >= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return np.array(hull, dtype=int)


def concave_envelope(curve: NormCurve, normalized: bool = True) -> EnvelopeCurve:
    """Smallest log-concave majorant of the samples on ``[0, t_max]``.

    With ``normalized=True`` (the ``omega_0 <= 0`` setting) the norm is known
    to stay ``>= 1`` beyond the window, which forces the envelope to be
    non-decreasing: past the sample maximum it is constant. With
    ``normalized=False`` the plain upper hull of ``(t_i, log v_i)`` is
    returned.
    """
    t = curve.times
    logv = np.log(curve.values)
    if normalized:
        peak = int(np.argmax(logv))
        knots = _upper_hull(t[: peak + 1], logv[: peak + 1])
        logn = np.full(t.size, logv[peak])
        logn[: peak + 1] = np.interp(t[: peak + 1], t[knots], logv[knots])
        if peak < t.size - 1:
            knots = np.append(knots, t.size - 1)
    else:
        knots = _upper_hull(t, logv)
        logn = np.interp(t, t[knots], logv[knots])
    vals = np.exp(logn)
    vals = np.maximum(vals, curve.values)
    return EnvelopeCurve(curve, "N", vals, knots=knots, normalized=normalized)


@dataclass(frozen=True)
class LegendreProfile:
    omegas: np.ndarray
    M_values: np.ndarray


def legendre(curve: NormCurve, omega_grid) -> LegendreProfile:
    """``M(omega) = max_i ||T_{t_i}|| exp(-omega t_i)`` for each ``omega``."""
    w = np.asarray(omega_grid, dtype=float).ravel()
    if np.any(w <= 0):
        raise DomainError("omega grid must be positive")
    logm = (np.log(curve.values)[None, :] - np.outer(w, curve.times)).max(axis=1)
    return LegendreProfile(w, np.exp(logm))


def legendre_invert(profile: LegendreProfile, t) -> float:
    """``inf_omega M(omega) exp(omega t)`` over the profile's grid."""
    t = float(t)
    if t < 0:
        raise DomainError("t must be non-negative")
    return float(np.exp((np.log(profile.M_values) + profile.omegas * t).min()))


def lower_bound_single(a: float, c: float, t: float) -> float:
    """``min(exp(r t), c)`` with ``r = a (1 - 1/c)``.

    Lower bound on ``N(t)`` from one resolvent value ``c = a ||R_{a+ib}||``.
    """
    if a <= 0:
        raise DomainError("a must be positive")
    if c < 1:
        raise DomainError(f"bound needs c >= 1, got c={c}")
    if t < 0:
        raise DomainError("t must be non-negative")
    r = a * (1.0 - 1.0 / c)
    return float(math.exp(min(r * t, math.log(c))))


def tw_lower_bound(a: float, c: float, t: float) -> float:
    """``e^{at} / (1 + (e^{at} - 1)/c)``, the running-sup bound of Trefethen and Wright."""
    if a <= 0 or c < 1 or t < 0:
        raise DomainError("need a > 0, c >= 1, t >= 0")
    q = math.exp(-a * t)
    return float(1.0 / (q + (1.0 - q) / c))


def dyadic_grid(m_lo: int = -8, m_hi: int = 20) -> np.ndarray:
    """``a = 2^{-m}`` for ``m = m_lo .. m_hi`` (decreasing in ``a``)."""
    return 2.0 ** -np.arange(m_lo, m_hi + 1, dtype=float)


@dataclass(frozen=True)
class ResolventProfile:
    a_grid: np.ndarray
    c_values: np.ndarray
    positivity_preserving: bool = False

    def __post_init__(self):
        a = np.asarray(self.a_grid, dtype=float).ravel()
        c = np.asarray(self.c_values, dtype=float).ravel()
        if a.shape != c.shape:
            raise InvalidInputError("a_grid and c_values differ in length")
        if np.any(a <= 0) or np.any(c < 0):
            raise InvalidInputError("need a > 0 and c >= 0")
        object.__setattr__(self, "a_grid", a)
        object.__setattr__(self, "c_values", c)

    def sorted(self) -> "ResolventProfile":
        order = np.argsort(self.a_grid)
        return ResolventProfile(self.a_grid[order], self.c_values[order],
                                self.positivity_preserving)

    def decreasing_branch(self) -> "ResolventProfile":
        """Entries of the largest-``a`` run on which ``c`` strictly decreases and exceeds 1.

        Walks down from the largest ``a`` while ``c`` keeps increasing.
        """
        s = self.sorted()
        a, c = s.a_grid, s.c_values
        keep = []
        for i in range(a.size - 1, -1, -1):
            if c[i] <= 1:
                if keep:
                    break
                continue
            if keep and c[i] <= c[keep[-1]]:
                break
            keep.append(i)
        keep = keep[::-1]
        return ResolventProfile(a[keep], c[keep], self.positivity_preserving)


def _golden_max(f, lo, hi, rtol=1e-6, max_iter=200):
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    best = max(f1, f2)
    for _ in range(max_iter):
        if abs(hi - lo) <= rtol * max(abs(lo), abs(hi), 1e-300):
            break
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = f(x2)
        best = max(best, f1, f2)
    return best


def _vertical_sup(A: MatrixOperator, a: float, p: float, rtol=1e-6) -> float:
    pos = np.logspace(-3, 3, 121)
    b = np.concatenate([-pos[::-1], [0.0], pos])
    vals = np.array([resolvent_norm(A, complex(a, bi), p) for bi in b])
    k = int(np.argmax(vals))
    lo = b[max(k - 1, 0)]
    hi = b[min(k + 1, b.size - 1)]
    refined = _golden_max(lambda y: resolvent_norm(A, complex(a, y), p), lo, hi, rtol)
    return max(float(vals[k]), refined)


def c_profile(model, a_grid=None, b_search: str = "auto") -> ResolventProfile:
    """Scaled resolvent profile ``c(a) = a sup_b ||R_{a+ib}||``.

    ``model`` is a catalog model (anything with ``generator`` and
    ``positivity_preserving`` attributes) or a bare :class:`MatrixOperator`.
    For positivity-preserving semigroups the supremum over ``b`` sits at
    ``b = 0``, so with ``b_search="auto"`` only the real shift is evaluated;
    ``b_search="grid"`` forces the vertical-line search.
    """
    if isinstance(model, MatrixOperator):
        A, positive = model, False
    else:
        A, positive = model.generator, bool(model.positivity_preserving)
    if A is None:
        raise DomainError("c_profile needs a generator")
    if a_grid is None:
        a_grid = dyadic_grid()
    a_grid = np.asarray(a_grid, dtype=float).ravel()
    if np.any(a_grid <= 0):
        raise DomainError("a grid must be positive")
    if b_search not in ("auto", "real", "grid"):
        raise DomainError(f"unknown b_search {b_search!r}")
    real_only = b_search == "real" or (b_search == "auto" and positive)
    p = A.norm_index
    c = np.empty(a_grid.size)
    for i, a in enumerate(a_grid):
        if real_only:
            c[i] = a * resolvent_norm(A, a, p)
        else:
            c[i] = a * _vertical_sup(A, a, p)
    return ResolventProfile(a_grid, c, positive)


def lower_bound_curve(profile: ResolventProfile, t_grid) -> np.ndarray:
    """``sup_a min(exp(r(a) t), c(a))`` over grid points with ``c(a) >= 1``."""
    keep = profile.c_values >= 1.0
    if not np.any(keep):
        raise EmptyProfileError("no grid point has c(a) >= 1")
    a = profile.a_grid[keep]
    c = profile.c_values[keep]
    r = a * (1.0 - 1.0 / c)
    t = np.asarray(t_grid, dtype=float)
    logb = np.minimum(np.multiply.outer(t, r), np.log(c))
    return np.exp(logb.max(axis=-1))


@dataclass(frozen=True)
class HatBound:
    value: float
    in_range: bool


def _hat_nodes(profile: ResolventProfile):
    s = profile.sorted()
    a, c = s.a_grid, s.c_values
    if a.size == 0:
        raise EmptyProfileError("empty resolvent profile")
    if np.any(c <= 1) or np.any(np.diff(c) >= 0):
        raise HypothesisError(
            "c(a) must be strictly decreasing in a with all values > 1; "
            "use lower_bound_curve instead")
    tc = np.log(c) / (a * (1.0 - 1.0 / c))
    # tc increases as a decreases; reverse so abscissae ascend
    return tc[::-1], np.log(c[::-1])


def hat_c_curve(profile: ResolventProfile, t_grid):
    """Vectorised :func:`hat_c_bound`; returns ``(values, in_range_mask)``."""
    tc, logc = _hat_nodes(profile)
    t = np.asarray(t_grid, dtype=float)
    vals = np.exp(np.interp(t, tc, logc))
    mask = (t >= tc[0] * (1 - 1e-12)) & (t <= tc[-1] * (1 + 1e-12))
    return vals, mask


def hat_c_bound(profile: ResolventProfile, t: float) -> HatBound:
    """Inverse of ``t(c) = log(c) / (a(c) (1 - 1/c))`` evaluated at ``t``.

    Each node ``(t(c), c)`` lies under the log-concave envelope, so linear
    interpolation of ``log c`` in ``t`` between nodes is still a lower bound.
    Outside the node range the nearest boundary value is returned with
    ``in_range=False``; no extrapolation.
    """
    vals, mask = hat_c_curve(profile, np.array([t], dtype=float))
    return HatBound(float(vals[0]), bool(mask[0]))


def log_norm(A: MatrixOperator, p=None) -> float:
    """Logarithmic norm: the smallest ``rho`` with ``||e^{At}||_p <= e^{rho t}``."""
    if p is None:
        p = A.norm_index
    p = parse_norm_index(p)
    a = A.to_dense()
    if p == 2:
        herm = (a + a.conj().T) / 2.0
        return float(np.linalg.eigvalsh(herm)[-1])
    if p == math.inf:
        a = a.T
    mag = np.abs(a)
    off = mag.sum(axis=0) - np.abs(np.diag(a))
    return float((np.real(np.diag(a)) + off).max())


def spectral_abscissa(A: MatrixOperator) -> float:
    if A.is_symtridiag:
        from .linop import symtri_eig
        return float(symtri_eig(A).eigenvalues[-1])
    return float(np.linalg.eigvals(A.to_dense()).real.max())


@dataclass(frozen=True)
class KreissResult:
    value: float
    diverged: bool
    argmax: complex


def kreiss_constant(A: MatrixOperator, p=None, grid=None) -> KreissResult:
    """``sup_{Re z > 0} Re(z) ||R_z||_p`` with a divergence flag.

    ``grid = (r_min, r_max, n_r, n_theta)`` sets the log-polar sampling of
    the right half-plane. Vertical rays ``x + i Im(lambda)`` towards every
    eigenvalue are sampled too, so defective eigenvalues on the imaginary
    axis are detected. If the running supremum exceeds ``1e8`` the constant
    is reported as divergent (``value = inf``); otherwise the best grid
    point is refined with Nelder-Mead in ``(log r, theta)``.
    """
    if p is None:
        p = A.norm_index
    p = parse_norm_index(p)
    eig = np.linalg.eigvals(A.to_dense())
    if eig.real.max() > 1e-12:
        raise DomainError("Kreiss constant needs spectral abscissa <= 0")
    r_min, r_max, n_r, n_theta = grid or (1e-10, 1e6, 161, 61)
    r = np.logspace(np.log10(r_min), np.log10(r_max), int(n_r))
    theta = np.linspace(-np.pi / 2, np.pi / 2, int(n_theta) + 2)[1:-1]
    polar = np.outer(r, np.exp(1j * theta)).ravel()
    rays = (r[:, None] + 1j * np.unique(eig.imag)[None, :]).ravel()
    zs = np.concatenate([polar, rays])
    vals = zs.real * resolvent_norms(A, zs, p)
    k = int(np.argmax(vals))
    if not np.isfinite(vals[k]) or vals[k] > KREISS_DIVERGENCE:
        return KreissResult(math.inf, True, complex(zs[k]))

    def neg(x):
        z = math.exp(x[0]) * complex(math.cos(x[1]), math.sin(x[1]))
        if abs(x[1]) >= np.pi / 2:
            return 0.0
        v = z.real * resolvent_norms(A, [z], p)[0]
        return -v if np.isfinite(v) else -KREISS_DIVERGENCE * 10

    z0 = zs[k]
    res = minimize(neg, [math.log(abs(z0)), math.atan2(z0.imag, z0.real)],
                   method="Nelder-Mead",
                   options={"xatol": 1e-9, "fatol": 1e-12, "maxiter": 4000})
    best, arg = float(vals[k]), complex(z0)
    if -res.fun > best:
        best = float(-res.fun)
        arg = math.exp(res.x[0]) * complex(math.cos(res.x[1]), math.sin(res.x[1]))
    if best > KREISS_DIVERGENCE:
        return KreissResult(math.inf, True, arg)
    return KreissResult(best, False, arg)


def pseudo_abscissa(A: MatrixOperator, eps: float, p=None, grid=None) -> float:
    """``sup{Re z : ||R_z||_p >= 1/eps}``.

    Horizontal lines ``Im z = y`` (the eigenvalue imaginary parts plus a
    uniform set) are scanned on an ``x`` grid; the rightmost crossing on
    each line is bisected to ``1e-6``. ``grid = (n_y, n_x)``. Returns
    ``-inf`` if no grid point lies in the level set.
    """
    if eps <= 0:
        raise DomainError("eps must be positive")
    if p is None:
        p = A.norm_index
    p = parse_norm_index(p)
    n_y, n_x = grid or (201, 401)
    eig = np.linalg.eigvals(A.to_dense())
    radius = op_norm(A, p) + eps
    x_lo = float(eig.real.min())
    x_hi = radius * (1 + 1e-9) + 1e-12
    ys = np.unique(np.concatenate([eig.imag, np.linspace(-radius, radius, int(n_y))]))
    xs = np.linspace(x_lo, x_hi, int(n_x))
    level = 1.0 / eps
    best = -math.inf
    for y in ys:
        vals = resolvent_norms(A, xs + 1j * y, p)
        inside = np.nonzero(vals >= level)[0]
        if inside.size == 0:
            continue
        k = inside[-1]
        if k == xs.size - 1:
            best = max(best, xs[k])
            continue
        lo, hi = xs[k], xs[k + 1]
        while hi - lo > 1e-7:
            mid = 0.5 * (lo + hi)
            if resolvent_norms(A, [mid + 1j * y], p)[0] >= level:
                lo = mid
            else:
                hi = mid
        best = max(best, lo)
    return float(best)


@dataclass
class GrowthConstants:
    """Growth constants of a matrix generator.

    ``exact`` marks which entries are exact rather than grid estimates. The
    secondary bound of regularised families (``omega_1``) is not computed.
    """

    s: Optional[float] = None
    s_eps: Dict[float, float] = field(default_factory=dict)
    s0: Optional[float] = None
    omega0: Optional[float] = None
    rho: Optional[float] = None
    exact: Dict[str, bool] = field(default_factory=dict)

    def chain_ok(self, tol: float = 1e-12) -> bool:
        chain = [v for v in (self.s, self.s0, self.omega0, self.rho) if v is not None]
        return all(b >= a - tol for a, b in zip(chain, chain[1:]))


def growth_constants(A: MatrixOperator, p=None, eps: Sequence[float] = ()) -> GrowthConstants:
    """Constants for a matrix generator.

    In finite dimensions ``s0 = omega0 = s``; ``rho`` comes from
    :func:`log_norm`.
    """
    s = spectral_abscissa(A)
    gc = GrowthConstants(s=s, s0=s, omega0=s, rho=log_norm(A, p),
                         exact={"s": True, "s0": True, "omega0": True, "rho": True})
    for e in eps:
        gc.s_eps[float(e)] = pseudo_abscissa(A, e, p)
        gc.exact["s_eps"] = False
    return gc
