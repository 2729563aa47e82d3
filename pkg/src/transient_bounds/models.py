"""Catalog of exactly soluble semigroups.

Each :class:`SemigroupModel` carries a matrix generator, a closed-form norm
``t -> ||T_t||``, a closed-form resolvent profile ``a -> c(a)``, or some
combination, together with whatever growth constants are known exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq

from .errors import DomainError, PrecisionError
from .linop import MatrixOperator, expm, op_norm, parse_norm_index

__all__ = [
    "SemigroupModel",
    "DriftPotentialSpec",
    "QuadratureSpec",
    "QuarticReport",
    "MODEL_IDS",
    "drift_norm",
    "drift_model",
    "jordan2_model",
    "jordan_n_model",
    "notso_model",
    "quartic_model",
    "quartic_kernel",
    "quartic_kernel_constant",
    "quartic_kernel_report",
    "get_model",
]

MODEL_IDS = ("drift-oscill", "drift-subpoly", "jordan2", "jordan-n", "notso",
             "quartic", "schrodinger")


@dataclass(frozen=True)
class SemigroupModel:
    id: str
    norm_index: float
    generator: Optional[MatrixOperator] = None
    exact_norm: Optional[Callable[[float], float]] = None
    exact_c: Optional[Callable[[float], float]] = None
    known_constants: Dict[str, float] = field(default_factory=dict)
    positivity_preserving: bool = False
    params: Dict[str, object] = field(default_factory=dict)
    description: str = ""
    log_concave: Optional[bool] = None

    def __post_init__(self):
        if self.generator is None and self.exact_norm is None:
            raise DomainError("a model needs a generator or an exact norm")
        object.__setattr__(self, "norm_index", parse_norm_index(self.norm_index))

    def norm(self, t: float) -> float:
        """``||T_t||``: the closed form when known, else ``||expm(A, t)||_p``."""
        if self.exact_norm is not None:
            return float(self.exact_norm(t))
        return self.generator_norm(t)

    def generator_norm(self, t: float) -> float:
        if self.generator is None:
            raise DomainError(f"model {self.id} has no generator")
        return op_norm(expm(self.generator, t), self.norm_index)


@dataclass(frozen=True)
class DriftPotentialSpec:
    """Weight ``a(x)`` of the drift semigroup ``T_t f(x) = a(x+t)/a(x) f(x+t)``.

    ``kind="oscillating"``: ``a(x) = 1 + (c-1) sin^2(pi x / 2b)``, ``c > 1``, ``b > 0``.
    ``kind="subpolynomial"``: ``a(x) = exp(c x^{1-gamma})``, ``c > 0``, ``0 < gamma < 1``.
    """

    kind: str
    c: float
    b: float = 1.0
    gamma: float = 0.5

    def __post_init__(self):
        if self.kind == "oscillating":
            if not (self.c > 1 and self.b > 0):
                raise DomainError("oscillating drift needs c > 1 and b > 0")
        elif self.kind == "subpolynomial":
            if not (self.c > 0 and 0 < self.gamma < 1):
                raise DomainError("subpolynomial drift needs c > 0 and 0 < gamma < 1")
        else:
            raise DomainError(f"unknown drift kind {self.kind!r}")

    def weight(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "oscillating":
            return 1.0 + (self.c - 1.0) * np.sin(np.pi * x / (2.0 * self.b)) ** 2
        return np.exp(self.c * x ** (1.0 - self.gamma))


def drift_norm(spec: DriftPotentialSpec, t: float) -> float:
    """``sup_x a(x+t)/a(x)``.

    The oscillating weight has period ``2b``, so the supremum is taken over
    one period on a 10^4-point grid and then refined three times around the
    best point.
    """
    t = float(t)
    if t < 0:
        raise DomainError("t must be non-negative")
    if t == 0:
        return 1.0
    if spec.kind == "subpolynomial":
        return float(math.exp(spec.c * t ** (1.0 - spec.gamma)))

    def ratio(x):
        return spec.weight(x + t) / spec.weight(x)

    period = 2.0 * spec.b
    x = np.linspace(0.0, period, 10_001)
    vals = ratio(x)
    k = int(np.argmax(vals))
    best, xbest, h = float(vals[k]), float(x[k]), x[1] - x[0]
    for _ in range(3):
        x = np.linspace(xbest - 2 * h, xbest + 2 * h, 401)
        vals = ratio(x)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best, xbest = float(vals[k]), float(x[k])
        h = x[1] - x[0]
    return best


def drift_model(spec: DriftPotentialSpec) -> SemigroupModel:
    kind = "drift-oscill" if spec.kind == "oscillating" else "drift-subpoly"
    params = {"c": spec.c}
    if spec.kind == "oscillating":
        params["b"] = spec.b
    else:
        params["gamma"] = spec.gamma
    return SemigroupModel(
        id=kind, norm_index=2, exact_norm=lambda t: drift_norm(spec, t),
        positivity_preserving=True, params=params,
        log_concave=spec.kind == "subpolynomial",
        description="drift semigroup on L^2(0, inf), exact norm only",
    )


def _jordan2_norm(t):
    return t / 2.0 + math.sqrt(1.0 + t * t / 4.0)


def _jordan2_c(a):
    return 1.0 / (2.0 * a) + math.sqrt(1.0 + 1.0 / (4.0 * a * a))


def jordan2_model() -> SemigroupModel:
    """The nilpotent 2x2 Jordan block in the Euclidean norm."""
    A = MatrixOperator.dense([[0.0, 1.0], [0.0, 0.0]], p=2)
    return SemigroupModel(
        id="jordan2", norm_index=2, generator=A,
        exact_norm=_jordan2_norm, exact_c=_jordan2_c,
        known_constants={"s": 0.0, "s0": 0.0, "omega0": 0.0, "rho": 0.5},
        positivity_preserving=True, log_concave=True,
        description="2x2 nilpotent Jordan block, l2 norm",
    )


def jordan_n_model(n: int = 4, p=1) -> SemigroupModel:
    """``n x n`` shift matrix (ones on the superdiagonal) in l^1 or l^2.

    In l^1 the norm is the truncated exponential series; in l^2 only the
    logarithmic norm ``cos(pi/(n+1))`` is known in closed form.
    """
    if n < 2:
        raise DomainError("jordan-n needs n >= 2")
    p = parse_norm_index(p)
    if p not in (1.0, 2.0):
        raise DomainError("jordan-n supports p = 1 or 2")
    A = MatrixOperator.dense(np.eye(n, k=1), p=p)
    consts = {"s": 0.0, "s0": 0.0, "omega0": 0.0}
    exact = None
    if p == 1:
        consts["rho"] = 1.0
        fact = [math.factorial(k) for k in range(n)]

        def exact(t):
            return float(sum(t ** k / fact[k] for k in range(n)))
    else:
        consts["rho"] = math.cos(math.pi / (n + 1))
    return SemigroupModel(
        id="jordan-n", norm_index=p, generator=A, exact_norm=exact,
        known_constants=consts, positivity_preserving=True,
        params={"n": n}, log_concave=True if p == 1 else None,
        description=f"{n}x{n} shift matrix, l{int(p)} norm",
    )


def notso_model(gamma: float = 0.5) -> SemigroupModel:
    """Damped 2x2 Jordan block plus a neutral direction (3x3, Euclidean norm).

    For ``0 < gamma < 1/2`` the norm rises above 1 and later drops back, so
    it is not log-concave; for ``gamma >= 1/2`` it is identically 1, since
    ``log(t/2 + sqrt(1 + t^2/4))`` has slope at most 1/2. ``c(a)`` is not
    monotone in ``a`` for small ``gamma``.
    """
    if gamma <= 0:
        raise DomainError("gamma must be positive")
    g = float(gamma)
    A = MatrixOperator.dense([[-g, 1.0, 0.0], [0.0, -g, 0.0], [0.0, 0.0, 0.0]], p=2)

    def norm(t):
        return max(1.0, math.exp(-g * t) * _jordan2_norm(t))

    def c_of_a(a):
        q = a + g
        return max(1.0, a / (2.0 * q * q) + (a / q) * math.sqrt(1.0 + 1.0 / (4.0 * q * q)))

    return SemigroupModel(
        id="notso", norm_index=2, generator=A, exact_norm=norm, exact_c=c_of_a,
        known_constants={"s": 0.0, "s0": 0.0, "omega0": 0.0},
        positivity_preserving=True, params={"gamma": g},
        log_concave=not (0 < g < 0.5),
        description="3x3 damped Jordan block with a neutral direction, l2 norm",
    )


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite Gauss-Legendre set-up for the quartic heat kernel.

    ``xi_panels`` panels of order ``order`` on ``[0, xi_max]`` for the
    Fourier integral; the ``|k|`` integral on ``[0, x_max]`` is split at the
    sign changes of ``k`` and each piece gets ``x_panels`` panels.
    """

    xi_max: float = 12.0
    x_max: float = 40.0
    xi_panels: int = 120
    x_panels: int = 4
    order: int = 20
    scan_step: float = 0.01

    def refined(self) -> "QuadratureSpec":
        return QuadratureSpec(self.xi_max, self.x_max, 2 * self.xi_panels,
                              2 * self.x_panels, self.order, self.scan_step / 2)


def _panels(a, b, m, order):
    x, w = leggauss(order)
    edges = np.linspace(a, b, m + 1)
    half = (edges[1:] - edges[:-1]) / 2.0
    mid = (edges[1:] + edges[:-1]) / 2.0
    return (mid[:, None] + half[:, None] * x).ravel(), (half[:, None] * w).ravel()


def quartic_kernel(x, spec: QuadratureSpec = QuadratureSpec()) -> np.ndarray:
    """``k_1(x) = (1/pi) int_0^inf exp(-xi^4) cos(x xi) d xi``."""
    xi, w = _panels(0.0, spec.xi_max, spec.xi_panels, spec.order)
    weights = w * np.exp(-xi ** 4) / np.pi
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(x.size)
    for start in range(0, x.size, 2048):
        blk = x[start:start + 2048]
        out[start:start + blk.size] = np.cos(np.outer(blk, xi)) @ weights
    return out


@dataclass(frozen=True)
class QuarticReport:
    l1_norm: float
    signed_integral: float
    zeros: np.ndarray
    tail_bound: float


def quartic_kernel_report(spec: QuadratureSpec = QuadratureSpec()) -> QuarticReport:
    """``||k_1||_{L^1(R)}`` and supporting data.

    Sign changes are located on a scan grid where ``|k_1|`` is above
    rounding level and polished with Brent's method; ``|k_1|`` is smooth
    between consecutive zeros, so each piece gets its own Gauss-Legendre
    panels. ``tail_bound`` is ``x_max |k_1(x_max)|``, a rough size of what
    the truncation of the x-range omits.
    """
    def k(u):
        return float(quartic_kernel([u], spec)[0])

    xs = np.arange(0.0, spec.x_max + spec.scan_step / 2, spec.scan_step)
    ks = quartic_kernel(xs, spec)
    floor = 1e-13
    zeros = []
    for i in np.nonzero(np.sign(ks[1:]) != np.sign(ks[:-1]))[0]:
        if max(abs(ks[i]), abs(ks[i + 1])) < floor:
            continue
        zeros.append(brentq(k, xs[i], xs[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps))
    edges = [0.0] + zeros + [spec.x_max]
    total = 0.0
    signed = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        x, w = _panels(lo, hi, spec.x_panels, spec.order)
        piece = float(quartic_kernel(x, spec) @ w)
        total += abs(piece)
        signed += piece
    tail = spec.x_max * abs(k(spec.x_max))
    return QuarticReport(2.0 * total, 2.0 * signed, np.array(zeros), tail)


def quartic_kernel_constant(spec: QuadratureSpec = QuadratureSpec(),
                            check: bool = True) -> float:
    """L^1 norm of the kernel of ``exp(-t d^4/dx^4)`` on the line.

    Independent of ``t`` by scaling, so only ``t = 1`` is computed. With
    ``check=True`` the computation is repeated on :meth:`QuadratureSpec.refined`
    and a ``PrecisionError`` raised if the two differ by more than 1e-4.
    """
    value = quartic_kernel_report(spec).l1_norm
    if check:
        finer = quartic_kernel_report(spec.refined()).l1_norm
        if abs(finer - value) > 1e-4:
            raise PrecisionError(
                f"quadrature not converged: {value:.8f} vs {finer:.8f} after refinement")
    return value


@lru_cache(maxsize=None)
def _quartic_default() -> float:
    return quartic_kernel_constant()


def quartic_model() -> SemigroupModel:
    """Convolution semigroup with symbol ``exp(-|xi|^4 t)`` on L^1(R).

    ``||T_t|| = c_1`` for every ``t > 0``.
    """
    def norm(t):
        return 1.0 if t == 0 else _quartic_default()

    return SemigroupModel(id="quartic", norm_index=1, exact_norm=norm,
                          description="bi-Laplacian heat semigroup on L^1(R)")


def get_model(model_id: str, **params) -> SemigroupModel:
    """Look a model up by id. Unused parameters are ignored."""
    def opt(name, default):
        v = params.get(name)
        return default if v is None else v

    if model_id == "drift-oscill":
        return drift_model(DriftPotentialSpec("oscillating", c=opt("c", 4.0), b=opt("b", 1.0)))
    if model_id == "drift-subpoly":
        return drift_model(DriftPotentialSpec("subpolynomial", c=opt("c", 2.0),
                                              gamma=opt("gamma", 0.5)))
    if model_id == "jordan2":
        return jordan2_model()
    if model_id == "jordan-n":
        return jordan_n_model(int(opt("n", 4)), opt("p", 1))
    if model_id == "notso":
        return notso_model(opt("gamma", 0.5))
    if model_id == "quartic":
        return quartic_model()
    if model_id == "schrodinger":
        from .schrodinger import build_family, schrodinger_model
        return schrodinger_model(build_family(int(opt("n", 300)), int(opt("N_dim", 3))))
    raise DomainError(f"unknown model {model_id!r}; choose from {', '.join(MODEL_IDS)}")
