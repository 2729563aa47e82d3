import math

import numpy as np
import pytest

from transient_bounds.errors import DomainError
from transient_bounds.growth import c_profile, concave_envelope, dyadic_grid, running_sup, NormCurve
from transient_bounds.models import (
    MODEL_IDS,
    DriftPotentialSpec,
    QuadratureSpec,
    drift_norm,
    get_model,
    jordan2_model,
    jordan_n_model,
    notso_model,
    quartic_kernel,
    quartic_kernel_constant,
    quartic_kernel_report,
)

# L1 norm of k_1 from scipy.integrate.quad (cosine-weighted QAWF for the kernel,
# adaptive quadrature between its zeros on [0, 30])
QUAD_ORACLE_C1 = 1.23729438542


class TestDrift:
    spec = DriftPotentialSpec("oscillating", c=5.0, b=0.7)

    @pytest.mark.parametrize("k", range(5))
    def test_oscillating_even_odd(self, k):
        b = self.spec.b
        assert drift_norm(self.spec, 2 * k * b) == pytest.approx(1.0, abs=1e-9)
        assert drift_norm(self.spec, (2 * k + 1) * b) == pytest.approx(5.0, rel=1e-9)

    def test_period(self):
        ts = np.linspace(0, 1.4, 15)
        here = [drift_norm(self.spec, t) for t in ts]
        later = [drift_norm(self.spec, t + 2 * 1.4) for t in ts]
        assert later == pytest.approx(here, rel=1e-9)

    def test_subpolynomial_closed_form(self):
        spec = DriftPotentialSpec("subpolynomial", c=2.0, gamma=0.3)
        for t in (0.0, 0.5, 3.0, 40.0):
            assert drift_norm(spec, t) == pytest.approx(math.exp(2.0 * t ** 0.7), rel=1e-14)

    @pytest.mark.parametrize("kind", ["oscillating", "subpolynomial"])
    def test_zero_time(self, kind):
        assert drift_norm(DriftPotentialSpec(kind, c=3.0), 0.0) == 1.0

    def test_envelopes_reach_c_after_b(self):
        ts = np.linspace(0, 14 * self.spec.b, 281)
        curve = NormCurve.from_function(lambda t: drift_norm(self.spec, t), ts)
        after = ts >= self.spec.b - 1e-12
        assert running_sup(curve).values[after] == pytest.approx(5.0, rel=1e-9)
        assert concave_envelope(curve).values[after] == pytest.approx(5.0, rel=1e-9)

    @pytest.mark.parametrize("kwargs", [dict(kind="oscillating", c=0.5),
                                        dict(kind="oscillating", c=2.0, b=0.0),
                                        dict(kind="subpolynomial", c=1.0, gamma=1.0),
                                        dict(kind="other", c=2.0)])
    def test_parameter_ranges(self, kwargs):
        with pytest.raises(DomainError):
            DriftPotentialSpec(**kwargs)

    def test_weight_positive(self):
        x = np.linspace(0, 50, 2001)
        assert np.all(self.spec.weight(x) > 0)


class TestJordan:
    def test_norm_values(self):
        m = jordan2_model()
        assert m.exact_norm(0) == 1.0
        assert m.exact_norm(2) == pytest.approx(1 + math.sqrt(2), rel=1e-15)

    @pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
    def test_generator_agrees(self, t):
        m = jordan2_model()
        assert m.generator_norm(t) == pytest.approx(m.exact_norm(t), rel=1e-10)

    def test_jordan_n_l1(self):
        assert jordan_n_model(3, 1).exact_norm(1.0) == pytest.approx(2.5)
        assert jordan_n_model(2, 1).exact_norm(0.0) == 1.0

    def test_jordan_n_l2_rho(self):
        m = jordan_n_model(5, 2)
        assert m.exact_norm is None
        assert m.known_constants["rho"] == pytest.approx(math.sqrt(3) / 2, rel=1e-15)

    @pytest.mark.parametrize("n,p", [(1, 1), (4, 3)])
    def test_jordan_n_bad(self, n, p):
        with pytest.raises(DomainError):
            jordan_n_model(n, p)


class TestNotso:
    def test_limit_and_start(self):
        m = notso_model(0.5)
        assert m.exact_norm(0.0) == 1.0
        assert m.exact_norm(200.0) == 1.0
        small = notso_model(0.05)
        assert small.exact_norm(10.0) > 3.0
        assert small.exact_norm(1000.0) == 1.0

    def test_c_interior_max(self):
        m = notso_model(0.1)
        a = np.logspace(-4, 4, 400)
        c = np.array([m.exact_c(x) for x in a])
        k = int(np.argmax(c))
        assert 0 < k < a.size - 1 and c[k] > c[0] and c[k] > c[-1]

    def test_log_concave_flag(self):
        assert notso_model(0.2).log_concave is False
        assert notso_model(0.7).log_concave is True

    def test_gamma_positive(self):
        with pytest.raises(DomainError):
            notso_model(0.0)


CLOSED_FORM_MODELS = [jordan2_model(), jordan_n_model(3, 1), jordan_n_model(6, 1),
                      notso_model(0.1), notso_model(0.5), notso_model(1.5)]


@pytest.mark.parametrize("model", CLOSED_FORM_MODELS, ids=lambda m: f"{m.id}{m.params}")
def test_generator_matches_exact_norm(model):
    for t in (0.0, 0.1, 1.0, 5.0, 10.0):
        assert model.generator_norm(t) == pytest.approx(model.exact_norm(t), rel=1e-8)


@pytest.mark.parametrize("model", [m for m in CLOSED_FORM_MODELS if m.exact_c],
                         ids=lambda m: f"{m.id}{m.params}")
def test_exact_c_matches_profile(model):
    a = dyadic_grid()
    prof = c_profile(model, a)
    assert prof.c_values == pytest.approx([model.exact_c(x) for x in a], rel=1e-6)


class TestQuartic:
    def test_kernel_at_zero(self):
        # k_1(0) = Gamma(5/4) / pi
        assert np.ravel(quartic_kernel(0.0))[0] == pytest.approx(math.gamma(1.25) / math.pi, rel=1e-13)

    def test_report(self):
        rep = quartic_kernel_report()
        assert rep.signed_integral == pytest.approx(1.0, abs=1e-8)
        assert rep.l1_norm == pytest.approx(QUAD_ORACLE_C1, abs=1e-8)
        assert rep.tail_bound < 1e-8

    def test_refinement_stable(self):
        base = quartic_kernel_constant(check=False)
        fine = quartic_kernel_constant(QuadratureSpec().refined(), check=False)
        assert abs(base - fine) < 1e-5

    def test_model_norm(self):
        m = get_model("quartic")
        assert m.norm(0.0) == 1.0
        assert m.norm(3.0) == pytest.approx(QUAD_ORACLE_C1, abs=1e-8)


class TestRegistry:
    def test_ids(self):
        assert MODEL_IDS == ("drift-oscill", "drift-subpoly", "jordan2", "jordan-n",
                             "notso", "quartic", "schrodinger")

    @pytest.mark.parametrize("mid", MODEL_IDS)
    def test_every_id_builds(self, mid):
        params = {"n": 20} if mid == "schrodinger" else {}
        m = get_model(mid, **params)
        assert m.id == mid
        assert m.generator is not None or m.exact_norm is not None
        assert m.norm(0.0) == pytest.approx(1.0)

    def test_unknown(self):
        with pytest.raises(DomainError):
            get_model("nope")
