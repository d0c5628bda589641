import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from ellweight.errors import DomainError, PoleError
from ellweight.numerics import (EllipticParams, bracket, bracket_star, gamma2, gamma3, pochhammer1,
                                pochhammer2, pochhammer3, qpow, theta_p)
from oracles import bracket_series, gamma2_log, poch1_euler, theta_series

coord = st.floats(min_value=-1.5, max_value=1.5, allow_nan=False)
complex_u = st.builds(complex, coord, coord)


class TestParams:
    def test_nomes_and_tau(self, params):
        assert params.p == pytest.approx(0.6 ** 12)
        assert params.p_star == pytest.approx(0.6 ** 10)
        # u -> u + r tau leaves z = q^{2u} invariant
        assert qpow(2 * params.r * params.tau, params) == pytest.approx(1.0)

    def test_invalid(self):
        with pytest.raises(DomainError):
            EllipticParams(q=1.2)
        with pytest.raises(DomainError):
            EllipticParams(r=-1.0)
        with pytest.raises(DomainError):
            EllipticParams(K=0)

    def test_starred_swaps_nome(self, params):
        assert params.starred().p == pytest.approx(params.p_star)


class TestPochhammer:
    def test_trivial_values(self):
        assert pochhammer1(0, 0.3) == 1
        assert pochhammer1(1, 0.3) == 0
        assert pochhammer2(0, 0.3, 0.2) == 1
        assert pochhammer2(1, 0.3, 0.2) == 0
        assert pochhammer3(0, 0.3, 0.2, 0.1) == 1
        assert pochhammer3(1, 0.3, 0.2, 0.1) == 0

    def test_truncation_is_converged(self):
        a = 0.1
        assert abs(pochhammer1(a, a, K=40) / pochhammer1(a, a, K=80) - 1) < 1e-14
        assert abs(pochhammer2(0.3, 0.4, 0.5, K=40) / pochhammer2(0.3, 0.4, 0.5, K=80) - 1) < 1e-12

    @pytest.mark.parametrize("x", [0.3, -0.7 + 0.2j, 1.4j])
    def test_euler_series(self, x):
        a = 0.45 + 0.1j
        assert abs(pochhammer1(x, a, K=80) - poch1_euler(x, a)) < 1e-12

    def test_double_product_factorises(self):
        # (x; a, b) = prod_m (x a^m; b)
        x, a, b = 0.4 - 0.3j, 0.5, 0.3
        direct = np.prod([pochhammer1(x * a ** m, b, K=60) for m in range(60)])
        assert abs(pochhammer2(x, a, b, K=60) / direct - 1) < 1e-13

    def test_bad_base(self):
        with pytest.raises(DomainError):
            pochhammer1(0.5, 1.0)
        with pytest.raises(DomainError):
            pochhammer3(0.5, 0.1, 0.2, 1.1)

    def test_broadcasts(self):
        xs = np.array([0.1, 0.2, 0.3])
        out = pochhammer1(xs, 0.4)
        assert out.shape == (3,)
        assert out[1] == pytest.approx(pochhammer1(0.2, 0.4))


class TestGamma:
    a, b = 0.3, 0.2 + 0.1j

    @pytest.mark.parametrize("x", [0.5, 0.3 + 0.4j, -0.6j])
    def test_log_series(self, x):
        assert abs(gamma2(x, self.a, self.b) / gamma2_log(x, self.a, self.b) - 1) < 1e-12

    @pytest.mark.parametrize("x", [0.5, 0.3 + 0.4j, 2.0 - 1.0j])
    def test_reflection(self, x):
        ab = self.a * self.b
        assert abs(gamma2(x, self.a, self.b) * gamma2(ab / x, self.a, self.b) - 1) < 1e-12

    def test_centre_and_zero(self):
        ab = self.a * self.b
        assert abs(gamma2(cmath.sqrt(ab), self.a, self.b) - 1) < 1e-13
        assert abs(gamma2(ab, self.a, self.b)) < 1e-13

    def test_pole_carries_index(self):
        with pytest.raises(PoleError) as exc:
            gamma2(1 / (self.a * self.b ** 2), self.a, self.b)
        assert exc.value.label == (1, 2)

    def test_gamma3_reflection_and_zero(self):
        p, a, b = 0.1, 0.3, 0.25
        x = 0.4 + 0.2j
        assert abs(gamma3(x, p, a, b) / gamma3(p * a * b / x, p, a, b) - 1) < 1e-13
        assert abs(gamma3(p * a * b, p, a, b)) < 1e-13
        with pytest.raises(DomainError):
            gamma3(0, p, a, b)

    def test_gamma3_difference_equation(self):
        # Gamma(a x; p, a, b) / Gamma(x; p, a, b) = (pb/x; p, b) / (x; p, b)
        p, a, b = 0.1, 0.3, 0.25
        x = 0.4 + 0.2j
        ratio = gamma3(a * x, p, a, b) / gamma3(x, p, a, b)
        expected = pochhammer2(p * b / x, p, b) / pochhammer2(x, p, b)
        assert abs(ratio / expected - 1) < 1e-12


class TestTheta:
    def test_zero_at_one(self):
        assert theta_p(1.0, 0.2) == 0

    def test_domain(self):
        with pytest.raises(DomainError):
            theta_p(0.0, 0.2)

    @given(u=complex_u)
    @settings(max_examples=40, deadline=None)
    def test_series_oracle(self, u):
        z = cmath.exp(u)
        assert abs(theta_p(z, 0.2, K=60) - theta_series(z, 0.2)) < 1e-10 * max(1, abs(theta_series(z, 0.2)))

    @given(u=complex_u)
    @settings(max_examples=40, deadline=None)
    def test_quasi_periods(self, u):
        p, z = 0.15 + 0.05j, cmath.exp(u)
        t = theta_p(z, p)
        assert abs(theta_p(p * z, p) + t / z) <= 1e-12 * abs(t / z) + 1e-14
        assert abs(theta_p(1 / z, p) + t / z) <= 1e-12 * abs(t / z) + 1e-14


class TestBracket:
    def test_odd_and_zero(self, params):
        assert bracket(0.0, params) == 0
        u = 0.3 + 0.2j
        assert abs(bracket(-u, params) + bracket(u, params)) < 1e-14

    @given(u=complex_u)
    @settings(max_examples=40, deadline=None)
    def test_series_oracle(self, u):
        p = EllipticParams()
        ref = bracket_series(u, 0.6, 6.0)
        assert abs(bracket(u, p) - ref) < 1e-11 * max(1.0, abs(ref))

    @given(u=complex_u)
    @settings(max_examples=60, deadline=None)
    def test_quasi_periodicity(self, u):
        P = EllipticParams()
        b = bracket(u, P)
        # next to a zero, 1 - q^{2u} cancels and only absolute accuracy survives
        assume(abs(b) > 1e-6)
        assert abs(bracket(u + P.r, P) + b) <= 1e-12 * abs(b) + 1e-14
        expected = -cmath.exp(-1j * math.pi * P.tau) * cmath.exp(-2j * math.pi * u / P.r) * b
        assert abs(bracket(u + P.r * P.tau, P) - expected) <= 1e-10 * abs(expected) + 1e-14

    def test_star_is_substitution(self, params):
        u = 0.41 - 0.3j
        sub = EllipticParams(q=params.q, r=params.rstar, r_star=params.rstar)
        assert bracket_star(u, params) == pytest.approx(bracket(u, sub), rel=1e-14)
        assert bracket_star(u, params) != pytest.approx(bracket(u, params), rel=1e-3)

    def test_vectorised(self, params):
        us = np.array([0.1, 0.2 + 0.1j, -0.4j])
        out = bracket(us, params)
        assert np.allclose(out, [bracket(x, params) for x in us], rtol=1e-14)
