import itertools

import numpy as np
import pytest

from ellweight.errors import PoleError
from ellweight.numerics import bracket
from ellweight.partitions import LambdaShape, dyn_shift_direct, enumerate_shape, from_word
from ellweight.properties import zI_point
from ellweight.rmatrix import DynamicalParams, mu_plus
from ellweight.weights import (Convention, VariableAssignment, WTilde, compile_u, h_lambda, omega,
                               sym_permutations, symmetrize, triangular_diagonal, u_term, w_entire,
                               w_tilde)
from oracles import example3_u

PI3 = DynamicalParams((0.31 + 0.12j, -0.2j, 0.15 - 0.05j))
PI2 = DynamicalParams((0.37 + 0.21j, -0.15 + 0.1j))


def to_unshifted(x: VariableAssignment, N: int) -> VariableAssignment:
    """Every row v^(l), the z-row included, moved by l/2."""
    return VariableAssignment(x.u + N / 2, [row + (l + 1) / 2 for l, row in enumerate(x.v)])


class TestUTerm:
    def test_empty_product(self, params):
        x = VariableAssignment([0.3 + 0.1j], [[]])
        assert u_term(from_word((2,), 2), x, PI2, params=params) == 1

    def test_single_factor(self, params):
        v, u = 0.12 - 0.3j, 0.41 + 0.07j
        x = VariableAssignment([u], [[v]])
        s = PI2.s(1, 2)
        expected = bracket(u - v + s, params) * bracket(1, params) / bracket(s, params)
        assert u_term(from_word((1,), 2), x, PI2, params=params) == pytest.approx(expected, rel=1e-13)

    def test_four_point_display(self, params, rng):
        I = from_word("2132", 3)
        s = {(j, k): PI3.s(j, k) for j in range(1, 4) for k in range(1, 4)}
        C = {(1, 2, 2): -1, (2, 3, 1): 0, (1, 3, 2): -1, (2, 3, 4): 0}
        for (j, k, row), value in C.items():
            assert dyn_shift_direct(I, row, k - 1) == value
        for _ in range(3):
            x = VariableAssignment.random(I.shape, rng, 0.4)
            ref = example3_u(x.v[0], x.v[1], x.u, s, C, params)
            got = u_term(I, x, PI3, Convention.UNSHIFTED, params)
            assert got == pytest.approx(ref, rel=1e-11)

    def test_dynamical_pole(self, params):
        with pytest.raises(PoleError):
            compile_u(from_word((1,), 2), DynamicalParams((0.0, 0.0)), params=params)


class TestSymmetrisation:
    def test_term_count(self):
        assert len(sym_permutations(LambdaShape((2, 1, 1)))) == 2 * 6
        assert len(sym_permutations(LambdaShape((1, 0)))) == 1

    def test_identity_for_thin_rows(self, params, rng):
        I = from_word("12")
        x = VariableAssignment.random(I.shape, rng, 0.4)
        f = lambda y: u_term(I, y, PI2, params=params)
        assert symmetrize(f, I.shape)(x) == pytest.approx(f(x), rel=1e-14)

    def test_generic_helper_matches_compiled(self, params, rng):
        I = from_word("2132", 3)
        x = VariableAssignment.random(I.shape, rng, 0.4)
        f = lambda y: u_term(I, y, PI3, params=params)
        assert symmetrize(f, I.shape)(x) == pytest.approx(w_entire(I, x, PI3, params=params), rel=1e-12)

    @pytest.mark.parametrize("word,N", [("2132", 3), ("1122", 2), ("2311", 3)])
    def test_row_swap_invariance(self, params, rng, word, N):
        I = from_word(word, N)
        x = VariableAssignment.random(I.shape, rng, 0.4)
        base_w = w_entire(I, x, PI3 if N == 3 else PI2, params=params)
        base_t = w_tilde(I, x, PI3 if N == 3 else PI2, params=params)
        for l, row in enumerate(x.v):
            if len(row) < 2:
                continue
            v = [r.copy() for r in x.v]
            v[l][[0, 1]] = v[l][[1, 0]]
            y = VariableAssignment(x.u, v)
            Pi = PI3 if N == 3 else PI2
            assert w_entire(I, y, Pi, params=params) == pytest.approx(base_w, rel=1e-12)
            assert w_tilde(I, y, Pi, params=params) == pytest.approx(base_t, rel=1e-12)


class TestConventions:
    @pytest.mark.parametrize("word,N", [("2132", 3), ("21", 2), ("12312", 3)])
    def test_bridge(self, params, rng, word, N):
        I = from_word(word, N)
        Pi = PI3 if N == 3 else PI2
        x = VariableAssignment.random(I.shape, rng, 0.4)
        y = to_unshifted(x, N)
        assert w_entire(I, y, Pi, Convention.UNSHIFTED, params) == pytest.approx(
            w_entire(I, x, Pi, Convention.SHIFTED, params), rel=1e-12)
        assert h_lambda(I.shape, y, Convention.UNSHIFTED, params) == pytest.approx(
            h_lambda(I.shape, x, Convention.SHIFTED, params), rel=1e-12)

    def test_bridge_needs_z_row(self, params, rng):
        # moving only the integration rows is not enough
        I = from_word("2132", 3)
        x = VariableAssignment.random(I.shape, rng, 0.4)
        y = VariableAssignment(x.u, [row + (l + 1) / 2 for l, row in enumerate(x.v)])
        a = w_entire(I, y, PI3, Convention.UNSHIFTED, params)
        b = w_entire(I, x, PI3, Convention.SHIFTED, params)
        assert abs(a / b - 1) > 1e-3


class TestSpecialisation:
    @pytest.mark.parametrize("lam", [(1, 1), (2, 1), (1, 1, 1), (2, 1, 1)])
    def test_diagonal_closed_form(self, params, lam):
        shape = LambdaShape(lam)
        Pi = DynamicalParams(tuple(0.3 * k + 0.21j * k * k for k in range(shape.N)))
        u = 0.31 * np.arange(1, shape.n + 1) + 0.17j * np.arange(1, shape.n + 1)
        for I in enumerate_shape(shape):
            got = w_tilde(I, zI_point(I, u), Pi, params=params)
            assert got == pytest.approx(triangular_diagonal(I, u, params), rel=1e-10)

    def test_off_order_zero(self, params):
        I, J = from_word("21"), from_word("12")
        u = np.array([0.31 + 0.17j, 0.62 + 0.34j])
        assert abs(w_tilde(J, zI_point(I, u), PI2, params=params)) < 1e-12

    def test_single_colour_is_one(self, params):
        I = from_word((1, 1, 1), 3)
        u = np.array([0.3, 0.5 + 0.1j, -0.2j])
        assert triangular_diagonal(I, u, params) == 1
        assert w_tilde(I, zI_point(I, u), PI3, params=params) == pytest.approx(1.0, rel=1e-12)

    def test_h_zero_raises(self, params):
        I = from_word((1,), 2)
        with pytest.raises(PoleError):
            WTilde(I, PI2, params=params)(np.array([0.2, -0.8]))


class TestOmega:
    def test_single_point(self, params, rng):
        I = from_word((1,), 2)
        x = VariableAssignment.random(I.shape, rng, 0.4)
        assert omega(I, x, PI2, params) == pytest.approx(
            w_tilde(I, x, PI2, Convention.UNSHIFTED, params), rel=1e-14)

    def test_ratio_free_of_t(self, params, rng):
        I = from_word("2132", 3)
        x = VariableAssignment.random(I.shape, rng, 0.4)
        y = VariableAssignment(x.u, [r + 0.1 - 0.2j for r in x.v])
        ratio = lambda z: omega(I, z, PI3, params) / w_tilde(I, z, PI3, Convention.UNSHIFTED, params)
        assert ratio(x) == pytest.approx(ratio(y), rel=1e-12)
        assert ratio(x) == pytest.approx(mu_plus(x.u, 3, params), rel=1e-12)

    def test_batched_evaluation(self, params, rng):
        I = from_word("1212", 2)
        Wt = WTilde(I, PI2, params=params)
        X = np.stack([VariableAssignment.random(I.shape, rng, 0.4).flat() for _ in range(4)])
        assert np.allclose(Wt(X), [Wt(row) for row in X], rtol=1e-13)
