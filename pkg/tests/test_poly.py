import numpy as np
import pytest
from fractions import Fraction
from hypothesis import given, settings
from hypothesis import strategies as st

from pickrealize.errors import PoleProximity, ShapeMismatch
from pickrealize.exact import QQi, exact_matrix
from pickrealize.poly import (
    MatrixPoly,
    RationalMatrixFunction,
    ScalarPoly,
    block_matrix,
    coefficient_split,
    wronskian,
)

from conftest import scalar_fn, real_points


def z(d, k):
    return ScalarPoly.variable(d, k)


class TestScalarArithmetic:
    def test_additive_inverse(self):
        assert (z(1, 0) + (-z(1, 0))).is_zero()

    def test_disjoint_supports(self):
        p = ScalarPoly.one(2) + z(2, 0) * z(2, 1)
        assert p.terms[(0, 0)] == QQi(1)
        assert p.terms[(1, 1)] == QQi(1)

    def test_like_terms(self):
        p = z(1, 0) * QQi(2) + z(1, 0) * QQi(3)
        assert p == z(1, 0) * QQi(5)

    def test_product_supports(self):
        assert (z(2, 0) * z(2, 1)).terms[(1, 1)] == QQi(1)
        p = (ScalarPoly.one(1) + z(1, 0)) * (ScalarPoly.one(1) - z(1, 0))
        assert p == ScalarPoly.one(1) - z(1, 0) * z(1, 0)

    def test_matrix_identity_product(self):
        P = MatrixPoly(2, 2, 2, {(1, 0): exact_matrix([[1, 2], [3, 4]])})
        assert MatrixPoly.identity(2, 2) * P == P

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            z(1, 0) + z(2, 0)
        A = MatrixPoly.identity(1, 2)
        B = MatrixPoly.identity(1, 3)
        with pytest.raises(ShapeMismatch):
            A * B

    def test_mixed_mode_demotes_to_float(self):
        p = z(1, 0) + ScalarPoly.constant(1, 0.5 + 0j)
        assert not p.exact
        assert p.eval([2.0]) == pytest.approx(2.5)

    def test_float_zero_drop(self):
        p = ScalarPoly(1, {(1,): 1e-13 + 0j}, exact=False)
        assert p.is_zero()


class TestDerivative:
    def test_power(self):
        assert (z(1, 0) * z(1, 0)).partial_derivative(0) == z(1, 0) * QQi(2)

    def test_other_variable(self):
        assert z(2, 1).partial_derivative(0).is_zero()

    def test_product_rule_shape(self):
        assert (z(2, 0) * z(2, 1)).partial_derivative(0) == z(2, 1)


class TestReflections:
    def test_conj_scalar(self):
        q = z(1, 0) * QQi(0, 1)
        assert q.conj_reflect() == z(1, 0) * QQi(0, -1)
        assert (z(1, 0) + ScalarPoly.one(1)).conj_reflect() == z(1, 0) + ScalarPoly.one(1)
        assert ScalarPoly.constant(1, QQi(2, 1)).conj_reflect() == \
            ScalarPoly.constant(1, QQi(2, -1))

    def test_herm_matrix_fixed_point(self):
        herm = MatrixPoly.constant(1, exact_matrix([[2, QQi(0, 1)], [QQi(0, -1), 3]]))
        assert herm.herm_reflect() == herm

    def test_herm_matrix_examples(self):
        P = MatrixPoly(1, 1, 1, {(1,): exact_matrix([[QQi(0, 1)]])})
        assert P.herm_reflect() == MatrixPoly(1, 1, 1, {(1,): exact_matrix([[QQi(0, -1)]])})
        N = MatrixPoly.constant(1, exact_matrix([[0, 1], [0, 0]]))
        assert N.herm_reflect() == MatrixPoly.constant(1, exact_matrix([[0, 0], [1, 0]]))

    def test_involutions_and_antihomomorphism(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            A = MatrixPoly(2, 2, 2, {
                (1, 0): rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)),
                (0, 1): rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))},
                exact=False)
            B = MatrixPoly(2, 2, 2, {
                (0, 0): rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)),
                (1, 1): rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))},
                exact=False)
            assert A.herm_reflect().herm_reflect() == A
            lhs = (A * B).herm_reflect()
            rhs = B.herm_reflect() * A.herm_reflect()
            assert (lhs - rhs).max_abs_coeff() < 1e-12

    @given(st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2),
                              st.integers(-5, 5), st.integers(-5, 5)),
                    min_size=1, max_size=6))
    def test_conj_reflect_involution(self, spec):
        terms = {}
        for e1, e2, re, im in spec:
            key = (e1, e2)
            terms[key] = terms.get(key, QQi(0)) + QQi(re, im)
        q = ScalarPoly(2, terms)
        assert q.conj_reflect().conj_reflect() == q


class TestEval:
    def test_sum(self):
        assert (z(2, 0) + z(2, 1)).eval([1j, 2j]) == pytest.approx(3j)

    def test_rational(self):
        f = scalar_fn(-ScalarPoly.one(1), z(1, 0))
        assert f.eval([1j])[0, 0] == pytest.approx(1j)

    def test_pole(self):
        f = scalar_fn(ScalarPoly.one(1), z(1, 0))
        with pytest.raises(PoleProximity):
            f.eval([0.0])

    def test_ring_homomorphism(self):
        rng = np.random.default_rng(5)
        a = ScalarPoly(2, {(1, 0): QQi(2, 1), (0, 2): QQi(Fraction(1, 3))})
        b = ScalarPoly(2, {(0, 1): QQi(-1), (1, 1): QQi(0, 2)})
        for _ in range(25):
            pt = rng.normal(size=2) + 1j * rng.normal(size=2)
            lhs = (a * b).eval(pt)
            rhs = a.eval(pt) * b.eval(pt)
            assert abs(lhs - rhs) <= 1e-10 * (1 + abs(rhs))


class TestWronskian:
    def test_constant_denominator(self):
        W = wronskian(ScalarPoly.one(2), MatrixPoly.from_scalar(z(2, 0) + z(2, 1)), 0)
        assert W == MatrixPoly.identity(2, 1)

    def test_hand_expansions(self):
        W = wronskian(z(1, 0), MatrixPoly.constant(1, exact_matrix([[-1]])), 0)
        assert W == MatrixPoly.identity(1, 1)
        W2 = wronskian(ScalarPoly.one(1),
                       MatrixPoly(1, 1, 1, {(1,): exact_matrix([[-1]])}), 0)
        assert W2 == MatrixPoly.constant(1, exact_matrix([[-1]]))

    def test_finite_difference_consistency(self):
        # W_k(x) should equal q(x)^2 times the slice derivative of f at real x
        num = z(2, 0) * z(2, 1) - ScalarPoly.one(2)
        den = z(2, 0) + z(2, 1)
        f = scalar_fn(num, den)
        for k in range(2):
            W = wronskian(den, f.numerator, k)
            for x in real_points(2, 20, seed=k):
                qx = den.eval(x)
                if abs(qx) < 1e-3:
                    continue
                h = 1e-6
                step = np.zeros(2)
                step[k] = h
                dfdz = (f.eval(x + step) - f.eval(x - step))[0, 0] / (2 * h)
                assert abs(W.eval(x)[0, 0] - qx ** 2 * dfdz) <= 1e-6 * (1 + abs(qx) ** 2)

    def test_requires_square(self):
        with pytest.raises(ShapeMismatch):
            wronskian(ScalarPoly.one(1), MatrixPoly.zero(1, 1, 2, exact=False), 0)


class TestDegreesAndStructure:
    def test_multi_affine(self):
        assert scalar_fn(z(2, 0) * z(2, 1), ScalarPoly.one(2)).is_multi_affine()
        assert not scalar_fn(z(1, 0) * z(1, 0), ScalarPoly.one(1)).is_multi_affine()
        assert scalar_fn(ScalarPoly.one(2), z(2, 0) + z(2, 1)).is_multi_affine()

    def test_degrees(self):
        p = z(2, 0) * z(2, 0) * z(2, 1) + z(2, 1)
        assert p.degrees() == (2, 1)

    def test_identify_variables(self):
        zeta = z(2, 0) * z(2, 1)
        assert zeta.identify_variables([[0, 1]]) == z(1, 0) * z(1, 0)
        half = (z(2, 0) + z(2, 1)) * QQi(Fraction(1, 2))
        assert half.identify_variables([[0, 1]]) == z(1, 0)
        p = z(2, 0) + z(2, 1)
        assert p.identify_variables([[0], [1]]) == p

    def test_coefficient_split(self):
        den = z(2, 0) * z(2, 1) + ScalarPoly.one(2)
        q1, q2 = coefficient_split(den, 0)
        assert q1 == z(2, 1)
        assert q2 == ScalarPoly.one(2)
        with pytest.raises(ShapeMismatch):
            coefficient_split(z(1, 0) * z(1, 0), 0)

    def test_substitute(self):
        p = z(2, 0) * z(2, 1) + z(2, 0)
        sub = p.substitute(0, QQi(0, 1))
        assert sub == z(2, 1) * QQi(0, 1) + ScalarPoly.constant(2, QQi(0, 1))


class TestBlockMatrix:
    def test_grid(self):
        top = MatrixPoly.from_scalar(z(1, 0))
        eye = MatrixPoly.identity(1, 1)
        M = block_matrix([[top, eye], [eye, None]])
        assert M.shape == (2, 2)
        val = M.eval([2.0])
        assert val == pytest.approx(np.array([[2, 1], [1, 0]], dtype=complex))

    def test_ragged_raises(self):
        eye = MatrixPoly.identity(1, 2)
        with pytest.raises(ShapeMismatch):
            block_matrix([[eye, None], [None, None]])
