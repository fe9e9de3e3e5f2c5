import numpy as np
import pytest

from pickrealize.errors import NotHermitianStructure, ShapeMismatch, SolverStalled
from pickrealize.exact import QQi, exact_matrix
from pickrealize.poly import MatrixPoly, ScalarPoly
from pickrealize.sos import (
    GramProblem,
    factor_gram,
    gram_solve,
    hermitian_to_real_embedding,
    multi_affine_basis,
    psd_project,
    recombine_embedded,
    sos_factor,
)


def const_mp(entries, d=0):
    return MatrixPoly.constant(d, exact_matrix(entries))


class TestEmbedding:
    def test_constant_hermitian(self):
        W = const_mp([[2, QQi(0, 1)], [QQi(0, -1), 2]])
        emb = hermitian_to_real_embedding(W)
        expected = np.array([[2, 0, 0, 1],
                             [0, 2, -1, 0],
                             [0, -1, 2, 0],
                             [1, 0, 0, 2]], dtype=complex)
        assert np.array_equal(emb.coefficient(()), expected)

    def test_real_coefficients_give_block_diagonal(self):
        W = MatrixPoly(1, 2, 2, {(1,): exact_matrix([[1, 2], [2, 5]])})
        emb = hermitian_to_real_embedding(W)
        C = emb.coefficient((1,))
        assert np.array_equal(C[:2, 2:], np.zeros((2, 2)))
        assert np.array_equal(C[:2, :2], np.array([[1, 2], [2, 5]]))
        assert np.array_equal(C[2:, 2:], np.array([[1, 2], [2, 5]]))

    def test_scalar_square(self):
        W = MatrixPoly(1, 1, 1, {(2,): exact_matrix([[1]])})
        emb = hermitian_to_real_embedding(W)
        assert np.array_equal(emb.coefficient((2,)), np.eye(2))

    def test_symmetry_identities_exact(self):
        W = MatrixPoly(1, 2, 2, {
            (0,): exact_matrix([[2, QQi(1, 3)], [QQi(1, -3), 5]]),
            (1,): exact_matrix([[1, QQi(0, -2)], [QQi(0, 2), 4]])})
        emb = hermitian_to_real_embedding(W)
        m = 2
        for exp in emb.terms:
            C = emb.coefficient(exp).real
            A = C[:m, :m]
            B = C[:m, m:]
            assert np.array_equal(A, A.T)
            assert np.array_equal(B, -B.T)
            assert np.array_equal(C[m:, m:], A)
            assert np.array_equal(C[m:, :m], B.T)

    def test_non_hermitian_rejected(self):
        W = const_mp([[0, 1], [0, 0]])
        with pytest.raises(NotHermitianStructure):
            hermitian_to_real_embedding(W)


class TestPsdProject:
    def test_clips_negative_eigenvalue(self):
        M = np.diag([1.0, -1.0])
        assert np.allclose(psd_project(M), np.diag([1.0, 0.0]))

    def test_idempotent_on_psd(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(3, 3))
        P = X @ X.T
        assert np.allclose(psd_project(P), P)

    def test_negative_identity(self):
        assert np.allclose(psd_project(-np.eye(3)), np.zeros((3, 3)))


class TestGramSolve:
    def test_constant_one(self):
        prob = GramProblem(basis=[(0,)], target=const_mp([[1]], d=1).to_float())
        G = gram_solve(prob)
        assert np.allclose(G, [[1.0]])

    def test_unique_gram_for_quadratic(self):
        target = MatrixPoly(1, 1, 1, {(0,): np.array([[1.0 + 0j]]),
                                      (2,): np.array([[1.0 + 0j]])}, exact=False)
        prob = GramProblem(basis=[(0,), (1,)], target=target)
        G = gram_solve(prob)
        assert np.allclose(G, np.eye(2), atol=1e-9)

    def test_negative_target_stalls(self):
        prob = GramProblem(basis=[(0,)], target=const_mp([[-1]], d=1).to_float())
        with pytest.raises(SolverStalled):
            gram_solve(prob, max_iters=300)

    def test_basis_must_cover_support(self):
        target = MatrixPoly(1, 1, 1, {(4,): np.array([[1.0 + 0j]])}, exact=False)
        with pytest.raises(ShapeMismatch):
            GramProblem(basis=[(0,), (1,)], target=target)


class TestFactorGram:
    def test_identity_gram(self):
        factor = factor_gram(np.eye(2), [(0,), (1,)], 1)
        x = ScalarPoly.variable(1, 0)
        expected = {(0,): [[1, 0]], (1,): [[0, 1]]}
        for exp, want in expected.items():
            assert np.allclose(factor.phi.coefficient(exp), want)
        assert factor.rank == 2

    def test_zero_gram(self):
        factor = factor_gram(np.zeros((2, 2)), [(0,), (1,)], 1)
        assert factor.rank == 0
        assert factor.phi.cols == 0

    def test_truncation_bound(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(4, 2))
        G = X @ X.T  # rank 2
        factor = factor_gram(G, [(0, 0), (1, 0), (0, 1), (1, 1)], 1)
        assert factor.rank == 2
        assert factor.residual <= 1e-10 * np.linalg.norm(G, 2)

    def test_recombine_embedded_product(self):
        W = const_mp([[2, QQi(0, 1)], [QQi(0, -1), 2]])
        emb = hermitian_to_real_embedding(W)
        G = gram_solve(GramProblem(basis=[()], target=emb))
        phi2m = factor_gram(G, [()], 4).phi
        phi = recombine_embedded(phi2m, 2)
        product = phi * phi.herm_reflect()
        assert np.allclose(product.coefficient(()),
                           np.array([[2, 1j], [-1j, 2]]), atol=1e-9)


class TestSosFactor:
    def test_constant_one(self):
        factor = sos_factor(const_mp([[1]], d=1))
        assert factor.rank == 1
        assert np.array_equal(factor.phi.coefficient((0,)), np.array([[1.0 + 0j]]))

    def test_quadratic_exact_coefficients(self):
        W = MatrixPoly(1, 1, 1, {(0,): exact_matrix([[1]]), (2,): exact_matrix([[1]])})
        factor = sos_factor(W)
        assert factor.rank == 2
        assert np.array_equal(factor.phi.coefficient((0,)), np.array([[1.0, 0.0]]))
        assert np.array_equal(factor.phi.coefficient((1,)), np.array([[0.0, 1.0]]))
        assert factor.residual == 0.0

    def test_pipeline_wronskian_of_reciprocal_sum(self):
        # W for -1/(z1+z2) in either variable is the constant 1
        factor = sos_factor(const_mp([[1]], d=2))
        assert factor.rank == 1
        assert np.array_equal(factor.phi.coefficient((0, 0)), np.array([[1.0 + 0j]]))

    def test_zero_polynomial(self):
        factor = sos_factor(MatrixPoly.zero(2, 3, 3))
        assert factor.rank == 0
        assert factor.residual == 0.0

    def test_reconstruction_property(self):
        # products of random multi-affine factors round-trip within tolerance
        rng = np.random.default_rng(6)
        for _ in range(8):
            m, r = rng.integers(1, 3), rng.integers(1, 3)
            terms = {}
            for exp in [(0, 0), (1, 0), (0, 1)]:
                terms[exp] = rng.normal(size=(m, r)) + 1j * rng.normal(size=(m, r))
            phi = MatrixPoly(2, int(m), int(r), terms, exact=False)
            W = phi * phi.herm_reflect()
            factor = sos_factor(W)
            scale = 1.0 + W.max_abs_coeff()
            gap = (factor.reconstruction() - W).max_abs_coeff()
            assert gap <= 1e-8 * scale

    def test_escalation_beyond_multi_affine(self):
        # (x^2+1)^2 needs the degree-two basis
        W = MatrixPoly(1, 1, 1, {(0,): exact_matrix([[1]]),
                                 (2,): exact_matrix([[2]]),
                                 (4,): exact_matrix([[1]])})
        factor = sos_factor(W)
        gap = (factor.reconstruction() - W.to_float()).max_abs_coeff()
        assert gap <= 1e-8 * (1.0 + W.max_abs_coeff())

    def test_indefinite_stalls(self):
        W = MatrixPoly(1, 1, 1, {(1,): exact_matrix([[1]])})  # odd, sign-changing
        with pytest.raises(SolverStalled):
            sos_factor(W, max_iters=400)

    def test_default_basis_is_multi_affine(self):
        W = MatrixPoly(3, 1, 1, {(0, 2, 0): exact_matrix([[1]]),
                                 (0, 0, 0): exact_matrix([[1]])}).to_float()
        basis = multi_affine_basis(W)
        assert basis == [(0, 0, 0), (0, 1, 0)]
