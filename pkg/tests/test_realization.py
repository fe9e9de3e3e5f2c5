import numpy as np
import pytest

from pickrealize.errors import (
    DimensionMismatch,
    PickFalsified,
    ResidualTooLarge,
    ShapeMismatch,
    SingularAtPoint,
    SolverStalled,
)
from pickrealize.exact import QQi, exact_matrix
from pickrealize.forms import BlockStructure, LftRep, SchurRealization, eval_realization
from pickrealize.poly import (
    MatrixPoly,
    RationalMatrixFunction,
    ScalarPoly,
    block_matrix,
    wronskian,
)
from pickrealize.realization import (
    certify,
    darlington_step,
    kernel_decomposition,
    permute_reblock,
    realize_cayley_inner,
    realize_pick,
    schur_to_pencil,
    schur_to_transfer,
    superpose,
    transfer_to_schur,
)
from pickrealize.sos import SOSFactor, sos_factor

from conftest import scalar_fn, upper_points


def z(d, k):
    return ScalarPoly.variable(d, k)


def const_rep(matrix, m, params):
    d = 0
    fn = RationalMatrixFunction(
        MatrixPoly.constant(d, np.asarray(matrix, dtype=complex)),
        ScalarPoly.one(d, exact=False))
    return LftRep(coeff=fn, m=m, params=params)


class TestDarlingtonStep:
    def test_sum_case_two_with_padding(self):
        # h = z0 + z1, extracting z0: reciprocal case, bordered to 3x3
        h = scalar_fn(z(2, 0) + z(2, 1), ScalarPoly.one(2))
        W = wronskian(h.denominator, h.numerator, 0)
        phi = sos_factor(W)
        g, step = darlington_step(h, 0, phi)
        assert step.params == ((None, 1), (0, 1))
        expected = block_matrix([
            [MatrixPoly.from_scalar(z(2, 1)), MatrixPoly.identity(2, 1), MatrixPoly.zero(2, 1, 1)],
            [MatrixPoly.identity(2, 1), MatrixPoly.zero(2, 1, 1), MatrixPoly.identity(2, 1)],
            [MatrixPoly.zero(2, 1, 1), MatrixPoly.identity(2, 1), MatrixPoly.zero(2, 1, 1)]])
        assert (g.numerator - expected.to_float()).max_abs_coeff() < 1e-12
        for pt in upper_points(2, 50, seed=1):
            assert step.eval(pt)[0, 0] == pytest.approx(h.eval(pt)[0, 0])

    def test_reciprocal_case_one(self):
        # h = -1/z0: direct extraction without padding
        h = scalar_fn(-ScalarPoly.one(1), z(1, 0))
        phi = sos_factor(wronskian(h.denominator, h.numerator, 0))
        g, step = darlington_step(h, 0, phi)
        assert step.params == ((0, 1),)
        assert np.array_equal(g.numerator.eval([0.0]), np.array([[0, 1], [1, 0]]))
        for pt in upper_points(1, 50, seed=2):
            assert step.eval(pt)[0, 0] == pytest.approx(h.eval(pt)[0, 0])

    def test_absent_variable(self):
        h = scalar_fn(z(2, 1), ScalarPoly.one(2))
        phi = sos_factor(wronskian(h.denominator, h.numerator, 0))
        assert phi.rank == 0
        g, step = darlington_step(h, 0, phi)
        assert step.params == ()
        assert g.numerator == h.numerator

    def test_rejects_bad_factor(self):
        h = scalar_fn(z(1, 0), ScalarPoly.one(1))
        wrong = SOSFactor(MatrixPoly.constant(1, np.array([[2.0 + 0j]])), 0.0, 1)
        with pytest.raises(ResidualTooLarge):
            darlington_step(h, 0, wrong)

    def test_reconstruction_across_pipeline_steps(self):
        # every step of a two-variable run reproduces its input function
        h = scalar_fn(z(2, 0) * z(2, 1) - ScalarPoly.one(2), z(2, 0) + z(2, 1))
        for var in range(2):
            phi = sos_factor(wronskian(h.denominator, h.numerator, var))
            _, step = darlington_step(h, var, phi)
            for pt in upper_points(2, 50, seed=3 + var):
                assert step.eval(pt)[0, 0] == pytest.approx(h.eval(pt)[0, 0])


class TestSuperpose:
    def test_scalar_chain(self):
        # nested transforms of the tridiagonal 3x3 realize -z2/(z1 z2 - 1)
        a = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex)
        inner = LftRep(
            coeff=RationalMatrixFunction(MatrixPoly.constant(2, a),
                                         ScalarPoly.one(2, exact=False)),
            m=2, params=((1, 1),))
        z2_poly = MatrixPoly(2, 1, 1, {(0, 1): np.array([[1.0 + 0j]])}, exact=False)
        outer = LftRep(
            coeff=RationalMatrixFunction(
                block_matrix([[MatrixPoly.zero(2, 1, 1, exact=False), z2_poly],
                              [z2_poly,
                               MatrixPoly.constant(2, np.array([[-1.0 + 0j]]))]]),
                ScalarPoly(2, {(0, 1): 1.0 + 0j}, exact=False)),
            m=1, params=((0, 1),))
        flat = superpose(outer, inner)
        assert flat.params == ((0, 1), (1, 1))
        for pt in upper_points(2, 50, seed=4):
            z1, z2 = pt
            expected = -z2 / (z1 * z2 - 1)
            nested = outer.eval(pt)[0, 0]
            assert nested == pytest.approx(expected)
            assert flat.eval(pt)[0, 0] == pytest.approx(expected)

    def test_empty_inner_parameters(self):
        outer = const_rep(np.array([[1, 2], [3, 4]]), 1, ((0, 1),))
        inner = const_rep(np.array([[1, 2], [3, 4]]), 2, ())
        flat = superpose(outer, inner)
        assert flat.params == outer.params
        assert flat.m == 1

    def test_both_empty_is_plain_block_value(self):
        M = np.array([[5.0]])
        outer = const_rep(M, 1, ())
        inner = const_rep(M, 1, ())
        flat = superpose(outer, inner)
        assert flat.eval([])[0, 0] == pytest.approx(5.0)

    def test_dimension_mismatch(self):
        outer = const_rep(np.array([[1, 2], [3, 4]]), 1, ((0, 1),))
        inner = const_rep(np.array([[1.0]]), 1, ())
        with pytest.raises(DimensionMismatch):
            superpose(outer, inner)


class TestPermuteReblock:
    def test_reorders_and_merges(self):
        H = np.arange(16, dtype=complex).reshape(4, 4)
        rep = const_rep(H, 1, ((1, 1), (None, 1), (0, 1)))
        out = permute_reblock(rep)
        assert out.params == ((None, 1), (0, 1), (1, 1))
        perm = [0, 2, 3, 1]  # m, constant, var0, var1 in old coordinates
        expected = H[np.ix_(perm, perm)]
        assert np.array_equal(out.coeff.numerator.constant_value(), expected)

    def test_identity_when_canonical(self):
        H = np.arange(9, dtype=complex).reshape(3, 3)
        rep = const_rep(H, 1, ((None, 1), (0, 1)))
        out = permute_reblock(rep)
        assert np.array_equal(out.coeff.numerator.constant_value(), H)

    def test_evaluation_preserved(self):
        rng = np.random.default_rng(12)
        X = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        rep = const_rep(X, 1, ((1, 1), (0, 2), (None, 1)))
        out = permute_reblock(rep)
        for pt in upper_points(2, 30, seed=5):
            assert out.eval(pt)[0, 0] == pytest.approx(rep.eval(pt)[0, 0])


class TestRealizeCayleyInner:
    def test_variable_regression_matrix(self):
        f = scalar_fn(z(1, 0), ScalarPoly.one(1))
        r = realize_cayley_inner(f)
        assert np.array_equal(r.H, np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]],
                                            dtype=complex))
        assert r.structure.n0 == 1
        assert r.structure.blocks == (1,)
        assert r.hermitian

    def test_constant_hermitian(self):
        C = exact_matrix([[2, QQi(0, 1)], [QQi(0, -1), 3]])
        f = RationalMatrixFunction(MatrixPoly.constant(2, C), ScalarPoly.one(2))
        r = realize_cayley_inner(f)
        assert r.structure.n == 0
        assert np.allclose(r.H, np.array([[2, 1j], [-1j, 3]]))

    def test_reciprocal_sum(self):
        f = scalar_fn(-ScalarPoly.one(2), z(2, 0) + z(2, 1))
        r = realize_cayley_inner(f)
        assert r.hermitian
        count = 0
        for pt in upper_points(2, 120, seed=6):
            try:
                expected = f.eval(pt)[0, 0]
            except Exception:
                continue
            count += 1
            assert r.eval(pt)[0, 0] == pytest.approx(expected)
        assert count >= 100

    def test_non_member_stalls(self):
        f = scalar_fn(z(2, 0) * z(2, 1), ScalarPoly.one(2))
        with pytest.raises(SolverStalled):
            realize_cayley_inner(f, max_iters=400)


class TestRealizePick:
    def test_constant_i(self):
        f = scalar_fn(ScalarPoly.constant(1, QQi(0, 1)), ScalarPoly.one(1))
        r = realize_pick(f)
        value = r.eval([0.37 + 0.21j])
        assert value[0, 0] == pytest.approx(1j)
        skew = (r.H - r.H.conj().T) / 2j
        assert np.min(np.linalg.eigvalsh(skew)) >= -1e-12

    def test_hermitian_route(self):
        f = scalar_fn(z(1, 0), ScalarPoly.one(1))
        r = realize_pick(f)
        assert r.hermitian

    def test_falsified(self):
        f = scalar_fn(-z(1, 0), ScalarPoly.one(1))
        with pytest.raises(PickFalsified) as info:
            realize_pick(f)
        assert info.value.witness is not None

    def test_matrix_example(self, corpus):
        f = corpus["diag_z1_z2"]
        r = realize_pick(f)
        for pt in upper_points(2, 40, seed=7):
            assert np.allclose(r.eval(pt), f.eval(pt))


class TestConversions:
    @pytest.fixture(scope="class")
    def realized(self, corpus):
        return {name: realize_pick(f) for name, f in corpus.items()}

    def test_transfer_preserves_evaluation(self, corpus, realized):
        for name, f in corpus.items():
            t = schur_to_transfer(realized[name])
            for pt in upper_points(f.d, 50, seed=8):
                try:
                    expected = f.eval(pt)
                except Exception:
                    continue
                assert np.allclose(t.eval(pt), expected, atol=1e-9 * (1 + abs(expected).max()))

    def test_reciprocal_regression(self):
        # transfer form of -1/z1 built from the minimal resolvent realization
        f = scalar_fn(-ScalarPoly.one(1), z(1, 0))
        r = realize_pick(f)
        assert r.structure.n0 == 0
        t = schur_to_transfer(r)
        assert t.structure.n0 == 1
        for pt in upper_points(1, 50, seed=9):
            assert t.eval(pt)[0, 0] == pytest.approx(-1.0 / pt[0])

    def test_constant_conversion_is_noop(self):
        H = np.array([[3.0]])
        r = SchurRealization(H, 1, BlockStructure(0, ()), hermitian=True)
        t = schur_to_transfer(r)
        assert np.array_equal(t.H, H)
        assert t.structure.n == 0

    def test_round_trip(self, corpus, realized):
        for name, f in corpus.items():
            s2 = transfer_to_schur(schur_to_transfer(realized[name]))
            for pt in upper_points(f.d, 30, seed=10):
                try:
                    expected = f.eval(pt)
                except Exception:
                    continue
                assert np.allclose(s2.eval(pt), expected, atol=1e-9 * (1 + abs(expected).max()))

    def test_pencil(self, corpus, realized):
        for name, f in corpus.items():
            p = schur_to_pencil(realized[name])
            for i, A in enumerate(p.coeffs):
                assert np.array_equal(A @ A, A)
                assert np.array_equal(A, A.conj().T)
                for j, Aj in enumerate(p.coeffs):
                    if i != j:
                        assert not np.any(A @ Aj)
            for pt in upper_points(f.d, 30, seed=11):
                try:
                    expected = f.eval(pt)
                except Exception:
                    continue
                assert np.allclose(p.eval(pt), expected, atol=1e-9 * (1 + abs(expected).max()))

    def test_pencil_regression_for_variable(self):
        f = scalar_fn(z(1, 0), ScalarPoly.one(1))
        p = schur_to_pencil(realize_pick(f))
        assert np.array_equal(p.H, np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]],
                                            dtype=complex))
        assert np.array_equal(p.coeffs[0], np.diag([0.0, 0.0, 1.0]))
        # hand Schur complement: M22 = [[0,1],[1,z]] has inverse [[-z,1],[1,0]]
        assert p.eval([2.5j])[0, 0] == pytest.approx(2.5j)

    def test_constant_pencil_has_zero_coefficients(self):
        H = np.array([[3.0]])
        r = SchurRealization(H, 1, BlockStructure(0, ()), hermitian=True)
        p = schur_to_pencil(r)
        assert p.coeffs == ()
        assert p.eval([])[0, 0] == pytest.approx(3.0)


class TestEvalRealization:
    def test_forms(self, z_one):
        r = realize_pick(z_one)
        assert eval_realization(r, [1j])[0, 0] == pytest.approx(1j)

    def test_constant(self):
        r = SchurRealization(np.array([[7.0]]), 1, BlockStructure(0, ()), hermitian=True)
        assert eval_realization(r, [])[0, 0] == pytest.approx(7.0)

    def test_singular_point(self):
        f = scalar_fn(-ScalarPoly.one(1), z(1, 0))
        r = realize_pick(f)
        with pytest.raises(SingularAtPoint):
            r.eval([0.0])


class TestKernelDecomposition:
    def test_diagonal_identity(self, corpus):
        for name, f in corpus.items():
            p = schur_to_pencil(realize_pick(f))
            for pt in upper_points(f.d, 10, seed=12):
                try:
                    out = kernel_decomposition(p, pt, pt)
                except SingularAtPoint:
                    continue
                assert out["residual"] <= 1e-8

    def test_hermitian_theta0_vanishes(self, z_one):
        p = schur_to_pencil(realize_pick(z_one))
        out = kernel_decomposition(p, [1j], [1j])
        assert np.max(np.abs(out["theta_z"][0])) <= 1e-12

    def test_variable_at_i(self, z_one):
        p = schur_to_pencil(realize_pick(z_one))
        out = kernel_decomposition(p, [1j], [1j])
        assert out["assembled"][0, 0] == pytest.approx(1.0)


class TestCertify:
    def test_pipeline_outputs_pass(self, corpus):
        for name, f in corpus.items():
            r = realize_pick(f)
            report = certify(r, f, n_points=100, seed=13)
            assert report.ok, (name, report.checks)

    def test_corrupted_matrix_fails(self, z_one):
        r = realize_pick(z_one)
        H = r.H.copy()
        H[0, 1] += 1e-2
        bad = SchurRealization(H, r.m, r.structure, hermitian=False)
        report = certify(bad, z_one, n_points=50, seed=14)
        assert not report.checks[0]["passed"]

    def test_constant_passes(self):
        C = exact_matrix([[4]])
        f = RationalMatrixFunction(MatrixPoly.constant(1, C), ScalarPoly.one(1))
        r = realize_pick(f)
        report = certify(r, f, n_points=20, seed=15)
        assert report.ok
