"""Sum-of-squares factorization of Hermitian-structured PSD matrix polynomials.

``W`` with Hermitian coefficient matrices is embedded into a doubled real
symmetric polynomial ``[[A, B], [B^T, A]]`` (A the coefficient real parts,
B the imaginary parts).  A Gram matrix for the embedding is found by
alternating projections between the PSD cone and the affine subspace of
coefficient-matching Gram matrices, then eigen-factored.  Splitting the real
factor into its top/bottom row blocks R1, R2 and recombining as
``(R1 - i*R2)/sqrt(2)`` yields a complex factor with
``W(z) = Phi(z) * Phi(conj(z))^*``; a final column compression removes the
rank doubling the embedding introduces.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import NotHermitianStructure, ShapeMismatch, SolverStalled
from .exact import complex_array, conj_transpose
from .poly import Exponent, MatrixPoly

DEFAULT_MAX_ITERS = 20000
DEFAULT_TOL = 1e-10
RANK_TOL = 1e-10
RESIDUAL_TOL = 1e-8


@dataclass
class GramProblem:
    """Monomial basis plus coefficient-matching constraints for a target.

    The Gram matrix is indexed by (basis monomial, target row) pairs; the
    affine constraints say the blocks along each anti-diagonal
    ``beta + gamma = alpha`` sum to the target coefficient of ``z^alpha``.
    """

    basis: list[Exponent]
    target: MatrixPoly

    def __post_init__(self):
        covered = {tuple(a + b for a, b in zip(e1, e2))
                   for e1, e2 in product(self.basis, repeat=2)}
        missing = [e for e in self.target.terms if e not in covered]
        if missing:
            raise ShapeMismatch(f"basis does not cover target exponents {missing}")

    @property
    def block(self) -> int:
        return self.target.rows

    @property
    def size(self) -> int:
        return len(self.basis) * self.block


@dataclass
class SOSFactor:
    """Factor ``Phi`` with ``Phi(z) Phi(conj(z))^* = W(z)`` up to `residual`."""

    phi: MatrixPoly
    residual: float
    rank: int

    def reconstruction(self) -> MatrixPoly:
        return self.phi * self.phi.herm_reflect()


def check_hermitian_structure(W: MatrixPoly, tol: float = 1e-9) -> None:
    """Every coefficient matrix must be Hermitian (exactly in exact mode)."""
    if W.rows != W.cols:
        raise NotHermitianStructure("matrix polynomial is not square")
    for exp, mat in W.terms.items():
        if W.exact:
            herm = conj_transpose(mat)
            if any(a != b for a, b in zip(mat.flat, herm.flat)):
                raise NotHermitianStructure(f"coefficient at {exp} is not Hermitian")
        else:
            gap = np.max(np.abs(mat - mat.conj().T)) if mat.size else 0.0
            if gap > tol * (1.0 + np.max(np.abs(mat))):
                raise NotHermitianStructure(
                    f"coefficient at {exp} is not Hermitian (gap {gap:.3e})")


def hermitian_to_real_embedding(W: MatrixPoly) -> MatrixPoly:
    """Double a Hermitian-structured polynomial into a real symmetric one.

    Coefficient-wise ``C = A + iB`` maps to ``[[A, B], [B^T, A]]`` with
    ``A^T = A`` and ``B^T = -B`` holding exactly.
    """
    check_hermitian_structure(W)
    m = W.rows
    terms = {}
    for exp, mat in W.terms.items():
        C = complex_array(mat)
        C = (C + C.conj().T) / 2.0
        A = C.real
        B = C.imag
        emb = np.zeros((2 * m, 2 * m), dtype=complex)
        emb[:m, :m] = A
        emb[:m, m:] = B
        emb[m:, :m] = B.T
        emb[m:, m:] = A
        terms[exp] = emb
    return MatrixPoly(W.d, 2 * m, 2 * m, terms, exact=False)


def psd_project(M: np.ndarray) -> np.ndarray:
    """Nearest positive semidefinite matrix: clip negative eigenvalues."""
    H = (M + M.conj().T) / 2.0
    vals, vecs = np.linalg.eigh(H)
    clipped = np.clip(vals, 0.0, None)
    out = (vecs * clipped) @ vecs.conj().T
    return (out + out.conj().T) / 2.0


def _constraint_classes(problem: GramProblem):
    """Map each product exponent to its list of basis index pairs."""
    classes: dict[Exponent, list[tuple[int, int]]] = {}
    for i, e1 in enumerate(problem.basis):
        for j, e2 in enumerate(problem.basis):
            alpha = tuple(a + b for a, b in zip(e1, e2))
            classes.setdefault(alpha, []).append((i, j))
    return classes


def gram_solve(problem: GramProblem,
               max_iters: int = DEFAULT_MAX_ITERS,
               tol: float = DEFAULT_TOL) -> np.ndarray:
    """Find a PSD Gram matrix reproducing the target coefficients.

    Projection splitting between the affine coefficient-matching subspace
    (mismatch distributed evenly over each anti-diagonal class) and the PSD
    cone, driven by the reflected Douglas-Rachford update: the plain
    corrected alternation slows to a crawl when the two sets meet
    tangentially, which is the norm for Gram targets with thin feasible
    faces, while the reflected iteration keeps a linear rate there.  Raises
    :class:`SolverStalled` when the sets appear not to intersect within the
    iteration budget.
    """
    mb = problem.block
    n = problem.size
    classes = _constraint_classes(problem)
    targets = {alpha: complex_array(problem.target.coefficient(alpha))
               for alpha in classes}
    real_case = all(np.max(np.abs(t.imag)) == 0.0 if t.size else True
                    for t in targets.values())
    dtype = float if real_case else complex
    scale = 1.0 + problem.target.max_abs_coeff()
    threshold = tol * scale

    def affine_project(G: np.ndarray) -> np.ndarray:
        out = G.copy()
        for alpha, pairs in classes.items():
            acc = np.zeros((mb, mb), dtype=dtype)
            for (i, j) in pairs:
                acc += out[i * mb:(i + 1) * mb, j * mb:(j + 1) * mb]
            tgt = targets[alpha]
            delta = ((tgt if dtype is complex else tgt.real) - acc) / len(pairs)
            for (i, j) in pairs:
                out[i * mb:(i + 1) * mb, j * mb:(j + 1) * mb] += delta
        return out

    def violation(G: np.ndarray) -> float:
        worst = 0.0
        for alpha, pairs in classes.items():
            acc = np.zeros((mb, mb), dtype=complex)
            for (i, j) in pairs:
                acc += G[i * mb:(i + 1) * mb, j * mb:(j + 1) * mb]
            gap = np.max(np.abs(acc - targets[alpha])) if acc.size else 0.0
            worst = max(worst, gap)
        return worst

    s = np.zeros((n, n), dtype=dtype)
    best = np.inf
    for _ in range(max_iters):
        a = affine_project(s)
        y = psd_project(2.0 * a - s)
        if dtype is float:
            y = y.real
        gap = violation(y)
        best = min(best, gap)
        if gap <= threshold:
            return y
        s = s + y - a
    raise SolverStalled(
        f"no PSD Gram matrix within {max_iters} iterations "
        f"(best constraint violation {best:.3e}); "
        "target may not be PSD or the basis may be too small")


def _phase_normalize_columns(M: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Make the first significant entry of every column real-positive."""
    out = M.astype(complex)
    for j in range(out.shape[1]):
        col = out[:, j]
        mags = np.abs(col)
        if not mags.size or mags.max() <= tol:
            continue
        k = int(np.flatnonzero(mags > 1e-8 * mags.max())[0])
        pivot = col[k]
        out[:, j] = col * (pivot.conjugate() / abs(pivot))
    return out


def factor_gram(G: np.ndarray, basis: list[Exponent], m: int) -> SOSFactor:
    """Eigen-factor a PSD Gram matrix into a polynomial factor.

    Eigenvalues below ``RANK_TOL * lambda_max`` are dropped, minimizing the
    column count.  Eigenvectors are ordered by descending eigenvalue and
    phase-normalized so output is deterministic.
    """
    G = np.asarray(G)
    n = G.shape[0]
    if n != len(basis) * m:
        raise ShapeMismatch("Gram size does not match basis and block size")
    if n == 0:
        phi = MatrixPoly.zero(0 if not basis else len(basis[0]), m, 0, exact=False)
        return SOSFactor(phi, 0.0, 0)
    H = (G + G.conj().T) / 2.0
    vals, vecs = np.linalg.eigh(H)
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]
    lam_max = vals[0] if vals.size else 0.0
    keep = [k for k, lam in enumerate(vals) if lam > RANK_TOL * max(lam_max, 0.0) and lam > 0.0]
    r = len(keep)
    L = np.zeros((n, r), dtype=complex)
    if r:
        V = _phase_normalize_columns(vecs[:, keep])
        L = V * np.sqrt(vals[keep])
    d = len(basis[0]) if basis else 0
    terms = {}
    for i, exp in enumerate(basis):
        blockrow = L[i * m:(i + 1) * m, :]
        terms[exp] = blockrow
    phi = MatrixPoly(d, m, r, terms, exact=False)
    recon_gap = float(np.max(np.abs(L @ L.conj().T - H))) if n else 0.0
    return SOSFactor(phi, recon_gap, r)


def multi_affine_basis(W: MatrixPoly) -> list[Exponent]:
    """All multi-affine monomials over the variables W actually uses."""
    vars_present = W.variables_present()
    basis = []
    for bits in product((0, 1), repeat=len(vars_present)):
        exp = [0] * W.d
        for var, bit in zip(vars_present, bits):
            exp[var] = bit
        basis.append(tuple(exp))
    return sorted(basis)


def escalated_basis(W: MatrixPoly) -> list[Exponent]:
    """Monomials up to half the target degree, capped per variable."""
    degs = W.degrees()
    caps = [(-(-deg // 2)) for deg in degs]
    total_cap = -(-W.total_degree() // 2)
    ranges = [range(c + 1) for c in caps]
    basis = [exp for exp in product(*ranges) if sum(exp) <= total_cap]
    return sorted(basis)


def _stack_coefficients(phi: MatrixPoly) -> np.ndarray:
    exps = sorted(phi.terms)
    return np.vstack([complex_array(phi.terms[e]) for e in exps])


def _normalize_factor_phases(phi: MatrixPoly) -> MatrixPoly:
    """Pin each factor column to a canonical unimodular phase.

    Multiplying columns by unimodular constants never changes
    ``Phi(z) Phi(conj(z))^*``; pinning the first significant stacked
    coefficient entry of every column to be real-positive makes the output
    reproducible across runs.
    """
    if phi.cols == 0 or not phi.terms:
        return phi
    stack = _stack_coefficients(phi)
    phases = np.ones(phi.cols, dtype=complex)
    for j in range(phi.cols):
        col = stack[:, j]
        mags = np.abs(col)
        if mags.max() <= 1e-14:
            continue
        k = int(np.flatnonzero(mags > 1e-8 * mags.max())[0])
        phases[j] = col[k].conjugate() / abs(col[k])
    return phi.right_multiply(np.diag(phases))


def _column_compress(phi: MatrixPoly) -> MatrixPoly:
    """Drop linearly dependent factor columns without changing the product.

    Right-multiplying by the leading right singular vectors of the stacked
    coefficient matrix projects onto its row space, which leaves
    ``Phi(z) Phi(conj(z))^*`` unchanged.
    """
    if phi.cols == 0 or not phi.terms:
        return phi
    stack = _stack_coefficients(phi)
    u, s, vh = np.linalg.svd(stack, full_matrices=False)
    if not s.size or s[0] == 0.0:
        return MatrixPoly.zero(phi.d, phi.rows, 0, exact=False)
    r = int(np.sum(s > 1e-12 * s[0]))
    if r == phi.cols:
        return phi
    return phi.right_multiply(vh[:r, :].conj().T)


def recombine_embedded(phi_emb: MatrixPoly, m: int) -> MatrixPoly:
    """Turn a factor of the doubled real polynomial into a complex factor.

    With row blocks R1 (top m rows) and R2 (bottom m rows), the combination
    ``(R1 - i*R2)/sqrt(2)`` satisfies the original Hermitian product identity;
    redundant columns introduced by the doubling are compressed away.
    """
    if phi_emb.rows != 2 * m:
        raise ShapeMismatch("embedded factor must have 2m rows")
    r1 = phi_emb.submatrix(range(m), range(phi_emb.cols))
    r2 = phi_emb.submatrix(range(m, 2 * m), range(phi_emb.cols))
    phi = (r1 - r2 * 1j) * (1.0 / np.sqrt(2.0))
    return _normalize_factor_phases(_column_compress(phi))


def _complex_gram_from_embedded(G: np.ndarray, n_basis: int, m: int) -> np.ndarray:
    """Contract a doubled real Gram matrix back to a complex Hermitian one.

    Block-wise this is ``(G_tt + G_bb)/2 + i*(G_tb - G_bt)/2`` where t/b are
    the top/bottom row groups of each doubled block; halving is exact in
    floating point, so integer-valued factors stay integer-valued.
    """
    out = np.zeros((n_basis * m, n_basis * m), dtype=complex)
    w = 2 * m
    for i in range(n_basis):
        for j in range(n_basis):
            blk = G[i * w:(i + 1) * w, j * w:(j + 1) * w]
            tt = blk[:m, :m]
            bb = blk[m:, m:]
            tb = blk[:m, m:]
            bt = blk[m:, :m]
            out[i * m:(i + 1) * m, j * m:(j + 1) * m] = \
                (tt + bb) / 2.0 + 1j * (tb - bt) / 2.0
    return out


def sos_factor(W: MatrixPoly, basis_hint: list[Exponent] | None = None,
               max_iters: int = DEFAULT_MAX_ITERS, tol: float = DEFAULT_TOL,
               allow_escalation: bool = True) -> SOSFactor:
    """Full factorization pipeline: embed, solve, factor, recombine, verify."""
    check_hermitian_structure(W)
    m = W.rows
    if W.is_zero():
        return SOSFactor(MatrixPoly.zero(W.d, m, 0, exact=False), 0.0, 0)
    W_float = W.to_float()
    scale = 1.0 + W_float.max_abs_coeff()

    bases = [basis_hint] if basis_hint is not None else [multi_affine_basis(W_float)]
    if basis_hint is None and allow_escalation:
        esc = escalated_basis(W_float)
        if esc != bases[0]:
            bases.append(esc)

    embedded = hermitian_to_real_embedding(W_float)
    last_error: Exception | None = None
    for basis in bases:
        try:
            problem = GramProblem(basis=list(basis), target=embedded)
            G = gram_solve(problem, max_iters=max_iters, tol=tol)
        except (SolverStalled, ShapeMismatch) as err:
            last_error = err
            continue
        Gc = _complex_gram_from_embedded(np.asarray(G), len(basis), m)
        factor = factor_gram(Gc, list(basis), m)
        phi = _normalize_factor_phases(factor.phi)
        diff = phi * phi.herm_reflect() - W_float
        residual = diff.max_abs_coeff()
        if residual <= RESIDUAL_TOL * scale:
            return SOSFactor(phi, residual, phi.cols)
        last_error = SolverStalled(
            f"factor residual {residual:.3e} exceeds tolerance with basis size {len(basis)}")
    if isinstance(last_error, SolverStalled):
        raise last_error
    raise SolverStalled(f"no usable monomial basis: {last_error}")
