"""Constructive realizations of multi-affine functions and form conversions.

The extraction loop peels one variable at a time: write the current
coefficient function as ``(z*P1 + P2)/(z*q1 + q2)``, factor the extraction
Wronskian ``P1*q2 - P2*q1 = Phi Phi^#``, and absorb the variable into a
diagonal parameter block of a one-bigger coefficient function.  Flattening
the nested linear-fractional compositions is pure bookkeeping (the parameter
lists concatenate), so after the last variable the coefficient matrix is a
constant Hermitian block matrix realizing the input.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .analysis import (
    CERTIFIED_CAYLEY_INNER,
    FALSIFIED,
    PickVerdict,
    cayley_inner_criterion,
    check_cayley_symmetry,
    sample_pick,
    sample_upper_halfplane,
)
from .errors import (
    DimensionMismatch,
    InconsistentCase,
    NonConstantTerminal,
    PickFalsified,
    PoleProximity,
    ResidualTooLarge,
    ShapeMismatch,
    SingularAtPoint,
    SolverStalled,
    TerminalNotHermitian,
)
from .exact import complex_array
from .forms import (
    BlockStructure,
    LftRep,
    PencilRealization,
    SchurRealization,
    TransferRealization,
    eval_realization,
)
from .lifting import lift, specialize_lift
from .poly import (
    MatrixPoly,
    RationalMatrixFunction,
    ScalarPoly,
    block_matrix,
    coefficient_split,
    wronskian,
)
from .reduction import ReductionPlan, reduce_to_multi_affine
from .sos import RESIDUAL_TOL, SOSFactor, sos_factor

HERM_TOL = 1e-9


def _is_zero_relative(p: ScalarPoly, scale: float) -> bool:
    if p.exact:
        return p.is_zero()
    return p.max_abs_coeff() <= 1e-12 * scale


def darlington_step(h: RationalMatrixFunction, var: int, phi: SOSFactor,
                    tol: float = RESIDUAL_TOL
                    ) -> tuple[RationalMatrixFunction, LftRep]:
    """Extract one variable of a multi-affine function into a parameter block.

    Returns the coefficient function ``g`` in the remaining variables and
    the step's linear-fractional description ``h = LFT(g; Lambda)``.  With
    ``h = (z*P1 + P2)/(z*q1 + q2)`` the two structural cases are:

    * ``q1`` not identically zero: ``g = (1/q1) [[P1, Phi], [Phi^#, q2 I_r]]``
      with parameter ``z * I_r``;
    * ``q1`` identically zero: ``g = (1/q2) [[P2, Phi, 0], [Phi^#, 0, q2 I_r],
      [0, q2 I_r, 0]]`` where the extra bordering converts the reciprocal
      parameter the raw extraction produces into the standard ``+ z I``
      convention, at the price of a zero constant block.

    A rank-zero factor certifies the variable is absent and returns ``h``
    with the variable substituted away.
    """
    num = h.numerator
    den = h.denominator
    if num.degree_in(var) > 1 or den.degree_in(var) > 1:
        raise ShapeMismatch(f"function is not affine in variable {var}")
    p1, p2 = coefficient_split(num, var)
    q1, q2 = coefficient_split(den, var)
    W = p1 * q2 - p2 * q1
    w_scale = 1.0 + W.max_abs_coeff()

    if phi.rank == 0:
        if W.max_abs_coeff() > tol * w_scale:
            raise ResidualTooLarge("rank-zero factor for a nonzero Wronskian")
        g = _drop_inactive_variable(h, var)
        return g, LftRep(coeff=g, m=h.m, params=())

    recon = phi.phi * phi.phi.herm_reflect()
    gap = (recon - W.to_float()).max_abs_coeff()
    if gap > tol * w_scale:
        raise ResidualTooLarge(
            f"factor residual {gap:.3e} exceeds {tol * w_scale:.3e}")

    r = phi.rank
    phi_h = phi.phi.herm_reflect()
    d = h.d
    q1_zero = _is_zero_relative(q1, 1.0 + den.max_abs_coeff())
    if not q1_zero:
        q2_block = MatrixPoly.identity(d, r, exact=q2.exact) * q2
        num_g = block_matrix([[p1, phi.phi],
                              [phi_h, q2_block]])
        g = RationalMatrixFunction(num_g, q1)
        params = ((var, r),)
    else:
        if _is_zero_relative(q2, 1.0 + den.max_abs_coeff()):
            raise InconsistentCase("both denominator parts vanish identically")
        q2_block = MatrixPoly.identity(d, r, exact=q2.exact) * q2
        num_g = block_matrix([[p2, phi.phi, None],
                              [phi_h, None, q2_block],
                              [None, q2_block, None]])
        g = RationalMatrixFunction(num_g, q2)
        params = ((None, r), (var, r))
    return g, LftRep(coeff=g, m=h.m, params=params)


def _drop_inactive_variable(h: RationalMatrixFunction, var: int
                            ) -> RationalMatrixFunction:
    """Substitute a constant for a variable the function does not depend on."""
    for value in (0, 1):
        candidate = h.substitute(var, value)
        if not candidate.denominator.is_zero():
            return candidate
    raise InconsistentCase("no regular substitution value for inactive variable")


def superpose(outer: LftRep, inner: LftRep) -> LftRep:
    """Flatten a two-level coefficient-matrix composition.

    ``outer`` realizes the target through a coefficient matrix that is
    itself realized by ``inner``; the flattened representation reuses the
    inner coefficient function with the parameter blocks concatenated,
    outer blocks first.
    """
    if inner.m != outer.m + outer.param_size:
        raise DimensionMismatch(
            f"inner coefficient matrix realizes a {inner.m}-sized function, "
            f"outer expects {outer.m + outer.param_size}")
    return LftRep(coeff=inner.coeff, m=outer.m,
                  params=outer.params + inner.params)


def permute_reblock(rep: LftRep) -> LftRep:
    """Canonicalize parameter order: constant blocks first, then variables
    ascending; adjacent blocks with the same key merge.  A simultaneous
    row/column permutation of the coefficient matrix keeps evaluation
    unchanged."""
    order = sorted(range(len(rep.params)),
                   key=lambda i: (0, 0) if rep.params[i][0] is None
                   else (1, rep.params[i][0]))
    offsets = []
    pos = rep.m
    for _, size in rep.params:
        offsets.append(pos)
        pos += size
    perm = list(range(rep.m))
    new_params: list[tuple[int | None, int]] = []
    for i in order:
        var, size = rep.params[i]
        perm.extend(range(offsets[i], offsets[i] + size))
        if new_params and new_params[-1][0] == var:
            new_params[-1] = (var, new_params[-1][1] + size)
        else:
            new_params.append((var, size))
    num = rep.coeff.numerator.permute(perm)
    coeff = RationalMatrixFunction(num, rep.coeff.denominator)
    return LftRep(coeff=coeff, m=rep.m, params=tuple(new_params))


def _merge_params_by_plan(params, plan: ReductionPlan | None, nvars: int):
    """Collapse canonical fresh-variable blocks into per-original-variable
    blocks; returns (n0, block sizes)."""
    n0 = 0
    sizes = dict.fromkeys(range(nvars), 0)
    for var, size in params:
        if var is None:
            n0 += size
        else:
            sizes[var] = sizes.get(var, 0) + size
    if plan is None:
        return n0, tuple(sizes.get(v, 0) for v in range(nvars))
    merged = []
    for group in plan.groups:
        merged.append(sum(sizes.get(v, 0) for v in group))
    return n0, tuple(merged)


def realize_cayley_inner(h0: RationalMatrixFunction,
                         plan: ReductionPlan | None = None,
                         max_iters: int = 20000,
                         tol: float = HERM_TOL) -> SchurRealization:
    """Run the extraction loop over every variable of a multi-affine input.

    The caller is responsible for membership (certify first, or force); a
    non-member surfaces here as a stalled SOS factorization.  The terminal
    coefficient matrix must be constant and Hermitian up to ``tol`` noise;
    it is symmetrized and packaged with the block metadata, merged back to
    original variables when a reduction plan is given.
    """
    if not h0.is_multi_affine():
        raise ShapeMismatch("input is not multi-affine")
    current = h0
    acc = LftRep(coeff=h0, m=h0.m, params=())
    for var in range(h0.d):
        if (current.numerator.degree_in(var) == 0
                and current.denominator.degree_in(var) == 0):
            continue
        W = wronskian(current.denominator, current.numerator, var)
        phi = sos_factor(W, max_iters=max_iters, allow_escalation=False)
        if phi.phi.degrees() and max(phi.phi.degrees()) > 1:
            raise SolverStalled("factor is not multi-affine; input is likely "
                                "outside the certified class")
        g, step = darlington_step(current, var, phi)
        acc = superpose(acc, step)
        current = g

    if not current.is_constant():
        raise NonConstantTerminal(
            "coefficient matrix still depends on variables after the loop")
    terminal = current.constant_value()
    asym = float(np.max(np.abs(terminal - terminal.conj().T))) if terminal.size else 0.0
    scale = 1.0 + (float(np.max(np.abs(terminal))) if terminal.size else 0.0)
    if asym > tol * scale:
        raise TerminalNotHermitian(
            f"terminal matrix asymmetry {asym:.3e} exceeds {tol * scale:.3e}")
    terminal = (terminal + terminal.conj().T) / 2.0

    d_total = h0.d
    const_fn = RationalMatrixFunction(
        MatrixPoly.constant(d_total, terminal),
        ScalarPoly.one(d_total, exact=False))
    canonical = permute_reblock(LftRep(coeff=const_fn, m=acc.m, params=acc.params))
    nvars = plan.original_d if plan is not None else h0.d
    n0, blocks = _merge_params_by_plan(canonical.params, plan, h0.d)
    H = complex_array(canonical.coeff.numerator.constant_value())
    H = H / complex(canonical.coeff.denominator.constant_value())
    return SchurRealization(H, h0.m, BlockStructure(n0, blocks), hermitian=True)


def realize_pick(f: RationalMatrixFunction, seed: int = 42, samples: int = 200,
                 max_iters: int = 20000, tol: float = HERM_TOL
                 ) -> SchurRealization:
    """Full pipeline: symmetry check, optional lift, reduction, extraction.

    Real-point symmetric inputs realize directly with a Hermitian H; all
    others go through the one-variable lift and are specialized back at
    ``i``, which preserves ``(H - H^*)/2i >= 0``.  Raises
    :class:`PickFalsified` with a witness when membership fails, and lets
    :class:`SolverStalled` propagate when certification is inconclusive.
    """
    symmetric, fn = check_cayley_symmetry(f)
    if symmetric:
        h0, plan = reduce_to_multi_affine(fn)
        verdict = cayley_inner_criterion(h0, seed=seed, max_iters=max_iters)
        if verdict.status == FALSIFIED:
            raise PickFalsified(verdict.report, witness=verdict.witness)
        if verdict.status != CERTIFIED_CAYLEY_INNER:
            raise SolverStalled(verdict.report)
        return realize_cayley_inner(h0, plan, max_iters=max_iters, tol=tol)

    sampled = sample_pick(f, n_samples=samples, seed=seed)
    if sampled.status == FALSIFIED:
        raise PickFalsified(sampled.report, witness=sampled.witness)
    lifted = lift(fn)
    h0, plan = reduce_to_multi_affine(lifted.g)
    verdict = cayley_inner_criterion(h0, seed=seed, max_iters=max_iters)
    if verdict.status == FALSIFIED:
        raise PickFalsified(
            "lifted function fails the Wronskian criterion: " + verdict.report,
            witness=verdict.witness)
    if verdict.status != CERTIFIED_CAYLEY_INNER:
        raise SolverStalled(verdict.report)
    rep_g = realize_cayley_inner(h0, plan, max_iters=max_iters, tol=tol)
    return specialize_lift(rep_g)


# -- form conversions ----------------------------------------------------------

def _pad_reciprocal(H: np.ndarray, m: int, structure: BlockStructure
                    ) -> tuple[np.ndarray, BlockStructure]:
    """Border a resolvent realization so it tracks ``z -> -1/z``.

    Each variable block gains a fresh copy coupled through identity blocks;
    the old variable coordinates become part of the constant block.  The
    bordered matrix evaluates the original function at ``(-1/z_1, ...)``,
    and the construction preserves Hermitian structure exactly.
    """
    n = structure.n
    nv = sum(structure.blocks)
    E = np.zeros((n, nv), dtype=complex)
    fresh = 0
    for var, size in enumerate(structure.blocks):
        sl = structure.variable_slice(var)
        E[sl, fresh:fresh + size] = np.eye(size)
        fresh += size
    total = m + n
    out = np.zeros((total + nv, total + nv), dtype=complex)
    out[:total, :total] = H
    out[m:total, total:] = E
    out[total:, m:total] = E.T
    return out, BlockStructure(n, structure.blocks)


def schur_to_transfer(r: SchurRealization) -> TransferRealization:
    """Convert to transfer form; evaluation is preserved.

    The resolvent realization is first bordered to track the variable
    inversion ``z -> -1/z``, after which adding an identity on the (now
    larger) constant block swaps the resolvent convention for the transfer
    one and inverts the variables a second time.
    """
    H2, struct2 = _pad_reciprocal(r.H, r.m, r.structure)
    n0 = struct2.n0
    sl = slice(r.m, r.m + n0)
    H2[sl, sl] += np.eye(n0)
    return TransferRealization(H2, r.m, struct2)


def transfer_to_schur(r: TransferRealization) -> SchurRealization:
    """Inverse conversion: subtract the identity on the constant block, then
    border to undo the variable inversion."""
    H = r.H.astype(complex).copy()
    sl = slice(r.m, r.m + r.structure.n0)
    H[sl, sl] -= np.eye(r.structure.n0)
    H2, struct2 = _pad_reciprocal(H, r.m, r.structure)
    scale = 1.0 + float(np.max(np.abs(H2))) if H2.size else 1.0
    asym = float(np.max(np.abs(H2 - H2.conj().T))) if H2.size else 0.0
    return SchurRealization(H2, r.m, struct2, hermitian=bool(asym <= 1e-12 * scale))


def schur_to_pencil(r: SchurRealization) -> PencilRealization:
    """Bordered layout of the same block matrix: the constant part is H and
    each variable contributes a 0/1 diagonal projector onto its block."""
    total = r.m + r.structure.n
    coeffs = []
    for var in range(r.structure.nvars):
        A = np.zeros((total, total), dtype=complex)
        sl = r.structure.variable_slice(var, offset=r.m)
        A[sl, sl] = np.eye(r.structure.blocks[var])
        coeffs.append(A)
    return PencilRealization(r.H.copy(), tuple(coeffs), r.m, r.structure)


# -- kernel decomposition and certification ------------------------------------

def hermitian_sqrt_factor(M: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Factor ``M = B^* B`` for PSD M via the eigendecomposition."""
    H = (M + M.conj().T) / 2.0
    if H.size == 0:
        return H
    vals, vecs = np.linalg.eigh(H)
    vals = np.clip(vals, 0.0, None)
    return (np.sqrt(vals)[:, None] * vecs.conj().T)


def kernel_decomposition(p: PencilRealization, z, zeta) -> dict:
    """Assemble the positive-kernel identity for a pencil realization.

    With ``B0^* B0 = (H - H^*)/2i`` and ``B_k^* B_k = A_k``, the vectors
    ``theta_k(.) = B_k (I; -M22(.)^{-1} M21(.))`` satisfy::

        (f(z) - f(zeta)^*)/2i = theta_0(zeta)^* theta_0(z)
            + sum_k (z_k - conj(zeta_k))/2i * theta_k(zeta)^* theta_k(z)

    Returns the individual theta values, the assembled right side, and the
    difference against the left side.
    """
    z = [complex(c) for c in z]
    zeta = [complex(c) for c in zeta]
    B0 = hermitian_sqrt_factor((p.H - p.H.conj().T) / 2j)
    Bs = [hermitian_sqrt_factor(A) for A in p.coeffs]
    col_z = p.resolvent_column(z)
    col_zeta = p.resolvent_column(zeta)
    theta_z = [B0 @ col_z] + [B @ col_z for B in Bs]
    theta_zeta = [B0 @ col_zeta] + [B @ col_zeta for B in Bs]
    assembled = theta_zeta[0].conj().T @ theta_z[0]
    for k in range(len(p.coeffs)):
        weight = (z[k] - zeta[k].conjugate()) / 2j
        assembled = assembled + weight * (theta_zeta[k + 1].conj().T @ theta_z[k + 1])
    lhs = (p.eval(z) - p.eval(zeta).conj().T) / 2j
    return {"theta_z": theta_z, "theta_zeta": theta_zeta,
            "assembled": assembled, "lhs": lhs,
            "residual": float(np.max(np.abs(lhs - assembled))) if lhs.size else 0.0}


@dataclass
class CertificateReport:
    ok: bool
    checks: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"ok": self.ok, "checks": self.checks}


def _imag_identity_residual(r, point) -> float:
    """Residual of the form-specific imaginary-part identity at one point."""
    if isinstance(r, TransferRealization):
        Z = np.diag(r.structure.z_diagonal(point, 1.0))
        n = r.structure.n
        M = np.eye(n, dtype=complex) - r.D @ Z
        X = np.linalg.solve(M, r.C)
        u = np.vstack([np.eye(r.m, dtype=complex), Z @ X])
        skew = (r.H - r.H.conj().T) / 2j
        rhs = u.conj().T @ skew @ u
        zim = np.diag((np.diag(Z) - np.diag(Z).conj()) / 2j)
        rhs = rhs + X.conj().T @ zim @ X
        value = r.eval(point)
        lhs = (value - value.conj().T) / 2j
        return float(np.max(np.abs(lhs - rhs)))
    if isinstance(r, SchurRealization):
        pencil = schur_to_pencil(r)
    elif isinstance(r, PencilRealization):
        pencil = r
    else:
        raise TypeError(f"no identity check for {type(r).__name__}")
    return kernel_decomposition(pencil, point, point)["residual"]


def certify(r, f: RationalMatrixFunction, n_points: int = 200, seed: int = 42,
            tol: float = 1e-9) -> CertificateReport:
    """Check a realization against its function.

    (a) evaluation equivalence at sampled points of the upper poly-half-plane
    away from poles, (b) the form's matrix inequalities, (c) the
    imaginary-part identity at 10 points.  The report carries one entry per
    check; nothing raises.
    """
    rng = np.random.default_rng(seed)
    checks: list[dict] = []

    worst = 0.0
    tested = 0
    drawn = 0
    while tested < n_points and drawn < 10 * n_points:
        batch = sample_upper_halfplane(rng, f.d, min(n_points - tested, n_points))
        drawn += batch.shape[0]
        for z in batch:
            try:
                fv = f.eval(z)
                rv = eval_realization(r, z)
            except (PoleProximity, SingularAtPoint):
                continue
            tested += 1
            rel = float(np.max(np.abs(fv - rv))) / (1.0 + float(np.max(np.abs(fv))))
            worst = max(worst, rel)
            if tested >= n_points:
                break
    eval_tol = 1e-8
    checks.append({"name": "evaluation-equivalence", "passed": bool(tested > 0 and worst <= eval_tol),
                   "residual": worst, "tolerance": eval_tol, "points": tested})

    H = r.H
    scale = 1.0 + (float(np.max(np.abs(H))) if H.size else 0.0)
    skew = (H - H.conj().T) / 2j
    lam_min = float(np.min(np.linalg.eigvalsh((skew + skew.conj().T) / 2.0))) if H.size else 0.0
    checks.append({"name": "pick-inequality", "passed": bool(lam_min >= -tol * scale),
                   "residual": -min(lam_min, 0.0), "tolerance": tol * scale})
    if isinstance(r, SchurRealization) and r.hermitian:
        asym = float(np.max(np.abs(H - H.conj().T))) if H.size else 0.0
        checks.append({"name": "hermitian", "passed": bool(asym <= tol * scale),
                       "residual": asym, "tolerance": tol * scale})
    if isinstance(r, PencilRealization):
        worst_psd = 0.0
        worst_proj = 0.0
        for i, A in enumerate(r.coeffs):
            if A.size:
                worst_psd = max(worst_psd, -float(np.min(np.linalg.eigvalsh(
                    (A + A.conj().T) / 2.0))))
            worst_proj = max(worst_proj, float(np.max(np.abs(A @ A - A))) if A.size else 0.0)
            worst_proj = max(worst_proj, float(np.max(np.abs(A - A.conj().T))) if A.size else 0.0)
            for j, Aj in enumerate(r.coeffs):
                if i != j and A.size:
                    worst_proj = max(worst_proj, float(np.max(np.abs(A @ Aj))))
        checks.append({"name": "pencil-psd", "passed": bool(worst_psd <= tol),
                       "residual": worst_psd, "tolerance": tol})
        checks.append({"name": "pencil-projectors", "passed": bool(worst_proj == 0.0),
                       "residual": worst_proj, "tolerance": 0.0})

    worst_id = 0.0
    id_points = 0
    attempts = 0
    while id_points < 10 and attempts < 100:
        attempts += 1
        z = sample_upper_halfplane(rng, f.d, 1)[0]
        try:
            worst_id = max(worst_id, _imag_identity_residual(r, z))
        except (SingularAtPoint, np.linalg.LinAlgError):
            continue
        id_points += 1
    id_tol = 1e-8 * scale
    checks.append({"name": "kernel-identity", "passed": bool(id_points > 0 and worst_id <= id_tol),
                   "residual": worst_id, "tolerance": id_tol, "points": id_points})

    return CertificateReport(ok=all(c["passed"] for c in checks), checks=checks)
