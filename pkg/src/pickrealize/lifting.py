"""Lift a rational Pick function to one with real symmetry in an extra variable.

Splitting ``P = P2 + i*P1`` and ``q = q2 + i*q1`` into Hermitian/real parts
and attaching the skew parts to a fresh leading variable produces
``g(z0, z) = (z0*P1 + P2) / (z0*q1 + q2)``, which takes Hermitian values on
real points and restricts back to the original function at ``z0 = i``.
The fresh variable always sits at index 0 of the lifted function.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BlockNotFound, DegenerateLift
from .exact import QQi
from .forms import BlockStructure, SchurRealization
from .poly import MatrixPoly, RationalMatrixFunction, ScalarPoly


@dataclass(frozen=True)
class LiftResult:
    g: RationalMatrixFunction
    p1: MatrixPoly
    p2: MatrixPoly
    q1: ScalarPoly
    q2: ScalarPoly


def split_parts(f: RationalMatrixFunction):
    """Return (P1, P2, q1, q2) with P = P2 + i*P1 and q = q2 + i*q1.

    P1, P2 have Hermitian coefficient matrices; q1, q2 have real coefficients.
    """
    P = f.numerator
    q = f.denominator
    exact = f.exact
    half = QQi(Fraction(1, 2)) if exact else 0.5
    minus_half_i = QQi(0, Fraction(-1, 2)) if exact else -0.5j
    Pr = P.herm_reflect()
    qr = q.conj_reflect()
    p1 = (P - Pr) * minus_half_i       # (P - P(conj z)^*) / 2i
    p2 = (P + Pr) * half
    q1 = (q - qr) * minus_half_i
    q2 = (q + qr) * half
    return p1, p2, q1, q2


def lift(f: RationalMatrixFunction) -> LiftResult:
    """Build the (d+1)-variable function with Hermitian real-point values
    that restricts to ``f`` at lift-variable value ``i``."""
    p1, p2, q1, q2 = split_parts(f)
    if q1.is_zero() and q2.is_zero():
        raise DegenerateLift("denominator splits to zero; input malformed")
    new_d = f.d + 1
    z0 = ScalarPoly.variable(new_d, 0, exact=f.exact)
    num = p1.embed(new_d, 1) * z0 + p2.embed(new_d, 1)
    den = q1.embed(new_d, 1) * z0 + q2.embed(new_d, 1)
    return LiftResult(RationalMatrixFunction(num, den), p1, p2, q1, q2)


def drop_leading_variable(p):
    """Remove variable 0 from a polynomial that no longer uses it."""
    if p.degree_in(0) != 0:
        raise ValueError("polynomial still depends on variable 0")
    terms = {exp[1:]: c for exp, c in p.terms.items()}
    if isinstance(p, ScalarPoly):
        return ScalarPoly(p.d - 1, terms, exact=p.exact)
    return MatrixPoly(p.d - 1, p.rows, p.cols, terms, exact=p.exact)


def restrict_lift(g: RationalMatrixFunction) -> RationalMatrixFunction:
    """Substitute ``i`` for the lift variable symbolically and drop it."""
    i_val = QQi(0, 1) if g.exact else 1j
    num = drop_leading_variable(g.numerator.substitute(0, i_val))
    den = drop_leading_variable(g.denominator.substitute(0, i_val))
    return RationalMatrixFunction(num, den)


def specialize_lift(r: SchurRealization) -> SchurRealization:
    """Fix the lift variable of a realized lift at ``i``.

    The ``z0 * I`` diagonal block (variable index 0 of the realization) is
    replaced by ``i * I`` and folded into the constant block; the remaining
    variable blocks shift down one index.  The result satisfies
    ``(H - H^*)/2i >= 0`` whenever the input H was Hermitian, since the fold
    adds ``i`` times an orthogonal projector.
    """
    if r.structure.nvars == 0:
        raise BlockNotFound("realization carries no lift-variable block")
    r0 = r.structure.blocks[0]
    rest = tuple(r.structure.blocks[1:])
    if r0 == 0:
        return SchurRealization(r.H.copy(), r.m,
                                BlockStructure(r.structure.n0, rest),
                                hermitian=r.hermitian)
    H = r.H.astype(complex).copy()
    sl = r.structure.variable_slice(0, offset=r.m)
    H[sl, sl] += 1j * np.eye(r0)
    return SchurRealization(H, r.m,
                            BlockStructure(r.structure.n0 + r0, rest),
                            hermitian=False)
