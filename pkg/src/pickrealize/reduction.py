"""Degree reduction: trade powers of one variable for fresh affine variables.

``z0^k`` is replaced by ``binom(n, k)^{-1} * sigma_k(fresh_1, ..., fresh_n)``
where ``sigma_k`` is the elementary symmetric polynomial.  Applying this to
numerator and denominator separately turns any rational matrix function into
a multi-affine one; identifying each group of fresh variables back to its
original variable recovers the input exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb

from .errors import DegreeTooLow
from .exact import QQI_ONE, QQi
from .poly import MatrixPoly, RationalMatrixFunction, ScalarPoly


@dataclass(frozen=True)
class ReductionPlan:
    """Bookkeeping for undoing a reduction to multi-affine form.

    ``groups[j]`` lists the fresh variable indices standing in for original
    variable ``j``; group sizes equal ``max(degree_j, 1)``.
    """

    original_d: int
    degrees: tuple[int, ...]
    groups: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        flat = [i for g in self.groups for i in g]
        if sorted(flat) != list(range(len(flat))):
            raise ValueError("groups must partition the fresh variables")
        if len(self.groups) != self.original_d:
            raise ValueError("one group per original variable required")

    @property
    def fresh_d(self) -> int:
        return sum(len(g) for g in self.groups)

    def is_trivial(self) -> bool:
        return all(len(g) == 1 for g in self.groups)

    def to_json(self) -> dict:
        return {"original_d": self.original_d,
                "degrees": list(self.degrees),
                "groups": [list(g) for g in self.groups]}

    @classmethod
    def from_json(cls, data: dict) -> "ReductionPlan":
        return cls(int(data["original_d"]),
                   tuple(int(x) for x in data["degrees"]),
                   tuple(tuple(int(i) for i in g) for g in data["groups"]))


def elementary_symmetric(k: int, n_vars: int, exact: bool = True) -> ScalarPoly:
    """sigma_k in ``n_vars`` variables; sigma_0 is the constant 1."""
    if not 0 <= k <= n_vars:
        raise ValueError(f"need 0 <= k <= n_vars, got k={k}, n_vars={n_vars}")
    one = QQI_ONE if exact else 1.0
    if k == 0:
        return ScalarPoly.constant(n_vars, one)
    terms = {}
    for subset in combinations(range(n_vars), k):
        exp = [0] * n_vars
        for j in subset:
            exp[j] = 1
        terms[tuple(exp)] = one
    return ScalarPoly(n_vars, terms, exact=exact)


def _reduce_poly(p, var: int, n: int):
    """Replace ``z_var^k`` by weighted sigma_k over ``n`` fresh variables.

    The fresh variables take the place of ``var`` as a contiguous block, so
    the output has ``d - 1 + n`` variables.
    """
    d = p.d
    new_d = d - 1 + n
    sigmas = [elementary_symmetric(k, n, exact=p.exact).embed(new_d, var)
              for k in range(n + 1)]
    if isinstance(p, ScalarPoly):
        out = ScalarPoly.zero(new_d, exact=p.exact)
    else:
        out = MatrixPoly.zero(new_d, p.rows, p.cols, exact=p.exact)
    for exp, coeff in p.terms.items():
        k = exp[var]
        rest = exp[:var] + (0,) * n + exp[var + 1:]
        if isinstance(p, ScalarPoly):
            base = ScalarPoly(new_d, {rest: coeff}, exact=p.exact)
        else:
            base = MatrixPoly(new_d, p.rows, p.cols, {rest: coeff}, exact=p.exact)
        weight = QQi(Fraction(1, comb(n, k))) if p.exact else 1.0 / comb(n, k)
        out = out + base * sigmas[k] * weight
    return out


def reduce_variable(f: RationalMatrixFunction, var: int, n: int) -> RationalMatrixFunction:
    """Apply the reduction operator in one variable to numerator and
    denominator with the same order ``n``."""
    deg = max(f.numerator.degree_in(var), f.denominator.degree_in(var))
    if n < deg:
        raise DegreeTooLow(f"order {n} below degree {deg} in variable {var}")
    return RationalMatrixFunction(_reduce_poly(f.numerator, var, n),
                                  _reduce_poly(f.denominator, var, n))


def reduce_to_multi_affine(f: RationalMatrixFunction) -> tuple[RationalMatrixFunction, ReductionPlan]:
    """Reduce every variable of degree >= 2; output is multi-affine and
    symmetric within each group of fresh variables."""
    degrees = f.degrees()
    current = f
    groups: list[tuple[int, ...]] = []
    offset = 0
    for var, deg in enumerate(degrees):
        pos = var + offset
        n = max(deg, 1)
        if deg >= 2:
            current = reduce_variable(current, pos, n)
        groups.append(tuple(range(pos, pos + n)))
        offset += n - 1
    plan = ReductionPlan(f.d, degrees, tuple(groups))
    return current, plan


def restore_variables(f: RationalMatrixFunction, plan: ReductionPlan) -> RationalMatrixFunction:
    """Inverse of :func:`reduce_to_multi_affine` via variable identification."""
    return f.identify_variables([list(g) for g in plan.groups])
