"""Sparse multivariate polynomials with scalar or matrix coefficients.

Polynomials are dictionaries keyed by exponent vectors (tuples of
nonnegative ints, one entry per variable).  Coefficients are either exact
Gaussian rationals (:class:`~pickrealize.exact.QQi`) or ``complex`` floats;
binary operations on mixed operands demote to floats.  Values are treated
as immutable after construction, so everything here is safe to share
between threads and to evaluate in parallel.

The conjugate-reflection operations implement ``q(z) -> conj(q(conj(z)))``
for scalars and ``P(z) -> P(conj(z))^*`` for matrices, which on the
coefficient level is plain conjugation resp. conjugate transposition.
"""

from __future__ import annotations

from types import MappingProxyType
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import PoleProximity, ShapeMismatch
from .exact import (
    QQi,
    QQI_ONE,
    QQI_ZERO,
    as_exact,
    complex_array,
    conj_transpose,
    exact_matrix,
    exact_zeros,
    is_exact_scalar,
    matrix_is_zero,
    max_abs,
)

Exponent = tuple[int, ...]

#: absolute coefficient magnitude below which float-mode terms are dropped
FLOAT_DROP_TOL = 1e-12


def _check_exponent(exp: Sequence[int], d: int) -> Exponent:
    exp = tuple(int(e) for e in exp)
    if len(exp) != d:
        raise ShapeMismatch(f"exponent {exp} has length {len(exp)}, expected {d}")
    if any(e < 0 for e in exp):
        raise ShapeMismatch(f"exponent {exp} has negative entries")
    return exp


class ScalarPoly:
    """Scalar polynomial in ``d`` complex variables."""

    __slots__ = ("d", "_terms", "exact")

    def __init__(self, d: int, terms: Mapping[Exponent, object] | None = None,
                 exact: bool | None = None):
        self.d = int(d)
        raw = dict(terms or {})
        if exact is None:
            exact = all(is_exact_scalar(c) for c in raw.values())
        clean: dict[Exponent, object] = {}
        for exp, coeff in raw.items():
            exp = _check_exponent(exp, self.d)
            if exact:
                coeff = as_exact(coeff)
                if not coeff:
                    continue
            else:
                coeff = complex(coeff)
                if abs(coeff) <= FLOAT_DROP_TOL:
                    continue
            if exp in clean:
                raise ShapeMismatch(f"duplicate exponent {exp}")
            clean[exp] = coeff
        self.exact = exact
        self._terms = clean

    # -- constructors ---------------------------------------------------
    @classmethod
    def zero(cls, d: int, exact: bool = True) -> "ScalarPoly":
        return cls(d, {}, exact=exact)

    @classmethod
    def constant(cls, d: int, value) -> "ScalarPoly":
        return cls(d, {(0,) * d: value})

    @classmethod
    def one(cls, d: int, exact: bool = True) -> "ScalarPoly":
        return cls(d, {(0,) * d: QQI_ONE if exact else 1.0}, exact=exact)

    @classmethod
    def variable(cls, d: int, var: int, exact: bool = True) -> "ScalarPoly":
        if not 0 <= var < d:
            raise ShapeMismatch(f"variable index {var} out of range for d={d}")
        exp = tuple(1 if k == var else 0 for k in range(d))
        return cls(d, {exp: QQI_ONE if exact else 1.0}, exact=exact)

    # -- views ------------------------------------------------------------
    @property
    def terms(self) -> Mapping[Exponent, object]:
        return MappingProxyType(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(all(e == 0 for e in exp) for exp in self._terms)

    def constant_value(self):
        if not self.is_constant():
            raise ShapeMismatch("polynomial is not constant")
        return self._terms.get((0,) * self.d, QQI_ZERO if self.exact else 0.0)

    def max_abs_coeff(self) -> float:
        if not self._terms:
            return 0.0
        return max(abs(complex(c)) for c in self._terms.values())

    def coefficient(self, exp: Sequence[int]):
        return self._terms.get(tuple(exp), QQI_ZERO if self.exact else 0.0)

    # -- algebra ---------------------------------------------------------
    def _coerce_pair(self, other: "ScalarPoly"):
        if self.d != other.d:
            raise ShapeMismatch(f"variable counts differ: {self.d} vs {other.d}")
        exact = self.exact and other.exact
        return exact

    def __add__(self, other):
        if not isinstance(other, ScalarPoly):
            return NotImplemented
        exact = self._coerce_pair(other)
        terms: dict[Exponent, object] = {}
        for exp in set(self._terms) | set(other._terms):
            a = self._terms.get(exp, 0)
            b = other._terms.get(exp, 0)
            terms[exp] = (a + b) if exact else (complex(a) + complex(b))
        return ScalarPoly(self.d, terms, exact=exact)

    def __neg__(self):
        return ScalarPoly(self.d, {e: -c for e, c in self._terms.items()},
                          exact=self.exact)

    def __sub__(self, other):
        if not isinstance(other, ScalarPoly):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, ScalarPoly):
            exact = self._coerce_pair(other)
            terms: dict[Exponent, object] = {}
            for e1, c1 in self._terms.items():
                for e2, c2 in other._terms.items():
                    exp = tuple(a + b for a, b in zip(e1, e2))
                    prod = c1 * c2 if exact else complex(c1) * complex(c2)
                    if exp in terms:
                        terms[exp] = terms[exp] + prod
                    else:
                        terms[exp] = prod
            return ScalarPoly(self.d, terms, exact=exact)
        if isinstance(other, MatrixPoly):
            return other.__rmul__(self)
        if is_exact_scalar(other) or isinstance(other, (float, complex)):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if is_exact_scalar(other) or isinstance(other, (float, complex)):
            return self.scale(other)
        return NotImplemented

    def scale(self, scalar) -> "ScalarPoly":
        exact = self.exact and is_exact_scalar(scalar)
        if exact:
            scalar = as_exact(scalar)
            return ScalarPoly(self.d, {e: c * scalar for e, c in self._terms.items()},
                              exact=True)
        scalar = complex(scalar)
        return ScalarPoly(self.d, {e: complex(c) * scalar for e, c in self._terms.items()},
                          exact=False)

    def __eq__(self, other):
        if not isinstance(other, ScalarPoly):
            return NotImplemented
        if self.d != other.d:
            return False
        if set(self._terms) != set(other._terms):
            return False
        return all(self._terms[e] == other._terms[e] for e in self._terms)

    def __hash__(self):
        return hash((self.d, frozenset(self._terms)))

    def __repr__(self):
        if not self._terms:
            return f"ScalarPoly({self.d}, 0)"
        bits = [f"{c!r}*z^{e}" for e, c in sorted(self._terms.items())]
        return f"ScalarPoly({self.d}, {' + '.join(bits)})"

    # -- calculus / structure ---------------------------------------------
    def partial_derivative(self, var: int) -> "ScalarPoly":
        terms: dict[Exponent, object] = {}
        for exp, coeff in self._terms.items():
            k = exp[var]
            if k == 0:
                continue
            new = list(exp)
            new[var] = k - 1
            terms[tuple(new)] = coeff * k
        return ScalarPoly(self.d, terms, exact=self.exact)

    def conj_reflect(self) -> "ScalarPoly":
        """z -> conj(q(conj(z))): conjugates every coefficient."""
        return ScalarPoly(self.d, {e: c.conjugate() for e, c in self._terms.items()},
                          exact=self.exact)

    def degrees(self) -> tuple[int, ...]:
        degs = [0] * self.d
        for exp in self._terms:
            for k, e in enumerate(exp):
                if e > degs[k]:
                    degs[k] = e
        return tuple(degs)

    def degree_in(self, var: int) -> int:
        return max((exp[var] for exp in self._terms), default=0)

    def total_degree(self) -> int:
        return max((sum(exp) for exp in self._terms), default=0)

    def __call__(self, point: Sequence[complex]) -> complex:
        return self.eval(point)

    def eval(self, point: Sequence[complex]) -> complex:
        point = [complex(p) for p in point]
        if len(point) != self.d:
            raise ShapeMismatch(f"point has {len(point)} coordinates, expected {self.d}")
        total = 0j
        for exp, coeff in self._terms.items():
            mono = 1 + 0j
            for p, e in zip(point, exp):
                if e:
                    mono *= p ** e
            total += complex(coeff) * mono
        return total

    def to_float(self) -> "ScalarPoly":
        if not self.exact:
            return self
        return ScalarPoly(self.d, {e: complex(c) for e, c in self._terms.items()},
                          exact=False)

    def substitute(self, var: int, value) -> "ScalarPoly":
        """Fix one variable to a constant; result keeps the variable slot with
        exponent zero so shapes stay aligned."""
        exact = self.exact and is_exact_scalar(value)
        value = as_exact(value) if exact else complex(value)
        terms: dict[Exponent, object] = {}
        for exp, coeff in self._terms.items():
            k = exp[var]
            factor = value ** k if k else (QQI_ONE if exact else 1.0)
            new = list(exp)
            new[var] = 0
            new = tuple(new)
            add = (coeff * factor) if exact else (complex(coeff) * factor)
            terms[new] = terms.get(new, QQI_ZERO if exact else 0.0) + add
        return ScalarPoly(self.d, terms, exact=exact)

    def identify_variables(self, groups: Sequence[Sequence[int]]) -> "ScalarPoly":
        _check_partition(groups, self.d)
        terms: dict[Exponent, object] = {}
        for exp, coeff in self._terms.items():
            new = tuple(sum(exp[j] for j in group) for group in groups)
            if new in terms:
                terms[new] = terms[new] + coeff
            else:
                terms[new] = coeff
        return ScalarPoly(len(groups), terms, exact=self.exact)

    def embed(self, new_d: int, position: int) -> "ScalarPoly":
        """Reinterpret in ``new_d`` variables, placing the old variables as a
        contiguous block starting at ``position``."""
        pad_left = position
        pad_right = new_d - self.d - position
        if pad_left < 0 or pad_right < 0:
            raise ShapeMismatch("embedding does not fit")
        terms = {(0,) * pad_left + exp + (0,) * pad_right: c
                 for exp, c in self._terms.items()}
        return ScalarPoly(new_d, terms, exact=self.exact)


class MatrixPoly:
    """Polynomial with complex ``rows x cols`` matrix coefficients."""

    __slots__ = ("d", "rows", "cols", "_terms", "exact")

    def __init__(self, d: int, rows: int, cols: int,
                 terms: Mapping[Exponent, np.ndarray] | None = None,
                 exact: bool | None = None):
        self.d = int(d)
        self.rows = int(rows)
        self.cols = int(cols)
        if self.rows < 0 or self.cols < 0:
            raise ShapeMismatch("matrix dimensions must be nonnegative")
        raw = dict(terms or {})
        if exact is None:
            exact = all(m.dtype == object for m in raw.values()) if raw else True
        clean: dict[Exponent, np.ndarray] = {}
        for exp, mat in raw.items():
            exp = _check_exponent(exp, self.d)
            mat = np.asarray(mat)
            if mat.shape != (self.rows, self.cols):
                raise ShapeMismatch(
                    f"coefficient at {exp} has shape {mat.shape}, "
                    f"expected {(self.rows, self.cols)}")
            if exact:
                if mat.dtype != object:
                    mat = exact_matrix(mat.tolist())
                if matrix_is_zero(mat):
                    continue
            else:
                mat = np.asarray(complex_array(mat))
                mat = np.where(np.abs(mat) <= FLOAT_DROP_TOL, 0.0, mat)
                if matrix_is_zero(mat, FLOAT_DROP_TOL):
                    continue
            mat.setflags(write=False)
            clean[exp] = mat
        self.exact = exact
        self._terms = clean

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls, d: int, rows: int, cols: int, exact: bool = True) -> "MatrixPoly":
        return cls(d, rows, cols, {}, exact=exact)

    @classmethod
    def constant(cls, d: int, mat) -> "MatrixPoly":
        mat = mat if isinstance(mat, np.ndarray) else np.asarray(mat, dtype=object)
        if mat.dtype == object:
            mat = exact_matrix(mat.tolist())
            return cls(d, mat.shape[0], mat.shape[1], {(0,) * d: mat}, exact=True)
        mat = np.asarray(mat, dtype=complex)
        return cls(d, mat.shape[0], mat.shape[1], {(0,) * d: mat}, exact=False)

    @classmethod
    def identity(cls, d: int, n: int, exact: bool = True) -> "MatrixPoly":
        if exact:
            mat = exact_zeros(n, n)
            for i in range(n):
                mat[i, i] = QQI_ONE
        else:
            mat = np.eye(n, dtype=complex)
        return cls(d, n, n, {(0,) * d: mat}, exact=exact)

    @classmethod
    def from_scalar(cls, p: ScalarPoly) -> "MatrixPoly":
        terms = {}
        for exp, c in p.terms.items():
            if p.exact:
                terms[exp] = exact_matrix([[c]])
            else:
                terms[exp] = np.array([[complex(c)]], dtype=complex)
        return cls(p.d, 1, 1, terms, exact=p.exact)

    # -- views --------------------------------------------------------------
    @property
    def terms(self) -> Mapping[Exponent, np.ndarray]:
        return MappingProxyType(self._terms)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(all(e == 0 for e in exp) for exp in self._terms)

    def constant_value(self) -> np.ndarray:
        if not self.is_constant():
            raise ShapeMismatch("matrix polynomial is not constant")
        zero_exp = (0,) * self.d
        if zero_exp in self._terms:
            return self._terms[zero_exp]
        return exact_zeros(self.rows, self.cols) if self.exact else \
            np.zeros((self.rows, self.cols), dtype=complex)

    def coefficient(self, exp: Sequence[int]) -> np.ndarray:
        exp = tuple(exp)
        if exp in self._terms:
            return self._terms[exp]
        return exact_zeros(self.rows, self.cols) if self.exact else \
            np.zeros((self.rows, self.cols), dtype=complex)

    def max_abs_coeff(self) -> float:
        if not self._terms:
            return 0.0
        return max(max_abs(m) for m in self._terms.values())

    # -- algebra -------------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, MatrixPoly):
            return NotImplemented
        if self.d != other.d or self.shape != other.shape:
            raise ShapeMismatch(
                f"cannot add {self.shape} and {other.shape} polynomials "
                f"in {self.d} vs {other.d} variables")
        exact = self.exact and other.exact
        terms: dict[Exponent, np.ndarray] = {}
        for exp in set(self._terms) | set(other._terms):
            a = self._terms.get(exp)
            b = other._terms.get(exp)
            if a is None:
                mat = b if exact else complex_array(b)
            elif b is None:
                mat = a if exact else complex_array(a)
            elif exact:
                mat = a + b
            else:
                mat = complex_array(a) + complex_array(b)
            terms[exp] = mat
        return MatrixPoly(self.d, self.rows, self.cols, terms, exact=exact)

    def __neg__(self):
        return MatrixPoly(self.d, self.rows, self.cols,
                          {e: -m for e, m in self._terms.items()}, exact=self.exact)

    def __sub__(self, other):
        if not isinstance(other, MatrixPoly):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, MatrixPoly):
            if self.d != other.d:
                raise ShapeMismatch("variable counts differ")
            if self.cols != other.rows:
                raise ShapeMismatch(
                    f"inner dimensions {self.cols} and {other.rows} do not match")
            exact = self.exact and other.exact
            terms: dict[Exponent, np.ndarray] = {}
            for e1, m1 in self._terms.items():
                a = m1 if exact else complex_array(m1)
                for e2, m2 in other._terms.items():
                    b = m2 if exact else complex_array(m2)
                    exp = tuple(x + y for x, y in zip(e1, e2))
                    prod = a @ b
                    if exp in terms:
                        terms[exp] = terms[exp] + prod
                    else:
                        terms[exp] = prod
            return MatrixPoly(self.d, self.rows, other.cols, terms, exact=exact)
        if isinstance(other, ScalarPoly):
            return self._scalar_poly_mul(other)
        if is_exact_scalar(other) or isinstance(other, (float, complex)):
            return self.scale(other)
        if isinstance(other, np.ndarray):
            return self.right_multiply(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, ScalarPoly):
            return self._scalar_poly_mul(other)
        if is_exact_scalar(other) or isinstance(other, (float, complex)):
            return self.scale(other)
        return NotImplemented

    def _scalar_poly_mul(self, p: ScalarPoly) -> "MatrixPoly":
        if p.d != self.d:
            raise ShapeMismatch("variable counts differ")
        exact = self.exact and p.exact
        terms: dict[Exponent, np.ndarray] = {}
        for e1, m in self._terms.items():
            mat = m if exact else complex_array(m)
            for e2, c in p.terms.items():
                coeff = c if exact else complex(c)
                exp = tuple(x + y for x, y in zip(e1, e2))
                prod = mat * coeff
                if exp in terms:
                    terms[exp] = terms[exp] + prod
                else:
                    terms[exp] = prod
        return MatrixPoly(self.d, self.rows, self.cols, terms, exact=exact)

    def scale(self, scalar) -> "MatrixPoly":
        exact = self.exact and is_exact_scalar(scalar)
        if exact:
            scalar = as_exact(scalar)
            return MatrixPoly(self.d, self.rows, self.cols,
                              {e: m * scalar for e, m in self._terms.items()},
                              exact=True)
        scalar = complex(scalar)
        return MatrixPoly(self.d, self.rows, self.cols,
                          {e: complex_array(m) * scalar for e, m in self._terms.items()},
                          exact=False)

    def right_multiply(self, mat: np.ndarray) -> "MatrixPoly":
        """Multiply every coefficient on the right by a constant matrix."""
        mat = np.asarray(mat)
        if mat.shape[0] != self.cols:
            raise ShapeMismatch("inner dimensions do not match")
        exact = self.exact and mat.dtype == object
        terms = {}
        for exp, m in self._terms.items():
            a = m if exact else complex_array(m)
            b = mat if exact else complex_array(mat)
            terms[exp] = a @ b
        return MatrixPoly(self.d, self.rows, mat.shape[1], terms, exact=exact)

    def __eq__(self, other):
        if not isinstance(other, MatrixPoly):
            return NotImplemented
        if (self.d, self.shape) != (other.d, other.shape):
            return False
        if set(self._terms) != set(other._terms):
            return False
        for exp, m in self._terms.items():
            n = other._terms[exp]
            if m.dtype == object or n.dtype == object:
                if any(a != b for a, b in zip(m.flat, n.flat)):
                    return False
            elif not np.array_equal(m, n):
                return False
        return True

    def __repr__(self):
        return (f"MatrixPoly(d={self.d}, shape={self.shape}, "
                f"nterms={len(self._terms)}, exact={self.exact})")

    # -- calculus / structure -------------------------------------------------
    def partial_derivative(self, var: int) -> "MatrixPoly":
        terms: dict[Exponent, np.ndarray] = {}
        for exp, mat in self._terms.items():
            k = exp[var]
            if k == 0:
                continue
            new = list(exp)
            new[var] = k - 1
            terms[tuple(new)] = mat * (as_exact(k) if self.exact else float(k))
        return MatrixPoly(self.d, self.rows, self.cols, terms, exact=self.exact)

    def herm_reflect(self) -> "MatrixPoly":
        """z -> P(conj(z))^*: conjugate-transposes every coefficient."""
        terms = {e: conj_transpose(m) for e, m in self._terms.items()}
        return MatrixPoly(self.d, self.cols, self.rows, terms, exact=self.exact)

    def degrees(self) -> tuple[int, ...]:
        degs = [0] * self.d
        for exp in self._terms:
            for k, e in enumerate(exp):
                if e > degs[k]:
                    degs[k] = e
        return tuple(degs)

    def degree_in(self, var: int) -> int:
        return max((exp[var] for exp in self._terms), default=0)

    def total_degree(self) -> int:
        return max((sum(exp) for exp in self._terms), default=0)

    def variables_present(self) -> tuple[int, ...]:
        return tuple(k for k, deg in enumerate(self.degrees()) if deg > 0)

    def __call__(self, point: Sequence[complex]) -> np.ndarray:
        return self.eval(point)

    def eval(self, point: Sequence[complex]) -> np.ndarray:
        point = [complex(p) for p in point]
        if len(point) != self.d:
            raise ShapeMismatch(f"point has {len(point)} coordinates, expected {self.d}")
        total = np.zeros((self.rows, self.cols), dtype=complex)
        for exp, mat in self._terms.items():
            mono = 1 + 0j
            for p, e in zip(point, exp):
                if e:
                    mono *= p ** e
            total += complex_array(mat) * mono
        return total

    def to_float(self) -> "MatrixPoly":
        if not self.exact:
            return self
        return MatrixPoly(self.d, self.rows, self.cols,
                          {e: complex_array(m) for e, m in self._terms.items()},
                          exact=False)

    def substitute(self, var: int, value) -> "MatrixPoly":
        exact = self.exact and is_exact_scalar(value)
        value = as_exact(value) if exact else complex(value)
        terms: dict[Exponent, np.ndarray] = {}
        for exp, mat in self._terms.items():
            k = exp[var]
            factor = value ** k if k else (QQI_ONE if exact else 1.0)
            new = list(exp)
            new[var] = 0
            new = tuple(new)
            add = (mat if exact else complex_array(mat)) * factor
            if new in terms:
                terms[new] = terms[new] + add
            else:
                terms[new] = add
        return MatrixPoly(self.d, self.rows, self.cols, terms, exact=exact)

    def identify_variables(self, groups: Sequence[Sequence[int]]) -> "MatrixPoly":
        _check_partition(groups, self.d)
        terms: dict[Exponent, np.ndarray] = {}
        for exp, mat in self._terms.items():
            new = tuple(sum(exp[j] for j in group) for group in groups)
            if new in terms:
                terms[new] = terms[new] + mat
            else:
                terms[new] = mat
        return MatrixPoly(len(groups), self.rows, self.cols, terms, exact=self.exact)

    def embed(self, new_d: int, position: int) -> "MatrixPoly":
        pad_left = position
        pad_right = new_d - self.d - position
        if pad_left < 0 or pad_right < 0:
            raise ShapeMismatch("embedding does not fit")
        terms = {(0,) * pad_left + exp + (0,) * pad_right: m
                 for exp, m in self._terms.items()}
        return MatrixPoly(new_d, self.rows, self.cols, terms, exact=self.exact)

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> "MatrixPoly":
        row_idx = list(row_idx)
        col_idx = list(col_idx)
        terms = {}
        for exp, mat in self._terms.items():
            terms[exp] = mat[np.ix_(row_idx, col_idx)]
        return MatrixPoly(self.d, len(row_idx), len(col_idx), terms, exact=self.exact)

    def permute(self, order: Sequence[int]) -> "MatrixPoly":
        """Simultaneous row/column permutation (square polynomials only)."""
        if self.rows != self.cols:
            raise ShapeMismatch("permute requires a square polynomial")
        return self.submatrix(order, order)


PolyLike = Union[ScalarPoly, MatrixPoly]


def _check_partition(groups: Sequence[Sequence[int]], d: int) -> None:
    seen = sorted(j for group in groups for j in group)
    if seen != list(range(d)):
        raise ShapeMismatch(f"groups {groups} do not partition 0..{d - 1}")


def block_matrix(blocks: Sequence[Sequence[MatrixPoly | None]]) -> MatrixPoly:
    """Assemble a MatrixPoly from a 2D grid of blocks (None means zero).

    Row heights / column widths are inferred from the non-None entries;
    every row and column must contain at least one block.
    """
    nrows = len(blocks)
    ncols = len(blocks[0])
    d = None
    heights = [None] * nrows
    widths = [None] * ncols
    exact = True
    for i, row in enumerate(blocks):
        if len(row) != ncols:
            raise ShapeMismatch("ragged block grid")
        for j, blk in enumerate(row):
            if blk is None:
                continue
            d = blk.d if d is None else d
            if blk.d != d:
                raise ShapeMismatch("blocks disagree on variable count")
            if heights[i] is None:
                heights[i] = blk.rows
            elif heights[i] != blk.rows:
                raise ShapeMismatch(f"row {i} has inconsistent heights")
            if widths[j] is None:
                widths[j] = blk.cols
            elif widths[j] != blk.cols:
                raise ShapeMismatch(f"column {j} has inconsistent widths")
            exact = exact and blk.exact
    if d is None or any(h is None for h in heights) or any(w is None for w in widths):
        raise ShapeMismatch("every block row and column needs a non-empty entry")
    row_off = np.concatenate([[0], np.cumsum(heights)]).astype(int)
    col_off = np.concatenate([[0], np.cumsum(widths)]).astype(int)
    total_r, total_c = int(row_off[-1]), int(col_off[-1])

    terms: dict[Exponent, np.ndarray] = {}
    for i, row in enumerate(blocks):
        for j, blk in enumerate(row):
            if blk is None:
                continue
            for exp, mat in blk.terms.items():
                if exp not in terms:
                    terms[exp] = exact_zeros(total_r, total_c) if exact else \
                        np.zeros((total_r, total_c), dtype=complex)
                tgt = terms[exp]
                sub = mat if exact else complex_array(mat)
                tgt[row_off[i]:row_off[i + 1], col_off[j]:col_off[j + 1]] = sub
    return MatrixPoly(d, total_r, total_c, terms, exact=exact)


class RationalMatrixFunction:
    """Rational matrix function ``f = P / q`` with square numerator."""

    __slots__ = ("numerator", "denominator")

    def __init__(self, numerator: MatrixPoly, denominator: ScalarPoly):
        if numerator.rows != numerator.cols:
            raise ShapeMismatch("numerator must be square")
        if numerator.d != denominator.d:
            raise ShapeMismatch("numerator and denominator disagree on variables")
        if denominator.is_zero():
            raise ShapeMismatch("denominator is identically zero")
        self.numerator = numerator
        self.denominator = denominator

    # -- views ---------------------------------------------------------------
    @property
    def d(self) -> int:
        return self.numerator.d

    @property
    def m(self) -> int:
        return self.numerator.rows

    @property
    def exact(self) -> bool:
        return self.numerator.exact and self.denominator.exact

    @classmethod
    def from_scalar(cls, num: ScalarPoly, den: ScalarPoly) -> "RationalMatrixFunction":
        return cls(MatrixPoly.from_scalar(num), den)

    def pole_tolerance(self) -> float:
        return 1e-8 * (1.0 + self.denominator.max_abs_coeff())

    def eval(self, point: Sequence[complex]) -> np.ndarray:
        qv = self.denominator.eval(point)
        if abs(qv) < self.pole_tolerance():
            raise PoleProximity(f"denominator magnitude {abs(qv):.3e} at {point}")
        return self.numerator.eval(point) / qv

    def __call__(self, point: Sequence[complex]) -> np.ndarray:
        return self.eval(point)

    def degrees(self) -> tuple[int, ...]:
        return tuple(max(a, b) for a, b in
                     zip(self.numerator.degrees(), self.denominator.degrees()))

    def is_multi_affine(self) -> bool:
        return all(deg <= 1 for deg in self.degrees())

    def is_constant(self) -> bool:
        return self.numerator.is_constant() and self.denominator.is_constant()

    def constant_value(self) -> np.ndarray:
        num = complex_array(self.numerator.constant_value())
        den = complex(self.denominator.constant_value())
        return num / den

    def substitute(self, var: int, value) -> "RationalMatrixFunction":
        return RationalMatrixFunction(self.numerator.substitute(var, value),
                                      self.denominator.substitute(var, value))

    def identify_variables(self, groups: Sequence[Sequence[int]]) -> "RationalMatrixFunction":
        return RationalMatrixFunction(self.numerator.identify_variables(groups),
                                      self.denominator.identify_variables(groups))

    def scale_common(self, scalar) -> "RationalMatrixFunction":
        """Scale numerator and denominator by the same factor (value unchanged)."""
        return RationalMatrixFunction(self.numerator.scale(scalar),
                                      self.denominator.scale(scalar))

    def to_float(self) -> "RationalMatrixFunction":
        return RationalMatrixFunction(self.numerator.to_float(),
                                      self.denominator.to_float())

    def __eq__(self, other):
        if not isinstance(other, RationalMatrixFunction):
            return NotImplemented
        return self.numerator == other.numerator and self.denominator == other.denominator

    def __repr__(self):
        return (f"RationalMatrixFunction(m={self.m}, d={self.d}, "
                f"num_terms={len(self.numerator.terms)}, "
                f"den_terms={len(self.denominator.terms)})")


# -- free-function façade ------------------------------------------------------

def add(a: PolyLike, b: PolyLike) -> PolyLike:
    """Coefficient-wise sum; operands must share variable count and shape."""
    result = a + b
    if result is NotImplemented:
        raise ShapeMismatch(f"cannot add {type(a).__name__} and {type(b).__name__}")
    return result


def mul(a, b):
    """Product with scalar*scalar, scalar*matrix and matrix*matrix dispatch."""
    result = a * b
    if result is NotImplemented:
        raise ShapeMismatch(f"cannot multiply {type(a).__name__} and {type(b).__name__}")
    return result


def partial_derivative(p: PolyLike, var: int) -> PolyLike:
    return p.partial_derivative(var)


def conj_reflect_scalar(q: ScalarPoly) -> ScalarPoly:
    return q.conj_reflect()


def herm_reflect_matrix(P: MatrixPoly) -> MatrixPoly:
    return P.herm_reflect()


def evaluate(p, point):
    return p.eval(point)


def wronskian(q: ScalarPoly, P: MatrixPoly, var: int) -> MatrixPoly:
    """q * dP/dz_var - P * dq/dz_var."""
    if P.rows != P.cols:
        raise ShapeMismatch("wronskian requires a square matrix polynomial")
    return P.partial_derivative(var) * q - P * q.partial_derivative(var)


def degrees_per_variable(p) -> tuple[int, ...]:
    return p.degrees()


def is_multi_affine(f: RationalMatrixFunction) -> bool:
    return f.is_multi_affine()


def identify_variables(p, groups: Sequence[Sequence[int]]):
    return p.identify_variables(groups)


def coefficient_split(p: PolyLike, var: int):
    """Write an affine-in-var polynomial as ``z_var * p1 + p2``.

    Both parts keep the full variable slot layout (exponent 0 in ``var``).
    """
    if p.degree_in(var) > 1:
        raise ShapeMismatch(f"polynomial has degree {p.degree_in(var)} > 1 in variable {var}")
    if isinstance(p, ScalarPoly):
        hi: dict[Exponent, object] = {}
        lo: dict[Exponent, object] = {}
        for exp, c in p.terms.items():
            if exp[var]:
                new = list(exp)
                new[var] = 0
                hi[tuple(new)] = c
            else:
                lo[exp] = c
        return (ScalarPoly(p.d, hi, exact=p.exact), ScalarPoly(p.d, lo, exact=p.exact))
    hi_m: dict[Exponent, np.ndarray] = {}
    lo_m: dict[Exponent, np.ndarray] = {}
    for exp, m in p.terms.items():
        if exp[var]:
            new = list(exp)
            new[var] = 0
            hi_m[tuple(new)] = m
        else:
            lo_m[exp] = m
    return (MatrixPoly(p.d, p.rows, p.cols, hi_m, exact=p.exact),
            MatrixPoly(p.d, p.rows, p.cols, lo_m, exact=p.exact))
