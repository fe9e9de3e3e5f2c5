"""Containers for the three realization forms and their evaluation.

All three forms share the constant block matrix ``H = [[A, B], [C, D]]``
partitioned at the function size ``m``:

* resolvent form       ``f(z) = A - B (D + Z_n)^{-1} C`` with
  ``Z_n = diag(0_{n0}, z_1 I_{n1}, ..., z_d I_{nd})``;
* transfer form        ``f(z) = A + B Z_n (I - D Z_n)^{-1} C`` with
  ``Z_n = diag(I_{n0}, z_1 I_{n1}, ..., z_d I_{nd})``;
* pencil form          ``f(z) = M_{11}(z) - M_{12}(z) M_{22}(z)^{-1} M_{21}(z)``
  for ``M(z) = H + sum_k z_k A_k`` with diagonal 0/1 projectors ``A_k``.

Evaluation always goes through a dense linear solve, never an explicit
inverse.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, ShapeMismatch, SingularAtPoint
from .poly import RationalMatrixFunction

COND_LIMIT = 1e12


@dataclass(frozen=True)
class BlockStructure:
    """Sizes of the constant block and the per-variable diagonal blocks."""

    n0: int
    blocks: tuple[int, ...]

    def __post_init__(self):
        if self.n0 < 0 or any(b < 0 for b in self.blocks):
            raise ShapeMismatch("block sizes must be nonnegative")

    @property
    def n(self) -> int:
        return self.n0 + sum(self.blocks)

    @property
    def nvars(self) -> int:
        return len(self.blocks)

    def z_diagonal(self, point: Sequence[complex], constant_value: complex) -> np.ndarray:
        """Diagonal of Z_n with the given value on the constant block."""
        point = [complex(p) for p in point]
        if len(point) < self.nvars:
            raise ShapeMismatch(f"point has {len(point)} coordinates, "
                                f"need {self.nvars}")
        diag = [constant_value] * self.n0
        for size, z in zip(self.blocks, point):
            diag.extend([z] * size)
        return np.array(diag, dtype=complex)

    def variable_slice(self, var: int, offset: int = 0) -> slice:
        """Index range of variable ``var`` inside the D block (plus offset)."""
        start = self.n0 + sum(self.blocks[:var])
        return slice(offset + start, offset + start + self.blocks[var])

    def to_json(self) -> dict:
        return {"n0": self.n0, "blocks": list(self.blocks)}


def _solve(M: np.ndarray, rhs: np.ndarray, what: str) -> np.ndarray:
    if M.shape[0] == 0:
        return np.zeros((0, rhs.shape[1]), dtype=complex)
    if not np.all(np.isfinite(M)):
        raise SingularAtPoint(f"{what} contains non-finite entries")
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularAtPoint(f"{what} has condition number {cond:.3e}")
    return np.linalg.solve(M, rhs)


@dataclass
class SchurRealization:
    """Resolvent-form realization against ``Z_n = diag(0_{n0}, z_k I)``."""

    H: np.ndarray
    m: int
    structure: BlockStructure
    hermitian: bool = False

    def __post_init__(self):
        self.H = np.asarray(self.H, dtype=complex)
        total = self.m + self.structure.n
        if self.H.shape != (total, total):
            raise ShapeMismatch(f"H has shape {self.H.shape}, expected {(total, total)}")

    @property
    def A(self) -> np.ndarray:
        return self.H[:self.m, :self.m]

    @property
    def B(self) -> np.ndarray:
        return self.H[:self.m, self.m:]

    @property
    def C(self) -> np.ndarray:
        return self.H[self.m:, :self.m]

    @property
    def D(self) -> np.ndarray:
        return self.H[self.m:, self.m:]

    def eval(self, point: Sequence[complex]) -> np.ndarray:
        Z = np.diag(self.structure.z_diagonal(point, 0.0))
        M = self.D + Z
        X = _solve(M, self.C, "D + Z_n")
        return self.A - self.B @ X

    def resolvent_column(self, point: Sequence[complex]) -> np.ndarray:
        """The (m+n) x m column ``(I; -(D+Z)^{-1} C)``."""
        Z = np.diag(self.structure.z_diagonal(point, 0.0))
        X = _solve(self.D + Z, self.C, "D + Z_n")
        return np.vstack([np.eye(self.m, dtype=complex), -X])


@dataclass
class TransferRealization:
    """Transfer-form realization against ``Z_n = diag(I_{n0}, z_k I)``."""

    H: np.ndarray
    m: int
    structure: BlockStructure

    def __post_init__(self):
        self.H = np.asarray(self.H, dtype=complex)
        total = self.m + self.structure.n
        if self.H.shape != (total, total):
            raise ShapeMismatch(f"H has shape {self.H.shape}, expected {(total, total)}")

    A = SchurRealization.A
    B = SchurRealization.B
    C = SchurRealization.C
    D = SchurRealization.D

    def eval(self, point: Sequence[complex]) -> np.ndarray:
        Z = np.diag(self.structure.z_diagonal(point, 1.0))
        n = self.structure.n
        M = np.eye(n, dtype=complex) - self.D @ Z
        X = _solve(M, self.C, "I - D Z_n")
        return self.A + self.B @ (Z @ X)


@dataclass
class PencilRealization:
    """Linear-pencil form ``M(z) = H + sum_k z_k A_k``."""

    H: np.ndarray
    coeffs: tuple[np.ndarray, ...]
    m: int
    structure: BlockStructure

    def __post_init__(self):
        self.H = np.asarray(self.H, dtype=complex)
        self.coeffs = tuple(np.asarray(a, dtype=complex) for a in self.coeffs)
        total = self.m + self.structure.n
        if self.H.shape != (total, total):
            raise ShapeMismatch(f"H has shape {self.H.shape}, expected {(total, total)}")
        for a in self.coeffs:
            if a.shape != self.H.shape:
                raise ShapeMismatch("pencil coefficients must match H in shape")

    def pencil_at(self, point: Sequence[complex]) -> np.ndarray:
        point = [complex(p) for p in point]
        if len(point) < len(self.coeffs):
            raise ShapeMismatch("point has too few coordinates")
        M = self.H.astype(complex).copy()
        for z, a in zip(point, self.coeffs):
            M = M + z * a
        return M

    def eval(self, point: Sequence[complex]) -> np.ndarray:
        M = self.pencil_at(point)
        m = self.m
        X = _solve(M[m:, m:], M[m:, :m], "pencil block M_22")
        return M[:m, :m] - M[:m, m:] @ X

    def resolvent_column(self, point: Sequence[complex]) -> np.ndarray:
        M = self.pencil_at(point)
        m = self.m
        X = _solve(M[m:, m:], M[m:, :m], "pencil block M_22")
        return np.vstack([np.eye(m, dtype=complex), -X])


@dataclass
class LftRep:
    """Linear-fractional value of a coefficient-matrix function.

    Represents ``W(z) = g11(z) - g12(z) (g22(z) + L(z))^{-1} g21(z)`` where
    the coefficient matrix is ``coeff`` split at row/column ``m`` and the
    parameter block ``L`` is diagonal, described by ``params`` as an ordered
    list of ``(variable index or None, size)`` entries (None meaning a zero
    constant block).
    """

    coeff: RationalMatrixFunction
    m: int
    params: tuple[tuple[Optional[int], int], ...] = field(default_factory=tuple)

    def __post_init__(self):
        self.params = tuple((None if v is None else int(v), int(s))
                            for v, s in self.params)
        if self.coeff.m != self.m + self.param_size:
            raise DimensionMismatch(
                f"coefficient matrix is {self.coeff.m} x {self.coeff.m}; "
                f"expected {self.m + self.param_size}")

    @property
    def param_size(self) -> int:
        return sum(s for _, s in self.params)

    def lambda_diagonal(self, point: Sequence[complex]) -> np.ndarray:
        diag = []
        for var, size in self.params:
            val = 0.0 if var is None else complex(point[var])
            diag.extend([val] * size)
        return np.array(diag, dtype=complex)

    def g_blocks(self):
        """Coefficient blocks (g11, g12, g21, g22) as numerator sub-polynomials
        paired with the common denominator."""
        num = self.coeff.numerator
        m = self.m
        t = self.param_size
        idx_top = range(m)
        idx_bot = range(m, m + t)
        return (num.submatrix(idx_top, idx_top), num.submatrix(idx_top, idx_bot),
                num.submatrix(idx_bot, idx_top), num.submatrix(idx_bot, idx_bot),
                self.coeff.denominator)

    def eval(self, point: Sequence[complex]) -> np.ndarray:
        V = self.coeff.eval(point)
        m = self.m
        if self.param_size == 0:
            return V[:m, :m]
        L = np.diag(self.lambda_diagonal(point))
        M = V[m:, m:] + L
        X = _solve(M, V[m:, :m], "g22 + Lambda")
        return V[:m, :m] - V[:m, m:] @ X


def eval_realization(r, point: Sequence[complex]) -> np.ndarray:
    """Evaluate any realization form at a point by a dense linear solve."""
    if isinstance(r, (SchurRealization, TransferRealization, PencilRealization, LftRep)):
        return r.eval(point)
    raise TypeError(f"not a realization: {type(r).__name__}")
