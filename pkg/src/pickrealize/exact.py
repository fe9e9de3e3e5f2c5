"""Exact Gaussian-rational scalars and small helpers for mixed-mode arrays.

Symbolic pipeline steps run on `QQi` coefficients (pairs of arbitrary
precision rationals) so that structural tests like "this polynomial is
identically zero" are decided exactly.  Floating complex numbers enter only
through the semidefinite solver and through point evaluation; mixing a QQi
with a float silently demotes the result to `complex`.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

_RAT_TYPES = (int, Fraction)


class QQi:
    """Gaussian rational ``re + im*i`` with exact :class:`Fraction` parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)

    # -- ring operations ----------------------------------------------------
    def __add__(self, other):
        if isinstance(other, QQi):
            return QQi(self.re + other.re, self.im + other.im)
        if isinstance(other, _RAT_TYPES):
            return QQi(self.re + other, self.im)
        if isinstance(other, (float, complex)):
            return complex(self) + other
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return QQi(-self.re, -self.im)

    def __sub__(self, other):
        if isinstance(other, QQi):
            return QQi(self.re - other.re, self.im - other.im)
        if isinstance(other, _RAT_TYPES):
            return QQi(self.re - other, self.im)
        if isinstance(other, (float, complex)):
            return complex(self) - other
        return NotImplemented

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, QQi):
            return QQi(self.re * other.re - self.im * other.im,
                       self.re * other.im + self.im * other.re)
        if isinstance(other, _RAT_TYPES):
            return QQi(self.re * other, self.im * other)
        if isinstance(other, (float, complex)):
            return complex(self) * other
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, _RAT_TYPES):
            other = QQi(other)
        if isinstance(other, QQi):
            den = other.re * other.re + other.im * other.im
            if den == 0:
                raise ZeroDivisionError("division by zero Gaussian rational")
            return QQi((self.re * other.re + self.im * other.im) / den,
                       (self.im * other.re - self.re * other.im) / den)
        if isinstance(other, (float, complex)):
            return complex(self) / other
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, _RAT_TYPES):
            return QQi(other).__truediv__(self)
        if isinstance(other, (float, complex)):
            return other / complex(self)
        return NotImplemented

    def __pow__(self, exponent):
        if not isinstance(exponent, int) or exponent < 0:
            return NotImplemented
        result = QQi(1)
        base = self
        k = exponent
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # -- structure ----------------------------------------------------------
    def conjugate(self) -> "QQi":
        return QQi(self.re, -self.im)

    def abs2(self) -> Fraction:
        """Exact squared modulus."""
        return self.re * self.re + self.im * self.im

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __abs__(self) -> float:
        return abs(complex(self))

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __eq__(self, other) -> bool:
        if isinstance(other, QQi):
            return self.re == other.re and self.im == other.im
        if isinstance(other, _RAT_TYPES):
            return self.im == 0 and self.re == other
        if isinstance(other, (float, complex)):
            return complex(self) == complex(other)
        return NotImplemented

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __repr__(self):
        if self.im == 0:
            return f"QQi({self.re})"
        return f"QQi({self.re}, {self.im})"


QQI_ZERO = QQi(0)
QQI_ONE = QQi(1)
QQI_I = QQi(0, 1)


def as_exact(value) -> QQi:
    """Coerce an int/Fraction/QQi to QQi; reject floats to protect exactness."""
    if isinstance(value, QQi):
        return value
    if isinstance(value, _RAT_TYPES):
        return QQi(value)
    raise TypeError(f"cannot treat {type(value).__name__} as an exact scalar")


def is_exact_scalar(value) -> bool:
    return isinstance(value, (QQi, *_RAT_TYPES))


def to_complex(value) -> complex:
    return complex(value)


def exact_zeros(rows: int, cols: int) -> np.ndarray:
    """Object array of QQi zeros (shape may be degenerate)."""
    out = np.empty((rows, cols), dtype=object)
    for i in range(rows):
        for j in range(cols):
            out[i, j] = QQI_ZERO
    return out


def exact_matrix(entries) -> np.ndarray:
    """Object array of QQi built from a nested sequence of exact scalars."""
    entries = list(entries)
    rows = len(entries)
    cols = len(entries[0]) if rows else 0
    out = np.empty((rows, cols), dtype=object)
    for i, row in enumerate(entries):
        for j, val in enumerate(row):
            out[i, j] = as_exact(val)
    return out


def is_exact_array(mat: np.ndarray) -> bool:
    return mat.dtype == object


def complex_array(mat: np.ndarray) -> np.ndarray:
    """Convert an exact or complex matrix to complex128."""
    if mat.dtype == object:
        out = np.empty(mat.shape, dtype=complex)
        for idx, val in np.ndenumerate(mat):
            out[idx] = complex(val)
        return out
    return np.asarray(mat, dtype=complex)


def conj_transpose(mat: np.ndarray) -> np.ndarray:
    """Conjugate transpose for exact object arrays and complex arrays alike."""
    if mat.dtype == object:
        rows, cols = mat.shape
        out = np.empty((cols, rows), dtype=object)
        for i in range(rows):
            for j in range(cols):
                out[j, i] = mat[i, j].conjugate()
        return out
    return mat.conj().T


def matrix_is_zero(mat: np.ndarray, tol: float = 0.0) -> bool:
    if mat.size == 0:
        return True
    if mat.dtype == object:
        return all(not bool(v) for v in mat.flat)
    return bool(np.max(np.abs(mat)) <= tol)


def max_abs(mat: np.ndarray) -> float:
    if mat.size == 0:
        return 0.0
    if mat.dtype == object:
        return max(abs(v) for v in mat.flat)
    return float(np.max(np.abs(mat)))
