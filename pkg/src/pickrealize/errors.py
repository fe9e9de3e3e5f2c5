"""Exception types shared across the package."""

from __future__ import annotations


class PickRealizeError(Exception):
    """Base class for all library-specific errors."""


class ShapeMismatch(PickRealizeError):
    """Operands have incompatible variable counts or matrix shapes."""


class PoleProximity(PickRealizeError):
    """Evaluation point is too close to a zero of the denominator."""


class DegreeTooLow(PickRealizeError):
    """Requested substitution order is below the actual degree."""


class DegenerateLift(PickRealizeError):
    """Both halves of the denominator vanish identically; input is malformed."""


class BlockNotFound(PickRealizeError):
    """Realization carries no metadata for the requested diagonal block."""


class NotHermitianStructure(PickRealizeError):
    """Matrix polynomial does not have Hermitian coefficient matrices."""


class SolverStalled(PickRealizeError):
    """Feasibility iteration hit the iteration cap without joint convergence.

    Signals either a target that admits no PSD Gram matrix or a monomial
    basis that is too small.
    """


class ResidualTooLarge(PickRealizeError):
    """Supplied factorization does not reproduce its target within tolerance."""


class InconsistentCase(PickRealizeError):
    """Both halves of a denominator split vanish; no extraction case applies."""


class DimensionMismatch(PickRealizeError):
    """Block dimensions of composed coefficient matrices do not chain."""


class NonConstantTerminal(PickRealizeError):
    """Final coefficient matrix still depends on variables; upstream failure."""


class TerminalNotHermitian(PickRealizeError):
    """Final coefficient matrix is too far from Hermitian to symmetrize."""


class SingularAtPoint(PickRealizeError):
    """Resolvent block is numerically singular at the evaluation point."""


class PickFalsified(PickRealizeError):
    """Input was shown not to belong to the Pick class."""

    def __init__(self, message: str, witness: dict | None = None):
        super().__init__(message)
        self.witness = witness


class InputFormatError(PickRealizeError):
    """A JSON document does not match the expected schema."""
