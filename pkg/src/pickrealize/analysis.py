"""Membership tests: sampling falsification and certificates.

A function belongs to the Pick class when its imaginary part
``(f(z) - f(z)^*)/2i`` is PSD throughout the upper poly-half-plane.  Sampling
can only ever falsify membership; certificates come from the partial
Wronskian criterion for multi-affine functions with real-point symmetry
(all ``W_k = q dP/dz_k - P dq/dz_k`` PSD, established here via SOS
factorization), or downstream from a successful realization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import PoleProximity, SolverStalled
from .poly import RationalMatrixFunction, wronskian
from .sos import SOSFactor, sos_factor

CERTIFIED_CAYLEY_INNER = "CertifiedCayleyInner"
CERTIFIED_PICK_VIA_REALIZATION = "CertifiedPickViaRealization"
FALSIFIED = "Falsified"
INCONCLUSIVE = "Inconclusive"

EIG_TOL = 1e-9


@dataclass
class PickVerdict:
    status: str
    witness: dict | None = None
    certificates: list[SOSFactor] | None = None
    report: str = ""

    @property
    def certified(self) -> bool:
        return self.status in (CERTIFIED_CAYLEY_INNER, CERTIFIED_PICK_VIA_REALIZATION)


def sample_upper_halfplane(rng: np.random.Generator, d: int, count: int) -> np.ndarray:
    """Points of the upper poly-half-plane: Cauchy real parts probe behavior
    near infinity, Exp(1) imaginary parts stay strictly above the boundary."""
    re = rng.standard_cauchy((count, d))
    im = rng.exponential(1.0, (count, d))
    return re + 1j * im


def sample_real_points(rng: np.random.Generator, d: int, count: int) -> np.ndarray:
    return rng.standard_cauchy((count, d))


def imag_part_min_eig(value: np.ndarray) -> tuple[float, float]:
    """Smallest eigenvalue of (V - V*)/2i together with the matrix scale."""
    M = (value - value.conj().T) / 2j
    M = (M + M.conj().T) / 2.0
    vals = np.linalg.eigvalsh(M)
    scale = float(np.max(np.abs(vals))) if vals.size else 0.0
    return float(vals[0]) if vals.size else 0.0, scale


def sample_pick(f: RationalMatrixFunction, n_samples: int = 200, seed: int = 42,
                tol: float = EIG_TOL) -> PickVerdict:
    """Evaluate the imaginary part at random points; Falsified on a negative
    eigenvalue, Inconclusive otherwise.  Points too close to a pole are
    redrawn, with at most a tenfold oversampling budget."""
    rng = np.random.default_rng(seed)
    tested = 0
    drawn = 0
    while tested < n_samples and drawn < 10 * n_samples:
        batch = sample_upper_halfplane(rng, f.d, min(n_samples - tested, n_samples))
        drawn += batch.shape[0]
        for z in batch:
            try:
                value = f.eval(z)
            except PoleProximity:
                continue
            tested += 1
            lam, scale = imag_part_min_eig(value)
            if lam < -tol * (1.0 + scale):
                witness = {"kind": "imaginary-part",
                           "point": [[float(c.real), float(c.imag)] for c in z],
                           "eigenvalue": lam}
                return PickVerdict(FALSIFIED, witness=witness,
                                   report=f"imaginary part has eigenvalue {lam:.3e} "
                                          f"at a sampled point")
    if tested == 0:
        return PickVerdict(INCONCLUSIVE,
                           report="no pole-free sample points found")
    return PickVerdict(INCONCLUSIVE,
                       report=f"no violation at {tested} sampled points")


def reverify_witness(f: RationalMatrixFunction, witness: dict,
                     tol: float = EIG_TOL) -> bool:
    """Re-evaluate a falsification witness from scratch."""
    point = [complex(re, im) for re, im in witness["point"]]
    if witness["kind"] == "imaginary-part":
        lam, scale = imag_part_min_eig(f.eval(point))
        return lam < -tol * (1.0 + scale)
    if witness["kind"] == "wronskian":
        W = wronskian(f.denominator, f.numerator, witness["variable"])
        value = W.eval(point)
        value = (value + value.conj().T) / 2.0
        vals = np.linalg.eigvalsh(value)
        scale = float(np.max(np.abs(vals))) if vals.size else 0.0
        return float(vals[0]) < -tol * (1.0 + scale)
    raise ValueError(f"unknown witness kind {witness['kind']!r}")


def check_cayley_symmetry(f: RationalMatrixFunction, tol: float = 1e-9
                          ) -> tuple[bool, RationalMatrixFunction]:
    """Test for real-point symmetry after canonical rescaling.

    Numerator and denominator are scaled by the conjugate of the largest
    denominator coefficient, which makes that coefficient real-positive
    without changing the function (both sides pick up the same factor).
    The test then asks for a real-coefficient denominator and Hermitian
    numerator coefficients.
    """
    den = f.denominator
    if f.exact:
        best = max(den.terms.items(), key=lambda kv: (kv[1].abs2(), kv[0]))
        lam = best[1]
    else:
        best = max(den.terms.items(), key=lambda kv: (abs(kv[1]), kv[0]))
        lam = best[1]
    normalized = f.scale_common(lam.conjugate())
    nden = normalized.denominator
    nnum = normalized.numerator
    scale_q = 1.0 + nden.max_abs_coeff()
    if f.exact:
        den_real = all(c.im == 0 for c in nden.terms.values())
    else:
        den_real = all(abs(complex(c).imag) <= tol * scale_q
                       for c in nden.terms.values())
    if not den_real:
        return False, normalized
    scale_p = 1.0 + nnum.max_abs_coeff()
    for mat in nnum.terms.values():
        if nnum.exact:
            herm = all(mat[i, j] == mat[j, i].conjugate()
                       for i in range(nnum.rows) for j in range(nnum.cols))
        else:
            herm = np.max(np.abs(mat - mat.conj().T)) <= tol * scale_p
        if not herm:
            return False, normalized
    return True, normalized


def falsify_wronskian(W, var: int, rng: np.random.Generator,
                      n_samples: int = 64, tol: float = EIG_TOL) -> dict | None:
    """Look for a real point where a Wronskian has a negative eigenvalue."""
    if W.is_zero():
        return None
    for x in sample_real_points(rng, W.d, n_samples):
        value = W.eval(x)
        value = (value + value.conj().T) / 2.0
        vals = np.linalg.eigvalsh(value)
        scale = float(np.max(np.abs(vals))) if vals.size else 0.0
        if vals.size and float(vals[0]) < -tol * (1.0 + scale):
            return {"kind": "wronskian", "variable": var,
                    "point": [[float(c), 0.0] for c in x],
                    "eigenvalue": float(vals[0])}
    return None


def cayley_inner_criterion(f: RationalMatrixFunction, seed: int = 42,
                           n_samples: int = 64, max_iters: int = 20000,
                           tol: float = EIG_TOL) -> PickVerdict:
    """Certify or falsify real-point symmetric multi-affine membership.

    Requires a multi-affine input that already passed the symmetry check.
    Every partial Wronskian is first probed at random real points (cheap
    falsification), then SOS-factored; all factorizations succeeding is the
    certificate.
    """
    if not f.is_multi_affine():
        raise ValueError("criterion applies to multi-affine functions only")
    symmetric, f = check_cayley_symmetry(f)
    if not symmetric:
        raise ValueError("criterion requires real-point symmetry")
    rng = np.random.default_rng(seed)
    certificates: list[SOSFactor] = []
    for var in range(f.d):
        W = wronskian(f.denominator, f.numerator, var)
        witness = falsify_wronskian(W, var, rng, n_samples=n_samples, tol=tol)
        if witness is not None:
            return PickVerdict(FALSIFIED, witness=witness,
                               report=f"Wronskian in variable {var} has eigenvalue "
                                      f"{witness['eigenvalue']:.3e} at a real point")
        try:
            certificates.append(sos_factor(W, max_iters=max_iters))
        except SolverStalled as err:
            return PickVerdict(INCONCLUSIVE,
                               report=f"SOS factorization stalled for variable {var}: {err}")
    return PickVerdict(CERTIFIED_CAYLEY_INNER, certificates=certificates,
                       report=f"all {f.d} Wronskians admit SOS factorizations")
