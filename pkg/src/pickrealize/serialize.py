"""JSON interchange for polynomials, functions, verdicts and realizations.

One schema family is shared by the library and the CLI: UTF-8 JSON, no
NaN/Inf, complex numbers as separate re/im parts.  Exact coefficients are
written as rational strings ("3/4") and accepted on input; plain numbers
deserialize to float mode.  Serialization is deterministic: keys are
sorted, floats use their shortest round-trip form, and negative zeros are
normalized away.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

import numpy as np

from .errors import InputFormatError
from .exact import QQi, complex_array, exact_matrix
from .forms import BlockStructure, PencilRealization, SchurRealization, TransferRealization
from .poly import MatrixPoly, RationalMatrixFunction, ScalarPoly
from .reduction import ReductionPlan
from .sos import SOSFactor

SCHEMA_VERSION = 1


def _clean_float(x: float) -> float:
    x = float(x)
    if not np.isfinite(x):
        raise InputFormatError("non-finite number in output")
    return 0.0 if x == 0.0 else x


def _rational_str(fr: Fraction) -> str:
    return str(fr)


def _coeff_tables(mat: np.ndarray, exact: bool):
    rows, cols = mat.shape
    re: list[list[Any]] = []
    im: list[list[Any]] = []
    for i in range(rows):
        re_row: list[Any] = []
        im_row: list[Any] = []
        for j in range(cols):
            v = mat[i, j]
            if exact:
                re_row.append(_rational_str(v.re))
                im_row.append(_rational_str(v.im))
            else:
                c = complex(v)
                re_row.append(_clean_float(c.real))
                im_row.append(_clean_float(c.imag))
        re.append(re_row)
        im.append(im_row)
    return re, im


def poly_to_json(p: ScalarPoly | MatrixPoly) -> dict:
    if isinstance(p, ScalarPoly):
        p = MatrixPoly.from_scalar(p)
    terms = []
    for exp in sorted(p.terms):
        re, im = _coeff_tables(p.terms[exp], p.exact)
        terms.append({"exp": list(exp), "re": re, "im": im})
    return {"d": p.d, "shape": [p.rows, p.cols], "terms": terms}


def _parse_part(value, where: str):
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as err:
            raise InputFormatError(f"{where}: bad rational string {value!r}: {err}")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InputFormatError(f"{where}: expected number or rational string, "
                               f"got {type(value).__name__}")
    if isinstance(value, float) and not np.isfinite(value):
        raise InputFormatError(f"{where}: non-finite number")
    return value


def poly_from_json(data: dict, where: str = "polynomial") -> MatrixPoly:
    if not isinstance(data, dict):
        raise InputFormatError(f"{where}: expected an object")
    for key in ("d", "shape", "terms"):
        if key not in data:
            raise InputFormatError(f"{where}: missing key {key!r}")
    d = data["d"]
    shape = data["shape"]
    if not (isinstance(d, int) and d >= 0):
        raise InputFormatError(f"{where}.d: expected a nonnegative integer")
    if (not isinstance(shape, list) or len(shape) != 2
            or not all(isinstance(s, int) and s >= 0 for s in shape)):
        raise InputFormatError(f"{where}.shape: expected [rows, cols]")
    rows, cols = shape
    terms = {}
    exact = True
    parsed = []
    for t_idx, term in enumerate(data["terms"]):
        tag = f"{where}.terms[{t_idx}]"
        if not isinstance(term, dict):
            raise InputFormatError(f"{tag}: expected an object")
        exp = term.get("exp")
        if (not isinstance(exp, list) or len(exp) != d
                or not all(isinstance(e, int) and e >= 0 for e in exp)):
            raise InputFormatError(f"{tag}.exp: expected {d} nonnegative integers")
        re = term.get("re")
        im = term.get("im")
        entries = []
        for name, table in (("re", re), ("im", im)):
            if (not isinstance(table, list) or len(table) != rows
                    or any(not isinstance(row, list) or len(row) != cols for row in table)):
                raise InputFormatError(f"{tag}.{name}: expected a {rows}x{cols} table")
        parsed_term = []
        for i in range(rows):
            row_vals = []
            for j in range(cols):
                a = _parse_part(re[i][j], f"{tag}.re[{i}][{j}]")
                b = _parse_part(im[i][j], f"{tag}.im[{i}][{j}]")
                if isinstance(a, float) or isinstance(b, float):
                    exact = False
                row_vals.append((a, b))
            parsed_term.append(row_vals)
        parsed.append((tuple(exp), parsed_term))
    for exp, table in parsed:
        if exact:
            mat = exact_matrix([[QQi(Fraction(a), Fraction(b)) for a, b in row]
                                for row in table])
        else:
            mat = np.array([[complex(float(a), float(b)) for a, b in row]
                            for row in table], dtype=complex)
        if exp in terms:
            raise InputFormatError(f"{where}: duplicate exponent {list(exp)}")
        terms[exp] = mat
    return MatrixPoly(d, rows, cols, terms, exact=exact)


def scalar_from_json(data: dict, where: str = "polynomial") -> ScalarPoly:
    mp = poly_from_json(data, where)
    if mp.shape != (1, 1):
        raise InputFormatError(f"{where}: expected a 1x1 (scalar) polynomial")
    terms = {exp: mat[0, 0] for exp, mat in mp.terms.items()}
    return ScalarPoly(mp.d, terms, exact=mp.exact)


def function_to_json(f: RationalMatrixFunction) -> dict:
    return {"numerator": poly_to_json(f.numerator),
            "denominator": poly_to_json(f.denominator)}


def function_from_json(data: dict, where: str = "function") -> RationalMatrixFunction:
    if not isinstance(data, dict):
        raise InputFormatError(f"{where}: expected an object")
    for key in ("numerator", "denominator"):
        if key not in data:
            raise InputFormatError(f"{where}: missing key {key!r}")
    num = poly_from_json(data["numerator"], f"{where}.numerator")
    den = scalar_from_json(data["denominator"], f"{where}.denominator")
    if num.rows != num.cols:
        raise InputFormatError(f"{where}.numerator: must be square")
    if num.d != den.d:
        raise InputFormatError(f"{where}: numerator and denominator disagree on d")
    if den.is_zero():
        raise InputFormatError(f"{where}.denominator: identically zero")
    return RationalMatrixFunction(num, den)


def _matrix_to_json(M: np.ndarray) -> dict:
    M = np.asarray(M, dtype=complex)
    return {"re": [[_clean_float(v.real) for v in row] for row in M],
            "im": [[_clean_float(v.imag) for v in row] for row in M]}


def _matrix_from_json(data: dict, where: str) -> np.ndarray:
    if not isinstance(data, dict) or "re" not in data or "im" not in data:
        raise InputFormatError(f"{where}: expected an object with re/im tables")
    re = np.asarray(data["re"], dtype=float)
    im = np.asarray(data["im"], dtype=float)
    if re.shape != im.shape:
        raise InputFormatError(f"{where}: re/im shapes differ")
    return re + 1j * im


def factor_to_json(factor: SOSFactor) -> dict:
    return {"phi": poly_to_json(factor.phi),
            "residual": _clean_float(factor.residual),
            "rank": int(factor.rank)}


def plan_to_json(plan: ReductionPlan) -> dict:
    return plan.to_json()


def realization_to_json(r, certificate: dict | None = None) -> dict:
    if isinstance(r, SchurRealization):
        form = "schur"
        hermitian = bool(r.hermitian)
    elif isinstance(r, TransferRealization):
        form = "transfer"
        scale = 1.0 + (float(np.max(np.abs(r.H))) if r.H.size else 0.0)
        hermitian = bool(r.H.size == 0 or
                         float(np.max(np.abs(r.H - r.H.conj().T))) <= 1e-12 * scale)
    elif isinstance(r, PencilRealization):
        form = "pencil"
        scale = 1.0 + (float(np.max(np.abs(r.H))) if r.H.size else 0.0)
        hermitian = bool(r.H.size == 0 or
                         float(np.max(np.abs(r.H - r.H.conj().T))) <= 1e-12 * scale)
    else:
        raise TypeError(f"not a realization: {type(r).__name__}")
    out = {"version": SCHEMA_VERSION,
           "form": form,
           "m": int(r.m),
           "n0": int(r.structure.n0),
           "blocks": [int(b) for b in r.structure.blocks],
           "H": _matrix_to_json(r.H),
           "hermitian": hermitian,
           "certificate": certificate}
    if isinstance(r, PencilRealization):
        out["A"] = [_matrix_to_json(a) for a in r.coeffs]
    return out


def realization_from_json(data: dict, where: str = "realization"):
    if not isinstance(data, dict):
        raise InputFormatError(f"{where}: expected an object")
    for key in ("form", "m", "n0", "blocks", "H"):
        if key not in data:
            raise InputFormatError(f"{where}: missing key {key!r}")
    form = data["form"]
    m = data["m"]
    if not isinstance(m, int) or m < 0:
        raise InputFormatError(f"{where}.m: expected a nonnegative integer")
    blocks = data["blocks"]
    if not isinstance(blocks, list) or not all(isinstance(b, int) and b >= 0 for b in blocks):
        raise InputFormatError(f"{where}.blocks: expected nonnegative integers")
    structure = BlockStructure(int(data["n0"]), tuple(blocks))
    H = _matrix_from_json(data["H"], f"{where}.H")
    if form == "schur":
        return SchurRealization(H, m, structure, hermitian=bool(data.get("hermitian", False)))
    if form == "transfer":
        return TransferRealization(H, m, structure)
    if form == "pencil":
        if "A" not in data:
            raise InputFormatError(f"{where}: pencil form requires key 'A'")
        coeffs = tuple(_matrix_from_json(a, f"{where}.A[{k}]")
                       for k, a in enumerate(data["A"]))
        return PencilRealization(H, coeffs, m, structure)
    raise InputFormatError(f"{where}.form: unknown form {form!r}")


def dumps(obj: Any) -> str:
    """Deterministic JSON text: sorted keys, two-space indent, newline at end."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def loads_file(path: str) -> Any:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise InputFormatError(
            f"{path}: invalid JSON at line {err.lineno} column {err.colno}: {err.msg}")
