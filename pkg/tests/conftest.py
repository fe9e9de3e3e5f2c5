import pathlib

import numpy as np
import pytest

from pickrealize import serialize
from pickrealize.exact import QQi
from pickrealize.poly import MatrixPoly, RationalMatrixFunction, ScalarPoly, block_matrix

CORPUS_DIR = pathlib.Path(__file__).parent / "corpus"

# corpus members with real-point symmetry (Hermitian realization expected)
SYMMETRIC_MEMBERS = {"z1", "neg_inv_z1", "z1_plus_z2", "neg_inv_z1_plus_z2",
                     "moebius_z1z2", "diag_z1_z2"}
LIFTED_MEMBERS = {"const_i", "i_plus_z1"}


def scalar_fn(num: ScalarPoly, den: ScalarPoly) -> RationalMatrixFunction:
    return RationalMatrixFunction(MatrixPoly.from_scalar(num), den)


def upper_points(d: int, count: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.standard_cauchy((count, d)) + 1j * rng.exponential(1.0, (count, d))


def real_points(d: int, count: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.standard_cauchy((count, d))


@pytest.fixture(scope="session")
def corpus() -> dict[str, RationalMatrixFunction]:
    out = {}
    for path in sorted(CORPUS_DIR.glob("*.json")):
        out[path.stem] = serialize.function_from_json(
            serialize.loads_file(str(path)), where=path.name)
    assert set(out) == SYMMETRIC_MEMBERS | LIFTED_MEMBERS
    return out


@pytest.fixture
def z_one():
    return scalar_fn(ScalarPoly.variable(1, 0), ScalarPoly.one(1))
