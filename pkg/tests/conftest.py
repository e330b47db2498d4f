import pytest

from commkex.commutant import RingSample, ShiftPoly
from commkex.kex import Params, private_key_from_coeffs, public_key
from commkex.linalg import Matrix

# Shapes the whole suite samples over: primes crossed with (k, d).
TEST_PRIMES = [2, 7, 13, 101, 1009]
GRID_PRIMES = [7, 101, 2147483647]
GRID_SHAPES = [(1, 2), (2, 2), (3, 2), (1, 3), (2, 3), (3, 3)]
GRID_DEGREES = [1, 3]


@pytest.fixture
def micro_params():
    """The hand-checkable q=7, k=1, d=2 instance used throughout."""
    base = Matrix.from_rows([[1, 1], [0, 1]])
    return Params(7, 1, 2, 1, [1, 2], RingSample(base))


@pytest.fixture
def micro_keys(micro_params):
    """Key pair (2*I + 3*base, I + base) with known public keys."""
    sk_a = private_key_from_coeffs(micro_params, [ShiftPoly((2,)), ShiftPoly((3,))])
    sk_b = private_key_from_coeffs(micro_params, [ShiftPoly((1,)), ShiftPoly((1,))])
    return sk_a, public_key(micro_params, sk_a), sk_b, public_key(micro_params, sk_b)
