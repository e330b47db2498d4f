"""Toy Diffie-Hellman over GF(p), used as the operation-count baseline.

Word-sized moduli only: this module exists so the matrix scheme's
derivation cost (a single matrix-vector product) can be put side by
side with square-and-multiply exponentiation, counted multiplication
for counted multiplication.  It provides no security margin and is not
meant to.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidParams, InvalidPublic
from .gf import Field, OpCounter, Rng, is_prime


@dataclass(frozen=True)
class DhParams:
    p: int
    g: int

    def __post_init__(self):
        Field(self.p)  # prime, word-sized
        if not 2 <= self.g <= self.p - 1:
            raise InvalidParams(f"generator must lie in [2, p-1], got {self.g}")
        # Best-effort generator check, only decisive for safe primes
        # p = 2r+1: reject g with g^r = 1 (confined to the index-2
        # subgroup).
        half = (self.p - 1) // 2
        if is_prime(half) and pow(self.g, half, self.p) == 1:
            raise InvalidParams(f"{self.g} generates a subgroup of order dividing {half}")


def dh_keygen(
    params: DhParams, rng: Rng, counter: OpCounter | None = None
) -> tuple[int, int]:
    """Uniform exponent in [2, p-2] and the matching public value."""
    if params.p < 5:
        raise InvalidParams(f"modulus {params.p} leaves no room for exponents")
    field = Field(params.p, counter)
    exponent = 2 + rng.below(params.p - 3)
    return exponent, field.pow(params.g, exponent)


def dh_shared(
    params: DhParams,
    exponent: int,
    peer_public: int,
    counter: OpCounter | None = None,
) -> int:
    """peer_public**exponent mod p by square-and-multiply."""
    if not 1 <= peer_public <= params.p - 1:
        raise InvalidPublic(f"public value {peer_public} outside [1, p-1]")
    field = Field(params.p, counter)
    return field.pow(peer_public, exponent)
