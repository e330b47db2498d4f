"""Exact arithmetic in prime fields GF(q) for word-sized q.

Elements are plain ints kept as canonical residues in [0, q); the
modulus lives in a :class:`Field` context object, not on each element.
A Field may carry an :class:`OpCounter`, in which case multiplications
and additions performed through it are tallied.  All operation
accounting in the package bottoms out here.

Moduli are restricted to primes below 2**61 so that every product fits
a 128-bit intermediate.  Inverses go through the extended Euclidean
algorithm (no counted multiplications, and exact for q = 2).

Serialization conventions: field elements are decimal strings in JSON
and 8-byte big-endian unsigned integers on the wire.

Randomness comes from :class:`Rng`, a splitmix64 stream.  The generator
is pinned (constants below) so that two runs, or two implementations,
sharing a seed produce identical transcripts; with no seed it boots
from OS entropy, which is the default for key generation.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .errors import InvalidParams, ZeroInverse

MAX_MODULUS_BITS = 61

_U64 = 0xFFFFFFFFFFFFFFFF

# Deterministic Miller-Rabin witnesses; exact for n < 3.317e24 > 2**61.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic primality test for n < 2**64."""
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d = n - 1
    r = (d & -d).bit_length() - 1
    d >>= r
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass
class OpCounter:
    """Tally of counted field operations.

    Counts only grow while a counter is attached to a Field; callers
    confine a counter to one logical task (no internal locking).
    """

    mul_count: int = 0
    add_count: int = 0


class Rng:
    """splitmix64 pseudorandom stream.

    State update: ``s += 0x9E3779B97F4A7C15`` (mod 2**64); output is the
    new state mixed with the constants 0xBF58476D1CE4E5B9 (xor-shift 30)
    and 0x94D049BB133111EB (xor-shift 27), then xor-shift 31.  Bounded
    draws reject words at or above the largest multiple of the bound, so
    they are exactly uniform.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int | None = None):
        if seed is None:
            seed = int.from_bytes(os.urandom(8), "big")
        self.state = seed & _U64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _U64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _U64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _U64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform draw from [0, n) by rejection on 64-bit words."""
        if n <= 0:
            raise ValueError("bound must be positive")
        threshold = (1 << 64) - ((1 << 64) % n)
        while True:
            w = self.next_u64()
            if w < threshold:
                return w % n


class Field:
    """Arithmetic context for GF(q).

    All methods are total on canonical residues.  ``mul`` bumps the
    attached counter's mul_count; ``add`` and ``sub`` bump add_count.
    Negation and inversion are not counted.
    """

    __slots__ = ("q", "counter")

    def __init__(self, q: int, counter: OpCounter | None = None):
        if q < 2 or q.bit_length() > MAX_MODULUS_BITS or not is_prime(q):
            raise InvalidParams(f"modulus must be a prime in [2, 2**61), got {q}")
        self.q = q
        self.counter = counter

    def add(self, a: int, b: int) -> int:
        if self.counter is not None:
            self.counter.add_count += 1
        s = a + b
        return s - self.q if s >= self.q else s

    def sub(self, a: int, b: int) -> int:
        if self.counter is not None:
            self.counter.add_count += 1
        s = a - b
        return s + self.q if s < 0 else s

    def neg(self, a: int) -> int:
        return self.q - a if a else 0

    def mul(self, a: int, b: int) -> int:
        if self.counter is not None:
            self.counter.mul_count += 1
        return a * b % self.q

    def inv(self, a: int) -> int:
        """Inverse by extended Euclid; raises ZeroInverse for a = 0."""
        if a == 0:
            raise ZeroInverse(f"0 has no inverse mod {self.q}")
        old_r, r = a, self.q
        old_s, s = 1, 0
        while r:
            quot = old_r // r
            old_r, r = r, old_r - quot * r
            old_s, s = s, old_s - quot * s
        return old_s % self.q

    def pow(self, a: int, e: int) -> int:
        """a**e by left-to-right square-and-multiply; 0**0 = 1.

        Uses at most 2*floor(log2 e) counted multiplications for e >= 1
        (bit_length - 1 squarings plus popcount - 1 extra multiplies).
        """
        if e < 0:
            raise ValueError("exponent must be non-negative")
        if e == 0:
            return 1 % self.q
        acc = a
        for bit in bin(e)[3:]:
            acc = self.mul(acc, acc)
            if bit == "1":
                acc = self.mul(acc, a)
        return acc

    def sample(self, rng: Rng) -> int:
        """Uniform residue in [0, q)."""
        return rng.below(self.q)

    def __repr__(self) -> str:
        return f"Field({self.q})"
