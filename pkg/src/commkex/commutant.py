"""Commuting matrix families over GF(q) and the private-key ring.

Two kinds of k x k generator blocks are used, and they commute
pairwise:

  * scalar blocks  mu * I, and
  * Jordan blocks  lambda * I + N,

where N is the upper-shift nilpotent (ones on the first superdiagonal,
N**k = 0).  For k = 1 the shift part is empty and both kinds collapse
to 1x1 scalars.

From these, two families of m x m matrices are built (m = d*k, d >= 2):

  * coefficient embeddings: diag(P, ..., P), d identical copies of an
    upper-triangular Toeplitz block P = sum_j c_j N**j (a ShiftPoly).
    Every such matrix commutes with everything in the second family.
  * block grids: d x d grids of generator blocks.  Grids do NOT
    commute among themselves in general, so products of grids are
    ordered mono-terms.

Sums of scaled mono-terms form a ring.  One fixed element of it, the
public base, is sampled here; private keys are polynomials in the base
with coefficient embeddings as coefficients, which makes any two
private keys commute -- the property the key exchange rides on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import DegenerateRingElement, DimensionMismatch, InvalidDimension
from .gf import Field, Rng
from .linalg import Matrix, mat_add, mat_apply, mat_mul, mat_pow, mat_scale

KIND_SCALAR = "scalar"
KIND_JORDAN = "jordan"


@dataclass(frozen=True)
class GeneratorBlock:
    """A k x k commuting generator: scalar (value*I) or Jordan
    (value*I + N)."""

    kind: str
    value: int
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise InvalidDimension("block size must be at least 1")
        if self.kind not in (KIND_SCALAR, KIND_JORDAN):
            raise InvalidDimension(f"unknown generator kind {self.kind!r}")

    def realize(self, field: Field) -> Matrix:
        k = self.k
        m = Matrix.zero(k, k)
        v = self.value % field.q
        for i in range(k):
            m.entries[i * k + i] = v
        if self.kind == KIND_JORDAN:
            for i in range(k - 1):
                m.entries[i * k + i + 1] = 1
        return m


def shift_nilpotent(k: int) -> Matrix:
    """The k x k upper-shift matrix N (ones on the first superdiagonal)."""
    if k < 1:
        raise InvalidDimension("block size must be at least 1")
    m = Matrix.zero(k, k)
    for i in range(k - 1):
        m.entries[i * k + i + 1] = 1
    return m


@dataclass(frozen=True)
class ShiftPoly:
    """Coefficients (c0, ..., c_{k-1}) of sum_j c_j N**j.

    Realizes as the upper-triangular Toeplitz matrix with entry
    (i, j) = c_{j-i} for j >= i.  Closed under sum and product; the
    product is coefficient convolution truncated to length k because
    N**k = 0.
    """

    coeffs: tuple[int, ...]

    def __post_init__(self):
        if not self.coeffs:
            raise InvalidDimension("shift polynomial needs at least one coefficient")

    @property
    def k(self) -> int:
        return len(self.coeffs)

    @classmethod
    def unit(cls, k: int) -> "ShiftPoly":
        return cls((1,) + (0,) * (k - 1))

    @classmethod
    def zero(cls, k: int) -> "ShiftPoly":
        return cls((0,) * k)

    def realize(self, field: Field) -> Matrix:
        k = self.k
        q = field.q
        m = Matrix.zero(k, k)
        for i in range(k):
            for j in range(i, k):
                m.entries[i * k + j] = self.coeffs[j - i] % q
        return m

    def add(self, other: "ShiftPoly", field: Field) -> "ShiftPoly":
        if self.k != other.k:
            raise DimensionMismatch("shift polynomial sizes differ")
        q = field.q
        return ShiftPoly(tuple((a + b) % q for a, b in zip(self.coeffs, other.coeffs)))

    def mul(self, other: "ShiftPoly", field: Field) -> "ShiftPoly":
        if self.k != other.k:
            raise DimensionMismatch("shift polynomial sizes differ")
        q = field.q
        k = self.k
        out = [0] * k
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j in range(k - i):
                out[i + j] = (out[i + j] + a * other.coeffs[j]) % q
        return ShiftPoly(tuple(out))


def embed_block_diag(field: Field, poly: ShiftPoly, d: int) -> Matrix:
    """m x m block diagonal with d copies of the poly's realization."""
    if d < 1:
        raise InvalidDimension("block count must be at least 1")
    k = poly.k
    m = d * k
    q = field.q
    out = Matrix.zero(m, m)
    for b in range(d):
        off = b * k
        for i in range(k):
            base = (off + i) * m + off
            for j in range(i, k):
                out.entries[base + j] = poly.coeffs[j - i] % q
    return out


@dataclass(frozen=True)
class BlockGrid:
    """A d x d grid of generator blocks, realized as an m x m matrix."""

    blocks: tuple[tuple[GeneratorBlock, ...], ...]

    def __post_init__(self):
        d = len(self.blocks)
        if d < 1:
            raise DimensionMismatch("grid needs at least one row")
        k = self.blocks[0][0].k
        for row in self.blocks:
            if len(row) != d:
                raise DimensionMismatch("grid must be square")
            for blk in row:
                if blk.k != k:
                    raise DimensionMismatch("grid blocks must share one size")

    @property
    def d(self) -> int:
        return len(self.blocks)

    @property
    def k(self) -> int:
        return self.blocks[0][0].k

    def realize(self, field: Field) -> Matrix:
        d, k = self.d, self.k
        m = d * k
        out = Matrix.zero(m, m)
        for bi in range(d):
            for bj in range(d):
                blk = self.blocks[bi][bj].realize(field)
                for i in range(k):
                    row = (bi * k + i) * m + bj * k
                    out.entries[row : row + k] = blk.entries[i * k : (i + 1) * k]
        return out


@dataclass(frozen=True)
class MonoTerm:
    """One scaled ordered product of grid powers: coeff * prod grid**exp."""

    coeff: int
    factors: tuple[tuple[BlockGrid, int], ...]


@dataclass(frozen=True)
class RingSample:
    """A sampled element of the grid ring: its dense matrix plus the
    mono-term recipe it was built from (None when loaded without one)."""

    matrix: Matrix
    recipe: Optional[tuple[MonoTerm, ...]] = None


def eval_recipe(field: Field, k: int, d: int, terms: Sequence[MonoTerm]) -> Matrix:
    """Evaluate a sum of mono-terms to its m x m matrix."""
    m = d * k
    total = Matrix.zero(m, m)
    for term in terms:
        prod = Matrix.identity(m)
        for grid, exp in term.factors:
            if grid.k != k or grid.d != d:
                raise DimensionMismatch("grid shape disagrees with (k, d)")
            prod = mat_mul(field, prod, mat_pow(field, grid.realize(field), exp))
        total = mat_add(field, total, mat_scale(field, term.coeff % field.q, prod))
    return total


def random_generator_block(field: Field, k: int, rng: Rng) -> GeneratorBlock:
    kind = KIND_SCALAR if rng.below(2) == 0 else KIND_JORDAN
    return GeneratorBlock(kind, field.sample(rng), k)


def random_block_grid(field: Field, k: int, d: int, rng: Rng) -> BlockGrid:
    """Grid with blocks drawn row-major (fixed order for reproducibility)."""
    return BlockGrid(
        tuple(
            tuple(random_generator_block(field, k, rng) for _ in range(d))
            for _ in range(d)
        )
    )


def random_shift_poly(field: Field, k: int, rng: Rng) -> ShiftPoly:
    return ShiftPoly(tuple(field.sample(rng) for _ in range(k)))


def is_coefficient_embedding(mat: Matrix, k: int, d: int) -> bool:
    """True iff mat = diag(P, ..., P) with P upper-triangular Toeplitz,
    i.e. mat lies in the span of the embedded shift powers."""
    m = d * k
    if mat.rows != m or mat.cols != m:
        return False
    first = [mat.at(i, j) for i in range(k) for j in range(k)]
    for i in range(k):
        for j in range(k):
            # Toeplitz along diagonals: entry (i, j) must equal entry
            # (0, j - i); below the diagonal everything must vanish.
            expected = first[j - i] if j >= i else 0
            if first[i * k + j] != expected:
                return False
    for bi in range(d):
        for bj in range(d):
            for i in range(k):
                for j in range(k):
                    v = mat.at(bi * k + i, bj * k + j)
                    want = first[i * k + j] if bi == bj else 0
                    if v != want:
                        return False
    return True


def _is_parallel(field: Field, u: Sequence[int], v: Sequence[int]) -> bool:
    """True iff u = c*v for some scalar c (v must be nonzero)."""
    pivot = next((i for i, x in enumerate(v) if x), None)
    if pivot is None:
        raise ValueError("reference vector is zero")
    c = u[pivot] * field.inv(v[pivot]) % field.q
    return all(x == c * y % field.q for x, y in zip(u, v))


def sample_ring_element(
    field: Field,
    k: int,
    d: int,
    rng: Rng,
    base_vector: Optional[Sequence[int]] = None,
    max_attempts: int = 16,
) -> RingSample:
    """Sample a non-degenerate public base from the grid ring.

    Builds a sum of 1..4 mono-terms, each a product of 1..3 random
    grids raised to exponents in [0, 3], with random coefficients.  A
    draw is rejected when its matrix collapses into the coefficient
    family (the key ring would then be commutative for trivial
    reasons), or, once the public vector is known, when it maps that
    vector to a scalar multiple of itself.  Raises after
    ``max_attempts`` rejections.

    Draw order (fixed so seeded runs reproduce byte-for-byte): number
    of terms, then per term the factor count, per factor the grid
    (blocks row-major: kind then value) and its exponent, then the
    term coefficient.
    """
    for _ in range(max_attempts):
        terms: list[MonoTerm] = []
        n_terms = 1 + rng.below(4)
        for _ in range(n_terms):
            n_factors = 1 + rng.below(3)
            factors = []
            for _ in range(n_factors):
                grid = random_block_grid(field, k, d, rng)
                factors.append((grid, rng.below(4)))
            coeff = field.sample(rng)
            terms.append(MonoTerm(coeff, tuple(factors)))
        mat = eval_recipe(field, k, d, terms)
        if is_coefficient_embedding(mat, k, d):
            continue
        if base_vector is not None and _is_parallel(
            field, mat_apply(field, mat, base_vector), base_vector
        ):
            continue
        return RingSample(mat, tuple(terms))
    raise DegenerateRingElement(
        f"no usable ring element after {max_attempts} attempts (k={k}, d={d})"
    )


def eval_key_poly(
    field: Field, coeffs: Sequence[ShiftPoly], base: Matrix, d: int
) -> Matrix:
    """Evaluate sum_i diag(a_i) * base**i by Horner's scheme.

    len(coeffs) - 1 matrix products; the result commutes with ``base``.
    """
    if not coeffs:
        raise DimensionMismatch("key polynomial needs at least one coefficient")
    k = coeffs[0].k
    m = d * k
    if base.rows != m or base.cols != m:
        raise DimensionMismatch(
            f"base is {base.rows}x{base.cols}, expected {m}x{m} for k={k}, d={d}"
        )
    for c in coeffs:
        if c.k != k:
            raise DimensionMismatch("coefficient sizes differ")
    acc = embed_block_diag(field, coeffs[-1], d)
    for c in reversed(coeffs[:-1]):
        acc = mat_add(field, mat_mul(field, acc, base), embed_block_diag(field, c, d))
    return acc


def keygen_power_basis(field: Field, a: Matrix, coeffs: Sequence[int]) -> Matrix:
    """sum_i c_i * a**i -- the naive single-matrix construction.

    Kept as a deliberately weak baseline; keys of this shape are fully
    determined by the (public) powers of one constant matrix.
    """
    if a.rows != a.cols:
        raise DimensionMismatch("power-basis keys need a square matrix")
    if not coeffs:
        raise DimensionMismatch("need at least one coefficient")
    n = a.rows
    q = field.q

    def scalar(c: int) -> Matrix:
        s = Matrix.zero(n, n)
        for i in range(n):
            s.entries[i * n + i] = c % q
        return s

    acc = scalar(coeffs[-1])
    for c in reversed(coeffs[:-1]):
        acc = mat_add(field, mat_mul(field, acc, a), scalar(c))
    return acc


def check_commute(field: Field, a: Matrix, b: Matrix) -> bool:
    """True iff a@b == b@a exactly."""
    if a.rows != a.cols or b.rows != b.cols or a.rows != b.rows:
        raise DimensionMismatch("commutation check needs equal square matrices")
    return mat_mul(field, a, b) == mat_mul(field, b, a)
