"""The key-exchange protocol: parameters, keys, derivation, accounting.

Public parameters are (q, k, d, degree bound, a public vector, and a
public ring element called the base).  A private key is a polynomial in
the base with coefficient-embedding coefficients; its matrix is cached.
The public key is the private matrix applied to the public vector, and
the shared key is one's own private matrix applied to the peer's public
key.  Any two private keys commute, so both parties derive the same
vector.

Both the base and the public vector are public: without a shared base
the two parties' keys would not commute, and without the vector nobody
could compute a public key in the first place.  The shared key is the
raw derived vector with a canonical byte encoding; no KDF is layered on
top -- this artifact studies the algebra, not deployment hygiene.

File formats (all field elements as decimal strings):

  params.json  {"q", "k", "d", "D", "zeta", "z", "seed"?}
  key.json     {"coeffs": [{"coeffs": [...]}, ...], "T": matrix}
  pub.json     {"xi": {"entries": [...]}}
  shared       raw bytes, 8-byte big-endian per entry

JSON is always emitted in canonical form (sorted keys, no spaces), so
equal values serialize to identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

from .commutant import (
    MonoTerm,
    RingSample,
    ShiftPoly,
    BlockGrid,
    GeneratorBlock,
    eval_key_poly,
    random_shift_poly,
    sample_ring_element,
)
from .errors import DegenerateKey, DimensionMismatch, InvalidParams, ParseError
from .gf import Field, OpCounter, Rng
from .linalg import Matrix, mat_apply

KEYGEN_MAX_ATTEMPTS = 16


@dataclass
class Params:
    """Public parameters.  The constructor checks shapes only; semantic
    non-degeneracy of the base is enforced where it is sampled."""

    q: int
    k: int
    d: int
    degree: int
    base_vector: list[int]
    ring_base: RingSample
    seed: Optional[int] = None

    def __post_init__(self):
        if self.k < 1:
            raise InvalidParams("block size k must be at least 1")
        if self.d < 2:
            raise InvalidParams("block count d must be at least 2")
        if self.degree < 1:
            raise InvalidParams("degree bound must be at least 1")
        Field(self.q)  # validates primality and the size bound
        m = self.k * self.d
        if len(self.base_vector) != m:
            raise InvalidParams(f"public vector must have length {m}")
        if not any(self.base_vector):
            raise InvalidParams("public vector must be nonzero")
        zmat = self.ring_base.matrix
        if zmat.rows != m or zmat.cols != m:
            raise InvalidParams(f"ring base must be {m}x{m}")

    @property
    def m(self) -> int:
        return self.k * self.d

    def field(self, counter: OpCounter | None = None) -> Field:
        return Field(self.q, counter)


@dataclass
class PrivateKey:
    """Polynomial coefficients plus the cached evaluated matrix."""

    coeffs: list[ShiftPoly]
    matrix: Matrix


@dataclass
class PublicKey:
    vec: list[int]


@dataclass
class SharedKey:
    vec: list[int]

    def to_bytes(self) -> bytes:
        """Canonical encoding: 8-byte big-endian per entry."""
        return b"".join(e.to_bytes(8, "big") for e in self.vec)

    @classmethod
    def from_bytes(cls, data: bytes) -> "SharedKey":
        if len(data) % 8:
            raise ParseError(f"shared key byte length {len(data)} is not a multiple of 8")
        return cls([int.from_bytes(data[i : i + 8], "big") for i in range(0, len(data), 8)])


def gen_params(
    q: int, k: int, d: int, degree: int, rng: Rng, seed: Optional[int] = None
) -> Params:
    """Sample public parameters.

    The public vector is drawn uniformly over nonzero vectors (whole
    vector redrawn if zero), then the ring base is sampled against it.
    Deterministic for a fixed rng seed; ``seed`` is recorded in the
    params for reproducibility and has no effect on sampling.
    """
    if k < 1 or d < 2 or degree < 1:
        raise InvalidParams(f"bad shape parameters k={k}, d={d}, degree={degree}")
    field = Field(q)
    m = k * d
    while True:
        vec = [field.sample(rng) for _ in range(m)]
        if any(vec):
            break
    base = sample_ring_element(field, k, d, rng, base_vector=vec)
    return Params(q, k, d, degree, vec, base, seed)


def private_key_from_coeffs(params: Params, coeffs: Sequence[ShiftPoly]) -> PrivateKey:
    """Build a private key from explicit coefficients (no rejection rules)."""
    field = params.field()
    matrix = eval_key_poly(field, coeffs, params.ring_base.matrix, params.d)
    return PrivateKey(list(coeffs), matrix)


def public_key(params: Params, sk: PrivateKey) -> PublicKey:
    return PublicKey(mat_apply(params.field(), sk.matrix, params.base_vector))


def _is_scalar_matrix(mat: Matrix) -> bool:
    n = mat.rows
    c = mat.entries[0]
    return all(
        mat.entries[i * n + j] == (c if i == j else 0)
        for i in range(n)
        for j in range(n)
    )


def keygen(params: Params, rng: Rng) -> tuple[PrivateKey, PublicKey]:
    """Sample a key pair.

    Coefficients are drawn uniformly (degree+1 polynomials of k
    coefficients each, in order).  A draw is rejected when the key
    matrix kills the public vector or is a scalar multiple of the
    identity; both are weak keys the construction does not need.
    """
    field = params.field()
    for _ in range(KEYGEN_MAX_ATTEMPTS):
        coeffs = [random_shift_poly(field, params.k, rng) for _ in range(params.degree + 1)]
        matrix = eval_key_poly(field, coeffs, params.ring_base.matrix, params.d)
        pub = mat_apply(field, matrix, params.base_vector)
        if not any(pub):
            continue
        if _is_scalar_matrix(matrix):
            continue
        return PrivateKey(coeffs, matrix), PublicKey(pub)
    raise DegenerateKey(f"no usable key after {KEYGEN_MAX_ATTEMPTS} attempts")


def derive_shared(
    params: Params,
    sk: PrivateKey,
    peer: PublicKey,
    counter: OpCounter | None = None,
) -> SharedKey:
    """Own private matrix applied to the peer's public key.

    Exactly m*m counted multiplications and m*(m-1) additions.
    """
    if len(peer.vec) != params.m:
        raise DimensionMismatch(
            f"peer public key has length {len(peer.vec)}, expected {params.m}"
        )
    field = params.field(counter)
    return SharedKey(mat_apply(field, sk.matrix, peer.vec))


@dataclass
class OpReport:
    """Operation count for one protocol action at given parameters."""

    action: str
    m: int
    mul_count: int
    add_count: int
    formula: str


def count_ops(action: str, params: Params) -> OpReport:
    """Count field operations for a protocol action.

    ``derive_shared`` costs exactly m**2 multiplications (and m*(m-1)
    additions): one matrix-vector application.  ``keygen`` reports the
    Horner evaluation of the key polynomial: ``degree`` products of
    m x m matrices, i.e. degree * m**3 multiplications -- assembling a
    coefficient embedding places entries and multiplies nothing, so the
    per-coefficient embedding cost is zero.  Counts are structural
    (schoolbook), so they do not depend on the sampled values.
    """
    counter = OpCounter()
    field = params.field(counter)
    m = params.m
    if action == "derive_shared":
        mat_apply(field, Matrix.identity(m), params.base_vector)
        formula = "m^2"
    elif action == "keygen":
        coeffs = [ShiftPoly.unit(params.k) for _ in range(params.degree + 1)]
        eval_key_poly(field, coeffs, params.ring_base.matrix, params.d)
        formula = "degree * m^3"
    else:
        raise ValueError(f"unknown action {action!r}")
    return OpReport(action, m, counter.mul_count, counter.add_count, formula)


# ---------------------------------------------------------------------------
# Serialization.  Canonical JSON: sorted keys, compact separators.


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _need(obj: dict, key: str, path: str):
    if not isinstance(obj, dict):
        raise ParseError(f"{path}: expected an object")
    if key not in obj:
        raise ParseError(f"{path}: missing field {key!r}")
    return obj[key]


def _parse_int(value, path: str) -> int:
    if not isinstance(value, str):
        raise ParseError(f"{path}: integers must be decimal strings")
    try:
        return int(value, 10)
    except ValueError:
        raise ParseError(f"{path}: bad decimal string {value!r}") from None


def _parse_residue(value, q: int, path: str) -> int:
    v = _parse_int(value, path)
    if not 0 <= v < q:
        raise ParseError(f"{path}: {v} is not a canonical residue mod {q}")
    return v


def vector_to_obj(vec: Sequence[int]) -> dict:
    return {"entries": [str(e) for e in vec]}


def vector_from_obj(obj, q: int, path: str) -> list[int]:
    entries = _need(obj, "entries", path)
    if not isinstance(entries, list):
        raise ParseError(f"{path}.entries: expected a list")
    return [_parse_residue(e, q, f"{path}.entries[{i}]") for i, e in enumerate(entries)]


def matrix_to_obj(mat: Matrix) -> dict:
    return {"rows": mat.rows, "cols": mat.cols, "entries": [str(e) for e in mat.entries]}


def matrix_from_obj(obj, q: int, path: str) -> Matrix:
    rows = _need(obj, "rows", path)
    cols = _need(obj, "cols", path)
    entries = _need(obj, "entries", path)
    if not isinstance(rows, int) or not isinstance(cols, int):
        raise ParseError(f"{path}: rows/cols must be integers")
    if not isinstance(entries, list) or len(entries) != rows * cols:
        raise ParseError(f"{path}.entries: expected {rows * cols} entries")
    vals = [_parse_residue(e, q, f"{path}.entries[{i}]") for i, e in enumerate(entries)]
    return Matrix(rows, cols, vals)


def shift_poly_to_obj(poly: ShiftPoly) -> dict:
    return {"coeffs": [str(c) for c in poly.coeffs]}


def shift_poly_from_obj(obj, q: int, path: str) -> ShiftPoly:
    coeffs = _need(obj, "coeffs", path)
    if not isinstance(coeffs, list) or not coeffs:
        raise ParseError(f"{path}.coeffs: expected a non-empty list")
    return ShiftPoly(
        tuple(_parse_residue(c, q, f"{path}.coeffs[{i}]") for i, c in enumerate(coeffs))
    )


def _generator_block_to_obj(blk: GeneratorBlock) -> dict:
    return {"kind": blk.kind, "value": str(blk.value)}


def _generator_block_from_obj(obj, q: int, k: int, path: str) -> GeneratorBlock:
    kind = _need(obj, "kind", path)
    value = _parse_residue(_need(obj, "value", path), q, f"{path}.value")
    if kind not in ("scalar", "jordan"):
        raise ParseError(f"{path}.kind: unknown kind {kind!r}")
    return GeneratorBlock(kind, value, k)


def ring_sample_to_obj(sample: RingSample) -> dict:
    obj: dict = {"matrix": matrix_to_obj(sample.matrix)}
    if sample.recipe is not None:
        obj["recipe"] = [
            {
                "coeff": str(term.coeff),
                "factors": [
                    {
                        "grid": [
                            [_generator_block_to_obj(b) for b in row]
                            for row in grid.blocks
                        ],
                        "exp": exp,
                    }
                    for grid, exp in term.factors
                ],
            }
            for term in sample.recipe
        ]
    return obj


def ring_sample_from_obj(obj, q: int, k: int, path: str) -> RingSample:
    matrix = matrix_from_obj(_need(obj, "matrix", path), q, f"{path}.matrix")
    recipe = None
    if isinstance(obj, dict) and "recipe" in obj:
        terms = []
        raw = obj["recipe"]
        if not isinstance(raw, list):
            raise ParseError(f"{path}.recipe: expected a list")
        for ti, term_obj in enumerate(raw):
            tpath = f"{path}.recipe[{ti}]"
            coeff = _parse_residue(_need(term_obj, "coeff", tpath), q, f"{tpath}.coeff")
            factors = []
            for fi, f_obj in enumerate(_need(term_obj, "factors", tpath)):
                fpath = f"{tpath}.factors[{fi}]"
                grid_rows = _need(f_obj, "grid", fpath)
                exp = _need(f_obj, "exp", fpath)
                if not isinstance(exp, int) or exp < 0:
                    raise ParseError(f"{fpath}.exp: expected a non-negative integer")
                blocks = tuple(
                    tuple(
                        _generator_block_from_obj(b, q, k, f"{fpath}.grid[{ri}][{ci}]")
                        for ci, b in enumerate(row)
                    )
                    for ri, row in enumerate(grid_rows)
                )
                factors.append((BlockGrid(blocks), exp))
            terms.append(MonoTerm(coeff, tuple(factors)))
        recipe = tuple(terms)
    return RingSample(matrix, recipe)


def params_to_obj(params: Params) -> dict:
    obj = {
        "q": str(params.q),
        "k": str(params.k),
        "d": str(params.d),
        "D": str(params.degree),
        "zeta": vector_to_obj(params.base_vector),
        "z": ring_sample_to_obj(params.ring_base),
    }
    if params.seed is not None:
        obj["seed"] = str(params.seed)
    return obj


def params_from_obj(obj) -> Params:
    q = _parse_int(_need(obj, "q", "params"), "params.q")
    k = _parse_int(_need(obj, "k", "params"), "params.k")
    d = _parse_int(_need(obj, "d", "params"), "params.d")
    degree = _parse_int(_need(obj, "D", "params"), "params.D")
    if q < 2:
        raise ParseError("params.q: modulus must be at least 2")
    vec = vector_from_obj(_need(obj, "zeta", "params"), q, "params.zeta")
    base = ring_sample_from_obj(_need(obj, "z", "params"), q, k, "params.z")
    seed = None
    if isinstance(obj, dict) and "seed" in obj:
        seed = _parse_int(obj["seed"], "params.seed")
    try:
        return Params(q, k, d, degree, vec, base, seed)
    except InvalidParams as exc:
        raise ParseError(f"params: {exc}") from None


def params_to_json(params: Params) -> str:
    return canonical_json(params_to_obj(params))


def params_from_json(text: str) -> Params:
    return params_from_obj(_loads(text))


def private_key_to_obj(sk: PrivateKey) -> dict:
    return {
        "coeffs": [shift_poly_to_obj(c) for c in sk.coeffs],
        "T": matrix_to_obj(sk.matrix),
    }


def private_key_from_obj(obj, q: int) -> PrivateKey:
    raw = _need(obj, "coeffs", "key")
    if not isinstance(raw, list) or not raw:
        raise ParseError("key.coeffs: expected a non-empty list")
    coeffs = [shift_poly_from_obj(c, q, f"key.coeffs[{i}]") for i, c in enumerate(raw)]
    matrix = matrix_from_obj(_need(obj, "T", "key"), q, "key.T")
    return PrivateKey(coeffs, matrix)


def private_key_to_json(sk: PrivateKey) -> str:
    return canonical_json(private_key_to_obj(sk))


def private_key_from_json(text: str, q: int) -> PrivateKey:
    return private_key_from_obj(_loads(text), q)


def public_key_to_obj(pk: PublicKey) -> dict:
    return {"xi": vector_to_obj(pk.vec)}


def public_key_from_obj(obj, q: int) -> PublicKey:
    return PublicKey(vector_from_obj(_need(obj, "xi", "pub"), q, "pub.xi"))


def public_key_to_json(pk: PublicKey) -> str:
    return canonical_json(public_key_to_obj(pk))


def public_key_from_json(text: str, q: int) -> PublicKey:
    return public_key_from_obj(_loads(text), q)


def _loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", pos=exc.pos) from None
