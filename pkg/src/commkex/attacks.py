"""Linear-algebra cryptanalysis of the commuting-matrix exchange.

Because every private key commutes with every other one, a directory
member who knows private keys can turn each known pair into exact
linear equations on a victim's key: if T is the victim's key with
public xi, and (T_i, xi_i) is a known pair, then

    T_i(xi) = T_i(T(zeta)) = T(T_i(zeta)) = T(xi_i),

so T maps the known public key xi_i to the computable vector
rho_i = T_i(xi).  Three executable attacks build on this:

* ``recover_private_key`` -- solve for the victim's key itself, either
  as a full m x m matrix from m independent public keys, or as
  coefficients over the structured basis {embedded shift power *
  base power}, which needs far fewer equations because the keys have
  only (degree+1)*k free coefficients.
* ``recover_shared_from_directory`` -- skip the key: express the victim
  public key as a combination of directory publics and combine the
  corresponding known images into the session key directly.
* ``passive_commutant_attack`` -- use no private keys at all.  Any
  matrix from the structured span that maps the public vector to one
  party's public key commutes with the other party's key, so applying
  it to the other public key reproduces the shared key exactly.

All attacks are deterministic: underdetermined systems return the
reduced-echelon solution with free variables set to zero, which acts
identically to the true key on the subspace the equations cover.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import (
    InconsistentSystem,
    InsufficientRank,
    NoSolution,
    OutOfSpan,
)
from .gf import Field
from .kex import Params, PrivateKey, PublicKey, SharedKey, matrix_to_obj, vector_to_obj
from .linalg import (
    Matrix,
    invert,
    mat_add,
    mat_apply,
    mat_mul,
    mat_scale,
    pivot_columns,
    rank,
    solve_linear,
    vec_add,
    vec_scale,
)

MODE_FULL = "full-matrix"
MODE_STRUCTURED = "structured-basis"


@dataclass
class DirectoryEntry:
    public: PublicKey
    private: Optional[PrivateKey] = None


@dataclass
class KeyDirectory:
    """The adversary's view: public keys, some with known private keys."""

    params: Params
    entries: list[DirectoryEntry]

    def known_pairs(self) -> list[tuple[PrivateKey, PublicKey]]:
        return [(e.private, e.public) for e in self.entries if e.private is not None]

    def public_rank(self) -> int:
        cols = [e.public.vec for e in self.entries]
        if not cols:
            return 0
        return rank(self.params.field(), Matrix.from_columns(cols))


@dataclass
class RecoveredKey:
    """Result of private-key recovery.

    ``residual_rank_deficit`` is 0 for full-matrix mode (the system of
    public keys was invertible) and the number of free basis
    coefficients for structured mode; any choice of the free
    coefficients acts identically on the span the equations cover.
    ``equations_used`` counts input/output vector pairs fed to the
    solver (structured mode includes the public-vector pair).
    """

    matrix: Matrix
    mode: str
    residual_rank_deficit: int
    equations_used: int
    rank: int
    verified: bool


@dataclass
class DirectorySharedResult:
    shared_key: SharedKey
    coefficients: list[int]
    equations_used: int
    rank: int
    verified: bool


@dataclass
class PassiveResult:
    shared_key: SharedKey
    recovered: Matrix
    degree_bound: int
    equations_used: int
    rank: int
    verified: bool


def _shift_vec(vec: Sequence[int], k: int, j: int) -> list[int]:
    """Apply the embedded j-th shift power to a vector: within each
    k-block, entry r picks up entry r+j (zero past the block edge)."""
    out = [0] * len(vec)
    for start in range(0, len(vec), k):
        for r in range(k - j):
            out[start + r] = vec[start + r + j]
    return out


def _shift_mat_rows(mat: Matrix, k: int, j: int) -> Matrix:
    """Embedded j-th shift power times a matrix (pure row shuffle)."""
    m = mat.rows
    out = Matrix.zero(m, mat.cols)
    w = mat.cols
    for start in range(0, m, k):
        for r in range(k - j):
            src = (start + r + j) * w
            dst = (start + r) * w
            out.entries[dst : dst + w] = mat.entries[src : src + w]
    return out


def _base_powers(field: Field, params: Params, degree_bound: int) -> list[Matrix]:
    powers = [Matrix.identity(params.m)]
    z = params.ring_base.matrix
    for _ in range(degree_bound):
        powers.append(mat_mul(field, powers[-1], z))
    return powers


def _structured_system(
    field: Field,
    params: Params,
    inputs: list[list[int]],
    degree_bound: int,
) -> Matrix:
    """Stack the images of each input vector under every structured
    basis element {embed(shift^j) * base^i}.

    Column order: i major, j minor -- column index i*k + j.  Rows are
    the concatenated input vectors' image coordinates.
    """
    k = params.k
    z = params.ring_base.matrix
    columns: list[list[int]] = []
    images: list[list[list[int]]] = []  # images[i][v] = base^i applied to inputs[v]
    current = [list(v) for v in inputs]
    images.append(current)
    for _ in range(degree_bound):
        current = [mat_apply(field, z, v) for v in current]
        images.append(current)
    for i in range(degree_bound + 1):
        for j in range(k):
            col: list[int] = []
            for v_img in images[i]:
                col.extend(_shift_vec(v_img, k, j))
            columns.append(col)
    return Matrix.from_columns(columns)


def _assemble_structured(
    field: Field, params: Params, coeffs: Sequence[int], degree_bound: int
) -> Matrix:
    powers = _base_powers(field, params, degree_bound)
    k = params.k
    total = Matrix.zero(params.m, params.m)
    for i in range(degree_bound + 1):
        for j in range(k):
            c = coeffs[i * k + j]
            if not c:
                continue
            total = mat_add(
                field, total, mat_scale(field, c, _shift_mat_rows(powers[i], k, j))
            )
    return total


def recover_private_key(
    directory: KeyDirectory, target_pub: PublicKey, mode: str = MODE_FULL
) -> RecoveredKey:
    """Recover a private key from directory entries with known privates.

    Full-matrix mode inverts the matrix of m independent known public
    keys; structured mode solves for the key's coefficients over the
    structured basis and additionally uses the (public vector -> target
    public key) pair, so the result maps the public vector correctly
    even when the directory equations alone underdetermine it.
    """
    params = directory.params
    field = params.field()
    m = params.m
    pairs = directory.known_pairs()
    rhos = [mat_apply(field, sk.matrix, target_pub.vec) for sk, _ in pairs]

    if mode == MODE_FULL:
        if not pairs:
            raise InsufficientRank("directory has no entries with known private keys")
        xi_all = Matrix.from_columns([pk.vec for _, pk in pairs])
        pivots = pivot_columns(field, xi_all)
        if len(pivots) < m:
            raise InsufficientRank(
                f"public keys span rank {len(pivots)} < {m}; need m independent keys"
            )
        chosen = pivots[:m]
        xi = Matrix.from_columns([pairs[i][1].vec for i in chosen])
        rho = Matrix.from_columns([rhos[i] for i in chosen])
        t_hat = mat_mul(field, rho, invert(field, xi))
        if mat_apply(field, t_hat, params.base_vector) != target_pub.vec:
            raise InconsistentSystem(
                "recovered key does not map the public vector to the target public key"
            )
        verified = all(
            mat_apply(field, t_hat, pairs[i][1].vec) == rhos[i] for i in chosen
        )
        return RecoveredKey(t_hat, MODE_FULL, 0, m, m, verified)

    if mode != MODE_STRUCTURED:
        raise ValueError(f"unknown recovery mode {mode!r}")

    inputs = [params.base_vector] + [pk.vec for _, pk in pairs]
    outputs: list[int] = list(target_pub.vec)
    for r in rhos:
        outputs.extend(r)
    system = _structured_system(field, params, inputs, params.degree)
    result = solve_linear(field, system, outputs)
    if not result.consistent:
        raise InconsistentSystem("structured recovery system is inconsistent")
    assert isinstance(result.particular, list)
    t_hat = _assemble_structured(field, params, result.particular, params.degree)
    deficit = len(result.nullspace)
    rank = system.cols - deficit
    verified = mat_apply(field, t_hat, params.base_vector) == target_pub.vec and all(
        mat_apply(field, t_hat, pk.vec) == rho for (_, pk), rho in zip(pairs, rhos)
    )
    return RecoveredKey(
        t_hat, MODE_STRUCTURED, deficit, len(inputs), rank, verified
    )


def recover_shared_from_directory(
    directory: KeyDirectory, victim_pub: PublicKey, counterpart_pub: PublicKey
) -> DirectorySharedResult:
    """Recover the session key of (victim, counterpart) without any
    private key of either.

    Writes the victim public key as a combination of known-private
    directory publics and combines the corresponding images of the
    counterpart public key with the same coefficients.  Exact whenever
    the victim public key lies in the directory span.
    """
    params = directory.params
    field = params.field()
    pairs = directory.known_pairs()
    if not pairs:
        raise OutOfSpan("directory has no entries with known private keys")
    xi = Matrix.from_columns([pk.vec for _, pk in pairs])
    result = solve_linear(field, xi, list(victim_pub.vec))
    if not result.consistent:
        raise OutOfSpan("victim public key is outside the directory span")
    assert isinstance(result.particular, list)
    coeffs = result.particular
    shared = [0] * params.m
    for c, (sk, _) in zip(coeffs, pairs):
        if not c:
            continue
        shared = vec_add(
            field, shared, vec_scale(field, c, mat_apply(field, sk.matrix, counterpart_pub.vec))
        )
    reconstructed = mat_apply(field, xi, coeffs)
    verified = reconstructed == list(victim_pub.vec)
    rank = len(pairs) - len(result.nullspace)
    return DirectorySharedResult(SharedKey(shared), coeffs, len(pairs), rank, verified)


def passive_commutant_attack(
    params: Params,
    pub_a: PublicKey,
    pub_b: PublicKey,
    degree_bound: Optional[int] = None,
) -> PassiveResult:
    """Break a session from public data only.

    Solves for any structured-basis matrix mapping the public vector to
    pub_a; because every matrix in that span commutes with the honest
    counterpart key, applying it to pub_b yields the exact shared key.
    The system is always consistent when the degree bound is at least
    the honest keys' degree (the honest key is itself a solution); if a
    caller picks a smaller bound the attack retries with doubled bounds
    up to m**2 before giving up.
    """
    field = params.field()
    m = params.m
    bound = params.degree if degree_bound is None else degree_bound
    cap = max(m * m, 1)
    while True:
        system = _structured_system(field, params, [params.base_vector], bound)
        result = solve_linear(field, system, list(pub_a.vec))
        if result.consistent:
            break
        if bound >= cap:
            raise NoSolution(
                f"no structured key maps the public vector to the target "
                f"at degree bound {bound} (cap {cap})"
            )
        bound = min(cap, bound * 2 if bound else 1)
    assert isinstance(result.particular, list)
    t_prime = _assemble_structured(field, params, result.particular, bound)
    shared = SharedKey(mat_apply(field, t_prime, pub_b.vec))
    verified = mat_apply(field, t_prime, params.base_vector) == list(pub_a.vec)
    rank = system.cols - len(result.nullspace)
    return PassiveResult(shared, t_prime, bound, m, rank, verified)


def directory_to_obj(directory: KeyDirectory) -> dict:
    """dir.json body: entries carry a pub.json object and, when the
    private key is known, a key.json object."""
    from .kex import private_key_to_obj, public_key_to_obj

    entries = []
    for e in directory.entries:
        item: dict = {"pub": public_key_to_obj(e.public)}
        if e.private is not None:
            item["key"] = private_key_to_obj(e.private)
        entries.append(item)
    return {"entries": entries}


def directory_from_obj(obj, params: Params) -> KeyDirectory:
    from .errors import ParseError
    from .kex import private_key_from_obj, public_key_from_obj

    if not isinstance(obj, dict) or not isinstance(obj.get("entries"), list):
        raise ParseError("dir: expected {\"entries\": [...]}")
    entries = []
    for i, raw in enumerate(obj["entries"]):
        if not isinstance(raw, dict) or "pub" not in raw:
            raise ParseError(f"dir.entries[{i}]: expected an object with a 'pub' field")
        pub = public_key_from_obj(raw["pub"], params.q)
        private = None
        if "key" in raw:
            private = private_key_from_obj(raw["key"], params.q)
        entries.append(DirectoryEntry(pub, private))
    return KeyDirectory(params, entries)


def report_obj(
    result: RecoveredKey | DirectorySharedResult | PassiveResult,
) -> dict:
    """Attack report: {mode, equations_used, rank, recovered_key?,
    shared_key?, verified}."""
    if isinstance(result, RecoveredKey):
        return {
            "mode": result.mode,
            "equations_used": result.equations_used,
            "rank": result.rank,
            "recovered_key": matrix_to_obj(result.matrix),
            "verified": result.verified,
        }
    if isinstance(result, DirectorySharedResult):
        return {
            "mode": "directory-shared",
            "equations_used": result.equations_used,
            "rank": result.rank,
            "shared_key": vector_to_obj(result.shared_key.vec),
            "verified": result.verified,
        }
    return {
        "mode": "passive-commutant",
        "equations_used": result.equations_used,
        "rank": result.rank,
        "recovered_key": matrix_to_obj(result.recovered),
        "shared_key": vector_to_obj(result.shared_key.vec),
        "verified": result.verified,
    }
