import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from commkex.errors import (
    DegenerateRingElement,
    DimensionMismatch,
    InvalidDimension,
)
from commkex.gf import Field, Rng
from commkex.commutant import (
    BlockGrid,
    GeneratorBlock,
    MonoTerm,
    ShiftPoly,
    check_commute,
    embed_block_diag,
    eval_key_poly,
    eval_recipe,
    is_coefficient_embedding,
    keygen_power_basis,
    random_block_grid,
    random_shift_poly,
    sample_ring_element,
    shift_nilpotent,
)
from commkex.linalg import Matrix, mat_add, mat_mul

from conftest import GRID_SHAPES
from oracles import block_matrix, mat_mul_mod, poly_of_matrix_mod

F7 = Field(7)


def test_generator_block_examples():
    assert GeneratorBlock("scalar", 3, 2).realize(F7) == Matrix.from_rows(
        [[3, 0], [0, 3]]
    )
    assert GeneratorBlock("jordan", 2, 2).realize(F7) == Matrix.from_rows(
        [[2, 1], [0, 2]]
    )
    assert GeneratorBlock("jordan", 0, 3).realize(F7) == shift_nilpotent(3)
    # k = 1 collapses the jordan kind to a bare scalar
    assert GeneratorBlock("jordan", 5, 1).realize(F7) == Matrix.from_rows([[5]])
    with pytest.raises(InvalidDimension):
        GeneratorBlock("scalar", 1, 0)
    with pytest.raises(InvalidDimension):
        GeneratorBlock("hessenberg", 1, 2)


def test_generator_blocks_commute_pairwise():
    rng = Rng(404)
    for q in (2, 7, 101):
        field = Field(q)
        for k in (1, 2, 3, 4):
            blocks = [
                random_generator(field, k, rng).realize(field) for _ in range(8)
            ]
            for a in blocks:
                for b in blocks:
                    assert check_commute(field, a, b)


def random_generator(field, k, rng):
    from commkex.commutant import random_generator_block

    return random_generator_block(field, k, rng)


def test_embed_block_diag_examples():
    assert embed_block_diag(F7, ShiftPoly((1, 0)), 2) == Matrix.identity(4)
    expected = block_matrix(
        [
            [[[2, 1], [0, 2]], [[0, 0], [0, 0]]],
            [[[0, 0], [0, 0]], [[2, 1], [0, 2]]],
        ],
        7,
    )
    assert embed_block_diag(F7, ShiftPoly((2, 1)), 2) == Matrix.from_rows(expected)
    assert embed_block_diag(F7, ShiftPoly((0, 0, 0)), 2) == Matrix.zero(6, 6)


def test_shift_poly_realization_is_toeplitz():
    p = ShiftPoly((4, 5, 6))
    assert p.realize(F7) == Matrix.from_rows([[4, 5, 6], [0, 4, 5], [0, 0, 4]])


def test_shift_poly_closure_matches_matrix_product():
    rng = Rng(99)
    for q in (2, 7, 1009):
        field = Field(q)
        for k in (1, 2, 3, 5):
            for _ in range(25):
                a = random_shift_poly(field, k, rng)
                b = random_shift_poly(field, k, rng)
                via_poly = a.mul(b, field).realize(field)
                via_matrix = mat_mul(field, a.realize(field), b.realize(field))
                assert via_poly == via_matrix
                assert a.add(b, field).realize(field) == mat_add(
                    field, a.realize(field), b.realize(field)
                )


def test_block_grid_examples():
    zero_grid = BlockGrid(
        tuple(tuple(GeneratorBlock("scalar", 0, 1) for _ in range(2)) for _ in range(2))
    )
    assert zero_grid.realize(F7) == Matrix.zero(2, 2)

    grid = BlockGrid(
        (
            (GeneratorBlock("scalar", 1, 1), GeneratorBlock("scalar", 1, 1)),
            (GeneratorBlock("scalar", 0, 1), GeneratorBlock("scalar", 1, 1)),
        )
    )
    assert grid.realize(F7) == Matrix.from_rows([[1, 1], [0, 1]])


def test_block_grid_mixed_matches_blockwise_oracle():
    blocks = (
        (GeneratorBlock("scalar", 3, 2), GeneratorBlock("jordan", 1, 2)),
        (GeneratorBlock("jordan", 0, 2), GeneratorBlock("scalar", 5, 2)),
    )
    grid = BlockGrid(blocks)
    oracle = block_matrix(
        [[blk.realize(F7).to_rows() for blk in row] for row in blocks], 7
    )
    assert grid.realize(F7) == Matrix.from_rows(oracle)


def test_block_grid_validation():
    with pytest.raises(DimensionMismatch):
        BlockGrid(
            (
                (GeneratorBlock("scalar", 1, 1), GeneratorBlock("scalar", 1, 2)),
                (GeneratorBlock("scalar", 1, 1), GeneratorBlock("scalar", 1, 1)),
            )
        )
    with pytest.raises(DimensionMismatch):
        BlockGrid(((GeneratorBlock("scalar", 1, 1),),) * 2)


def test_diag_and_grid_families_commute():
    # 1000+ random pairs across shapes and primes
    rng = Rng(2718)
    checked = 0
    while checked < 1000:
        for q in (7, 101, 2147483647):
            for k, d in GRID_SHAPES:
                field = Field(q)
                a = embed_block_diag(field, random_shift_poly(field, k, rng), d)
                b = random_block_grid(field, k, d, rng).realize(field)
                assert check_commute(field, a, b)
                checked += 1


def test_grids_do_not_commute_in_general():
    # explicit witness for every k: one off-diagonal unit block on each
    # side of the diagonal
    for q in (2, 7, 101):
        field = Field(q)
        for k in (1, 2, 3):
            for d in (2, 3):
                upper = [
                    [GeneratorBlock("scalar", 0, k) for _ in range(d)] for _ in range(d)
                ]
                lower = [row[:] for row in upper]
                upper[0][1] = GeneratorBlock("scalar", 1, k)
                lower[1][0] = GeneratorBlock("scalar", 1, k)
                ga = BlockGrid(tuple(tuple(r) for r in upper)).realize(field)
                gb = BlockGrid(tuple(tuple(r) for r in lower)).realize(field)
                assert not check_commute(field, ga, gb)


def test_check_commute_examples():
    ident = Matrix.identity(2)
    anything = Matrix.from_rows([[1, 2], [3, 4]])
    assert check_commute(F7, ident, anything)
    a = Matrix.from_rows([[0, 1], [0, 0]])
    b = Matrix.from_rows([[0, 0], [1, 0]])
    ab = mat_mul_mod(a.to_rows(), b.to_rows(), 7)
    ba = mat_mul_mod(b.to_rows(), a.to_rows(), 7)
    assert ab != ba
    assert not check_commute(F7, a, b)
    with pytest.raises(DimensionMismatch):
        check_commute(F7, ident, Matrix.identity(3))


def test_sample_single_mono_term_is_the_grid():
    field = Field(101)
    rng = Rng(12)
    grid = random_block_grid(field, 2, 2, rng)
    terms = [MonoTerm(1, ((grid, 1),))]
    assert eval_recipe(field, 2, 2, terms) == grid.realize(field)


def test_sampled_base_commutes_with_diag_family():
    rng = Rng(55)
    for q in (7, 2147483647):
        field = Field(q)
        for k, d in ((1, 2), (2, 2), (2, 3)):
            for _ in range(20):
                base = sample_ring_element(field, k, d, rng)
                a = embed_block_diag(field, random_shift_poly(field, k, rng), d)
                assert check_commute(field, base.matrix, a)


def test_sample_determinism():
    field = Field(101)
    s1 = sample_ring_element(field, 2, 2, Rng(7777))
    s2 = sample_ring_element(field, 2, 2, Rng(7777))
    assert s1.matrix == s2.matrix
    assert s1.recipe == s2.recipe


def test_sample_rejects_coefficient_embeddings():
    rng = Rng(31)
    field = Field(7)
    for _ in range(50):
        s = sample_ring_element(field, 1, 2, rng)
        assert not is_coefficient_embedding(s.matrix, 1, 2)


def test_sample_respects_base_vector_rejection():
    field = Field(7)
    rng = Rng(900)
    vec = [1, 2]
    for _ in range(30):
        s = sample_ring_element(field, 1, 2, rng, base_vector=vec)
        from commkex.linalg import mat_apply

        image = mat_apply(field, s.matrix, vec)
        # never parallel: image is not c*vec for any c
        assert all(image != [c * v % 7 for v in vec] for c in range(7))


def test_sample_raises_after_max_attempts(monkeypatch):
    # GF(2), k=1, d=2 with a rigged rng that always produces the identity
    # grid: every draw degenerates, so the sampler must give up.
    field = Field(2)

    class RiggedRng:
        def below(self, n):
            return 0

        def next_u64(self):
            return 0

    with pytest.raises(DegenerateRingElement):
        sample_ring_element(field, 1, 2, RiggedRng(), max_attempts=16)


def test_is_coefficient_embedding():
    assert is_coefficient_embedding(Matrix.identity(4), 2, 2)
    p = embed_block_diag(F7, ShiftPoly((3, 4)), 2)
    assert is_coefficient_embedding(p, 2, 2)
    q = Matrix.from_rows([[1, 0, 1, 0], [0, 1, 0, 1], [0, 0, 1, 0], [0, 0, 0, 1]])
    assert not is_coefficient_embedding(q, 2, 2)


def test_eval_key_poly_examples(micro_params):
    field = Field(7)
    base = micro_params.ring_base.matrix
    assert eval_key_poly(field, [ShiftPoly((1,))], base, 2) == Matrix.identity(2)
    combo = eval_key_poly(field, [ShiftPoly((2,)), ShiftPoly((3,))], base, 2)
    oracle = poly_of_matrix_mod([2, 3], base.to_rows(), 7)
    assert combo == Matrix.from_rows(oracle) == Matrix.from_rows([[5, 3], [0, 5]])


def test_eval_key_poly_outputs_commute():
    rng = Rng(606)
    for q in (7, 2147483647):
        field = Field(q)
        for k, d in ((1, 2), (2, 2), (3, 3)):
            base = sample_ring_element(field, k, d, rng).matrix
            for _ in range(10):
                t1 = eval_key_poly(
                    field,
                    [random_shift_poly(field, k, rng) for _ in range(3)],
                    base,
                    d,
                )
                t2 = eval_key_poly(
                    field,
                    [random_shift_poly(field, k, rng) for _ in range(4)],
                    base,
                    d,
                )
                assert check_commute(field, t1, t2)
                assert check_commute(field, t1, base)


def test_eval_key_poly_validation():
    with pytest.raises(DimensionMismatch):
        eval_key_poly(F7, [], Matrix.identity(2), 2)
    with pytest.raises(DimensionMismatch):
        eval_key_poly(F7, [ShiftPoly((1, 0))], Matrix.identity(2), 2)


def test_diag_and_grid_rings_commute():
    # products and sums from both families still commute (ring level)
    rng = Rng(515)
    for q in (7, 101):
        field = Field(q)
        for k, d in ((1, 2), (2, 2), (2, 3)):
            for _ in range(30):
                p1 = random_shift_poly(field, k, rng)
                p2 = random_shift_poly(field, k, rng)
                a = mat_add(
                    field,
                    mat_mul(
                        field,
                        embed_block_diag(field, p1, d),
                        embed_block_diag(field, p2, d),
                    ),
                    embed_block_diag(field, p1, d),
                )
                z1 = sample_ring_element(field, k, d, rng).matrix
                z2 = sample_ring_element(field, k, d, rng).matrix
                product = mat_mul(field, z1, z2)
                assert check_commute(field, a, z1)
                assert check_commute(field, a, product)


def test_keygen_power_basis_examples():
    a = Matrix.from_rows([[1, 1], [0, 1]])
    assert keygen_power_basis(F7, a, [1]) == Matrix.identity(2)
    assert keygen_power_basis(F7, a, [0, 1]) == a
    expect = poly_of_matrix_mod([1, 1], a.to_rows(), 7)
    assert keygen_power_basis(F7, a, [1, 1]) == Matrix.from_rows(expect)
    assert keygen_power_basis(F7, a, [1, 1]) == Matrix.from_rows([[2, 1], [0, 2]])
    with pytest.raises(DimensionMismatch):
        keygen_power_basis(F7, Matrix.zero(2, 3), [1])


def test_keygen_power_basis_matches_oracle_random():
    rng = Rng(321)
    field = Field(101)
    for _ in range(20):
        a = Matrix(3, 3, [field.sample(rng) for _ in range(9)])
        coeffs = [field.sample(rng) for _ in range(4)]
        assert keygen_power_basis(field, a, coeffs) == Matrix.from_rows(
            poly_of_matrix_mod(coeffs, a.to_rows(), 101)
        )


@settings(max_examples=60)
@given(
    st.integers(min_value=1, max_value=4),
    st.lists(st.integers(min_value=0, max_value=100), min_size=1, max_size=4),
    st.lists(st.integers(min_value=0, max_value=100), min_size=1, max_size=4),
)
def test_shift_poly_product_commutes_hypothesis(k, c1, c2):
    field = Field(101)
    a = ShiftPoly(tuple((c1 * (k // len(c1) + 1))[:k]))
    b = ShiftPoly(tuple((c2 * (k // len(c2) + 1))[:k]))
    assert a.mul(b, field) == b.mul(a, field)
