"""Independent reference computations for fixing expected test values.

Everything here deliberately avoids the library's code paths: matrix
work goes through numpy object arrays, scalar work through plain
integer loops, and small solves through exhaustive search.
"""

from itertools import product

import numpy as np


def np_mat(rows):
    return np.array(rows, dtype=object)


def mat_mul_mod(a_rows, b_rows, q):
    return ((np_mat(a_rows) @ np_mat(b_rows)) % q).tolist()


def mat_vec_mod(rows, vec, q):
    return ((np_mat(rows) @ np.array(vec, dtype=object)) % q).tolist()


def mat_add_mod(a_rows, b_rows, q):
    return ((np_mat(a_rows) + np_mat(b_rows)) % q).tolist()


def mat_pow_mod(rows, e, q):
    n = len(rows)
    acc = np.eye(n, dtype=object) % q
    base = np_mat(rows)
    for _ in range(e):
        acc = (acc @ base) % q
    return acc.tolist()


def poly_of_matrix_mod(coeffs, rows, q):
    """sum_i coeffs[i] * rows**i by direct expansion (scalar coeffs)."""
    n = len(rows)
    total = np.zeros((n, n), dtype=object)
    for i, c in enumerate(coeffs):
        total = (total + c * np_mat(mat_pow_mod(rows, i, q))) % q
    return total.tolist()


def pow_by_repeated_mul(base, e, q):
    acc = 1 % q
    for _ in range(e):
        acc = acc * base % q
    return acc


def inv_by_search(a, q):
    for b in range(q):
        if a * b % q == 1:
            return b
    raise AssertionError(f"{a} has no inverse mod {q}")


def solve_by_search(a_rows, b, q):
    """All solutions of a_rows @ x = b over GF(q), by exhaustion."""
    n = len(a_rows[0])
    hits = []
    for x in product(range(q), repeat=n):
        if mat_vec_mod(a_rows, list(x), q) == list(b):
            hits.append(list(x))
    return hits


def rank_by_minors(a_rows, q):
    """Rank as the largest r with a nonzero r x r minor (determinant by
    Laplace expansion; exponential, only for tiny matrices)."""
    from itertools import combinations

    def det(rows):
        n = len(rows)
        if n == 1:
            return rows[0][0] % q
        total = 0
        for j in range(n):
            if rows[0][j] % q == 0:
                continue
            minor = [r[:j] + r[j + 1 :] for r in rows[1:]]
            sign = 1 if j % 2 == 0 else -1
            total += sign * rows[0][j] * det(minor)
        return total % q

    nrows, ncols = len(a_rows), len(a_rows[0])
    for r in range(min(nrows, ncols), 0, -1):
        for ri in combinations(range(nrows), r):
            for ci in combinations(range(ncols), r):
                sub = [[a_rows[i][j] for j in ci] for i in ri]
                if det(sub) != 0:
                    return r
    return 0


def block_matrix(blocks, q):
    """Assemble a grid of equally sized blocks into one matrix."""
    d = len(blocks)
    k = len(blocks[0][0])
    m = d * k
    out = [[0] * m for _ in range(m)]
    for bi in range(d):
        for bj in range(d):
            for i in range(k):
                for j in range(k):
                    out[bi * k + i][bj * k + j] = blocks[bi][bj][i][j] % q
    return out
