from fractions import Fraction

import numpy as np
import sympy
from hypothesis import given, strategies as st

from entcone.linalg import (
    is_prime,
    nullspace_mod,
    primitive,
    rank_mod,
    rank_mod_word,
    rank_q,
    reduce_gcd,
)

matrices = st.integers(1, 6).flatmap(
    lambda c: st.lists(st.lists(st.integers(-6, 6), min_size=c, max_size=c), min_size=1, max_size=7)
)


def test_is_prime():
    assert [p for p in range(30) if is_prime(p)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


@given(matrices)
def test_rank_q_matches_sympy(rows):
    assert rank_q(rows) == sympy.Matrix(rows).rank()


@given(matrices)
def test_rank_q_fraction_rows(rows):
    scaled = [[Fraction(x, 3) for x in r] for r in rows]
    assert rank_q(scaled) == rank_q(rows)


@given(matrices, st.sampled_from([2, 3, 5]))
def test_nullspace_mod_is_kernel(rows, p):
    n = len(rows[0])
    basis = nullspace_mod(rows, n, p)
    assert len(basis) == n - rank_mod(rows, p)
    for x in basis:
        assert all(sum(a * b for a, b in zip(r, x)) % p == 0 for r in rows)
    if basis:
        assert rank_mod(basis, p) == len(basis)


@given(matrices)
def test_word_rank_bounds_rational_rank(rows):
    assert rank_mod_word(np.array(rows)) == rank_q(rows)


def test_primitive_and_gcd():
    assert primitive([Fraction(-2, 3), Fraction(4, 3), 0]) == (1, -2, 0)
    assert reduce_gcd([-2, 4, 6]) == (-1, 2, 3)
    assert primitive([0, 0]) == (0, 0)
