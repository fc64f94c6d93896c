"""Exact linear algebra over Z_p and over the rationals.

Matrices are lists of integer (or Fraction) rows.  Nothing here touches
floating point.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

import numpy as np

WORD_PRIME = 2_147_483_647


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    q = 2
    while q * q <= p:
        if p % q == 0:
            return False
        q += 1
    return True


def row_reduce_mod(rows: Sequence[Sequence[int]], p: int) -> tuple[list[list[int]], list[int]]:
    """Reduced row echelon form over Z_p; returns (nonzero rows, pivot columns)."""
    m = [[x % p for x in r] for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = pow(m[r][c], -1, p)
        m[r] = [x * inv % p for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [(a - f * b) % p for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank_mod(rows: Sequence[Sequence[int]], p: int) -> int:
    return len(row_reduce_mod(rows, p)[1])


def nullspace_mod(rows: Sequence[Sequence[int]], ncols: int, p: int) -> list[list[int]]:
    """Basis of ``{x : rows @ x == 0 mod p}``."""
    red, pivots = row_reduce_mod(rows, p) if rows else ([], [])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        x = [0] * ncols
        x[f] = 1
        for row, pc in zip(red, pivots):
            x[pc] = -row[f] % p
        basis.append(x)
    return basis


def left_kernel_dim_mod(rows: Sequence[Sequence[int]], p: int) -> int:
    """Dimension of ``{c : c @ rows == 0 mod p}``."""
    return len(rows) - rank_mod(rows, p)


def rank_mod_word(rows: np.ndarray, p: int = WORD_PRIME) -> int:
    """Rank over Z_p of an int64 matrix, ``p < 2**31``; a lower bound for the rational rank."""
    m = np.mod(np.array(rows, dtype=np.int64), p)
    nrows, ncols = m.shape
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.flatnonzero(m[r:, c])
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            m[[r, piv]] = m[[piv, r]]
        inv = pow(int(m[r, c]), -1, p)
        m[r] = m[r] * inv % p
        below = m[r + 1:, c].copy()
        m[r + 1:] = (m[r + 1:] - below[:, None] * m[r]) % p
        r += 1
    return r


def rank_q(rows: Sequence[Sequence]) -> int:
    """Rank over Q by fraction-free (Bareiss-style) elimination on integers.

    Rows may hold ints or Fractions; Fraction rows are scaled to integers.
    """
    m = [list(r) if all(type(x) is int for x in r) else _integral(r) for r in rows]
    m = [r for r in m if any(r)]
    if not m:
        return 0
    ncols = len(m[0])
    rank = 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        pr = m[rank]
        a = pr[c]
        for i in range(rank + 1, len(m)):
            b = m[i][c]
            if b:
                row = [a * x - b * y for x, y in zip(m[i], pr)]
                g = 0
                for x in row:
                    g = gcd(g, x)
                m[i] = [x // g for x in row] if g > 1 else row
        rank += 1
        if rank == len(m):
            break
    return rank


def _integral(row: Sequence) -> list[int]:
    den = 1
    for x in row:
        if isinstance(x, Fraction):
            den = den * x.denominator // gcd(den, x.denominator)
    return [int(x * den) for x in row]


def reduce_gcd(vec: Sequence) -> tuple[int, ...]:
    """Integer positive multiple of ``vec`` with gcd 1 (orientation kept)."""
    v = _integral(vec)
    g = 0
    for x in v:
        g = gcd(g, x)
    if g <= 1:
        return tuple(v)
    return tuple(x // g for x in v)


def primitive(vec: Sequence) -> tuple[int, ...]:
    """Integer multiple of ``vec`` with gcd 1 and positive first nonzero entry."""
    v = _integral(vec)
    g = 0
    for x in v:
        g = gcd(g, x)
    if g == 0:
        return tuple(v)
    first = next(x for x in v if x)
    if first < 0:
        g = -g
    return tuple(x // g for x in v)
