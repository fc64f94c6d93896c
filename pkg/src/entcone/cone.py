"""Exact polyhedral cones: double description, membership, orbits, Table 1.

A cone is ``{x : a . x >= 0 for every constraint row a}``.  Rays and rows
are integer tuples; all arithmetic is exact.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import ineq
from .entvec import EntropyVector, ExactLog, LinearFunctional, PartySystem, permute_mask
from .linalg import rank_mod_word, rank_q, reduce_gcd

log = logging.getLogger(__name__)

MAX_DIM = 31


class ConeError(ValueError):
    pass


def _dot(a: Sequence[int], x: Sequence[int]) -> int:
    return sum(p * q for p, q in zip(a, x) if p)


@dataclass
class RationalCone:
    """H-description (rows of ``>= 0`` constraints) and optionally rays.

    ``constraints`` are integer row vectors.  ``names`` label each row and
    ``system`` (when set) ties coordinates to the nonempty subsets of a
    party system, coordinate ``i`` holding subset mask ``i + 1``.
    """

    dim: int
    constraints: list[tuple[int, ...]]
    names: list[str] = field(default_factory=list)
    rays: list[tuple[int, ...]] | None = None
    system: PartySystem | None = None

    def __post_init__(self):
        rows = []
        for a in self.constraints:
            a = reduce_gcd(a)
            if len(a) != self.dim:
                raise ConeError(f"constraint of length {len(a)} in a {self.dim}-dim cone")
            rows.append(a)
        self.constraints = rows
        if not self.names:
            self.names = [f"c{i}" for i in range(len(rows))]
        if self.rays is not None:
            self.rays = [reduce_gcd(r) for r in self.rays]
            for r in self.rays:
                for a, nm in zip(self.constraints, self.names):
                    if _dot(a, r) < 0:
                        raise ConeError(f"ray {r} violates {nm}")

    @classmethod
    def from_instances(cls, instances: Sequence[ineq.InequalityInstance]) -> "RationalCone":
        if not instances:
            raise ConeError("no constraints")
        system = instances[0].system
        rows = [reduce_gcd(inst.functional.dense()) for inst in instances]
        return cls(system.full, rows, [i.name for i in instances], system=system)

    def with_rays(self) -> "RationalCone":
        return RationalCone(self.dim, self.constraints, self.names, extreme_rays(self), self.system)

    def vector_coords(self, v: EntropyVector) -> tuple:
        if self.system is None or v.system != self.system:
            raise ConeError("vector is not over this cone's party system")
        return tuple(v.values[1:])


def _insertion_order(rows: Sequence[tuple[int, ...]]) -> list[int]:
    return sorted(
        range(len(rows)),
        key=lambda i: (sum(1 for x in rows[i] if x), tuple(-abs(x) for x in rows[i]), rows[i]),
    )


def _initial_basis(rows, order, dim):
    basis: list[int] = []
    for i in order:
        if rank_q([rows[j] for j in basis] + [rows[i]]) > len(basis):
            basis.append(i)
            if len(basis) == dim:
                return basis
    raise ConeError(
        f"cone is not pointed: constraint rank {len(basis)} < dimension {dim} (nonzero lineality space)"
    )


def _inverse_columns(rows: list[tuple[int, ...]]) -> list[tuple[int, ...]]:
    """Columns of ``rows^{-1}`` scaled to primitive integer vectors."""
    n = len(rows)
    m = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(rows)]
    for c in range(n):
        piv = next(i for i in range(c, n) if m[i][c] != 0)
        m[c], m[piv] = m[piv], m[c]
        inv = 1 / m[c][c]
        m[c] = [x * inv for x in m[c]]
        for i in range(n):
            if i != c and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return [reduce_gcd([m[i][n + j] for i in range(n)]) for j in range(n)]


def extreme_rays(cone: RationalCone) -> list[tuple[int, ...]]:
    """Extreme rays of a pointed cone by the double description method.

    Constraints are inserted by increasing support size.  Two rays are
    combined only if the constraints tight at both have rank ``dim - 2``
    (exact algebraic adjacency test).  Pairs with too few common tight
    constraints, or whose common tight set is also tight at a third ray,
    are discarded before the rank test.  Output rays are primitive
    integer vectors, sorted.
    """
    dim = cone.dim
    if dim > MAX_DIM:
        raise ConeError(f"dimension {dim} exceeds guard {MAX_DIM}")
    rows = cone.constraints
    if not rows:
        raise ConeError("cone is not pointed: no constraints")
    order = _insertion_order(rows)
    basis = _initial_basis(rows, order, dim)
    order = basis + [i for i in order if i not in set(basis)]
    ncons = len(order)
    order_arr = np.array(order)
    row_array = np.array(rows, dtype=object)
    if max(abs(x) for r in rows for x in r) < 2**31:
        row_array = row_array.astype(np.int64)
    width = -(-ncons // 64) * 64

    # ray j of the simplicial start is tight on every basis row except j
    rays = _inverse_columns([rows[i] for i in basis])
    tight = np.zeros((dim, width), dtype=bool)
    tight[:, :dim] = ~np.eye(dim, dtype=bool)

    for col in range(dim, ncons):
        if not rays:
            break
        a = rows[order[col]]
        vals = _dots(rays, a)
        zero = vals == 0
        tight[:, col] = zero
        if (vals >= 0).all():
            continue
        pos = np.flatnonzero(vals > 0)
        neg = np.flatnonzero(vals < 0)
        words = np.packbits(tight, axis=1, bitorder="little").view(np.uint64)
        ray_sets: dict[int, int] = {}

        def tight_at(k: int) -> int:
            got = ray_sets.get(k)
            if got is None:
                got = int.from_bytes(np.packbits(tight[:, k], bitorder="little").tobytes(), "little")
                ray_sets[k] = got
            return got

        all_rays = (1 << len(rays)) - 1
        new_rays, new_tight = [], []
        neg_words = words[neg]
        for p in pos:
            common = np.bitwise_count(words[p] & neg_words).sum(axis=1)
            for q in neg[common >= dim - 2]:
                z = tight[p] & tight[q]
                idx = np.flatnonzero(z)
                others = ~((1 << int(p)) | (1 << int(q)))
                acc = all_rays
                for k in idx:
                    acc &= tight_at(int(k))
                    if not acc & others:
                        break
                if acc & others:
                    continue
                # both rays lie in the kernel of these rows, so their rank is
                # at most dim - 2 and a modular lower bound settles equality
                sub = row_array[order_arr[idx]]
                if (row_array.dtype == object or rank_mod_word(sub) < dim - 2) and rank_q(
                    sub.tolist()
                ) != dim - 2:
                    continue
                vp, vq = int(vals[p]), int(vals[q])
                rp, rq = rays[p], rays[q]
                new_rays.append(reduce_gcd([vp * y - vq * x for x, y in zip(rp, rq)]))
                z[col] = True
                new_tight.append(z)
        keep = np.flatnonzero(vals >= 0)
        rays = [rays[i] for i in keep] + new_rays
        tight = np.vstack([tight[keep]] + ([np.array(new_tight)] if new_tight else []))
        log.debug("inserted %s: %d rays", cone.names[order[col]], len(rays))
    return sorted(rays)


def _dots(rays: list[tuple[int, ...]], a: Sequence[int]) -> np.ndarray:
    big = max((abs(x) for r in rays for x in r), default=0)
    if big * max(abs(x) for x in a) * len(a) < 2**62:
        return np.array(rays, dtype=np.int64) @ np.array(a, dtype=np.int64)
    return np.array([_dot(a, r) for r in rays], dtype=object)


# -- membership --------------------------------------------------------------


@dataclass
class Membership:
    status: str  # "inside", "boundary" or "outside"
    tight: list[str]
    violated: list[tuple[str, Fraction]]


def membership(cone: RationalCone, v) -> Membership:
    """Exact position of ``v`` (coordinates or an exact EntropyVector) relative to ``cone``."""
    if isinstance(v, EntropyVector):
        if not v.is_exact:
            raise ConeError("membership needs an exact vector")
        v = cone.vector_coords(v)
    if len(v) != cone.dim:
        raise ConeError(f"vector of length {len(v)} for a {cone.dim}-dim cone")
    tight, violated = [], []
    for a, nm in zip(cone.constraints, cone.names):
        s = sum((Fraction(x) * y for x, y in zip(a, v)), Fraction(0))
        if s < 0:
            violated.append((nm, s))
        elif s == 0:
            tight.append(nm)
    status = "outside" if violated else ("boundary" if tight else "inside")
    return Membership(status, tight, violated)


def tight_rank(cone: RationalCone, ray: Sequence[int]) -> int:
    return rank_q([a for a in cone.constraints if _dot(a, ray) == 0])


# -- the 4-party quantum Ingleton cone -----------------------------------------

ABCD = PartySystem("abcd")
ABCDE = PartySystem("abcde")


def purified_functional(f: LinearFunctional, system: PartySystem) -> LinearFunctional:
    """Rewrite a functional on ``system`` plus one purifying party in ``system`` coordinates.

    ``f`` lives on ``n + 1`` parties whose last one purifies the rest; every
    subset containing it is replaced by its complement (``S(J) = S(J^c)``).
    """
    big = f.system
    if big.n != system.n + 1:
        raise ConeError("purified functional needs exactly one extra party")
    top = 1 << system.n
    return LinearFunctional.from_terms(
        system, [(m if not m & top else big.full & ~m, c) for m, c in f]
    )


def build_quantum_ingleton_cone(n: int = 4, *, ingleton: str | None = "purified") -> RationalCone:
    """Poly-quantoid cone on ``n`` parties with Ingleton constraints.

    ``ingleton`` selects which Ingleton instances are added:

    * ``"purified"`` -- all permutations on every 4-subset of the ``n + 1``
      parties of the purified picture (the purifier included), rewritten in
      ``n``-party coordinates.  This is the symmetric cone whose rays are
      the Table 1 columns.
    * ``"parties"`` -- only 4-subsets of the ``n`` parties themselves.
    * ``None`` -- no Ingleton constraints.
    """
    system = PartySystem.of_size(n)
    insts = list(ineq.quantum_family(system))
    if ingleton == "parties":
        for quad in itertools.combinations(system.names, 4):
            insts += ineq.ingleton_permutations(system, quad)
    elif ingleton == "purified":
        big = PartySystem.of_size(n + 1)
        for quad in itertools.combinations(big.names, 4):
            for inst in ineq.ingleton_permutations(big, quad):
                insts.append(
                    ineq.InequalityInstance(
                        inst.name, purified_functional(inst.functional, system), ineq.Family.INGLETON
                    )
                )
    elif ingleton is not None:
        raise ValueError(f"unknown ingleton mode {ingleton!r}")
    return RationalCone.from_instances(ineq._dedup(insts))


def build_pure_ingleton_cone() -> RationalCone:
    """Cross-check build from the 5-party side.

    Nonnegativity and SSA on all subsets of abcde plus every Ingleton
    permutation on every 4-subset, with complementarity imposed by
    rewriting subsets that contain ``e``.  No weak monotonicity is put in
    by hand; it follows from SSA with the purifier.
    """
    insts = [i for i in ineq.quantum_family(ABCDE) if i.family in (ineq.Family.NONNEG, ineq.Family.SSA)]
    for quad in itertools.combinations(ABCDE.names, 4):
        insts += ineq.ingleton_permutations(ABCDE, quad)
    out = []
    for inst in insts:
        f = purified_functional(inst.functional, ABCD)
        if f:
            out.append(ineq.InequalityInstance(inst.name, f, inst.family))
    return RationalCone.from_instances(ineq._dedup(out))


def _subset_perm_table(perm: Sequence[int], n: int = 4) -> list[int]:
    return [permute_mask(m, perm) for m in range(1 << n)]


_S4_TABLES = [_subset_perm_table(p) for p in itertools.permutations(range(4))]


def permute_ray(ray: Sequence[int], perm: Sequence[int]) -> tuple[int, ...]:
    """Image of a 15-coordinate abcd ray under the party map ``i -> perm[i]``."""
    table = _subset_perm_table(perm)
    out = [0] * 15
    for m in range(1, 16):
        out[table[m] - 1] = ray[m - 1]
    return tuple(out)


@dataclass(frozen=True)
class RayOrbit:
    representative: tuple[int, ...]
    group: str
    size: int


def _s5_images(ray: Sequence[int]) -> list[tuple[int, ...]]:
    col = lift_to_pure(ray)
    out = []
    for perm in itertools.permutations(range(5)):
        img = [0] * 32
        for m in range(1, 32):
            img[permute_mask(m, perm)] = col[m]
        out.append(tuple(img[1:16]))
    return out


def canonicalize_orbit(ray: Sequence[int], group: str = "S4") -> RayOrbit:
    """Lexicographically minimal image of ``ray`` and its orbit size.

    ``group="S4"`` permutes abcd with the purifying party fixed;
    ``group="S5"`` permutes all five parties of the purified picture.
    """
    ray = tuple(ray)
    if group == "S4":
        images = set()
        for table in _S4_TABLES:
            out = [0] * 15
            for m in range(1, 16):
                out[table[m] - 1] = ray[m - 1]
            images.add(tuple(out))
    elif group == "S5":
        images = set(_s5_images(ray))
    else:
        raise ValueError(f"unknown group {group!r}")
    return RayOrbit(min(images), group, len(images))


def lift_to_pure(v: Sequence) -> list:
    """Full 5-party column (indexed by mask 0..31) of a 15-coordinate abcd vector."""
    if isinstance(v, EntropyVector):
        v = v.values[1:]
    v = list(v)
    if len(v) != 15:
        raise ConeError("lift_to_pure needs a 15-coordinate abcd vector")
    col = [0] * 32
    for m in range(1, 32):
        k = m if not m & 0b10000 else 0b11111 & ~m
        col[m] = v[k - 1] if k else 0
    return col


# rows of Table 1: subset of abcde, with the abcd subset it stands for
TABLE1_ROWS = [
    "a", "b", "c", "d", "e",
    "ab", "ac", "ad", "ae", "bc", "bd", "be", "cd", "ce", "de",
]
TABLE1_COLUMNS = {
    1: [1, 1, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 0, 0, 0],
    2: [1, 1, 1, 1, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1],
    3: [1, 1, 1, 1, 0, 2, 2, 2, 1, 2, 2, 1, 2, 1, 1],
    4: [1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1],
    5: [2, 1, 1, 1, 1, 3, 3, 3, 3, 2, 2, 2, 2, 2, 2],
    6: [1, 1, 2, 2, 2, 2, 3, 3, 3, 3, 3, 3, 2, 2, 2],
    0: [1, 1, 1, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2],
}
TABLE1_PRIMES = {0: 2, 1: 2, 2: 2, 3: 3, 4: 2, 5: 2, 6: 3}


def table1_ray(k: int) -> tuple[int, ...]:
    """Column ``k`` of Table 1 as a 15-coordinate abcd vector (coordinate = mask - 1)."""
    col = dict(zip(TABLE1_ROWS, TABLE1_COLUMNS[k]))
    out = [0] * 15
    for m in range(1, 16):
        if bin(m).count("1") <= 2:
            out[m - 1] = col[ABCD.label(m)]
        elif m == 15:
            out[m - 1] = col["e"]
        else:
            out[m - 1] = col[ABCD.label(15 & ~m) + "e"]
    return tuple(out)


def table1_vector(k: int) -> EntropyVector:
    """Column ``k`` as a pure 5-party ExactLog vector."""
    col = lift_to_pure(table1_ray(k))
    return EntropyVector(ABCDE, col, ExactLog(TABLE1_PRIMES[k]), pure=True)


def column_rows(ray: Sequence) -> list:
    """The 15 Table 1 row values of a 15-coordinate ray."""
    col = lift_to_pure(ray)
    return [col[ABCDE.mask(r)] for r in TABLE1_ROWS]


@dataclass
class Table1Match:
    total_rays: int
    orbits: list[RayOrbit]
    matched: dict[int, RayOrbit]
    missing: list[int]
    extra: list[RayOrbit]

    @property
    def ok(self) -> bool:
        return not self.missing and not self.extra


def group_orbits(rays: Iterable[Sequence[int]], group: str = "S4") -> list[RayOrbit]:
    orbits: dict[tuple, RayOrbit] = {}
    for r in rays:
        o = canonicalize_orbit(r, group)
        orbits.setdefault(o.representative, o)
    return sorted(orbits.values(), key=lambda o: o.representative)


def match_table1(rays: Sequence[Sequence[int]], group: str = "S5") -> Table1Match:
    orbits = group_orbits(rays, group)
    by_rep = {o.representative: o for o in orbits}
    matched, missing = {}, []
    for k in TABLE1_COLUMNS:
        rep = canonicalize_orbit(table1_ray(k), group).representative
        if rep in by_rep:
            matched[k] = by_rep[rep]
        else:
            missing.append(k)
    used = {o.representative for o in matched.values()}
    extra = [o for o in orbits if o.representative not in used]
    return Table1Match(len(rays), orbits, matched, missing, extra)
