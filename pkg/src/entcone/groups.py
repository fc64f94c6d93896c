"""Poly-matroids from finite groups, subspace arrangements and distributions.

A group poly-matroid assigns ``log2 |G| / |G_J|`` to a party set ``J``,
where ``G_J`` is the intersection of the subgroups of the parties in
``J``.  Groups are stored as multiplication tables on ``0..n-1``.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .entvec import (
    EntropyVector,
    ExactLog,
    PartySystem,
    conditional_entropy_functional,
    evaluate,
    mutual_information_functional,
)
from .ineq import NUMERIC_TOL, ingleton_functional
from .linalg import is_prime, rank_mod

MAX_ORDER = 4096
FULL_ASSOC_CHECK = 64


class GroupError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """Group given by its multiplication table ``table[a][b] = a*b``."""

    table: tuple[tuple[int, ...], ...]
    identity: int
    labels: tuple | None = None

    def __post_init__(self):
        t = tuple(tuple(int(x) for x in row) for row in self.table)
        object.__setattr__(self, "table", t)
        n = len(t)
        if not 1 <= n <= MAX_ORDER:
            raise GroupError(f"group order must be in 1..{MAX_ORDER}")
        for row in t:
            if len(row) != n or sorted(row) != list(range(n)):
                raise GroupError("multiplication table rows must be permutations of 0..n-1")
        e = self.identity
        if any(t[e][a] != a or t[a][e] != a for a in range(n)):
            raise GroupError(f"{e} is not an identity element")
        inv = []
        for a in range(n):
            b = t[a].index(e)
            if t[b][a] != e:
                raise GroupError(f"element {a} has no two-sided inverse")
            inv.append(b)
        object.__setattr__(self, "_inv", tuple(inv))
        self._check_associative()

    def _check_associative(self, samples: int = 1000, seed: int = 0) -> None:
        n = self.order
        t = self.table
        if n <= FULL_ASSOC_CHECK:
            triples: Iterable = itertools.product(range(n), repeat=3)
        else:
            rng = random.Random(seed)
            triples = ((rng.randrange(n), rng.randrange(n), rng.randrange(n)) for _ in range(samples))
        for a, b, c in triples:
            if t[t[a][b]][c] != t[a][t[b][c]]:
                raise GroupError(f"multiplication is not associative at ({a}, {b}, {c})")

    @property
    def order(self) -> int:
        return len(self.table)

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inv(self, a: int) -> int:
        return self._inv[a]

    def is_abelian(self) -> bool:
        t = self.table
        return all(t[a][b] == t[b][a] for a in range(self.order) for b in range(a))

    def generated(self, gens: Iterable[int]) -> frozenset[int]:
        """Subgroup generated by ``gens`` (closure under products)."""
        elems = {self.identity}
        frontier = [self.identity]
        gens = list(gens)
        while frontier:
            nxt = []
            for a in frontier:
                for g in gens:
                    b = self.table[a][g]
                    if b not in elems:
                        elems.add(b)
                        nxt.append(b)
            frontier = nxt
        return frozenset(elems)

    def is_subgroup(self, elems: Iterable[int]) -> bool:
        s = set(elems)
        if self.identity not in s:
            return False
        return all(self.table[a][self._inv[b]] in s for a in s for b in s)

    def product_set(self, a: Iterable[int], b: Iterable[int]) -> frozenset[int]:
        return frozenset(self.table[x][y] for x in a for y in b)

    def non_normal_witness(self, h: Iterable[int]) -> tuple[int, int] | None:
        """``(g, x)`` with ``g x g^-1`` outside ``h``, or ``None`` when ``h`` is normal."""
        hs = set(h)
        t = self.table
        for g in range(self.order):
            gi = self._inv[g]
            for x in hs:
                if t[t[g][x]][gi] not in hs:
                    return g, x
        return None

    def is_normal(self, h: Iterable[int]) -> bool:
        return self.non_normal_witness(h) is None

    def subgroups(self) -> list[frozenset[int]]:
        """All subgroups, via closures of growing generating sets (small groups only)."""
        found = {frozenset({self.identity})}
        frontier = list(found)
        while frontier:
            nxt = []
            for h in frontier:
                for g in range(self.order):
                    if g not in h:
                        k = self.generated(set(h) | {g})
                        if k not in found:
                            found.add(k)
                            nxt.append(k)
            frontier = nxt
        return sorted(found, key=lambda s: (len(s), sorted(s)))


# -- group builders ---------------------------------------------------------------------


def _from_elements(elems: Sequence, mul: Callable, identity) -> FiniteGroup:
    index = {e: i for i, e in enumerate(elems)}
    table = [[index[mul(a, b)] for b in elems] for a in elems]
    return FiniteGroup(tuple(map(tuple, table)), index[identity], tuple(elems))


def cyclic(n: int) -> FiniteGroup:
    return _from_elements(list(range(n)), lambda a, b: (a + b) % n, 0)


def direct_product(g: FiniteGroup, h: FiniteGroup) -> FiniteGroup:
    elems = [(a, b) for a in range(g.order) for b in range(h.order)]
    return _from_elements(
        elems, lambda x, y: (g.mul(x[0], y[0]), h.mul(x[1], y[1])), (g.identity, h.identity)
    )


def abelian(*orders: int) -> FiniteGroup:
    """``Z_{n1} x Z_{n2} x ...`` with elements as tuples."""
    elems = list(itertools.product(*(range(n) for n in orders)))
    return _from_elements(
        elems, lambda x, y: tuple((a + b) % n for a, b, n in zip(x, y, orders)), tuple(0 for _ in orders)
    )


def symmetric(n: int) -> FiniteGroup:
    """``S_n`` acting on ``0..n-1``; ``(p*q)(i) = p(q(i))``."""
    elems = list(itertools.permutations(range(n)))
    return _from_elements(elems, lambda p, q: tuple(p[q[i]] for i in range(n)), tuple(range(n)))


def dihedral(n: int) -> FiniteGroup:
    """Symmetries of the n-gon, elements ``(r, s)`` meaning ``rot^r refl^s``."""
    elems = [(r, s) for s in range(2) for r in range(n)]

    def mul(x, y):
        r1, s1 = x
        r2, s2 = y
        return ((r1 + (-r2 if s1 else r2)) % n, s1 ^ s2)

    return _from_elements(elems, mul, (0, 0))


def quaternion() -> FiniteGroup:
    """``Q8`` as unit quaternions ``(sign, axis)`` with axis in 1, i, j, k."""
    # basis products: axis index 0=1, 1=i, 2=j, 3=k
    prod = {
        (0, 0): (1, 0), (0, 1): (1, 1), (0, 2): (1, 2), (0, 3): (1, 3),
        (1, 0): (1, 1), (1, 1): (-1, 0), (1, 2): (1, 3), (1, 3): (-1, 2),
        (2, 0): (1, 2), (2, 1): (-1, 3), (2, 2): (-1, 0), (2, 3): (1, 1),
        (3, 0): (1, 3), (3, 1): (1, 2), (3, 2): (-1, 1), (3, 3): (-1, 0),
    }  # fmt: skip
    elems = [(s, a) for s in (1, -1) for a in range(4)]

    def mul(x, y):
        s, a = prod[x[1], y[1]]
        return (x[0] * y[0] * s, a)

    return _from_elements(elems, mul, (1, 0))


def heisenberg(p: int) -> FiniteGroup:
    """Upper unitriangular 3x3 matrices over Z_p, as ``(a, b, c)``."""
    elems = list(itertools.product(range(p), repeat=3))

    def mul(x, y):
        return ((x[0] + y[0]) % p, (x[1] + y[1]) % p, (x[2] + y[2] + x[0] * y[1]) % p)

    return _from_elements(elems, mul, (0, 0, 0))


NAMED_GROUPS: dict[str, Callable[[], FiniteGroup]] = {
    "Z2": lambda: cyclic(2),
    "Z4": lambda: cyclic(4),
    "Z2xZ2": lambda: abelian(2, 2),
    "Z2xZ2xZ2": lambda: abelian(2, 2, 2),
    "S3": lambda: symmetric(3),
    "S4": lambda: symmetric(4),
    "D4": lambda: dihedral(4),
    "Q8": quaternion,
    "Heis3": lambda: heisenberg(3),
}


# -- poly-matroids ------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SubgroupFamily:
    group: FiniteGroup
    subgroups: tuple[frozenset[int], ...]
    system: PartySystem

    def __init__(self, group: FiniteGroup, subgroups: Sequence[Iterable[int]], system: PartySystem | None = None):
        subs = tuple(frozenset(s) for s in subgroups)
        system = system or PartySystem.of_size(len(subs))
        if system.n != len(subs):
            raise GroupError("need one subgroup per party")
        for i, s in enumerate(subs):
            if not group.is_subgroup(s):
                raise GroupError(f"subset for party {system.names[i]} is not a subgroup")
        object.__setattr__(self, "group", group)
        object.__setattr__(self, "subgroups", subs)
        object.__setattr__(self, "system", system)

    def intersection(self, mask: int) -> frozenset[int]:
        out = frozenset(range(self.group.order))
        for i, s in enumerate(self.subgroups):
            if mask >> i & 1:
                out &= s
        return out

    def index_of(self, mask: int) -> int:
        return self.group.order // len(self.intersection(mask))


def _prime_power(n: int) -> tuple[int, int] | None:
    if n == 1:
        return None
    p = next(q for q in range(2, n + 1) if n % q == 0)
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return (p, k) if n == 1 else None


def group_polymatroid(family: SubgroupFamily, exact: bool = False) -> EntropyVector:
    """``H(J) = log2 |G| / |G_J|``.

    With ``exact`` and a group of prime-power order the result is an
    ExactLog vector with integer entries.
    """
    if exact:
        pk = _prime_power(family.group.order)
        if pk is None:
            raise GroupError("exact output needs a group of prime-power order")
        p = pk[0]

        def exponent(m: int) -> int:
            idx = family.index_of(m)
            k = 0
            while idx > 1:
                idx //= p
                k += 1
            return k

        return EntropyVector.from_function(family.system, exponent, ExactLog(p))
    return EntropyVector.from_function(family.system, lambda m: math.log2(family.index_of(m)))


def shannon_entropy(probs: Iterable[float]) -> float:
    return -math.fsum(q * math.log2(q) for q in probs if q > 0)


def classical_polymatroid(
    dist: Mapping[tuple, float | Fraction], system: PartySystem | None = None
) -> EntropyVector:
    """Entropies of every marginal of a joint distribution ``{outcome tuple: prob}``."""
    if not dist:
        raise GroupError("empty distribution")
    n = len(next(iter(dist)))
    if any(len(k) != n for k in dist):
        raise GroupError("outcomes must all have the same length")
    if any(v < 0 for v in dist.values()):
        raise GroupError("negative probability")
    total = math.fsum(float(v) for v in dist.values())
    if abs(total - 1) > 1e-12:
        raise GroupError(f"probabilities sum to {total}")
    system = system or PartySystem.of_size(n)

    def h(mask: int) -> float:
        idx = [i for i in range(n) if mask >> i & 1]
        marg: dict[tuple, float] = {}
        for outcome, q in dist.items():
            key = tuple(outcome[i] for i in idx)
            marg[key] = marg.get(key, 0.0) + float(q)
        return shannon_entropy(marg.values())

    return EntropyVector.from_function(system, h)


def _factor(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    q = 2
    while q * q <= n:
        while n % q == 0:
            out[q] = out.get(q, 0) + 1
            n //= q
        q += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def exact_shannon_entropy(probs: Iterable[Fraction]) -> dict[int, Fraction]:
    """``-sum q log2 q`` for rational ``q`` as ``{prime: c}`` meaning ``sum c log2 prime``."""
    out: dict[int, Fraction] = {}
    for q in probs:
        q = Fraction(q)
        if q == 0:
            continue
        for prime, e in _factor(q.denominator).items():
            out[prime] = out.get(prime, Fraction(0)) + q * e
        for prime, e in _factor(q.numerator).items():
            out[prime] = out.get(prime, Fraction(0)) - q * e
    return {k: v for k, v in sorted(out.items()) if v}


def exact_classical_entropies(dist: Mapping[tuple, Fraction], n: int | None = None) -> list[dict[int, Fraction]]:
    """Closed-form marginal entropies, indexed by subset mask, for a rational distribution."""
    n = len(next(iter(dist))) if n is None else n
    out = [{}]
    for mask in range(1, 1 << n):
        marg: dict[tuple, Fraction] = {}
        for outcome, q in dist.items():
            key = tuple(outcome[i] for i in range(n) if mask >> i & 1)
            marg[key] = marg.get(key, Fraction(0)) + Fraction(q)
        out.append(exact_shannon_entropy(marg.values()))
    return out


def evaluate_log_combination(f, entropies: Sequence[Mapping[int, Fraction]]) -> dict[int, Fraction]:
    """Apply a linear functional to closed-form entropies, collecting prime-log coefficients."""
    out: dict[int, Fraction] = {}
    for mask, c in f:
        for prime, v in entropies[mask].items():
            out[prime] = out.get(prime, Fraction(0)) + c * v
    return {k: v for k, v in sorted(out.items()) if v}


def log_combination_value(comb: Mapping[int, Fraction]) -> float:
    return math.fsum(float(c) * math.log2(p) for p, c in comb.items())


def coset_distribution(family: SubgroupFamily) -> dict[tuple, Fraction]:
    """Joint law of ``X_j = g G_j`` for uniform ``g``; cosets labelled by their minimum."""
    g = family.group
    counts: dict[tuple, int] = {}
    for x in range(g.order):
        key = tuple(min(g.mul(x, h) for h in s) for s in family.subgroups)
        counts[key] = counts.get(key, 0) + 1
    return {k: Fraction(c, g.order) for k, c in counts.items()}


@dataclass(frozen=True)
class SubspaceFamily:
    prime: int
    dim: int
    spans: tuple[tuple[tuple[int, ...], ...], ...]
    system: PartySystem | None = None

    def __post_init__(self):
        if not is_prime(self.prime):
            raise GroupError(f"{self.prime} is not prime")
        spans = tuple(tuple(tuple(int(x) % self.prime for x in row) for row in m) for m in self.spans)
        for m in spans:
            if any(len(row) != self.dim for row in m):
                raise GroupError(f"generator rows must have length {self.dim}")
        object.__setattr__(self, "spans", spans)
        if self.system is None:
            object.__setattr__(self, "system", PartySystem.of_size(len(spans)))
        elif self.system.n != len(spans):
            raise GroupError("need one subspace per party")

    def rank(self, mask: int) -> int:
        rows = [r for i, m in enumerate(self.spans) if mask >> i & 1 for r in m]
        return rank_mod(rows, self.prime) if rows else 0


def linear_polymatroid(family: SubspaceFamily) -> EntropyVector:
    """``H(J) = dim sum_{j in J} V_j`` in units of ``log2 p``."""
    return EntropyVector.from_function(family.system, family.rank, ExactLog(family.prime))


def random_subspace_family(rng: random.Random, prime: int, dim: int, parties: int) -> SubspaceFamily:
    spans = []
    for _ in range(parties):
        k = rng.randrange(0, dim + 1)
        spans.append(tuple(tuple(rng.randrange(prime) for _ in range(dim)) for _ in range(k)))
    return SubspaceFamily(prime, dim, tuple(spans))


# -- common information --------------------------------------------------------------------


@dataclass(frozen=True)
class CommonInformation:
    family: SubgroupFamily
    base: EntropyVector
    extended: EntropyVector
    zeta: int


def common_information_extension(family: SubgroupFamily, a: int, b: int, name: str = "z") -> CommonInformation:
    """Append party ``G_zeta = G_A G_B`` for normal ``G_A``, ``G_B`` (party indices)."""
    g = family.group
    for idx in (a, b):
        w = g.non_normal_witness(family.subgroups[idx])
        if w is not None:
            gg, x = w
            raise GroupError(
                f"subgroup of party {family.system.names[idx]} is not normal: "
                f"{gg} * {x} * {gg}^-1 = {g.mul(g.mul(gg, x), g.inv(gg))} lies outside"
            )
    prod = g.product_set(family.subgroups[a], family.subgroups[b])
    assert g.is_subgroup(prod), "product of normal subgroups must be a subgroup"
    if name in family.system.names:
        raise GroupError(f"party name {name!r} already in use")
    ext = SubgroupFamily(g, family.subgroups + (prod,), PartySystem(family.system.names + (name,)))
    res = CommonInformation(ext, group_polymatroid(family), group_polymatroid(ext), ext.system.n - 1)
    if not check_common_information(res.base, res.extended, a, b, res.zeta, exact_indices=ext):
        raise GroupError("common information conditions failed")
    return res


def _cond_holds(ext_family: SubgroupFamily, a: int, b: int, z: int) -> bool:
    """The three conditions as exact index identities."""
    idx = ext_family.index_of
    za, zb, zz = 1 << z | 1 << a, 1 << z | 1 << b, 1 << z
    ia, ib, iab = idx(1 << a), idx(1 << b), idx(1 << a | 1 << b)
    # H(z|a)=0, H(z|b)=0, H(z) = H(a)+H(b)-H(ab)  <=>  |G:G_z| = ia*ib/iab
    return idx(za) == ia and idx(zb) == ib and idx(zz) * iab == ia * ib


def check_common_information(
    base: EntropyVector,
    extended: EntropyVector,
    a: int,
    b: int,
    zeta: int,
    tol: float = NUMERIC_TOL,
    exact_indices: SubgroupFamily | None = None,
) -> bool:
    """Verify that party ``zeta`` of ``extended`` is a common information of ``a``, ``b``.

    When it is, the Ingleton inequality ``Ing(AB:CD)`` must hold for every
    choice of two further base parties; a violation raises, since it would
    contradict the common-information argument.
    """
    bs, es = base.system, extended.system
    if es.names[:bs.n] != bs.names or es.n != bs.n + 1 or zeta != bs.n:
        raise GroupError("extended system must be the base system plus one trailing party")
    if extended.restrict(bs.names).values != base.values:
        if max(abs(x - y) for x, y in zip(extended.restrict(bs.names).values, base.values)) > tol:
            raise GroupError("extended vector does not restrict to the base vector")
    if exact_indices is not None:
        ok = _cond_holds(exact_indices, a, b, zeta)
    else:
        ma, mb, mz = 1 << a, 1 << b, 1 << zeta
        vals = [
            evaluate(conditional_entropy_functional(es, mz, ma), extended),
            evaluate(conditional_entropy_functional(es, mz, mb), extended),
            extended.values[mz] - evaluate(mutual_information_functional(es, ma, mb), extended),
        ]
        ok = all((v == 0) if extended.is_exact else abs(v) <= tol for v in vals)
    if not ok:
        return False
    others = [i for i in range(bs.n) if i not in (a, b)]
    for c, d in itertools.permutations(others, 2):
        margin = evaluate(ingleton_functional(bs, 1 << a, 1 << b, 1 << c, 1 << d), base)
        if margin < (0 if base.is_exact else -tol):
            raise AssertionError(
                f"Ingleton violated ({margin}) despite a common information for parties {a}, {b}"
            )
    return True


# -- file formats ----------------------------------------------------------------------------


def load_group(text: str) -> tuple[FiniteGroup, list[frozenset[int]]]:
    """``order: n``, ``table:`` followed by n rows, then ``subgroup: i j k ...`` lines.

    The identity is the element whose row is the identity permutation.
    """
    order = None
    rows: list[tuple[int, ...]] = []
    subs: list[frozenset[int]] = []
    in_table = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("order:"):
            order = int(line[6:])
            in_table = False
        elif line.startswith("table:"):
            in_table = True
        elif line.startswith("subgroup:"):
            in_table = False
            subs.append(frozenset(int(t) for t in line[9:].split()))
        elif in_table:
            rows.append(tuple(int(t) for t in line.split()))
        else:
            raise GroupError(f"line {lineno}: unexpected {line!r}")
    if order is None or len(rows) != order:
        raise GroupError(f"expected 'order:' and {order} table rows, got {len(rows)}")
    ident = next((i for i, r in enumerate(rows) if r == tuple(range(order))), None)
    if ident is None:
        raise GroupError("table has no identity row")
    return FiniteGroup(tuple(rows), ident), subs


def dump_group(group: FiniteGroup, subgroups: Iterable[Iterable[int]] = ()) -> str:
    lines = [f"order: {group.order}", "table:"]
    lines += [" ".join(map(str, row)) for row in group.table]
    lines += ["subgroup: " + " ".join(map(str, sorted(s))) for s in subgroups]
    return "\n".join(lines) + "\n"


def load_distribution(text: str) -> dict[tuple, Fraction]:
    """Lines ``atom p`` where ``atom`` is a comma-free token of symbols, e.g. ``0110 1/4``.

    A multi-character atom gives one outcome per character; tokens
    separated by commas (``0,1,10 1/4``) allow larger alphabets.
    """
    dist: dict[tuple, Fraction] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GroupError(f"line {lineno}: expected 'atom probability'")
        atom, prob = parts
        key = tuple(atom.split(",")) if "," in atom else tuple(atom)
        try:
            q = Fraction(prob)
        except (ValueError, ZeroDivisionError) as exc:
            raise GroupError(f"line {lineno}: bad probability {prob!r}") from exc
        dist[key] = dist.get(key, Fraction(0)) + q
    if sum(dist.values()) != 1:
        raise GroupError(f"probabilities sum to {sum(dist.values())}, not 1")
    return dist


def or_and_distribution() -> dict[tuple, Fraction]:
    """``C, D`` uniform bits, ``A = C or D``, ``B = C and D``; outcomes ``(A, B, C, D)``."""
    out = {}
    for c, d in itertools.product((0, 1), repeat=2):
        out[(c | d, c & d, c, d)] = Fraction(1, 4)
    return out
