"""Qudit stabiliser states handled symplectically.

A generator is a pair of vectors ``(x, z)`` over Z_p; phases are dropped
because entropies only see the group modulo its centre.  For a maximal
group on ``n`` qudits the entropy of a party set ``J`` is
``q_J - m_J`` in units of ``log2 p``, where ``q_J`` counts the qudits in
``J`` and ``p**m_J`` is the order of the subgroup supported inside ``J``.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .entvec import EntropyVector, ExactLog, ModularPart, PartySystem
from .linalg import is_prime, nullspace_mod, rank_mod

MAX_QUDITS = 32
RETRY_CAP = 10**5


class StabiliserError(ValueError):
    pass


@dataclass(frozen=True)
class PauliElement:
    prime: int
    x: tuple[int, ...]
    z: tuple[int, ...]

    def __post_init__(self):
        if len(self.x) != len(self.z):
            raise StabiliserError("x and z parts differ in length")
        object.__setattr__(self, "x", tuple(int(v) % self.prime for v in self.x))
        object.__setattr__(self, "z", tuple(int(v) % self.prime for v in self.z))

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def vector(self) -> tuple[int, ...]:
        return self.x + self.z

    def symplectic(self, other: "PauliElement") -> int:
        """``x.z' - z.x' mod p``; zero iff the two commute up to phase."""
        p = self.prime
        return (sum(a * b for a, b in zip(self.x, other.z)) - sum(a * b for a, b in zip(self.z, other.x))) % p

    def support(self) -> set[int]:
        return {i for i in range(self.n) if self.x[i] or self.z[i]}

    @classmethod
    def from_string(cls, text: str) -> "PauliElement":
        """Qubit shorthand such as ``XZZXI`` (``Y`` sets both bits)."""
        table = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
        try:
            bits = [table[ch] for ch in text.strip().upper()]
        except KeyError as exc:
            raise StabiliserError(f"bad Pauli string {text!r}") from exc
        return cls(2, tuple(b[0] for b in bits), tuple(b[1] for b in bits))

    def __str__(self) -> str:
        if self.prime == 2:
            names = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
            return "".join(names[a, b] for a, b in zip(self.x, self.z))
        return f"x {' '.join(map(str, self.x))} | z {' '.join(map(str, self.z))}"


@dataclass(frozen=True)
class ValidationReport:
    k: int
    n: int
    prime: int

    @property
    def order_exponent(self) -> int:
        return self.k

    @property
    def order(self) -> int:
        return self.prime**self.k

    @property
    def maximal(self) -> bool:
        return self.k == self.n


@dataclass(frozen=True)
class StabiliserGroup:
    """Generators plus an assignment of qudits to parties.

    ``party_of`` maps qudit index to party index in ``parties``; a party
    may hold several qudits (composite local dimension) or none.
    """

    prime: int
    parties: PartySystem
    party_of: tuple[int, ...]
    generators: tuple[PauliElement, ...]

    def __post_init__(self):
        if not is_prime(self.prime):
            raise StabiliserError(f"{self.prime} is not prime")
        object.__setattr__(self, "party_of", tuple(self.party_of))
        object.__setattr__(self, "generators", tuple(self.generators))
        n = len(self.party_of)
        if not 1 <= n <= MAX_QUDITS:
            raise StabiliserError(f"need 1..{MAX_QUDITS} qudits, got {n}")
        if any(not 0 <= q < self.parties.n for q in self.party_of):
            raise StabiliserError("qudit assigned to an unknown party")
        for g in self.generators:
            if g.prime != self.prime or g.n != n:
                raise StabiliserError(f"generator {g} does not fit {n} qudits over Z_{self.prime}")

    @property
    def n(self) -> int:
        return len(self.party_of)

    @property
    def k(self) -> int:
        return len(self.generators)

    def qudits_of(self, mask: int) -> list[int]:
        return [i for i, q in enumerate(self.party_of) if mask >> q & 1]

    def qudit_counts(self) -> list[int]:
        counts = [0] * self.parties.n
        for q in self.party_of:
            counts[q] += 1
        return counts

    def local_dims(self) -> tuple[int, ...]:
        return tuple(self.prime**c for c in self.qudit_counts())

    def with_generator(self, g: PauliElement) -> "StabiliserGroup":
        return StabiliserGroup(self.prime, self.parties, self.party_of, self.generators + (g,))


def validate(group: StabiliserGroup) -> ValidationReport:
    """Check commutation and independence; raise naming the offending generators."""
    gens = group.generators
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            s = gens[i].symplectic(gens[j])
            if s:
                raise StabiliserError(
                    f"generators {i} ({gens[i]}) and {j} ({gens[j]}) do not commute: form = {s}"
                )
    r = rank_mod([g.vector for g in gens], group.prime) if gens else 0
    if r != len(gens):
        raise StabiliserError(f"generators are dependent over Z_{group.prime} (rank {r} < {len(gens)})")
    return ValidationReport(len(gens), group.n, group.prime)


def subgroup_order_on(group: StabiliserGroup, subset) -> int:
    """Exponent ``m`` with ``|G_J| = p**m`` for the elements supported inside ``J``."""
    mask = group.parties.mask(subset)
    outside = group.qudits_of(group.parties.full & ~mask)
    if not group.generators:
        return 0
    n = group.n
    cols = outside + [n + i for i in outside]
    rows = [[g.vector[c] for c in cols] for g in group.generators]
    if not cols:
        return group.k
    return group.k - rank_mod(rows, group.prime)


def _require_maximal(group: StabiliserGroup) -> None:
    if not validate(group).maximal:
        raise StabiliserError(f"group has {group.k} generators on {group.n} qudits; not a pure state")


def entropy_vector(group: StabiliserGroup) -> EntropyVector:
    """Exact entropy vector of the pure stabiliser state, in units of ``log2 p``."""
    _require_maximal(group)
    counts = group.qudit_counts()
    sys_ = group.parties

    def s(mask: int) -> int:
        q = sum(c for i, c in enumerate(counts) if mask >> i & 1)
        return q - subgroup_order_on(group, mask)

    return EntropyVector.from_function(sys_, s, ExactLog(group.prime), pure=True)


@dataclass(frozen=True)
class BalancedDecomposition:
    """``S = H - h0`` with ``H(J) = log |G| / |G_{J^c}|`` and ``h0`` modular."""

    group_part: EntropyVector
    modular: ModularPart

    def entropy(self) -> EntropyVector:
        h0 = self.modular.vector(self.group_part.scale)
        vals = [a - b for a, b in zip(self.group_part.values, h0.values)]
        return EntropyVector(self.group_part.system, vals, self.group_part.scale)


def balanced_decomposition(group: StabiliserGroup) -> BalancedDecomposition:
    _require_maximal(group)
    full = group.parties.full
    h = EntropyVector.from_function(
        group.parties, lambda m: group.k - subgroup_order_on(group, full & ~m), ExactLog(group.prime)
    )
    return BalancedDecomposition(h, ModularPart(group.parties, group.qudit_counts()))


def quotient_subgroups(group: StabiliserGroup) -> list[list[tuple[int, ...]]]:
    """For each party ``x`` the subgroup of the quotient supported off ``x``.

    Elements are coefficient vectors ``c`` in Z_p^k (``sum c_i g_i``), so
    the quotient group itself is Z_p^k.  Intended for small ``p**k``.
    """
    p, k = group.prime, group.k
    out = []
    for x in range(group.parties.n):
        inside = group.parties.full & ~(1 << x)
        outside = group.qudits_of(group.parties.full & ~inside)
        cols = outside + [group.n + i for i in outside]
        # c is in the subgroup iff c @ (generator columns on x) == 0
        rows = [[g.vector[c] for g in group.generators] for c in cols]
        basis = nullspace_mod(rows, k, p) if rows else [
            [int(i == j) for j in range(k)] for i in range(k)
        ]
        out.append(_span(basis, p, k))
    return out


def quotient_family(group: StabiliserGroup):
    """The quotient ``Z_p^k`` with one subgroup per party, as a :class:`SubgroupFamily`.

    Its group poly-matroid is the ``H`` part of :func:`balanced_decomposition`.
    """
    from .groups import SubgroupFamily, abelian

    p, k = group.prime, group.k
    ambient = abelian(*([p] * k)) if k else abelian(1)
    weights = [p ** (k - 1 - i) for i in range(k)]
    subs = [[sum(c * w for c, w in zip(e, weights)) for e in elems] for elems in quotient_subgroups(group)]
    return SubgroupFamily(ambient, subs, group.parties)


def _span(basis: Sequence[Sequence[int]], p: int, k: int) -> list[tuple[int, ...]]:
    elems = {tuple([0] * k)}
    for b in basis:
        elems = {tuple((e[i] + t * b[i]) % p for i in range(k)) for e in elems for t in range(p)}
    return sorted(elems)


# -- witness states -----------------------------------------------------------------


def css_group(prime: int, parties: PartySystem, party_of: Sequence[int], code: Sequence[Sequence[int]]) -> StabiliserGroup:
    """Stabiliser of the uniform superposition over the Z_p-span of ``code``.

    X-type generators shift by the codewords, Z-type generators come from
    a basis of the dual code.
    """
    n = len(party_of)
    zero = (0,) * n
    gens = [PauliElement(prime, tuple(c), zero) for c in code]
    gens += [PauliElement(prime, zero, tuple(z)) for z in nullspace_mod(code, n, prime)]
    return StabiliserGroup(prime, parties, tuple(party_of), tuple(gens))


ABCDE = PartySystem("abcde")

_CSS_STATES = {
    "R1": (2, (0, 1, 2, 3, 4), [(1, 1, 0, 0, 0)]),
    "R2": (2, (0, 1, 2, 3, 4), [(1, 1, 1, 1, 0)]),
    "R3": (3, (0, 1, 2, 3, 4), [(1, 0, 1, 1, 0), (0, 1, 1, 2, 0)]),
    "R4": (2, (0, 1, 2, 3, 4), [(1, 1, 1, 1, 1)]),
    # sum over i,j,k,l of |i>|j>|i+j,k>|i+j,l>|i+j,j+k+l>; the single-k form with
    # c'' = d'' = e'' = k (kept as "R6-single-k") gives S(ab) = 1 instead of 2
    "R6": (
        3,
        (0, 1, 2, 2, 3, 3, 4, 4),
        [
            (1, 0, 1, 0, 1, 0, 1, 0),
            (0, 1, 1, 0, 1, 0, 1, 1),
            (0, 0, 0, 1, 0, 0, 0, 1),
            (0, 0, 0, 0, 0, 1, 0, 1),
        ],
    ),
    "R6-single-k": (
        3,
        (0, 1, 2, 2, 3, 3, 4, 4),
        [(1, 0, 1, 0, 1, 0, 1, 0), (0, 1, 1, 0, 1, 0, 1, 0), (0, 0, 0, 1, 0, 1, 0, 1)],
    ),
    "R0": (2, (0, 1, 2, 3, 3, 4, 4), [(1, 0, 1, 1, 0, 1, 0), (0, 1, 1, 0, 1, 0, 1)]),
}

_FIVE_QUBIT_CODE = ["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"]

PAPER_TAGS = ("R0", "R1", "R2", "R3", "R4", "R5", "R6", "quantum_counterexample")
EXTRA_TAGS = ("R6-single-k",)


def _r5() -> StabiliserGroup:
    gens = [PauliElement.from_string("I" + s) for s in _FIVE_QUBIT_CODE]
    gens += [PauliElement.from_string("XXXXXX"), PauliElement.from_string("ZZZZZZ")]
    return StabiliserGroup(2, ABCDE, (0, 0, 1, 2, 3, 4), tuple(gens))


def build_paper_state(tag: str):
    """Witness state for a Table 1 column (``R0``..``R6``) or the mixed counterexample.

    Stabiliser tags return a :class:`StabiliserGroup` over parties
    ``abcde``; ``quantum_counterexample`` returns a 4-qubit density matrix.
    """
    if tag in _CSS_STATES:
        p, party_of, code = _CSS_STATES[tag]
        return css_group(p, ABCDE, party_of, code)
    if tag == "R5":
        return _r5()
    if tag == "quantum_counterexample":
        from .quantum import ingleton_counterexample

        return ingleton_counterexample()
    raise StabiliserError(f"unknown state tag {tag!r}; expected one of {', '.join(PAPER_TAGS + EXTRA_TAGS)}")


def random_stabiliser_group(
    seed: int, p: int, n: int, parties: PartySystem | int, party_of: Sequence[int] | None = None
) -> StabiliserGroup:
    """Maximal group grown from uniformly random commuting, independent vectors.

    Without ``party_of`` each qudit goes to a uniformly random party, so
    some parties may hold no qudit at all.
    """
    if not is_prime(p):
        raise StabiliserError(f"{p} is not prime")
    if not 1 <= n <= MAX_QUDITS:
        raise StabiliserError(f"need 1..{MAX_QUDITS} qudits")
    rng = random.Random(seed)
    system = parties if isinstance(parties, PartySystem) else PartySystem.of_size(parties)
    if party_of is None:
        party_of = [rng.randrange(system.n) for _ in range(n)]
    gens: list[PauliElement] = []
    tries = 0
    while len(gens) < n:
        tries += 1
        if tries > RETRY_CAP:
            raise StabiliserError("random stabiliser construction exceeded the retry cap")
        v = [rng.randrange(p) for _ in range(2 * n)]
        g = PauliElement(p, tuple(v[:n]), tuple(v[n:]))
        if any(g.symplectic(h) for h in gens):
            continue
        if rank_mod([h.vector for h in gens] + [g.vector], p) != len(gens) + 1:
            continue
        gens.append(g)
    return StabiliserGroup(p, system, tuple(party_of), tuple(gens))


# -- text format -------------------------------------------------------------------

_PARTY_RE = re.compile(r"^([A-Za-z][A-Za-z0-9_']*):(\d+)$")


def load_group(text: str) -> StabiliserGroup:
    """Parse the ``prime:`` / ``parties:`` / ``gen:`` text format.

    A ``gen:`` line is either ``x ... | z ...`` or, for qubits, a Pauli
    string such as ``XZZXI``.
    """
    prime = None
    names: list[str] = []
    party_of: list[int] = []
    raw_gens: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(":")
        key = key.strip()
        rest = rest.strip()
        if key == "prime":
            prime = int(rest)
        elif key == "parties":
            for tok in rest.split():
                m = _PARTY_RE.match(tok)
                if not m:
                    raise StabiliserError(f"line {lineno}: bad party spec {tok!r}")
                party_of += [len(names)] * int(m.group(2))
                names.append(m.group(1))
        elif key == "gen":
            raw_gens.append(rest)
        else:
            raise StabiliserError(f"line {lineno}: unknown key {key!r}")
    if prime is None or not names:
        raise StabiliserError("stabiliser file needs 'prime:' and 'parties:' lines")
    gens = []
    for text_gen in raw_gens:
        if "|" in text_gen:
            xs, zs = text_gen.split("|")
            xs, zs = xs.split(), zs.split()
            if xs[:1] != ["x"] or zs[:1] != ["z"]:
                raise StabiliserError(f"bad generator {text_gen!r}")
            gens.append(PauliElement(prime, tuple(map(int, xs[1:])), tuple(map(int, zs[1:]))))
        else:
            if prime != 2:
                raise StabiliserError("Pauli-string shorthand is only for p = 2")
            gens.append(PauliElement.from_string(text_gen))
    return StabiliserGroup(prime, PartySystem(tuple(names)), tuple(party_of), tuple(gens))


def dump_group(group: StabiliserGroup) -> str:
    counts = group.qudit_counts()
    order = [q for i in range(group.parties.n) for q in range(group.n) if group.party_of[q] == i]
    if order != list(range(group.n)):
        raise StabiliserError("text format needs each party's qudits to be contiguous and in party order")
    lines = [
        f"prime: {group.prime}",
        "parties: " + " ".join(f"{name}:{c}" for name, c in zip(group.parties.names, counts)),
    ]
    for g in group.generators:
        lines.append(f"gen: x {' '.join(map(str, g.x))} | z {' '.join(map(str, g.z))}")
    return "\n".join(lines) + "\n"


def dense_entropy_vector(group: StabiliserGroup, phases=None) -> EntropyVector:
    """Entropy vector in bits from the explicit projector (small groups only)."""
    from .quantum import entropy_vector as q_entropy, stabiliser_projector, group_by_parties

    rho, _ = stabiliser_projector(group, phases)
    return q_entropy(group_by_parties(rho, group.party_of, group.parties.n), group.parties)
