"""Party systems, entropy vectors and linear entropy functionals.

Subsets of an N-party system are bitmasks over the declared party order:
bit ``i`` set means party ``names[i]`` is in the subset.  Entropy vectors
come in two flavours.  Exact vectors store rationals that multiply
``log2(p)`` for a single prime ``p``; numeric vectors store floats in bits.
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union

MAX_PARTIES = 8
PURE_TOL = 1e-9

SubsetLike = Union[int, str, Iterable[str]]


class SystemMismatch(ValueError):
    """Raised when objects defined over different party systems are combined."""


@dataclass(frozen=True)
class PartySystem:
    names: tuple[str, ...]

    def __init__(self, names: Iterable[str]):
        names = tuple(names)
        if not 1 <= len(names) <= MAX_PARTIES:
            raise ValueError(f"need 1..{MAX_PARTIES} parties, got {len(names)}")
        if any(not isinstance(n, str) or not n for n in names):
            raise ValueError("party labels must be nonempty strings")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate party labels in {names}")
        object.__setattr__(self, "names", names)

    @classmethod
    def of_size(cls, n: int, start: str = "a") -> "PartySystem":
        return cls(chr(ord(start) + i) for i in range(n))

    @classmethod
    def numbered(cls, n: int) -> "PartySystem":
        return cls(str(i) for i in range(1, n + 1))

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    def index(self, label: str) -> int:
        try:
            return self.names.index(label)
        except ValueError:
            raise KeyError(f"unknown party {label!r}; parties are {self.names}") from None

    def mask(self, subset: SubsetLike) -> int:
        """Bitmask of ``subset``.

        Accepts an int mask, a concatenated label string (``"acd"``; ``""``
        is the empty set) or an iterable of labels.
        """
        if isinstance(subset, int):
            if not 0 <= subset <= self.full:
                raise ValueError(f"mask {subset} outside universe of {self.n} parties")
            return subset
        if isinstance(subset, str):
            return self.parse_label(subset)
        m = 0
        for label in subset:
            m |= 1 << self.index(label)
        return m

    def label(self, mask: int) -> str:
        """Concatenated labels of ``mask`` in system order; ``""`` for the empty set."""
        return "".join(n for i, n in enumerate(self.names) if mask >> i & 1)

    def members(self, mask: int) -> list[str]:
        return [n for i, n in enumerate(self.names) if mask >> i & 1]

    def subsets(self) -> range:
        """All nonempty masks, in increasing order."""
        return range(1, self.full + 1)

    def complement(self, subset: SubsetLike) -> int:
        return self.full & ~self.mask(subset)

    def parse_label(self, text: str) -> int:
        """Inverse of :meth:`label`, also for multi-character labels."""
        if text in ("", "{}"):
            return 0
        m, rest = 0, text
        names = sorted(self.names, key=len, reverse=True)
        while rest:
            for n in names:
                if rest.startswith(n):
                    m |= 1 << self.index(n)
                    rest = rest[len(n):]
                    break
            else:
                raise ValueError(f"cannot parse subset {text!r} over {self.names}")
        return m


def subset_complement(system: PartySystem, subset: SubsetLike) -> int:
    return system.complement(subset)


def popcount(m: int) -> int:
    return bin(m).count("1")


@dataclass(frozen=True)
class ExactLog:
    """Values are rationals multiplying ``log2(prime)``."""

    prime: int

    def __post_init__(self):
        if self.prime < 2 or any(self.prime % q == 0 for q in range(2, math.isqrt(self.prime) + 1)):
            raise ValueError(f"{self.prime} is not prime")

    def to_bits(self, value: Fraction) -> float:
        return float(value) * math.log2(self.prime)

    def __str__(self) -> str:
        return f"log2({self.prime})"


@dataclass(frozen=True)
class NumericBits:
    def to_bits(self, value: float) -> float:
        return float(value)

    def __str__(self) -> str:
        return "bits"


NUMERIC_BITS = NumericBits()
Scale = Union[ExactLog, NumericBits]


@dataclass(frozen=True, eq=False)
class EntropyVector:
    """Entropy value for every subset of ``system``.

    ``values[mask]`` is the entry for subset ``mask``; ``values[0]`` is 0.
    """

    system: PartySystem
    values: tuple
    scale: Scale = NUMERIC_BITS
    pure: bool = False

    def __post_init__(self):
        vals = tuple(self.values)
        if len(vals) != 1 << self.system.n:
            raise ValueError(
                f"expected {1 << self.system.n} entries (including empty set), got {len(vals)}"
            )
        if isinstance(self.scale, ExactLog):
            vals = tuple(Fraction(v) for v in vals)
        else:
            vals = tuple(float(v) for v in vals)
        if vals[0] != 0:
            raise ValueError("entropy of the empty set must be 0")
        object.__setattr__(self, "values", vals)
        if self.pure:
            for m in self.system.subsets():
                d = vals[m] - vals[self.system.full & ~m]
                if (d != 0) if self.is_exact else abs(d) > PURE_TOL:
                    raise ValueError(
                        f"vector declared pure but S({self.system.label(m)}) != S(complement)"
                    )

    @classmethod
    def from_function(cls, system: PartySystem, fn, scale: Scale = NUMERIC_BITS, pure=False):
        return cls(system, [0] + [fn(m) for m in system.subsets()], scale, pure)

    @classmethod
    def from_mapping(
        cls, system: PartySystem, entries: Mapping, scale: Scale = NUMERIC_BITS, pure=False
    ):
        vals = [0] * (1 << system.n)
        seen = set()
        for key, v in entries.items():
            m = system.mask(key)
            vals[m] = v
            seen.add(m)
        missing = [system.label(m) for m in system.subsets() if m not in seen]
        if missing:
            raise ValueError(f"missing entries for subsets {missing}")
        return cls(system, vals, scale, pure)

    @classmethod
    def zero(cls, system: PartySystem, scale: Scale = NUMERIC_BITS):
        return cls(system, [0] * (1 << system.n), scale)

    @property
    def is_exact(self) -> bool:
        return isinstance(self.scale, ExactLog)

    def __getitem__(self, subset: SubsetLike):
        return self.values[self.system.mask(subset)]

    def __eq__(self, other):
        if not isinstance(other, EntropyVector):
            return NotImplemented
        return (self.system, self.scale, self.values) == (other.system, other.scale, other.values)

    def __hash__(self):
        return hash((self.system, self.scale, self.values))

    def items(self) -> Iterator[tuple[int, object]]:
        for m in self.system.subsets():
            yield m, self.values[m]

    def to_bits(self) -> "EntropyVector":
        """Numeric copy in bits."""
        if not self.is_exact:
            return self
        return EntropyVector(
            self.system, [self.scale.to_bits(v) for v in self.values], NUMERIC_BITS
        )

    def check_pure(self) -> bool:
        full = self.system.full
        for m in self.system.subsets():
            d = self.values[m] - self.values[full & ~m]
            if (d != 0) if self.is_exact else abs(d) > PURE_TOL:
                return False
        return True

    def restrict(self, parties: SubsetLike) -> "EntropyVector":
        """Marginal vector on the sub-system ``parties`` (kept in system order)."""
        keep = self.system.mask(parties)
        idx = [i for i in range(self.system.n) if keep >> i & 1]
        sub = PartySystem(self.system.names[i] for i in idx)
        vals = [0] * (1 << sub.n)
        for m in sub.subsets():
            big = sum(1 << idx[j] for j in range(sub.n) if m >> j & 1)
            vals[m] = self.values[big]
        return EntropyVector(sub, vals, self.scale)

    def relabel(self, system: PartySystem) -> "EntropyVector":
        if system.n != self.system.n:
            raise SystemMismatch("relabel needs the same number of parties")
        return EntropyVector(system, self.values, self.scale, self.pure)

    def __add__(self, other: "EntropyVector") -> "EntropyVector":
        if self.system != other.system or self.scale != other.scale:
            raise SystemMismatch("cannot add vectors over different systems or scales")
        return EntropyVector(
            self.system, [a + b for a, b in zip(self.values, other.values)], self.scale
        )

    def scaled(self, k) -> "EntropyVector":
        return EntropyVector(self.system, [k * v for v in self.values], self.scale, self.pure)

    # -- CSV -------------------------------------------------------------

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["party_system", *self.system.names])
        for m, v in self.items():
            if self.is_exact:
                w.writerow([self.system.label(m), format_exact(v, self.scale.prime), "exact"])
            else:
                w.writerow([self.system.label(m), f"{v:.12g}", "bits"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "EntropyVector":
        rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
        if not rows or rows[0][0].strip() != "party_system":
            raise ValueError("entropy CSV must start with a 'party_system,<labels>' header")
        system = PartySystem(c.strip() for c in rows[0][1:] if c.strip())
        entries: dict[str, object] = {}
        primes = set()
        exact = None
        for row in rows[1:]:
            if len(row) != 3:
                raise ValueError(f"bad entropy CSV row {row!r}")
            subset, value, tag = (c.strip() for c in row)
            if tag == "exact":
                q, p = parse_exact(value)
                primes.add(p)
                entries[subset] = q
                row_exact = True
            elif tag == "bits":
                entries[subset] = float(value)
                row_exact = False
            else:
                raise ValueError(f"unknown scale tag {tag!r}")
            if exact is None:
                exact = row_exact
            elif exact != row_exact:
                raise ValueError("mixed exact and numeric rows")
        if exact:
            primes.discard(None)
            if len(primes) > 1:
                raise ValueError(f"mixed primes {sorted(primes)} in one vector")
            prime = primes.pop() if primes else 2
            return cls.from_mapping(system, entries, ExactLog(prime))
        return cls.from_mapping(system, entries)


_EXACT_RE = re.compile(r"^\s*(-?\d+)(?:/(\d+))?\s*(?:\*\s*log2\((\d+)\))?\s*$")


def format_exact(value: Fraction, prime: int) -> str:
    value = Fraction(value)
    if value == 0:
        return "0"
    return f"{value}*log2({prime})"


def parse_exact(text: str) -> tuple[Fraction, int | None]:
    m = _EXACT_RE.match(text)
    if not m:
        raise ValueError(f"cannot parse exact value {text!r}")
    num, den, prime = m.groups()
    return Fraction(int(num), int(den or 1)), (int(prime) if prime else None)


class LinearFunctional:
    """Sparse rational combination of subset entropies, ``sum_J c_J S(J)``.

    Coefficients of the empty set are dropped (``S(empty) = 0``); equality
    is coefficient-wise.
    """

    __slots__ = ("system", "_coeffs", "_key")

    def __init__(self, system: PartySystem, coeffs: Mapping[SubsetLike, object] | None = None):
        self.system = system
        acc: dict[int, Fraction] = {}
        for key, c in (coeffs or {}).items():
            m = system.mask(key)
            if m == 0:
                continue
            acc[m] = acc.get(m, Fraction(0)) + Fraction(c)
        self._coeffs = {m: c for m, c in sorted(acc.items()) if c != 0}
        self._key = tuple(self._coeffs.items())

    @classmethod
    def from_terms(cls, system: PartySystem, terms: Iterable[tuple[SubsetLike, object]]) -> "LinearFunctional":
        """Sum of ``c * S(J)`` over ``(J, c)`` pairs; repeated subsets accumulate."""
        acc: dict[int, Fraction] = {}
        for key, c in terms:
            m = system.mask(key)
            acc[m] = acc.get(m, Fraction(0)) + Fraction(c)
        return cls(system, acc)

    @property
    def coeffs(self) -> dict[int, Fraction]:
        return dict(self._coeffs)

    def __getitem__(self, subset: SubsetLike) -> Fraction:
        m = self.system.mask(subset)
        return self._coeffs.get(m, Fraction(0))

    def __iter__(self):
        return iter(self._coeffs.items())

    def __len__(self):
        return len(self._coeffs)

    def __bool__(self):
        return bool(self._coeffs)

    def __eq__(self, other):
        if not isinstance(other, LinearFunctional):
            return NotImplemented
        return self.system == other.system and self._key == other._key

    def __hash__(self):
        return hash((self.system, self._key))

    def _check(self, other: "LinearFunctional"):
        if self.system != other.system:
            raise SystemMismatch(f"functionals over {self.system.names} and {other.system.names}")

    def __add__(self, other: "LinearFunctional") -> "LinearFunctional":
        self._check(other)
        out = dict(self._coeffs)
        for m, c in other._coeffs.items():
            out[m] = out.get(m, 0) + c
        return LinearFunctional(self.system, out)

    def __neg__(self) -> "LinearFunctional":
        return LinearFunctional(self.system, {m: -c for m, c in self._coeffs.items()})

    def __sub__(self, other: "LinearFunctional") -> "LinearFunctional":
        return self + (-other)

    def __mul__(self, k) -> "LinearFunctional":
        k = Fraction(k)
        return LinearFunctional(self.system, {m: k * c for m, c in self._coeffs.items()})

    __rmul__ = __mul__

    def dense(self) -> list[Fraction]:
        """Coefficient list indexed by mask 1..2^N-1."""
        return [self._coeffs.get(m, Fraction(0)) for m in self.system.subsets()]

    def permuted(self, perm: Sequence[int]) -> "LinearFunctional":
        """Image under the party relabeling ``i -> perm[i]``."""
        return LinearFunctional(self.system, {permute_mask(m, perm): c for m, c in self._coeffs.items()})

    def __repr__(self):
        terms = []
        for m, c in self._coeffs.items():
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            coef = "" if mag == 1 else f"{mag}*"
            terms.append(f"{sign} {coef}S({self.system.label(m)})")
        body = " ".join(terms).lstrip("+ ") if terms else "0"
        return f"<{body}>"


def permute_mask(mask: int, perm: Sequence[int]) -> int:
    out = 0
    for i, j in enumerate(perm):
        if mask >> i & 1:
            out |= 1 << j
    return out


def entropy_functional(system: PartySystem, subset: SubsetLike) -> LinearFunctional:
    return LinearFunctional(system, {system.mask(subset): 1})


def mutual_information_functional(
    system: PartySystem, a: SubsetLike, b: SubsetLike, c: SubsetLike = 0
) -> LinearFunctional:
    """Coefficients of ``I(A:B|C) = S(AC) + S(BC) - S(ABC) - S(C)``."""
    ma, mb, mc = system.mask(a), system.mask(b), system.mask(c)
    if ma & mb or ma & mc or mb & mc:
        raise ValueError(
            f"I({system.label(ma)}:{system.label(mb)}|{system.label(mc)}) needs disjoint arguments"
        )
    return LinearFunctional.from_terms(
        system, [(ma | mc, 1), (mb | mc, 1), (ma | mb | mc, -1), (mc, -1)]
    )


def conditional_entropy_functional(system: PartySystem, a: SubsetLike, c: SubsetLike) -> LinearFunctional:
    """``H(A|C) = S(AC) - S(C)``; ``A`` and ``C`` may overlap."""
    ma, mc = system.mask(a), system.mask(c)
    return LinearFunctional.from_terms(system, [(ma | mc, 1), (mc, -1)])


def evaluate(f: LinearFunctional, v: EntropyVector):
    """``sum_J f[J] * v[J]``.

    Exact vectors give a :class:`~fractions.Fraction` in units of
    ``log2(p)`` of ``v.scale``; numeric vectors give a float in bits.
    """
    if f.system != v.system:
        raise SystemMismatch(f"functional over {f.system.names}, vector over {v.system.names}")
    if v.is_exact:
        return sum((c * v.values[m] for m, c in f), Fraction(0))
    return math.fsum(float(c) * v.values[m] for m, c in f)


def party_defects(f: LinearFunctional) -> list[Fraction]:
    """Per-party column sums ``sum_{J contains x} f[J]``."""
    out = [Fraction(0)] * f.system.n
    for m, c in f:
        for i in range(f.system.n):
            if m >> i & 1:
                out[i] += c
    return out


def is_balanced(f: LinearFunctional) -> tuple[bool, list[Fraction]]:
    d = party_defects(f)
    return all(x == 0 for x in d), d


@dataclass(frozen=True)
class ModularPart:
    """Additive rank ``h0(J) = sum_{x in J} w_x``."""

    system: PartySystem
    weights: tuple = field(default=())

    def __post_init__(self):
        w = tuple(Fraction(x) for x in self.weights)
        if len(w) != self.system.n:
            raise ValueError("need one weight per party")
        if any(x < 0 for x in w):
            raise ValueError("modular weights must be nonnegative")
        object.__setattr__(self, "weights", w)

    def __call__(self, subset: SubsetLike) -> Fraction:
        m = self.system.mask(subset)
        return sum((w for i, w in enumerate(self.weights) if m >> i & 1), Fraction(0))

    def vector(self, scale: Scale) -> EntropyVector:
        return EntropyVector.from_function(self.system, self, scale)
