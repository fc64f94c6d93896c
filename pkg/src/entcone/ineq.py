"""Entropy inequality families and satisfaction reports.

Every family is instantiated over a concrete :class:`PartySystem`.  An
inequality is represented by the left-hand side functional ``f`` of
``f(S) >= 0``.
"""

from __future__ import annotations

import csv
import enum
import io
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .entvec import (
    EntropyVector,
    LinearFunctional,
    PartySystem,
    SubsetLike,
    SystemMismatch,
    conditional_entropy_functional,
    evaluate,
    mutual_information_functional,
)

NUMERIC_TOL = 1e-9


class Family(enum.Enum):
    NONNEG = "NonNeg"
    SSA = "SSA"
    MONO = "MONO"
    WMO = "WMO"
    INGLETON = "Ingleton"
    KINSER = "Kinser"
    MATUS = "Matus"
    CUSTOM = "Custom"


@dataclass(frozen=True)
class InequalityInstance:
    name: str
    functional: LinearFunctional
    family: Family = Family.CUSTOM

    def __post_init__(self):
        if not self.functional:
            raise ValueError(f"{self.name}: zero functional is not an inequality")

    @property
    def system(self) -> PartySystem:
        return self.functional.system


def _dedup(instances: Iterable[InequalityInstance]) -> list[InequalityInstance]:
    seen: set[LinearFunctional] = set()
    out = []
    for inst in instances:
        if inst.functional in seen:
            continue
        seen.add(inst.functional)
        out.append(inst)
    return out


def _nonneg(system: PartySystem):
    for m in system.subsets():
        yield InequalityInstance(
            f"S({system.label(m)})>=0", LinearFunctional(system, {m: 1}), Family.NONNEG
        )


def _ssa(system: PartySystem):
    for a, b in itertools.combinations(range(1, system.full + 1), 2):
        f = LinearFunctional.from_terms(system, [(a, 1), (b, 1), (a & b, -1), (a | b, -1)])
        if f:
            yield InequalityInstance(f"SSA({system.label(a)};{system.label(b)})", f, Family.SSA)


def shannon_family(system: PartySystem) -> list[InequalityInstance]:
    """Nonnegativity, submodularity and monotonicity over all subsets."""

    def mono():
        for b in system.subsets():
            a = (b - 1) & b
            while a:
                yield InequalityInstance(
                    f"MO({system.label(a)}<{system.label(b)})",
                    LinearFunctional(system, {b: 1, a: -1}),
                    Family.MONO,
                )
                a = (a - 1) & b

    return _dedup(itertools.chain(_nonneg(system), _ssa(system), mono()))


def quantum_family(system: PartySystem) -> list[InequalityInstance]:
    """Nonnegativity, strong subadditivity and weak monotonicity."""

    def wmo():
        for a, b in itertools.product(system.subsets(), repeat=2):
            if a >= b:
                continue
            f = LinearFunctional.from_terms(system, [(a, 1), (b, 1), (a & ~b, -1), (b & ~a, -1)])
            if f:
                yield InequalityInstance(f"WMO({system.label(a)};{system.label(b)})", f, Family.WMO)

    return _dedup(itertools.chain(_nonneg(system), _ssa(system), wmo()))


def ingleton_functional(
    system: PartySystem, a: SubsetLike, b: SubsetLike, c: SubsetLike, d: SubsetLike
) -> LinearFunctional:
    """``I(A:B|C) + I(A:B|D) + I(C:D) - I(A:B)`` with no argument checks beyond disjointness."""
    ma, mb, mc, md = (system.mask(x) for x in (a, b, c, d))
    if ma & mc or ma & md or mb & mc or mb & md:
        raise ValueError("Ingleton arguments must be pairwise disjoint")
    mi = mutual_information_functional
    return mi(system, ma, mb, mc) + mi(system, ma, mb, md) + mi(system, mc, md) - mi(system, ma, mb)


def ingleton(
    system: PartySystem,
    a: SubsetLike,
    b: SubsetLike,
    c: SubsetLike,
    d: SubsetLike,
    *,
    relaxed: bool = False,
) -> InequalityInstance:
    """Ingleton inequality ``Ing(AB:CD) >= 0``.

    Empty arguments are rejected unless ``relaxed`` is set, in which case
    the degenerate forms (an SSA or subadditivity instance) come out.
    """
    masks = [system.mask(x) for x in (a, b, c, d)]
    for x, y in itertools.combinations(masks, 2):
        if x & y:
            raise ValueError("Ingleton arguments must be pairwise disjoint")
    if not relaxed and not all(masks):
        raise ValueError("Ingleton arguments must be nonempty (pass relaxed=True for degenerations)")
    la, lb, lc, ld = labels = [system.label(m) or "0" for m in masks]
    sep = "" if all(len(x) == 1 for x in labels) else ","
    return InequalityInstance(
        f"Ing({la}{sep}{lb}:{lc}{sep}{ld})",
        ingleton_functional(system, *masks),
        Family.INGLETON,
    )


def ingleton_permutations(system: PartySystem, parties: Sequence[str] | None = None) -> list[InequalityInstance]:
    """The 6 distinct Ingleton instances on four singleton parties."""
    parties = list(system.names if parties is None else parties)
    if len(parties) != 4 or len(set(parties)) != 4:
        raise ValueError(f"need 4 distinct parties, got {parties}")
    return _dedup(ingleton(system, *perm) for perm in itertools.permutations(parties))


def kinser_functional(system: PartySystem, parties: Sequence[str] | None = None) -> LinearFunctional:
    """Kinser's functional with ``parties[i]`` playing the role of ``i+1``."""
    parties = list(system.names if parties is None else parties)
    n = len(parties)
    if n < 4:
        raise ValueError(f"Kinser family needs N >= 4, got {n}")
    if len(set(parties)) != n:
        raise ValueError("Kinser parties must be distinct")
    p = {i + 1: system.mask([x]) for i, x in enumerate(parties)}
    mi = mutual_information_functional
    f = mi(system, p[1], p[n], p[3]) + LinearFunctional.from_terms(
        system, [(p[1] | p[n], 1), (p[1] | p[2], -1), (p[3] | p[n], -1), (p[2] | p[3], 1)]
    )
    for k in range(4, n + 1):
        f = f + mi(system, p[2], p[k - 1], p[k])
    return f


def kinser(system: PartySystem, parties: Sequence[str] | None = None) -> InequalityInstance:
    parties = list(system.names if parties is None else parties)
    return InequalityInstance(
        f"K[{len(parties)}]({','.join(parties)})", kinser_functional(system, parties), Family.KINSER
    )


def matus(
    system: PartySystem, t: int, a: str, b: str, c: str, d: str, *, form: str = "printed"
) -> InequalityInstance:
    """Matus family member ``t``.

    ``form="printed"``: ``t Ing(AB:CD) + I(A:B|D) + t(t+1)/2 [I(B:D|C) + I(C:D|B)]``.
    ``form="published"``: ``t Ing(AB:CD) + I(B:C|A) + t(t+1)/2 [I(A:C|B) + I(A:B|C)]``,
    which at ``t = 1`` is the Zhang-Yeung inequality.  The default form is
    implied by Shannon inequalities alone; the "published" one is not.
    """
    if t < 0 or int(t) != t:
        raise ValueError(f"t must be a nonnegative integer, got {t}")
    if len({a, b, c, d}) != 4:
        raise ValueError("Matus labels must be distinct")
    mi = mutual_information_functional
    tri = Fraction(t * (t + 1), 2)
    ing = t * ingleton_functional(system, a, b, c, d)
    if form == "printed":
        f = ing + mi(system, a, b, d) + tri * (mi(system, b, d, c) + mi(system, c, d, b))
        tag = "Matus"
    elif form == "published":
        f = ing + mi(system, b, c, a) + tri * (mi(system, a, c, b) + mi(system, a, b, c))
        tag = "MatusP"
    else:
        raise ValueError(f"unknown Matus form {form!r}")
    return InequalityInstance(f"{tag}[t={t}]({a}{b}:{c}{d})", f, Family.MATUS)


def zhang_yeung(system: PartySystem, a: str, b: str, c: str, d: str) -> InequalityInstance:
    """``I(A:B) + I(A:CD) + 3 I(C:D|A) + I(C:D|B) - 2 I(C:D) >= 0``."""
    mi = mutual_information_functional
    ma, mb, mc, md = (system.mask(x) for x in (a, b, c, d))
    f = (
        mi(system, ma, mb)
        + mi(system, ma, mc | md)
        + 3 * mi(system, mc, md, ma)
        + mi(system, mc, md, mb)
        - 2 * mi(system, mc, md)
    )
    return InequalityInstance(f"ZY({a}{b}:{c}{d})", f, Family.MATUS)


def conditioning_lemma_functional(
    system: PartySystem, a: SubsetLike, b: SubsetLike, c: SubsetLike, f: SubsetLike
) -> LinearFunctional:
    """``I(A:B|C) + H(F|AC) - I(F:B|C)``, nonnegative on every poly-matroid."""
    ma, mb, mc, mf = (system.mask(x) for x in (a, b, c, f))
    mi = mutual_information_functional
    return (
        mi(system, ma, mb, mc)
        + conditional_entropy_functional(system, mf, ma | mc)
        - mi(system, mf, mb, mc)
    )


@dataclass
class SatisfactionReport:
    vector_id: str
    exact: bool
    margins: list[tuple[InequalityInstance, object]] = field(default_factory=list)
    tol: float = NUMERIC_TOL

    def verdict(self, margin) -> str:
        if self.exact:
            return "violated" if margin < 0 else ("tight" if margin == 0 else "satisfied")
        if margin <= -self.tol:
            return "violated"
        return "tight" if abs(margin) < self.tol else "satisfied"

    @property
    def violated(self) -> list[tuple[InequalityInstance, object]]:
        return [(i, m) for i, m in self.margins if self.verdict(m) == "violated"]

    @property
    def ok(self) -> bool:
        return not self.violated

    def margin_of(self, name: str):
        for inst, m in self.margins:
            if inst.name == name:
                return m
        raise KeyError(name)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["instance", "margin", "verdict"])
        for inst, m in self.margins:
            w.writerow([inst.name, _fmt(m), self.verdict(m)])
        return buf.getvalue()

    def summary(self) -> str:
        lines = [
            f"vector {self.vector_id}: {len(self.margins)} inequalities checked, "
            f"{len(self.violated)} violated"
        ]
        for inst, m in self.violated:
            lines.append(f"  VIOLATED {inst.name}: margin {_fmt(m)}")
        return "\n".join(lines)


def _fmt(m) -> str:
    return str(m) if isinstance(m, Fraction) else f"{m:.12g}"


def check(
    vector: EntropyVector, instances: Iterable[InequalityInstance], vector_id: str = "v"
) -> SatisfactionReport:
    """Evaluate every instance on ``vector``.

    Exact vectors are classified by exact sign; numeric ones with a
    ``1e-9`` bit tolerance.
    """
    report = SatisfactionReport(vector_id, vector.is_exact)
    for inst in instances:
        if inst.system != vector.system:
            raise SystemMismatch(f"{inst.name} is over {inst.system.names}, vector over {vector.system.names}")
        report.margins.append((inst, evaluate(inst.functional, vector)))
    return report


FAMILIES = {
    "shannon": shannon_family,
    "quantum": quantum_family,
}


def named_family(name: str, system: PartySystem) -> list[InequalityInstance]:
    """Family lookup used by the CLI: shannon, quantum, ingleton, kinser, matus, matus-published."""
    if name in FAMILIES:
        return FAMILIES[name](system)
    if name == "ingleton":
        out = []
        for quad in itertools.combinations(system.names, 4):
            out.extend(ingleton_permutations(system, quad))
        return _dedup(out)
    if name == "kinser":
        return _dedup(
            kinser(system, list(perm))
            for r in range(4, system.n + 1)
            for perm in itertools.permutations(system.names, r)
        )
    if name in ("matus", "matus-published"):
        form = "printed" if name == "matus" else "published"
        return _dedup(
            matus(system, t, *perm, form=form)
            for t in range(4)
            for perm in itertools.permutations(system.names, 4)
        )
    raise KeyError(f"unknown family {name!r}")
