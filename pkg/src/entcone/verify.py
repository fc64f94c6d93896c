"""Reproduction checks, shared by ``entcone verify-paper`` and the test suite.

Each ``criterion_*`` function runs one check end to end and returns a
:class:`CriterionResult`; nothing here raises on a failed check.
"""

from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import cone, groups, ineq, quantum, stab
from .entvec import PartySystem, evaluate, mutual_information_functional
from .linalg import rank_q

INGLETON_VALUE = -(5 - 3 * math.log2(3)) / 2
INGLETON_EXACT = {2: Fraction(-5, 2), 3: Fraction(3, 2)}


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.number:2d}. {self.title}: {self.detail} ({self.seconds:.1f}s)"


def _timed(number: int, title: str):
    def wrap(fn: Callable[..., tuple[bool, str]]):
        def run(*args, **kwargs) -> CriterionResult:
            t0 = time.perf_counter()
            try:
                ok, detail = fn(*args, **kwargs)
            except Exception as exc:  # a crash is a failed criterion, reported as such
                ok, detail = False, f"error: {type(exc).__name__}: {exc}"
            return CriterionResult(number, title, ok, detail, time.perf_counter() - t0)

        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run

    return wrap


@_timed(1, "Table 1 reproduction")
def criterion_1():
    c = cone.build_quantum_ingleton_cone(4)
    rays = cone.extreme_rays(c)
    match = cone.match_table1(rays)
    exact = all(
        cone.canonicalize_orbit(cone.table1_ray(k), "S5").representative == o.representative
        for k, o in match.matched.items()
    )
    sizes = ", ".join(f"r{k}:{match.matched[k].size}" for k in sorted(match.matched))
    detail = (
        f"{len(c.constraints)} constraints, {len(rays)} rays, {len(match.orbits)} orbits "
        f"[{sizes}]; missing {match.missing}, extra {len(match.extra)}"
    )
    return match.ok and exact and len(match.orbits) == 7, detail


@_timed(2, "witness states realise the rays")
def criterion_2():
    bad = []
    for k in range(7):
        v = stab.entropy_vector(stab.build_paper_state(f"R{k}"))
        if v != cone.table1_vector(k):
            bad.append(f"R{k}")
    return not bad, "R0-R6 exact" if not bad else f"mismatch: {bad}"


@_timed(3, "dense projector vs symplectic entropies")
def criterion_3(max_dim: int = 256, tol: float = 1e-9):
    worst, checked = 0.0, []
    for k in range(7):
        g = stab.build_paper_state(f"R{k}")
        if g.prime**g.n > max_dim:
            continue
        dense = stab.dense_entropy_vector(g)
        exact = stab.entropy_vector(g).to_bits()
        worst = max(worst, max(abs(a - b) for a, b in zip(dense.values, exact.values)))
        checked.append(f"R{k}")
    return worst <= tol and len(checked) >= 5, f"{','.join(checked)} max deviation {worst:.2e} bits"


def stabiliser_test_instances(system: PartySystem) -> list[ineq.InequalityInstance]:
    return (
        ineq.named_family("ingleton", system)
        + ineq.named_family("kinser", system)
        + ineq.named_family("matus", system)
        + ineq.named_family("matus-published", system)
    )


def _dense_rows(instances):
    dens = []
    for inst in instances:
        row = inst.functional.dense()
        den = math.lcm(*(Fraction(x).denominator for x in row))
        dens.append([int(x * den) for x in row])
    return np.array(dens, dtype=np.int64)


@_timed(4, "Ingleton, Kinser and Matus on random stabiliser states")
def criterion_4(count: int = 300, seed: int = 0):
    system = PartySystem("abcde")
    instances = stabiliser_test_instances(system)
    rows = _dense_rows(instances)  # positive multiples of each functional
    rng = random.Random(seed)
    worst = None
    for i in range(count):
        p = rng.choice((2, 3))
        n = rng.randint(2, 10)
        g = stab.random_stabiliser_group(rng.randrange(2**32), p, n, system)
        v = stab.entropy_vector(g)
        vals = np.array([int(x) for x in v.values[1:]], dtype=np.int64)
        margins = rows @ vals
        j = int(np.argmin(margins))
        if worst is None or margins[j] < worst[0]:
            worst = (int(margins[j]), instances[j].name, i)
        if margins[j] < 0:
            return False, f"group {i} violates {instances[j].name}"
    return True, f"{count} groups x {len(instances)} instances, min scaled margin {worst[0]} ({worst[1]})"


@_timed(5, "Ingleton violation, classical and quantum")
def criterion_5(tol: float = 1e-9):
    system = PartySystem("abcd")
    ing = ineq.ingleton(system, "a", "b", "c", "d").functional
    mat1 = [
        ineq.matus(system, 1, *perm, form=form).functional
        for form in ("printed", "published")
        for perm in itertools.permutations("abcd")
    ]
    ent = groups.exact_classical_entropies(groups.or_and_distribution())
    classical = groups.evaluate_log_combination(ing, ent)
    classical_matus = min(groups.log_combination_value(groups.evaluate_log_combination(f, ent)) for f in mat1)
    v = quantum.entropy_vector(quantum.ingleton_counterexample(), system)
    q_ing = evaluate(ing, v)
    q_matus = min(evaluate(f, v) for f in mat1)
    ok = (
        classical == INGLETON_EXACT
        and abs(q_ing - INGLETON_VALUE) <= tol
        and classical_matus >= 0
        and q_matus >= -tol
    )
    detail = (
        f"classical Ing = -5/2 + 3/2 log2 3 = {groups.log_combination_value(classical):.12g}, "
        f"quantum Ing = {q_ing:.12g}, min Matus t=1 (both forms, all labellings): "
        f"{classical_matus:.6g} / {q_matus:.6g}"
    )
    return ok, detail


def pure_ingleton_identity(system: PartySystem, a, b, c, d):
    """``I(A:B|C) + I(C:D|A)``, equal to ``Ing(AB:CD)`` on pure 4-party states."""
    mi = mutual_information_functional
    ma, mb, mc, md = (system.mask(x) for x in (a, b, c, d))
    return mi(system, ma, mb, mc) + mi(system, mc, md, ma)


@_timed(6, "pure-state identities")
def criterion_6(count: int = 200, seed: int = 0, tol: float = 1e-9):
    system = PartySystem("abcd")
    rng = np.random.default_rng(seed)
    perms = [inst for inst in ineq.ingleton_permutations(system)]
    worst_comp = worst_id = 0.0
    min_ing = math.inf
    for _ in range(count):
        psi = quantum.random_pure_state((2, 2, 2, 2), rng)
        v = quantum.entropy_vector(psi, system)
        worst_comp = max(worst_comp, max(abs(v.values[m] - v.values[15 & ~m]) for m in range(1, 15)))
        for perm in itertools.permutations("abcd"):
            f = ineq.ingleton_functional(system, *perm)
            worst_id = max(worst_id, abs(evaluate(f, v) - evaluate(pure_ingleton_identity(system, *perm), v)))
        min_ing = min(min_ing, min(evaluate(i.functional, v) for i in perms))
    ok = worst_comp <= tol and worst_id <= tol and min_ing >= -tol
    return ok, (
        f"{count} states: |S(J)-S(J^c)| <= {worst_comp:.1e}, identity error {worst_id:.1e}, "
        f"min Ingleton {min_ing:.4g}"
    )


@_timed(7, "SSA and WMO on random mixed states")
def criterion_7(count: int = 500, seed: int = 0, tol: float = 1e-9):
    rng = np.random.default_rng(seed)
    families = {n: ineq.quantum_family(PartySystem.of_size(n)) for n in (2, 3, 4)}
    worst = math.inf
    for _ in range(count):
        n = int(rng.integers(2, 5))
        rho = quantum.random_density_matrix((2,) * n, rng)
        v = quantum.entropy_vector(rho)
        worst = min(worst, min(evaluate(i.functional, v) for i in families[n]))
    return worst >= -tol, f"{count} states, min margin {worst:.3g}"


@_timed(8, "Kinser(4) is Ingleton up to relabelling")
def criterion_8():
    system = PartySystem("abcd")
    target = ineq.ingleton(system, "a", "b", "c", "d").functional
    hits = [
        "".join(perm)
        for perm in itertools.permutations("abcd")
        if ineq.kinser_functional(system, list(perm)) == target
    ]
    return bool(hits), f"K[4] with parties 1..4 = {hits[0] if hits else '-'} equals Ing(ab:cd); {len(hits)} of 24 orders"


def _group_pool():
    pool = [
        groups.cyclic(n) for n in (2, 3, 4, 5, 6, 8, 9, 12)
    ] + [
        groups.abelian(2, 2),
        groups.abelian(2, 2, 2),
        groups.abelian(2, 4),
        groups.abelian(3, 3),
        groups.symmetric(3),
        groups.symmetric(4),
        groups.dihedral(4),
        groups.dihedral(5),
        groups.dihedral(6),
        groups.quaternion(),
        groups.heisenberg(3),
        groups.direct_product(groups.cyclic(2), groups.symmetric(3)),
        groups.direct_product(groups.symmetric(3), groups.symmetric(3)),
        groups.direct_product(groups.cyclic(2), groups.dihedral(4)),
        groups.abelian(2, 2, 2, 2),
        groups.direct_product(groups.cyclic(4), groups.quaternion()),
    ]
    return [(g, g.subgroups()) for g in pool]


def _index_logs(n: int) -> dict[int, Fraction]:
    return {p: Fraction(e) for p, e in groups._factor(n).items()}


@_timed(9, "group poly-matroid equals coset-variable entropies")
def criterion_9(count: int = 50, seed: int = 0):
    rng = random.Random(seed)
    pool = _group_pool()
    for i in range(count):
        g, subs = pool[i % len(pool)]
        k = rng.randint(2, 4)
        fam = groups.SubgroupFamily(g, [rng.choice(subs) for _ in range(k)])
        from_groups = [{}] + [_index_logs(fam.index_of(m)) for m in range(1, 1 << k)]
        from_cosets = groups.exact_classical_entropies(groups.coset_distribution(fam), k)
        if from_groups != from_cosets:
            return False, f"family {i} over a group of order {g.order} differs"
        num = groups.group_polymatroid(fam)
        cls = groups.classical_polymatroid(groups.coset_distribution(fam))
        if max(abs(a - b) for a, b in zip(num.values, cls.values)) > 1e-12:
            return False, f"family {i}: numeric paths disagree"
    return True, f"{count} families over {len(pool)} groups (orders up to {max(g.order for g, _ in pool)}) agree exactly"


def _nilpotent_pool():
    pool = [
        groups.abelian(2, 2),
        groups.cyclic(4),
        groups.cyclic(8),
        groups.abelian(2, 2, 2),
        groups.abelian(2, 4),
        groups.abelian(3, 3),
        groups.cyclic(9),
        groups.abelian(2, 2, 4),
        groups.dihedral(4),
        groups.quaternion(),
        groups.heisenberg(3),
        groups.dihedral(8),
        groups.direct_product(groups.cyclic(2), groups.dihedral(4)),
        groups.direct_product(groups.cyclic(2), groups.quaternion()),
    ]
    out = []
    for g in pool:
        subs = g.subgroups()
        out.append((g, subs, [s for s in subs if g.is_normal(s)]))
    return out


@_timed(10, "common information for normal subgroups")
def criterion_10(count: int = 50, seed: int = 0):
    rng = random.Random(seed)
    pool = _nilpotent_pool()
    n_abelian = 0
    for i in range(count):
        g, subs, normal = pool[i % len(pool)]
        n_abelian += g.is_abelian()
        chosen = [rng.choice(normal), rng.choice(normal), rng.choice(subs), rng.choice(subs)]
        fam = groups.SubgroupFamily(g, chosen, PartySystem("abcd"))
        ext = groups.common_information_extension(fam, 0, 1)
        base = groups.group_polymatroid(fam, exact=True)
        extended = groups.group_polymatroid(ext.family, exact=True)
        if not groups.check_common_information(base, extended, 0, 1, 4):
            return False, f"trial {i}: conditions fail"
        for quad in itertools.permutations("abcd"):
            if evaluate(ineq.ingleton_functional(fam.system, *quad), base) < 0:
                return False, f"trial {i}: Ingleton {quad} violated"
    return True, f"{count} families ({n_abelian} abelian, {count - n_abelian} non-abelian p-groups): exact"


# -- brute-force cone oracle -------------------------------------------------------------


def _nullspace_q(rows: list[list[int]], dim: int) -> list[list[Fraction]]:
    m = [[Fraction(x) for x in r] for r in rows]
    pivots = []
    r = 0
    for c in range(dim):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        m[r] = [x / m[r][c] for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    basis = []
    for f in (c for c in range(dim) if c not in pivots):
        x = [Fraction(0)] * dim
        x[f] = Fraction(1)
        for row, pc in zip(m, pivots):
            x[pc] = -row[f]
        basis.append(x)
    return basis


def brute_force_rays(constraints: list[tuple[int, ...]], dim: int) -> list[tuple[int, ...]]:
    """Extreme rays from every (dim-1)-subset of constraints with a 1-dim solution space."""
    from .linalg import reduce_gcd

    found = set()
    for subset in itertools.combinations(constraints, dim - 1):
        ns = _nullspace_q([list(r) for r in subset], dim)
        if len(ns) != 1:
            continue
        for sign in (1, -1):
            x = [sign * v for v in ns[0]]
            if all(sum(a * b for a, b in zip(row, x)) >= 0 for row in constraints):
                found.add(reduce_gcd(x))
    return sorted(found)


def random_pointed_cone(rng: random.Random, dim: int, m: int) -> list[tuple[int, ...]]:
    while True:
        rows = [tuple(rng.randint(-3, 3) for _ in range(dim)) for _ in range(m)]
        rows = [r for r in rows if any(r)]
        if len(rows) >= dim and rank_q(rows) == dim:
            return rows


@_timed(11, "double description vs brute force")
def criterion_11(count: int = 100, seed: int = 0):
    rng = random.Random(seed)
    total = 0
    for i in range(count):
        dim = rng.randint(2, 6)
        m = rng.randint(dim, 12)
        rows = random_pointed_cone(rng, dim, m)
        got = cone.extreme_rays(cone.RationalCone(dim, rows))
        want = brute_force_rays(rows, dim)
        if sorted(got) != want:
            return False, f"cone {i} (dim {dim}, {len(rows)} constraints): {len(got)} vs {len(want)} rays"
        total += len(got)
    return True, f"{count} cones, {total} rays, identical"


CRITERIA = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
    criterion_11,
]


def run_all(stream=None) -> list[CriterionResult]:
    results = []
    for crit in CRITERIA:
        res = crit()
        results.append(res)
        if stream is not None:
            print(res.line(), file=stream, flush=True)
    return results
