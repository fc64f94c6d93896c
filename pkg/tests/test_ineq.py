import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from entcone import cone, groups, ineq, quantum
from entcone.entvec import (
    EntropyVector,
    ExactLog,
    LinearFunctional,
    PartySystem,
    evaluate,
    is_balanced,
    mutual_information_functional as mi,
)

ABCD = PartySystem("abcd")
ABCDE = PartySystem("abcde")
CLASSICAL_ING = -(5 - 3 * math.log2(3)) / 2


def relabelings(f, g):
    """Party maps ``i -> perm[i]`` sending ``f`` to ``g``."""
    return [p for p in itertools.permutations(range(f.system.n)) if f.permuted(p) == g]


def shannon_minimum(f):
    """min f.h over Shannon poly-matroids with h <= 1 (LP oracle)."""
    linprog = pytest.importorskip("scipy.optimize").linprog
    rows = [inst.functional.dense() for inst in ineq.shannon_family(f.system)]
    res = linprog(
        [float(c) for c in f.dense()],
        A_ub=[[-float(x) for x in r] for r in rows],
        b_ub=[0.0] * len(rows),
        bounds=[(0, 1)] * f.system.full,
    )
    assert res.status == 0
    return res.fun


def test_family_sizes():
    # regression constants from exhaustive generation plus dedup
    sizes = {n: len(ineq.shannon_family(PartySystem.of_size(n))) for n in range(1, 5)}
    assert sizes == {1: 1, 2: 6, 3: 28, 4: 120}
    qsizes = {n: len(ineq.quantum_family(PartySystem.of_size(n))) for n in range(1, 5)}
    assert qsizes == {1: 1, 2: 6, 3: 31, 4: 150}


def test_small_families():
    one = PartySystem("a")
    assert [i.functional for i in ineq.shannon_family(one)] == [LinearFunctional(one, {"a": 1})]
    two = PartySystem("ab")
    fams = {i.functional for i in ineq.shannon_family(two)}
    assert mi(two, "a", "b") in fams
    wmo = LinearFunctional(two, {"a": 1, "ab": 1, "b": -1})
    assert wmo in {i.functional for i in ineq.quantum_family(two)}


def test_quantum_family_has_no_monotonicity():
    funcs = {i.functional for i in ineq.quantum_family(ABCD)}
    assert LinearFunctional(ABCD, {"ab": 1, "a": -1}) not in funcs
    assert all(i.family is not ineq.Family.MONO for i in ineq.quantum_family(ABCD))


def test_ingleton_expansion():
    manual = {
        "ac": 1, "bc": 1, "abc": -1, "ad": 1, "bd": 1, "abd": -1,
        "cd": -1, "a": -1, "b": -1, "ab": 1,
    }
    assert ineq.ingleton(ABCD, "a", "b", "c", "d").functional == LinearFunctional(ABCD, manual)


def test_ingleton_degenerations():
    relax = ineq.ingleton(ABCD, "a", "b", "c", "", relaxed=True).functional
    assert relax == mi(ABCD, "a", "b", "c")
    assert ineq.ingleton(ABCD, "a", "", "c", "d", relaxed=True).functional == mi(ABCD, "c", "d")
    with pytest.raises(ValueError):
        ineq.ingleton(ABCD, "a", "b", "c", "")
    with pytest.raises(ValueError):
        ineq.ingleton(ABCD, "a", "b", "a", "d")


def test_ingleton_permutations():
    perms = ineq.ingleton_permutations(ABCD)
    assert len(perms) == 6
    f = ineq.ingleton(ABCD, "a", "b", "c", "d").functional
    assert f == ineq.ingleton(ABCD, "b", "a", "d", "c").functional
    assert f != ineq.ingleton(ABCD, "c", "d", "a", "b").functional
    assert len(ineq.named_family("ingleton", ABCDE)) == 30


def test_kinser4_is_an_ingleton_relabeling():
    k4 = ineq.kinser_functional(ABCD)
    ing = ineq.ingleton(ABCD, "a", "b", "c", "d").functional
    found = relabelings(ing, k4)
    assert found
    # c and d play the Ingleton pair (A, B)
    assert all(ABCD.names[p.index(0)] + ABCD.names[p.index(1)] in ("cd", "dc") for p in found)


def test_kinser5_balanced_and_kinser4_violated_classically():
    assert is_balanced(ineq.kinser_functional(ABCDE))[0]
    ent = groups.exact_classical_entropies(groups.or_and_distribution())
    values = [
        groups.log_combination_value(groups.evaluate_log_combination(ineq.kinser_functional(ABCD, p), ent))
        for p in itertools.permutations("abcd")
    ]
    assert min(values) == pytest.approx(CLASSICAL_ING, abs=1e-12)


def test_kinser_needs_four():
    with pytest.raises(ValueError):
        ineq.kinser(PartySystem("abc"))


def test_matus_t0():
    assert ineq.matus(ABCD, 0, "a", "b", "c", "d").functional == mi(ABCD, "a", "b", "d")
    pub = ineq.matus(ABCD, 0, "a", "b", "c", "d", form="published").functional
    assert pub == mi(ABCD, "b", "c", "a")
    with pytest.raises(ValueError):
        ineq.matus(ABCD, -1, "a", "b", "c", "d")
    with pytest.raises(ValueError):
        ineq.matus(ABCD, 1, "a", "b", "c", "d", form="other")


def test_published_matus_t1_is_zhang_yeung():
    zy = ineq.zhang_yeung(ABCD, "a", "b", "c", "d").functional
    pub = ineq.matus(ABCD, 1, "a", "b", "c", "d", form="published").functional
    assert (2, 3, 0, 1) in relabelings(pub, zy)
    printed = ineq.matus(ABCD, 1, "a", "b", "c", "d").functional
    assert relabelings(printed, zy) == []


def test_zhang_yeung_is_not_shannon_but_printed_matus_is():
    zy = ineq.zhang_yeung(ABCD, "a", "b", "c", "d").functional
    assert shannon_minimum(zy) < -1e-6
    for t in range(4):
        assert shannon_minimum(ineq.matus(ABCD, t, "a", "b", "c", "d").functional) > -1e-9
    assert shannon_minimum(ineq.matus(ABCD, 2, "a", "b", "c", "d", form="published").functional) < -1e-6


def test_matus_t1_on_counterexamples():
    qv = quantum.entropy_vector(quantum.ingleton_counterexample(), ABCD)
    cv = groups.classical_polymatroid(groups.or_and_distribution(), ABCD)
    for form in ("printed", "published"):
        for perm in itertools.permutations("abcd"):
            f = ineq.matus(ABCD, 1, *perm, form=form).functional
            assert evaluate(f, qv) > 0 and evaluate(f, cv) > 0


def test_check_ray5_clean():
    v = cone.table1_vector(5).restrict("abcd")
    report = ineq.check(v, ineq.quantum_family(ABCD) + ineq.ingleton_permutations(ABCD), "ray5")
    assert report.ok and report.exact


def test_check_classical_counterexample():
    v = groups.classical_polymatroid(groups.or_and_distribution(), ABCD)
    report = ineq.check(v, ineq.ingleton_permutations(ABCD))
    assert [i.name for i, _ in report.violated] == ["Ing(ab:cd)"]
    assert report.margin_of("Ing(ab:cd)") == pytest.approx(CLASSICAL_ING, abs=1e-12)
    assert "VIOLATED Ing(ab:cd)" in report.summary()
    assert "violated" in report.to_csv()


def test_check_zero_vector():
    report = ineq.check(EntropyVector.zero(ABCD, ExactLog(2)), ineq.named_family("matus", ABCD))
    assert report.ok and {m for _, m in report.margins} == {Fraction(0)}
    assert {report.verdict(m) for _, m in report.margins} == {"tight"}


def test_unknown_family():
    with pytest.raises(KeyError):
        ineq.named_family("nope", ABCD)


@given(st.integers(0, 10**6))
def test_linear_polymatroids_satisfy_everything_linear(seed):
    import random

    fam = groups.random_subspace_family(random.Random(seed), 2, 4, 4)
    v = groups.linear_polymatroid(fam)
    insts = ineq.shannon_family(ABCD) + ineq.named_family("ingleton", ABCD) + ineq.named_family("kinser", ABCD)
    insts += ineq.named_family("matus-published", ABCD)
    assert ineq.check(v, insts).ok


@given(st.integers(0, 10**6))
def test_distributions_satisfy_shannon(seed):
    import random

    rng = random.Random(seed)
    atoms = [tuple(rng.randrange(2) for _ in range(4)) for _ in range(5)]
    dist = {}
    for a in atoms:
        dist[a] = dist.get(a, 0) + Fraction(1, 5)
    v = groups.classical_polymatroid(dist, ABCD)
    assert ineq.check(v, ineq.shannon_family(ABCD)).ok
