import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from entcone import groups, ineq, stab
from entcone.entvec import ExactLog, PartySystem, evaluate
from entcone.groups import FiniteGroup, GroupError, SubgroupFamily, SubspaceFamily

ABCD = PartySystem("abcd")
SUBGROUP_COUNTS = {"Z2": 2, "Z4": 3, "Z2xZ2": 5, "Z2xZ2xZ2": 16, "S3": 6, "S4": 30, "D4": 10, "Q8": 6, "Heis3": 19}


@pytest.mark.parametrize("name", sorted(SUBGROUP_COUNTS))
def test_subgroup_counts(name):
    g = groups.NAMED_GROUPS[name]()
    subs = g.subgroups()
    assert len(subs) == SUBGROUP_COUNTS[name]
    assert all(g.order % len(h) == 0 and g.is_subgroup(h) for h in subs)


def test_table_validation():
    with pytest.raises(GroupError):
        FiniteGroup(((0, 1), (1, 1)), 0)
    with pytest.raises(GroupError):
        FiniteGroup(((0, 1), (1, 0)), 1)
    # a Latin square that is a loop but not associative
    loop = ((0, 1, 2, 3, 4), (1, 0, 3, 4, 2), (2, 4, 0, 1, 3), (3, 2, 4, 0, 1), (4, 3, 1, 2, 0))
    with pytest.raises(GroupError):
        FiniteGroup(loop, 0)


def test_normality():
    s3 = groups.symmetric(3)
    a3 = next(h for h in s3.subgroups() if len(h) == 3)
    transposition = next(h for h in s3.subgroups() if len(h) == 2)
    assert s3.is_normal(a3) and not s3.is_normal(transposition)
    q8 = groups.quaternion()
    assert all(q8.is_normal(h) for h in q8.subgroups())
    assert not q8.is_abelian()


def test_klein_polymatroid():
    g = groups.abelian(2, 2)
    e = lambda t: g.labels.index(t)  # noqa: E731
    fam = SubgroupFamily(g, [{e((0, 0)), e((1, 0))}, {e((0, 0)), e((0, 1))}])
    assert groups.group_polymatroid(fam).values == pytest.approx((0, 1, 1, 2))
    exact = groups.group_polymatroid(fam, exact=True)
    assert exact.scale == ExactLog(2) and exact.values == (0, 1, 1, 2)


def test_full_subgroups_give_zero():
    g = groups.symmetric(3)
    fam = SubgroupFamily(g, [range(6)] * 3)
    assert set(groups.group_polymatroid(fam).values) == {0.0}
    with pytest.raises(GroupError):
        groups.group_polymatroid(fam, exact=True)


def test_family_rejects_non_subgroups():
    with pytest.raises(GroupError):
        SubgroupFamily(groups.cyclic(4), [{0, 1}])


def test_or_and_distribution():
    dist = groups.or_and_distribution()
    v = groups.classical_polymatroid(dist, ABCD)
    assert v["a"] == pytest.approx(2 - 0.75 * math.log2(3), abs=1e-12)
    assert v["a"] == pytest.approx(0.8112781245, abs=1e-9)
    assert v["ab"] == pytest.approx(1.5, abs=1e-12)
    ent = groups.exact_classical_entropies(dist)
    assert ent[ABCD.mask("a")] == {2: Fraction(2), 3: Fraction(-3, 4)}
    ing = ineq.ingleton(ABCD, "a", "b", "c", "d").functional
    assert groups.evaluate_log_combination(ing, ent) == {2: Fraction(-5, 2), 3: Fraction(3, 2)}


def test_uniform_bits():
    dist = {bits: Fraction(1, 8) for bits in itertools.product((0, 1), repeat=3)}
    v = groups.classical_polymatroid(dist)
    assert all(v.values[m] == pytest.approx(bin(m).count("1")) for m in range(8))


def test_exact_entropy_of_rationals():
    assert groups.exact_shannon_entropy([Fraction(1, 3)] * 3) == {3: Fraction(1)}
    assert groups.exact_shannon_entropy([Fraction(1)]) == {}


@given(st.lists(st.integers(1, 12), min_size=1, max_size=6))
def test_exact_entropy_matches_float(weights):
    total = sum(weights)
    probs = [Fraction(w, total) for w in weights]
    exact = groups.log_combination_value(groups.exact_shannon_entropy(probs))
    assert exact == pytest.approx(groups.shannon_entropy(float(q) for q in probs), abs=1e-12)


POOL = ["Z2xZ2xZ2", "S3", "S4", "D4", "Q8", "Heis3"]


@given(st.sampled_from(POOL), st.integers(0, 10**9), st.integers(1, 4))
def test_chan_yeung_coset_oracle(name, seed, n):
    g = groups.NAMED_GROUPS[name]()
    subs = g.subgroups()
    rng = random.Random(seed)
    fam = SubgroupFamily(g, [rng.choice(subs) for _ in range(n)])
    coset = groups.classical_polymatroid(groups.coset_distribution(fam), fam.system)
    assert groups.group_polymatroid(fam).values == pytest.approx(coset.values, abs=1e-12)
    assert ineq.check(groups.group_polymatroid(fam), ineq.shannon_family(fam.system)).ok


def test_linear_polymatroid_examples():
    full = SubspaceFamily(2, 3, (((1, 0, 0), (0, 1, 0), (0, 0, 1)),) * 2)
    assert groups.linear_polymatroid(full).values == (0, 3, 3, 3)
    lines = SubspaceFamily(5, 2, (((1, 2),), ((1, 3),)))
    assert groups.linear_polymatroid(lines).values == (0, 1, 1, 2)
    with pytest.raises(GroupError):
        SubspaceFamily(4, 2, ())


@given(st.integers(0, 10**9), st.sampled_from([2, 3]))
def test_linear_polymatroids_satisfy_ingleton(seed, p):
    v = groups.linear_polymatroid(groups.random_subspace_family(random.Random(seed), p, 4, 4))
    assert ineq.check(v, ineq.ingleton_permutations(ABCD)).ok


def test_common_information_klein():
    g = groups.abelian(2, 2)
    e = lambda t: g.labels.index(t)  # noqa: E731
    fam = SubgroupFamily(g, [{e((0, 0)), e((1, 0))}, {e((0, 0)), e((0, 1))}])
    res = groups.common_information_extension(fam, 0, 1)
    assert res.family.subgroups[2] == frozenset(range(4))
    assert res.extended["z"] == 0


def test_common_information_idempotent():
    g = groups.dihedral(4)
    normal = next(h for h in g.subgroups() if len(h) == 4 and g.is_normal(h))
    fam = SubgroupFamily(g, [normal, normal, range(8), {g.identity}])
    res = groups.common_information_extension(fam, 0, 1)
    assert res.family.subgroups[4] == normal
    assert res.extended["z"] == pytest.approx(res.base["a"])


def test_common_information_rejects_non_normal():
    s3 = groups.symmetric(3)
    a3 = next(h for h in s3.subgroups() if len(h) == 3)
    t = next(h for h in s3.subgroups() if len(h) == 2)
    with pytest.raises(GroupError, match="not normal"):
        groups.common_information_extension(SubgroupFamily(s3, [a3, t]), 0, 1)


def test_check_common_information_linear_and_false():
    # V_a, V_b in F_2^3 and V_z = V_a intersect V_b
    spans = (
        ((1, 0, 0), (0, 1, 0)),
        ((0, 1, 0), (0, 0, 1)),
        ((1, 1, 1),),
        ((1, 0, 1),),
    )
    base = groups.linear_polymatroid(SubspaceFamily(2, 3, spans, ABCD))
    ext = groups.linear_polymatroid(SubspaceFamily(2, 3, spans + (((0, 1, 0),),), PartySystem("abcdz")))
    assert groups.check_common_information(base, ext, 0, 1, 4)
    wrong = groups.linear_polymatroid(SubspaceFamily(2, 3, spans + (((1, 0, 0),),), PartySystem("abcdz")))
    assert not groups.check_common_information(base, wrong, 0, 1, 4)


@given(st.integers(0, 10**9), st.integers(1, 6))
def test_stabiliser_quotient_common_information(seed, n):
    g = stab.random_stabiliser_group(seed, 2, n, 4)
    fam = stab.quotient_family(g)
    res = groups.common_information_extension(fam, 0, 1)
    assert groups.check_common_information(res.base, res.extended, 0, 1, res.zeta)


def test_group_file_roundtrip():
    g = groups.dihedral(4)
    subs = g.subgroups()[1:3]
    g2, subs2 = groups.load_group(groups.dump_group(g, subs))
    assert g2.table == g.table and subs2 == subs
    with pytest.raises(GroupError):
        groups.load_group("order: 2\ntable:\n0 1\n")
    with pytest.raises(GroupError):
        groups.load_group("hello\n")


def test_distribution_file():
    dist = groups.load_distribution("# or/and\n0000 1/4\n1001 1/4\n1010 1/4\n1111 1/4\n")
    ref = groups.or_and_distribution()
    assert {tuple(map(int, k)): q for k, q in dist.items()} == ref
    assert groups.load_distribution("0,10 1/2\n1,3 1/2\n") == {("0", "10"): Fraction(1, 2), ("1", "3"): Fraction(1, 2)}
    with pytest.raises(GroupError):
        groups.load_distribution("0 1/2\n")
    with pytest.raises(GroupError):
        groups.load_distribution("0 x\n1 1\n")
