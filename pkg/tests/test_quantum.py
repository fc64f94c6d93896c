import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from entcone import ineq, quantum, stab
from entcone.entvec import PartySystem, evaluate
from entcone.quantum import DensityMatrix, PureState, QuantumError

ABCD = PartySystem("abcd")
BELL = PureState((2, 2), np.array([1, 0, 0, 1]) / math.sqrt(2))

complex_entries = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


def hermitian(raw):
    return (raw + raw.conj().T) / 2


def loop_partial_trace(m, dims, keep):
    """Reference partial trace by explicit index loops."""
    n = len(dims)
    kept = [i for i in range(n) if keep >> i & 1]
    dk = math.prod(dims[i] for i in kept)
    out = np.zeros((dk, dk), dtype=complex)
    for row in itertools.product(*(range(d) for d in dims)):
        for col in itertools.product(*(range(d) for d in dims)):
            if any(row[i] != col[i] for i in range(n) if not keep >> i & 1):
                continue
            r = c = 0
            for i in kept:
                r = r * dims[i] + row[i]
                c = c * dims[i] + col[i]
            ri = np.ravel_multi_index(row, dims)
            ci = np.ravel_multi_index(col, dims)
            out[r, c] += m[ri, ci]
    return out


@given(st.integers(1, 12).flatmap(lambda n: arrays(complex, (n, n), elements=complex_entries)))
def test_jacobi_matches_numpy(raw):
    a = hermitian(raw)
    w, v = quantum.jacobi_eigh(a)
    assert np.allclose(w, np.linalg.eigvalsh(a), atol=1e-9)
    assert np.allclose(a @ v, v * w, atol=1e-8)
    assert np.allclose(v.conj().T @ v, np.eye(len(w)), atol=1e-10)


def test_jacobi_degenerate_and_tiny():
    assert np.allclose(quantum.eigvalsh(np.eye(5)), np.ones(5))
    a = np.diag([1e-300, 2.0, -3.0]).astype(complex)
    a[0, 1] = a[1, 0] = 1e-200
    assert np.allclose(quantum.eigvalsh(a), [-3.0, 0.0, 2.0])
    with pytest.raises(QuantumError):
        quantum.jacobi_eigh(np.array([[0, 1], [0, 0]]))


def test_round_robin_covers_pairs():
    for n in range(2, 10):
        pairs = set()
        for p, q in quantum._round_robin(n):
            assert len(set(p) | set(q)) == 2 * len(p)
            pairs |= set(zip(p.tolist(), q.tolist()))
        assert pairs == set(itertools.combinations(range(n), 2))


def test_density_validation():
    with pytest.raises(QuantumError):
        DensityMatrix((2,), [[1, 1], [0, 0]])
    with pytest.raises(QuantumError):
        DensityMatrix((2,), [[1, 0], [0, 1]])
    with pytest.raises(QuantumError):
        DensityMatrix((2,), [[1.5, 0], [0, -0.5]])
    with pytest.raises(QuantumError):
        DensityMatrix((2, 2), np.eye(2) / 2)
    with pytest.raises(QuantumError):
        quantum.HilbertFactorization((64, 128))
    with pytest.raises(QuantumError):
        PureState((2,), [1, 1])


def test_partial_trace_examples():
    half = quantum.partial_trace(BELL, 0b01)
    assert np.allclose(half.matrix, np.eye(2) / 2)
    rho = BELL.density()
    assert np.allclose(quantum.partial_trace(rho, 0b11).matrix, rho.matrix)
    with pytest.raises(QuantumError):
        quantum.partial_trace(rho, 0)


def test_partial_trace_r2_state():
    group = stab.build_paper_state("R2")
    rho, rank = quantum.stabiliser_projector(group)
    assert rank == 1
    full = quantum.group_by_parties(rho, group.party_of, 5)
    ab = quantum.partial_trace(full, 0b00011)
    assert np.allclose(np.sort(np.linalg.eigvalsh(ab.matrix))[-2:], [0.5, 0.5], atol=1e-12)
    assert np.linalg.matrix_rank(ab.matrix, tol=1e-9) == 2


@given(st.integers(0, 2**32 - 1), st.integers(1, 15))
def test_partial_trace_matches_loops(seed, keep):
    rng = np.random.default_rng(seed)
    dims = (2, 3, 2, 1)
    rho = quantum.random_density_matrix(dims, rng)
    got = quantum.partial_trace(rho, keep).matrix
    assert np.allclose(got, loop_partial_trace(rho.matrix, dims, keep), atol=1e-12)
    psi = quantum.random_pure_state(dims, rng)
    assert np.allclose(
        quantum.partial_trace(psi, keep).matrix,
        loop_partial_trace(psi.density().matrix, dims, keep),
        atol=1e-12,
    )


def test_entropy_examples():
    assert quantum.von_neumann_entropy(BELL.density()) == pytest.approx(0, abs=1e-12)
    assert quantum.von_neumann_entropy(np.eye(3) / 3) == pytest.approx(math.log2(3), abs=1e-12)
    rho = quantum.ingleton_counterexample()
    assert quantum.von_neumann_entropy(rho) == pytest.approx(1.5, abs=1e-12)
    assert np.allclose(np.linalg.eigvalsh(rho.matrix)[-3:], [0.25, 0.25, 0.5])


def test_entropy_vector_examples():
    v = quantum.entropy_vector(BELL)
    assert v.values == pytest.approx((0, 1, 1, 0), abs=1e-12)
    v = quantum.entropy_vector(quantum.ingleton_counterexample(), ABCD)
    margin = evaluate(ineq.ingleton(ABCD, "a", "b", "c", "d").functional, v)
    assert margin == pytest.approx(-(5 - 3 * math.log2(3)) / 2, abs=1e-9)


def test_purify_examples():
    pure = BELL.density()
    p = quantum.purify(pure)
    assert p.dims == (2, 2, 1)
    mixed = DensityMatrix((2,), np.eye(2) / 2)
    p = quantum.purify(mixed)
    assert p.dims == (2, 2)
    assert np.allclose(quantum.partial_trace(p, 0b01).matrix, mixed.matrix)
    assert quantum.entropy_vector(p).values == pytest.approx((0, 1, 1, 0), abs=1e-12)


def test_purify_counterexample():
    rho = quantum.ingleton_counterexample()
    psi = quantum.purify(rho)
    assert psi.dims == (2, 2, 2, 2, 3)
    v5 = quantum.entropy_vector(psi, PartySystem("abcde"))
    assert v5.check_pure()
    v4 = quantum.entropy_vector(rho, ABCD)
    assert v5.restrict("abcd").values == pytest.approx(v4.values, abs=1e-9)


@given(st.integers(0, 2**32 - 1))
def test_random_pure_states_complementary(seed):
    psi = quantum.random_pure_state((2, 3, 2, 2), np.random.default_rng(seed))
    v = quantum.entropy_vector(psi, ABCD)
    assert v.check_pure()


@given(st.integers(0, 2**32 - 1))
def test_permute_parties_relabels_entropies(seed):
    rng = np.random.default_rng(seed)
    rho = quantum.random_density_matrix((2, 3, 2), rng)
    order = list(rng.permutation(3))
    v = quantum.entropy_vector(rho)
    w = quantum.entropy_vector(quantum.permute_parties(rho, order))
    for m in range(1, 8):
        src = sum(1 << order[k] for k in range(3) if m >> k & 1)
        assert w.values[m] == pytest.approx(v.values[src], abs=1e-9)


def test_weyl_operators():
    x, z = quantum.weyl_operators(2)
    assert np.allclose(x, [[0, 1], [1, 0]]) and np.allclose(z, np.diag([1, -1]))
    x, z = quantum.weyl_operators(3)
    mp = np.linalg.matrix_power
    assert np.allclose(mp(x, 3), np.eye(3)) and np.allclose(mp(z, 3), np.eye(3))
    for d in (2, 3, 5):
        x, z = quantum.weyl_operators(d)
        for a, b in itertools.product(range(d), repeat=2):
            if (a, b) != (0, 0):
                assert abs(np.trace(mp(x, a) @ mp(z, b))) < 1e-12


def test_pauli_matrix_is_tensor_product():
    x, z = quantum.weyl_operators(3)
    mp = np.linalg.matrix_power
    ref = np.kron(mp(x, 1) @ mp(z, 2), mp(x, 2) @ mp(z, 0))
    assert np.allclose(quantum.pauli_matrix(3, (1, 2), (2, 0)), ref)
    y = quantum.pauli_matrix(2, (1,), (1,))
    assert np.allclose(y, y.conj().T) and np.allclose(y @ y, np.eye(2))


def test_stabiliser_projector_examples():
    one = stab.StabiliserGroup(2, PartySystem("a"), (0,), (stab.PauliElement.from_string("Z"),))
    rho, rank = quantum.stabiliser_projector(one)
    assert rank == 1 and np.allclose(rho.matrix, np.diag([1, 0]))
    gens = [stab.PauliElement.from_string(s) for s in ("XXXX", "ZZII", "IZZI", "IIZZ")]
    ghz = stab.StabiliserGroup(2, ABCD, (0, 1, 2, 3), tuple(gens))
    rho, rank = quantum.stabiliser_projector(ghz)
    psi = np.zeros(16)
    psi[0] = psi[15] = 1 / math.sqrt(2)
    assert rank == 1 and np.allclose(rho.matrix, np.outer(psi, psi))
    short = stab.StabiliserGroup(2, ABCD, (0, 1, 2, 3), tuple(gens[:3]))
    assert quantum.stabiliser_projector(short)[1] == 2
    _, rank = quantum.stabiliser_projector(one, phases=[-1])
    assert rank == 1
    with pytest.raises(QuantumError):
        quantum.stabiliser_projector(one, phases=[1j])


def test_state_text_roundtrip():
    rho = quantum.ingleton_counterexample()
    back = quantum.load_state(quantum.dump_state(rho))
    assert np.allclose(back.matrix, rho.matrix)
    psi = quantum.load_state("dims: 2 2\n0 1 0\n3 1 0\n")
    assert isinstance(psi, PureState)
    assert np.allclose(psi.amplitudes, BELL.amplitudes)
    with pytest.raises(QuantumError):
        quantum.load_state("0 1 0\n")
    with pytest.raises(QuantumError):
        quantum.load_state("dims: 2\n0 1 0\n0 0 1 0\n")


def test_basis_state():
    assert quantum.basis_state((2, 3), "12")[5] == 1
    with pytest.raises(QuantumError):
        quantum.basis_state((2, 2), "1")


def test_group_by_parties_merges_qudits():
    group = stab.build_paper_state("R5")
    rho, _ = quantum.stabiliser_projector(group)
    merged = quantum.group_by_parties(rho, group.party_of, 5)
    assert merged.dims == (4, 2, 2, 2, 2)
