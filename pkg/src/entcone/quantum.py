"""Dense small-system quantum mechanics.

Density matrices, partial traces, von Neumann entropies in bits,
purification, Weyl operators and stabiliser projectors.  Party ``i`` of a
factorization is tensor factor ``i`` counting from the left, so basis
index digits are read most-significant first.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .entvec import NUMERIC_BITS, EntropyVector, PartySystem

MAX_DIM = 4096
MAX_ENTROPY_PARTIES = 6
HERM_TOL = 1e-10
EIG_CUTOFF = 1e-10
JACOBI_TOL = 1e-12
MAX_SWEEPS = 100


class QuantumError(ValueError):
    pass


@dataclass(frozen=True)
class HilbertFactorization:
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise QuantumError(f"bad local dimensions {self.dims}")
        if math.prod(dims) > MAX_DIM:
            raise QuantumError(f"total dimension {math.prod(dims)} exceeds guard {MAX_DIM}")
        object.__setattr__(self, "dims", dims)

    @property
    def total(self) -> int:
        return math.prod(self.dims)

    @property
    def n(self) -> int:
        return len(self.dims)

    def sub(self, keep: int) -> "HilbertFactorization":
        return HilbertFactorization(tuple(d for i, d in enumerate(self.dims) if keep >> i & 1))


# -- eigensolver ----------------------------------------------------------------


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Rounds of disjoint index pairs covering every pair once (circle method)."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for k in range(m // 2):
            i, j = players[k], players[m - 1 - k]
            if i < n and j < n:
                ps.append(min(i, j))
                qs.append(max(i, j))
        if ps:
            rounds.append((np.array(ps), np.array(qs)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _offdiag_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def jacobi_eigh(a: np.ndarray, vectors: bool = True, tol: float = JACOBI_TOL):
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Each sweep visits every index pair once, in round-robin order so that
    disjoint rotations are applied together.  Iterates until the
    off-diagonal Frobenius norm drops below ``tol`` (times the norm of
    ``a`` when that exceeds 1).  Returns ``(w, v)``
    with ``a @ v = v @ diag(w)``, eigenvalues ascending.
    """
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    if a.shape != (n, n):
        raise QuantumError("matrix must be square")
    if not np.allclose(a, a.conj().T, atol=HERM_TOL, rtol=0):
        raise QuantumError("matrix is not Hermitian")
    a = (a + a.conj().T) / 2
    v = np.eye(n, dtype=complex) if vectors else None
    rounds = _round_robin(n)
    # absolute for density matrices (norm <= 1), relative for larger inputs
    stop = tol * max(1.0, float(np.linalg.norm(a)))
    for _ in range(MAX_SWEEPS):
        if _offdiag_norm(a) < stop:
            break
        for p, q in rounds:
            beta = a[p, q]
            r = np.abs(beta)
            act = r > 1e-300
            if not act.any():
                continue
            p, q, beta, r = p[act], q[act], beta[act], r[act]
            phase = beta / r  # e^{i phi}
            alpha = a[p, p].real
            gamma = a[q, q].real
            tau = (gamma - alpha) / (2 * r)
            # for huge |tau| the rotation angle is ~1/(2 tau); avoid overflowing tau**2
            big = np.abs(tau) > 1e150
            tau_s = np.where(big, 1.0, tau)
            t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau_s) + np.sqrt(1 + tau_s * tau_s))
            t = np.where(big, 0.5 / np.where(big, tau, 1.0), t)
            c = 1 / np.sqrt(1 + t * t)
            s = t * c
            ph = phase.conj()
            # columns: A V
            ap, aq = a[:, p].copy(), a[:, q]
            a[:, p] = c * ap - s * ph * aq
            a[:, q] = s * ap + c * ph * aq
            # rows: V^dagger A
            ap, aq = a[p, :].copy(), a[q, :]
            a[p, :] = c[:, None] * ap - (s * phase)[:, None] * aq
            a[q, :] = s[:, None] * ap + (c * phase)[:, None] * aq
            if v is not None:
                vp, vq = v[:, p].copy(), v[:, q]
                v[:, p] = c * vp - s * ph * vq
                v[:, q] = s * vp + c * ph * vq
    else:
        raise QuantumError(f"Jacobi iteration did not converge in {MAX_SWEEPS} sweeps")
    w = np.diag(a).real.copy()
    idx = np.argsort(w, kind="stable")
    return (w[idx], v[:, idx]) if vectors else (w[idx], None)


def eigvalsh(a: np.ndarray) -> np.ndarray:
    return jacobi_eigh(a, vectors=False)[0]


# -- states ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    factorization: HilbertFactorization
    matrix: np.ndarray

    def __init__(self, dims, matrix, *, check: bool = True):
        fac = dims if isinstance(dims, HilbertFactorization) else HilbertFactorization(tuple(dims))
        m = np.array(matrix, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(self, "factorization", fac)
        object.__setattr__(self, "matrix", m)
        if m.shape != (fac.total, fac.total):
            raise QuantumError(f"matrix shape {m.shape} does not match dims {fac.dims}")
        if check:
            if not np.allclose(m, m.conj().T, atol=HERM_TOL, rtol=0):
                raise QuantumError("density matrix is not Hermitian")
            tr = np.trace(m)
            if abs(tr - 1) > HERM_TOL:
                raise QuantumError(f"density matrix has trace {tr}")
            if eigvalsh(m)[0] < -HERM_TOL:
                raise QuantumError("density matrix has a negative eigenvalue")

    @property
    def dims(self) -> tuple[int, ...]:
        return self.factorization.dims

    @classmethod
    def from_pure(cls, psi: "PureState") -> "DensityMatrix":
        return cls(psi.factorization, np.outer(psi.amplitudes, psi.amplitudes.conj()), check=False)

    def is_pure(self, tol: float = 1e-9) -> bool:
        return abs(np.trace(self.matrix @ self.matrix).real - 1) < tol


@dataclass(frozen=True, eq=False)
class PureState:
    factorization: HilbertFactorization
    amplitudes: np.ndarray

    def __init__(self, dims, amplitudes, *, normalize: bool = False):
        fac = dims if isinstance(dims, HilbertFactorization) else HilbertFactorization(tuple(dims))
        psi = np.array(amplitudes, dtype=complex).reshape(-1)
        if psi.size != fac.total:
            raise QuantumError(f"{psi.size} amplitudes for total dimension {fac.total}")
        norm = np.linalg.norm(psi)
        if normalize:
            if norm == 0:
                raise QuantumError("zero state vector")
            psi = psi / norm
        elif abs(norm - 1) > 1e-12:
            raise QuantumError(f"state vector has norm {norm}")
        psi.setflags(write=False)
        object.__setattr__(self, "factorization", fac)
        object.__setattr__(self, "amplitudes", psi)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.factorization.dims

    def density(self) -> DensityMatrix:
        return DensityMatrix.from_pure(self)


def _as_density(state) -> DensityMatrix:
    return DensityMatrix.from_pure(state) if isinstance(state, PureState) else state


def partial_trace(rho: DensityMatrix | PureState, keep: int) -> DensityMatrix:
    """Reduced state on the parties in bitmask ``keep``."""
    fac = rho.factorization
    n = fac.n
    if not 0 < keep < 1 << n:
        raise QuantumError("keep must be a nonempty subset of the parties")
    kept = [i for i in range(n) if keep >> i & 1]
    gone = [i for i in range(n) if not keep >> i & 1]
    dk = math.prod(fac.dims[i] for i in kept)
    if isinstance(rho, PureState):
        t = rho.amplitudes.reshape(fac.dims).transpose(kept + gone).reshape(dk, -1)
        m = t @ t.conj().T
    else:
        t = rho.matrix.reshape(fac.dims + fac.dims)
        perm = kept + gone + [n + i for i in kept] + [n + i for i in gone]
        dg = fac.total // dk
        t = t.transpose(perm).reshape(dk, dg, dk, dg)
        m = np.einsum("ajbj->ab", t)
    return DensityMatrix(fac.sub(keep), m, check=False)


def von_neumann_entropy(rho: DensityMatrix | np.ndarray) -> float:
    """``-sum lambda log2 lambda`` over eigenvalues above ``1e-10``."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    w = eigvalsh(m)
    w = w[w > EIG_CUTOFF]
    return float(-np.sum(w * np.log2(w)))


def entropy_vector(state: DensityMatrix | PureState, system: PartySystem | None = None) -> EntropyVector:
    """Entropies of all reduced states, in bits.

    Every subset is diagonalised on its own; complementarity of pure
    states is not used as a shortcut.
    """
    fac = state.factorization
    if fac.n > MAX_ENTROPY_PARTIES:
        raise QuantumError(f"entropy vectors limited to {MAX_ENTROPY_PARTIES} parties")
    system = system or PartySystem.of_size(fac.n)
    if system.n != fac.n:
        raise QuantumError("party system does not match the factorization")
    vals = [0.0] * (1 << fac.n)
    for m in system.subsets():
        vals[m] = von_neumann_entropy(partial_trace(state, m))
    return EntropyVector(system, vals, NUMERIC_BITS)


def purify(rho: DensityMatrix) -> PureState:
    """``sum_k sqrt(lambda_k) |phi_k> (x) |k>`` with a reference of dimension rank(rho)."""
    w, v = jacobi_eigh(rho.matrix)
    keep = np.flatnonzero(w > EIG_CUTOFF)[::-1]
    r = len(keep)
    psi = np.zeros((rho.factorization.total, r), dtype=complex)
    for k, idx in enumerate(keep):
        psi[:, k] = math.sqrt(w[idx]) * v[:, idx]
    return PureState(rho.dims + (r,), psi.reshape(-1), normalize=True)


# -- random states ---------------------------------------------------------------------


def random_pure_state(dims: Sequence[int], rng: np.random.Generator) -> PureState:
    d = math.prod(dims)
    psi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return PureState(dims, psi, normalize=True)


def random_density_matrix(
    dims: Sequence[int], rng: np.random.Generator, n_mix: int | None = None
) -> DensityMatrix:
    """Random convex mixture of 2-4 random pure states."""
    k = n_mix if n_mix is not None else int(rng.integers(2, 5))
    weights = rng.random(k)
    weights /= weights.sum()
    d = math.prod(dims)
    m = np.zeros((d, d), dtype=complex)
    for wgt in weights:
        psi = random_pure_state(dims, rng).amplitudes
        m += wgt * np.outer(psi, psi.conj())
    return DensityMatrix(dims, m)


def product_state(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    return DensityMatrix(a.dims + b.dims, np.kron(a.matrix, b.matrix), check=False)


def permute_parties(rho: DensityMatrix, order: Sequence[int]) -> DensityMatrix:
    """State whose party ``k`` is party ``order[k]`` of ``rho``."""
    n = rho.factorization.n
    dims = rho.dims
    t = rho.matrix.reshape(dims + dims).transpose(list(order) + [n + i for i in order])
    nd = tuple(dims[i] for i in order)
    return DensityMatrix(nd, t.reshape(math.prod(nd), -1), check=False)


# -- Weyl operators and stabiliser projectors ---------------------------------------------


def weyl_operators(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Shift ``X|j> = |j+1>`` and clock ``Z|j> = e^{2 pi i j/d}|j>``."""
    if d < 2:
        raise QuantumError("Weyl operators need d >= 2")
    x = np.roll(np.eye(d, dtype=complex), 1, axis=0)
    z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    if not np.allclose(z @ x, np.exp(2j * np.pi / d) * x @ z, atol=1e-12):
        raise QuantumError("Weyl commutation relation failed")
    return x, z


def _digits(n: int, p: int) -> np.ndarray:
    """Basis digits, most significant (qudit 0) first: shape (p**n, n)."""
    idx = np.arange(p**n)
    return np.stack([(idx // p ** (n - 1 - k)) % p for k in range(n)], axis=1)


def pauli_action(p: int, x: Sequence[int], z: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Monomial form of ``(tensor) X^x Z^z``: ``g|j> = phase[j] |target[j]>``.

    For ``p = 2`` a factor ``i`` per qubit carrying both X and Z makes the
    operator Hermitian (``iXZ = Y``).
    """
    n = len(x)
    dig = _digits(n, p)
    x = np.asarray(x) % p
    z = np.asarray(z) % p
    omega = np.exp(2j * np.pi / p)
    phase = omega ** ((dig @ z) % p)
    if p == 2:
        phase = phase * (1j ** int(np.sum(x & z)))
    shifted = (dig + x) % p
    target = shifted @ (p ** np.arange(n - 1, -1, -1))
    return target, phase


def pauli_matrix(p: int, x: Sequence[int], z: Sequence[int]) -> np.ndarray:
    target, phase = pauli_action(p, x, z)
    d = len(target)
    m = np.zeros((d, d), dtype=complex)
    m[target, np.arange(d)] = phase
    return m


def stabiliser_projector(group, phases: Sequence[complex] | None = None) -> tuple[DensityMatrix, int]:
    """Normalised projector onto the joint eigenspace of the generators.

    ``phases[i]`` is the eigenvalue picked for generator ``i`` (a p-th root
    of unity, default 1).  Builds ``prod_i (1/p) sum_k (conj(phase_i) g_i)^k``
    and returns ``(P / tr P, tr P)``; ``tr P = 0`` means the phases are
    inconsistent.
    """
    p, n = group.prime, group.n
    d = p**n
    if d > MAX_DIM:
        raise QuantumError(f"dimension {d} exceeds guard {MAX_DIM}")
    gens = group.generators
    phases = [1.0] * len(gens) if phases is None else list(phases)
    if len(phases) != len(gens):
        raise QuantumError("need one phase per generator")
    proj = np.eye(d, dtype=complex)
    for g, lam in zip(gens, phases):
        if abs(abs(lam) - 1) > 1e-12 or abs(lam**p - 1) > 1e-9:
            raise QuantumError(f"phase {lam} is not a {p}-th root of unity")
        target, ph = pauli_action(p, g.x, g.z)
        if p == 2:
            mat = np.zeros((d, d), dtype=complex)
            mat[target, np.arange(d)] = ph
            if not np.allclose(mat, mat.conj().T, atol=1e-12):
                raise QuantumError(f"generator {g} is not Hermitian under the phase convention")
        # accumulate sum_k (conj(lam) g)^k applied to the current projector
        term = proj.copy()
        acc = proj.copy()
        for _ in range(p - 1):
            nxt = np.zeros_like(term)
            nxt[target, :] = (np.conj(lam) * ph)[:, None] * term
            term = nxt
            acc += term
        proj = acc / p
    rank = np.trace(proj).real
    if rank < 0.5:
        raise QuantumError("inconsistent phases: the joint eigenspace is empty")
    rank_int = int(round(rank))
    return DensityMatrix((p,) * n, proj / rank, check=False), rank_int


def group_by_parties(rho: DensityMatrix, party_of: Sequence[int], nparties: int | None = None) -> DensityMatrix:
    """Regroup qudit factors into parties; a party's qudits become adjacent, in party order.

    Parties holding no qudit get a trivial factor of dimension 1.
    """
    nparties = max(party_of) + 1 if nparties is None else nparties
    order = sorted(range(len(party_of)), key=lambda k: (party_of[k], k))
    rho = permute_parties(rho, order)
    dims = [1] * nparties
    src = rho.dims
    for pos, k in enumerate(order):
        dims[party_of[k]] *= src[pos]
    return DensityMatrix(tuple(dims), rho.matrix, check=False)


# -- text format ------------------------------------------------------------------------


def _num(text: str) -> float:
    return float(Fraction(text)) if "/" in text else float(text)


def load_state(text: str) -> DensityMatrix | PureState:
    """Parse ``dims: d1 d2 ...`` followed by ``i j re im`` (density) or ``i re im`` (amplitude) rows.

    Amplitude files are renormalised, so exact rational amplitudes such
    as ``1 1/2 0`` may be given up to a common factor.
    """
    dims = None
    entries = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("dims:"):
            dims = tuple(int(t) for t in line[5:].split())
            continue
        entries.append(line.split())
    if dims is None:
        raise QuantumError("missing 'dims:' header")
    fac = HilbertFactorization(dims)
    arity = {len(e) for e in entries}
    if arity == {4}:
        m = np.zeros((fac.total, fac.total), dtype=complex)
        for i, j, re_, im in entries:
            m[int(i), int(j)] += _num(re_) + 1j * _num(im)
        return DensityMatrix(fac, m)
    if arity == {3}:
        psi = np.zeros(fac.total, dtype=complex)
        for i, re_, im in entries:
            psi[int(i)] += _num(re_) + 1j * _num(im)
        return PureState(fac, psi, normalize=True)
    raise QuantumError("rows must all be 'i j re im' or all 'i re im'")


def dump_state(state: DensityMatrix | PureState, tol: float = 1e-15) -> str:
    lines = ["dims: " + " ".join(map(str, state.dims))]
    if isinstance(state, PureState):
        for i, a in enumerate(state.amplitudes):
            if abs(a) > tol:
                lines.append(f"{i} {a.real:.17g} {a.imag:.17g}")
    else:
        for i, j in zip(*np.nonzero(np.abs(state.matrix) > tol)):
            a = state.matrix[i, j]
            lines.append(f"{i} {j} {a.real:.17g} {a.imag:.17g}")
    return "\n".join(lines) + "\n"


_BASIS_RE = re.compile(r"^[0-9]+$")


def basis_state(dims: Sequence[int], digits: str) -> np.ndarray:
    """Amplitude vector of the product basis state ``|digits>``."""
    if not _BASIS_RE.match(digits) or len(digits) != len(dims):
        raise QuantumError(f"bad basis label {digits!r}")
    idx = 0
    for d, ch in zip(dims, digits):
        idx = idx * d + int(ch)
    v = np.zeros(math.prod(dims), dtype=complex)
    v[idx] = 1
    return v


def ingleton_counterexample() -> DensityMatrix:
    """Mixture of half a 4-qubit GHZ state with |1010> and |1001>, a quarter each."""
    dims = (2, 2, 2, 2)
    ghz = (basis_state(dims, "0000") + basis_state(dims, "1111")) / math.sqrt(2)
    m = 0.5 * np.outer(ghz, ghz.conj())
    for lab in ("1010", "1001"):
        v = basis_state(dims, lab)
        m += 0.25 * np.outer(v, v)
    return DensityMatrix(dims, m)
