"""Dense state-vector engine.

Bit ``j`` of a basis index is physical qubit ``j`` (qubit 0 is the least
significant bit). Registers are ordered qubit lists; an outcome or block
index on a register ``[q0, q1, ...]`` has bit ``i`` equal to qubit
``register[i]``.

Every operation returns a fresh :class:`StateVector`; inputs are never
mutated.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NotUnitaryError

UNITARY_ATOL = 1e-12
NORM_ATOL = 1e-10


def _check_unitary(matrix: np.ndarray, atol: float = UNITARY_ATOL) -> None:
    ident = np.eye(matrix.shape[0], dtype=complex)
    if not np.allclose(matrix.conj().T @ matrix, ident, rtol=0.0, atol=atol):
        raise NotUnitaryError("matrix is not unitary within %g" % atol)


@dataclass(frozen=True, eq=False)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if self.n_qubits < 0 or amps.shape[0] != 1 << self.n_qubits:
            raise ValueError(
                f"expected {1 << max(self.n_qubits, 0)} amplitudes for "
                f"{self.n_qubits} qubits, got {amps.shape[0]}"
            )
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm!r})")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize: bool = False) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = int(round(np.log2(amps.shape[0]))) if amps.shape[0] else -1
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0:
                raise ValueError("cannot normalize the zero vector")
            amps = amps / norm
        return cls(n, amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def __repr__(self) -> str:
        return f"StateVector(n_qubits={self.n_qubits}, amplitudes={self.amplitudes!r})"


@dataclass(frozen=True, eq=False)
class Gate2x2:
    """Single-qubit gate; the matrix is checked for unitarity on construction."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"Gate2x2 needs a 2x2 matrix, got shape {m.shape}")
        _check_unitary(m)
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    def dagger(self) -> "Gate2x2":
        return Gate2x2(self.matrix.conj().T)

    def __matmul__(self, other: "Gate2x2") -> "Gate2x2":
        return Gate2x2(self.matrix @ other.matrix)


HADAMARD = Gate2x2(np.array([[1, 1], [1, -1]]) / np.sqrt(2))
PAULI_X = Gate2x2(np.array([[0, 1], [1, 0]]))
PAULI_Z = Gate2x2(np.array([[1, 0], [0, -1]]))
IDENTITY = Gate2x2(np.eye(2))


class BlockUnitary:
    """A unitary on a block of ``m`` qubits, stored densely or as a permutation.

    The permutation form maps basis index ``x`` to ``phases[x] * |perm[x]>``
    and is exact; use :meth:`permutation` for classical reversible maps.
    """

    def __init__(self, dense=None, perm=None, phases=None):
        if (dense is None) == (perm is None):
            raise ValueError("give exactly one of dense or perm")
        if dense is not None:
            mat = np.array(dense, dtype=complex)
            if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
                raise ValueError("dense block must be a square matrix")
            _check_dim(mat.shape[0])
            _check_unitary(mat)
            mat.flags.writeable = False
            self._dense = mat
            self._perm = None
            self._phases = None
            self.dimension = mat.shape[0]
        else:
            p = np.asarray(perm, dtype=np.int64).reshape(-1)
            _check_dim(p.shape[0])
            if not np.array_equal(np.sort(p), np.arange(p.shape[0])):
                raise ValueError("permutation map is not a bijection")
            ph = np.ones(p.shape[0], dtype=complex) if phases is None else np.array(phases, dtype=complex)
            if ph.shape != p.shape:
                raise ValueError("phases must have one entry per basis index")
            if not np.allclose(np.abs(ph), 1.0, rtol=0.0, atol=UNITARY_ATOL):
                raise NotUnitaryError("permutation phases must have unit modulus")
            p.flags.writeable = False
            ph.flags.writeable = False
            self._dense = None
            self._perm = p
            self._phases = ph
            self.dimension = p.shape[0]
        self.n_qubits = self.dimension.bit_length() - 1

    @classmethod
    def dense(cls, matrix) -> "BlockUnitary":
        return cls(dense=matrix)

    @classmethod
    def permutation(cls, mapping, phases=None) -> "BlockUnitary":
        return cls(perm=mapping, phases=phases)

    @property
    def is_permutation(self) -> bool:
        return self._perm is not None

    @property
    def perm(self) -> np.ndarray | None:
        return self._perm

    @property
    def phases(self) -> np.ndarray | None:
        return self._phases

    def to_dense(self) -> np.ndarray:
        if self._dense is not None:
            return self._dense
        mat = np.zeros((self.dimension, self.dimension), dtype=complex)
        mat[self._perm, np.arange(self.dimension)] = self._phases
        return mat

    def power(self, p: int) -> "BlockUnitary":
        if p < 0:
            raise ValueError("power must be nonnegative")
        if self._perm is not None:
            perm = np.arange(self.dimension)
            phases = np.ones(self.dimension, dtype=complex)
            for _ in range(p):
                # |x> -> phase[perm_acc[x]] |self.perm[perm_acc[x]]>
                phases = phases * self._phases[perm]
                perm = self._perm[perm]
            return BlockUnitary.permutation(perm, phases)
        acc = np.eye(self.dimension, dtype=complex)
        for _ in range(p):
            acc = self._dense @ acc
        return BlockUnitary.dense(acc)

    def apply(self, vector: np.ndarray) -> np.ndarray:
        """Apply to a bare amplitude vector of length ``dimension``."""
        v = np.asarray(vector, dtype=complex)
        if self._dense is not None:
            return self._dense @ v
        out = np.zeros_like(v)
        out[self._perm] = self._phases * v
        return out

    def __repr__(self) -> str:
        kind = "permutation" if self.is_permutation else "dense"
        return f"BlockUnitary({kind}, dimension={self.dimension})"


def _check_dim(d: int) -> None:
    if d < 1 or d & (d - 1):
        raise ValueError(f"block dimension must be a power of two, got {d}")


@dataclass(frozen=True, eq=False)
class OutcomeDistribution:
    register: tuple[int, ...]
    probabilities: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.array(self.probabilities, dtype=float)
        if p.shape != (1 << len(self.register),):
            raise ValueError("probability table size does not match register")
        if np.any(p < -1e-12) or np.any(p > 1 + 1e-12) or abs(p.sum() - 1.0) > 1e-10:
            raise ValueError("not a probability distribution")
        p = np.clip(p, 0.0, 1.0)
        p.flags.writeable = False
        object.__setattr__(self, "register", tuple(self.register))
        object.__setattr__(self, "probabilities", p)

    def __getitem__(self, outcome: int) -> float:
        return float(self.probabilities[outcome])

    def most_likely(self) -> int:
        return int(np.argmax(self.probabilities))

    def bit_marginal(self, position: int) -> np.ndarray:
        """``[P(bit=0), P(bit=1)]`` for ``register[position]``."""
        bits = (np.arange(self.probabilities.shape[0]) >> position) & 1
        p1 = float(self.probabilities[bits == 1].sum())
        return np.array([1.0 - p1, p1])

    def label(self, outcome: int) -> str:
        return format_bits(outcome, len(self.register))

    def as_dict(self) -> dict[str, float]:
        return {self.label(i): float(p) for i, p in enumerate(self.probabilities)}


def format_bits(value: int, width: int) -> str:
    """Bitstring with the highest register position leftmost."""
    return format(value, f"0{width}b") if width else ""


# -- index helpers ---------------------------------------------------------

def _check_register(n_qubits: int, qubits: Sequence[int]) -> tuple[int, ...]:
    qs = tuple(int(q) for q in qubits)
    if len(set(qs)) != len(qs):
        raise ValueError(f"duplicate qubit indices in {list(qs)}")
    for q in qs:
        if not 0 <= q < n_qubits:
            raise IndexError(f"qubit {q} out of range for {n_qubits} qubits")
    return qs


def block_index(indices: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    b = np.zeros_like(indices)
    for i, q in enumerate(qubits):
        b |= ((indices >> q) & 1) << i
    return b


def _scatter(values: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    out = np.zeros_like(values)
    for i, q in enumerate(qubits):
        out |= ((values >> i) & 1) << q
    return out


def _apply_dense(amps: np.ndarray, n: int, qubits: Sequence[int], matrix: np.ndarray) -> np.ndarray:
    m = len(qubits)
    t = amps.reshape((2,) * n)
    # row-major reshape of the block matrix puts the highest block bit first
    axes = [n - 1 - q for q in reversed(qubits)]
    mt = matrix.reshape((2,) * (2 * m))
    out = np.tensordot(mt, t, axes=(list(range(m, 2 * m)), axes))
    out = np.moveaxis(out, list(range(m)), axes)
    return out.reshape(-1)


def _apply_perm(amps: np.ndarray, qubits: Sequence[int], perm: np.ndarray, phases: np.ndarray) -> np.ndarray:
    idx = np.arange(amps.shape[0])
    b = block_index(idx, qubits)
    mask = _scatter(np.full_like(idx, (1 << len(qubits)) - 1), qubits)
    dest = (idx & ~mask) | _scatter(perm[b], qubits)
    out = np.empty_like(amps)
    out[dest] = phases[b] * amps
    return out


def _apply_block_raw(amps: np.ndarray, n: int, qubits: Sequence[int], u: BlockUnitary) -> np.ndarray:
    if u.is_permutation:
        return _apply_perm(amps, qubits, u.perm, u.phases)
    return _apply_dense(amps, n, qubits, u.to_dense())


# -- operations ------------------------------------------------------------

def new_basis_state(n_qubits: int, basis_index: int) -> StateVector:
    if n_qubits < 0:
        raise ValueError("n_qubits must be nonnegative")
    if not 0 <= basis_index < 1 << n_qubits:
        raise IndexError(f"basis index {basis_index} out of range for {n_qubits} qubits")
    amps = np.zeros(1 << n_qubits, dtype=complex)
    amps[basis_index] = 1.0
    return StateVector(n_qubits, amps)


def tensor(low: StateVector, high: StateVector) -> StateVector:
    """Joint state with ``low`` on qubits ``0..low.n-1`` and ``high`` above it."""
    return StateVector(low.n_qubits + high.n_qubits, np.kron(high.amplitudes, low.amplitudes))


def apply_one_qubit(state: StateVector, qubit: int, g: Gate2x2) -> StateVector:
    (q,) = _check_register(state.n_qubits, [qubit])
    return StateVector(state.n_qubits, _apply_dense(state.amplitudes, state.n_qubits, [q], g.matrix))


def apply_block(state: StateVector, qubits: Sequence[int], u: BlockUnitary) -> StateVector:
    qs = _check_register(state.n_qubits, qubits)
    if u.dimension != 1 << len(qs):
        raise ValueError(f"block of dimension {u.dimension} does not fit {len(qs)} qubits")
    return StateVector(state.n_qubits, _apply_block_raw(state.amplitudes, state.n_qubits, qs, u))


def apply_controlled_block(
    state: StateVector,
    control: int,
    target_block: Sequence[int],
    u: BlockUnitary,
    power: int = 1,
) -> StateVector:
    """Apply ``u**power`` to ``target_block`` on the control=1 subspace."""
    n = state.n_qubits
    (c,) = _check_register(n, [control])
    qs = _check_register(n, target_block)
    if c in qs:
        raise ValueError("control qubit overlaps the target block")
    if u.dimension != 1 << len(qs):
        raise ValueError(f"block of dimension {u.dimension} does not fit {len(qs)} qubits")
    up = u.power(power)
    amps = state.amplitudes.copy()
    on = ((np.arange(amps.shape[0]) >> c) & 1) == 1
    # the control=1 slice, in index order, is a state on the other n-1 qubits
    sub_qubits = [q - 1 if q > c else q for q in qs]
    amps[on] = _apply_block_raw(amps[on], n - 1, sub_qubits, up)
    return StateVector(n, amps)


def apply_diagonal(state: StateVector, qubit: int, phase0: float, phase1: float) -> StateVector:
    (q,) = _check_register(state.n_qubits, [qubit])
    bits = (np.arange(state.dim) >> q) & 1
    factors = np.where(bits == 1, np.exp(1j * phase1), np.exp(1j * phase0))
    return StateVector(state.n_qubits, state.amplitudes * factors)


def marginal_distribution(state: StateVector, register: Sequence[int]) -> OutcomeDistribution:
    qs = _check_register(state.n_qubits, register)
    probs = np.abs(state.amplitudes) ** 2
    b = block_index(np.arange(state.dim), qs)
    table = np.bincount(b, weights=probs, minlength=1 << len(qs))
    return OutcomeDistribution(qs, table / table.sum())


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _draw(probabilities: np.ndarray, rng: np.random.Generator) -> int:
    cdf = np.cumsum(probabilities)
    u = rng.random() * cdf[-1]
    k = int(np.searchsorted(cdf, u, side="right"))
    k = min(k, probabilities.shape[0] - 1)
    # never land on an empty branch (possible only at cdf plateaus)
    while probabilities[k] <= 0.0:
        k -= 1
    return k


def sample_and_collapse(state: StateVector, register: Sequence[int], seed) -> tuple[int, StateVector]:
    """Measure ``register`` in the computational basis.

    ``seed`` is an integer (a fresh PCG64 generator is built from it) or an
    existing ``numpy.random.Generator``. Returns the outcome as an integer
    (bit ``i`` = ``register[i]``) and the renormalized post-measurement state.
    """
    dist = marginal_distribution(state, register)
    outcome = _draw(dist.probabilities, _rng(seed))
    keep = block_index(np.arange(state.dim), dist.register) == outcome
    amps = np.where(keep, state.amplitudes, 0.0)
    return outcome, StateVector(state.n_qubits, amps / np.linalg.norm(amps))


def project_onto(state: StateVector, register: Sequence[int], vector) -> tuple[float, StateVector | None]:
    """Project ``register`` onto the normalized ``vector``.

    Returns the branch probability and the collapsed state, or ``None`` for
    the state when the branch is empty.
    """
    qs = _check_register(state.n_qubits, register)
    v = np.asarray(vector, dtype=complex).reshape(-1)
    if v.shape[0] != 1 << len(qs):
        raise ValueError("projection vector does not match register size")
    v = v / np.linalg.norm(v)
    idx = np.arange(state.dim)
    b = block_index(idx, qs)
    mask = _scatter(np.full_like(idx, (1 << len(qs)) - 1), qs)
    rest = idx & ~mask
    # <v|_register acting on the state, re-embedded with |v> on the register
    overlap = np.zeros(state.dim, dtype=complex)
    np.add.at(overlap, rest, v[b].conj() * state.amplitudes)
    amps = overlap[rest] * v[b]
    prob = float(np.vdot(amps, amps).real)
    if prob <= 1e-300:
        return 0.0, None
    return prob, StateVector(state.n_qubits, amps / np.sqrt(prob))


def measure_in_basis(state: StateVector, register: Sequence[int], basis: Sequence, seed) -> tuple[int, StateVector]:
    """Projective measurement of ``register`` onto orthonormal ``basis`` vectors.

    The basis may be partial, but it must carry all the weight of the state
    on that register.
    """
    branches = [project_onto(state, register, v) for v in basis]
    probs = np.array([p for p, _ in branches])
    if abs(probs.sum() - 1.0) > NORM_ATOL:
        raise ValueError(f"basis covers only {probs.sum():.12g} of the state's weight")
    k = _draw(probs, _rng(seed))
    return k, branches[k][1]


def fidelity_up_to_global_phase(a: StateVector, b: StateVector) -> float:
    if a.dim != b.dim:
        raise ValueError("states have different dimensions")
    return float(min(1.0, abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2))
