"""Phase estimation with free-evolution delays between its three stages.

Layout: index qubits occupy physical qubits ``0..n-1``, the target register
sits above them. Physical index qubit ``j`` controls ``U**(2**(n-1-j))``.
Reading the register in the Fourier basis therefore treats physical qubit
``j`` as logical digit ``n-1-j`` on the way in; the readout is written back
so that physical qubit ``j`` ends up holding phase bit ``j``. Both relabelings
are index maps handed to :func:`inverse_qft`; no SWAP gates are applied.

Phase bits follow the weighting ``phi = 2*pi * sum_j bits[j] / 2**(n-j)``,
so ``bits[n-1]`` is the half-turn digit and ``bits[0]`` the finest one.
Equivalently ``phi = 2*pi*K / 2**n`` with ``K = sum_j bits[j] * 2**j``, and
the ideal readout is the basis index ``K``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .qubit_model import DelaySchedule, PhysicalQubit, total_delay
from .statevec import (
    HADAMARD,
    BlockUnitary,
    OutcomeDistribution,
    StateVector,
    apply_block,
    apply_controlled_block,
    apply_diagonal,
    apply_one_qubit,
    format_bits,
    marginal_distribution,
    new_basis_state,
    sample_and_collapse,
    tensor,
)

EIGEN_ATOL = 1e-10


def binary_phase(bits: Sequence[int]) -> float:
    bits = list(bits)
    if not bits:
        raise ValueError("need at least one phase bit")
    if any(b not in (0, 1) for b in bits):
        raise ValueError(f"phase bits must be 0 or 1, got {bits}")
    n = len(bits)
    return 2 * math.pi * math.fsum(b / 2 ** (n - j) for j, b in enumerate(bits))


def phase_integer(bits: Sequence[int]) -> int:
    """Readout index ``K`` of an exact phase, ``phi = 2 pi K / 2**n``."""
    return sum(int(b) << j for j, b in enumerate(bits))


def bits_of(value: int, n: int) -> list[int]:
    return [(value >> j) & 1 for j in range(n)]


@dataclass(frozen=True, eq=False)
class PhaseEstimationSpec:
    n: int
    target_unitary: BlockUnitary
    target_state: StateVector
    index_qubits: tuple[PhysicalQubit, ...]
    phase_bits: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("index register needs at least one qubit")
        object.__setattr__(self, "index_qubits", tuple(self.index_qubits))
        if len(self.index_qubits) != self.n:
            raise ValueError(f"{len(self.index_qubits)} physical qubits given for n={self.n}")
        if self.target_state.dim != self.target_unitary.dimension:
            raise ValueError(
                f"target state of dimension {self.target_state.dim} does not match "
                f"unitary of dimension {self.target_unitary.dimension}"
            )
        if self.phase_bits is not None:
            bits = tuple(int(b) for b in self.phase_bits)
            if len(bits) != self.n:
                raise ValueError(f"{len(bits)} phase bits given for n={self.n}")
            object.__setattr__(self, "phase_bits", bits)
            psi = self.target_state.amplitudes
            residual = self.target_unitary.apply(psi) - np.exp(1j * binary_phase(bits)) * psi
            if np.max(np.abs(residual)) > EIGEN_ATOL:
                raise ValueError("target state is not an eigenvector with the stated phase")

    @property
    def m(self) -> int:
        return self.target_state.n_qubits

    @property
    def target_register(self) -> list[int]:
        return list(range(self.n, self.n + self.m))

    @property
    def expected_outcome(self) -> int | None:
        return None if self.phase_bits is None else phase_integer(self.phase_bits)


@dataclass(frozen=True, eq=False)
class PEAResult:
    index_distribution: OutcomeDistribution
    per_qubit_success: np.ndarray | None
    final_state: StateVector = field(repr=False)
    global_phase_dropped: bool = True
    collapsed: tuple[str, StateVector] | None = field(default=None, repr=False)
    seed: int | None = None

    @property
    def sampled_outcome(self) -> int | None:
        return None if self.collapsed is None else int(self.collapsed[0], 2)


def _fourier_block(qubits: Sequence[int], read: Sequence[int], write: Sequence[int], sign: float) -> BlockUnitary:
    qs = list(qubits)
    nq = len(qs)
    if sorted(read) != sorted(qs) or sorted(write) != sorted(qs):
        raise ValueError("input and output maps must use the same qubits")
    pos_in = [qs.index(q) for q in read]
    pos_out = [qs.index(q) for q in write]
    dim = 1 << nq
    b = np.arange(dim)

    def value(positions):
        v = np.zeros(dim, dtype=np.int64)
        for i, p in enumerate(positions):
            v |= ((b >> p) & 1) << i
        return v

    k = value(pos_in)
    l = value(pos_out)
    mat = np.exp(sign * 2j * np.pi * np.outer(l, k) / dim) / math.sqrt(dim)
    return BlockUnitary.dense(mat)


def _fourier_maps(index_qubits, output_qubits):
    read = [int(q) for q in index_qubits]
    if len(set(read)) != len(read):
        raise ValueError(f"duplicate qubit indices in {read}")
    write = read if output_qubits is None else [int(q) for q in output_qubits]
    return sorted(read), read, write


def inverse_qft(state: StateVector, index_qubits: Sequence[int], output_qubits: Sequence[int] | None = None) -> StateVector:
    """``|k> -> 2**(-n/2) sum_l exp(-2 pi i k l / 2**n) |l>``.

    ``k`` is read with ``index_qubits[i]`` as digit ``2**i``; ``l`` is written
    with ``output_qubits[i]`` (default: ``index_qubits[i]``) as digit ``2**i``.
    """
    qs, read, write = _fourier_maps(index_qubits, output_qubits)
    return apply_block(state, qs, _fourier_block(qs, read, write, -1.0))


def qft(state: StateVector, index_qubits: Sequence[int], output_qubits: Sequence[int] | None = None) -> StateVector:
    """Adjoint of :func:`inverse_qft` called with the same qubit maps."""
    qs, read, write = _fourier_maps(index_qubits, output_qubits)
    block = _fourier_block(qs, read, write, -1.0)
    return apply_block(state, qs, BlockUnitary.dense(block.to_dense().conj().T))


def logical_input_map(n: int) -> list[int]:
    """Physical qubit carrying Fourier digit ``2**i`` of the kicked-back phase."""
    return [n - 1 - i for i in range(n)]


def _check_schedule(spec: PhaseEstimationSpec, schedule: DelaySchedule) -> None:
    if schedule.n_qubits != spec.n:
        raise ValueError(f"schedule covers {schedule.n_qubits} qubits, spec has {spec.n}")
    for j, seg in enumerate(schedule.segments):
        if len(seg) != 2:
            raise ValueError(f"qubit {j}: phase estimation needs (before, after) delay pairs")


def _idle(state: StateVector, j: int, q: PhysicalQubit, tau: float, drop_global_phase: bool) -> StateVector:
    if tau == 0:
        return state
    if drop_global_phase:
        return apply_diagonal(state, j, 0.0, -q.delta * tau)
    return apply_diagonal(state, j, -q.e0 * tau, -q.e1 * tau)


def initialize(spec: PhaseEstimationSpec) -> StateVector:
    index = new_basis_state(spec.n, 0)
    for j in range(spec.n):
        index = apply_one_qubit(index, j, HADAMARD)
    return tensor(index, spec.target_state)


def kickback_stage(
    state: StateVector,
    spec: PhaseEstimationSpec,
    schedule: DelaySchedule,
    drop_global_phase: bool = True,
) -> StateVector:
    """Idle, controlled power of the unitary, idle again, on each index qubit.

    With ``drop_global_phase`` the idle gates are ``diag(1, exp(-i delta tau))``,
    which differs from the full free evolution by one overall phase.
    """
    _check_schedule(spec, schedule)
    if state.n_qubits != spec.n + spec.m:
        raise ValueError("state does not match the spec's register sizes")
    target = spec.target_register
    for j, (q, (tau1, tau2)) in enumerate(zip(spec.index_qubits, schedule.segments)):
        state = _idle(state, j, q, tau1, drop_global_phase)
        state = apply_controlled_block(state, j, target, spec.target_unitary, 2 ** (spec.n - 1 - j))
        state = _idle(state, j, q, tau2, drop_global_phase)
    return state


def readout_transform(state: StateVector, n: int) -> StateVector:
    return inverse_qft(state, logical_input_map(n), list(range(n)))


def feedforward_success(pre_readout: StateVector, bits: Sequence[int]) -> np.ndarray:
    """Per-qubit probability of reading the ideal bit, given earlier bits read right.

    Qubit ``j`` is read after the finer digits ``0..j-1``; the Fourier
    readout removes their contribution with controlled phases. Conditioned
    on those digits having come out correct, the correction is the fixed
    phase used here, so this equals
    ``P(bit j correct | bits 0..j-1 correct)`` of the full readout. It stays
    defined when that conditioning event has probability zero.
    """
    out = np.empty(len(bits))
    for j, bj in enumerate(bits):
        correction = -2 * math.pi * math.fsum(bits[i] * 2.0 ** (i - j - 1) for i in range(j))
        st = apply_diagonal(pre_readout, j, 0.0, correction)
        st = apply_one_qubit(st, j, HADAMARD)
        out[j] = marginal_distribution(st, [j])[bj]
    return out


def conditional_bit_success(dist: OutcomeDistribution, bits: Sequence[int]) -> np.ndarray:
    """``P(bit j correct | bits 0..j-1 correct)`` from a joint readout table.

    Entries whose conditioning event is empty are ``nan``.
    """
    p = dist.probabilities
    idx = np.arange(p.shape[0])
    out = np.empty(len(bits))
    for j in range(len(bits)):
        low = phase_integer(bits[:j])
        prefix = (idx & ((1 << j) - 1)) == low
        denom = p[prefix].sum()
        hit = prefix & (((idx >> j) & 1) == bits[j])
        out[j] = p[hit].sum() / denom if denom > 1e-300 else np.nan
    return out


def run_pea(
    spec: PhaseEstimationSpec,
    schedule: DelaySchedule | None = None,
    mode: str = "exact",
    seed=None,
    drop_global_phase: bool = True,
) -> PEAResult:
    """Initialize, kick back with delays, Fourier readout; optionally sample."""
    if mode not in ("exact", "sample"):
        raise ValueError(f"mode must be 'exact' or 'sample', got {mode!r}")
    if mode == "sample" and seed is None:
        raise ValueError("sample mode needs a seed")
    if schedule is None:
        schedule = DelaySchedule.zero(spec.n)
    state = initialize(spec)
    state = kickback_stage(state, spec, schedule, drop_global_phase)
    success = None if spec.phase_bits is None else feedforward_success(state, spec.phase_bits)
    final = readout_transform(state, spec.n)
    dist = marginal_distribution(final, range(spec.n))
    collapsed = None
    if mode == "sample":
        outcome, post = sample_and_collapse(final, range(spec.n), seed)
        collapsed = (format_bits(outcome, spec.n), post)
    return PEAResult(
        index_distribution=dist,
        per_qubit_success=success,
        final_state=final,
        global_phase_dropped=drop_global_phase,
        collapsed=collapsed,
        seed=seed if mode == "sample" else None,
    )


def closed_form_success(spec: PhaseEstimationSpec, schedule: DelaySchedule) -> np.ndarray:
    if spec.phase_bits is None:
        raise ValueError("closed-form success needs an exactly representable phase")
    _check_schedule(spec, schedule)
    return np.array(
        [0.5 * (1 + math.cos(q.delta * total_delay(schedule, j))) for j, q in enumerate(spec.index_qubits)]
    )


def diagonal_phase_unitary(phase: float, m: int = 1) -> BlockUnitary:
    """``exp(i phase)`` on the last basis state of ``m`` qubits, identity elsewhere."""
    ph = np.ones(1 << m, dtype=complex)
    ph[-1] = np.exp(1j * phase)
    return BlockUnitary.permutation(np.arange(1 << m), ph)


def exact_phase_spec(bits: Sequence[int], deltas: Sequence[float], e0: Sequence[float] | None = None) -> PhaseEstimationSpec:
    """Spec whose one-qubit target ``|1>`` picks up exactly ``binary_phase(bits)``."""
    bits = [int(b) for b in bits]
    n = len(bits)
    deltas = list(deltas)
    if len(deltas) != n:
        raise ValueError(f"{len(deltas)} splittings given for {n} index qubits")
    e0 = [0.0] * n if e0 is None else list(e0)
    qubits = tuple(PhysicalQubit.from_delta(d, base) for d, base in zip(deltas, e0))
    return PhaseEstimationSpec(
        n=n,
        target_unitary=diagonal_phase_unitary(binary_phase(bits)),
        target_state=new_basis_state(1, 1),
        index_qubits=qubits,
        phase_bits=tuple(bits),
    )
