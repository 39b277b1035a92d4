"""Order finding for ``y`` modulo ``N`` as delayed phase estimation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..pea import PhaseEstimationSpec, run_pea
from ..qubit_model import DelaySchedule, PhysicalQubit
from ..statevec import (
    BlockUnitary,
    OutcomeDistribution,
    StateVector,
    _rng,
    marginal_distribution,
    measure_in_basis,
    new_basis_state,
    project_onto,
    sample_and_collapse,
)


def _check_coprime(y: int, N: int) -> None:
    if N < 2:
        raise ValueError("modulus must be at least 2")
    if math.gcd(y, N) != 1:
        raise ValueError(f"gcd({y}, {N}) = {math.gcd(y, N)}; y must be coprime to N")


def multiplicative_order(y: int, N: int) -> int:
    _check_coprime(y, N)
    r, acc = 1, y % N
    while acc != 1:
        acc = acc * y % N
        r += 1
    return r


def mod_mul_unitary(y: int, N: int, m: int) -> BlockUnitary:
    """``|x> -> |y x mod N>`` for ``x < N``; basis states ``x >= N`` are fixed."""
    _check_coprime(y, N)
    if 1 << m < N:
        raise ValueError(f"{m} qubits cannot hold residues modulo {N}")
    perm = np.arange(1 << m)
    perm[:N] = (y * np.arange(N)) % N
    return BlockUnitary.permutation(perm)


def order_eigenstate(y: int, N: int, k: int, m: int) -> StateVector:
    """``|u_k> = r**-0.5 sum_x exp(-2 pi i k x / r) |y**x mod N>``.

    With this sign the multiplication map has eigenvalue ``exp(+2 pi i k / r)``.
    """
    r = multiplicative_order(y, N)
    amps = np.zeros(1 << m, dtype=complex)
    for x in range(r):
        amps[pow(y, x, N)] += np.exp(-2j * np.pi * k * x / r) / math.sqrt(r)
    return StateVector(m, amps)


def verify_order(y: int, N: int, k: int, n: int) -> int | None:
    """Order ``r`` recovered from readout ``k`` of an ``n``-qubit index, or ``None``.

    Candidates are the denominators of the continued-fraction convergents of
    ``k / 2**n`` and their multiples up to ``N``; the first one with
    ``y**i mod N == 1`` is reduced to the smallest such divisor.
    """
    if not 0 <= k < 1 << n:
        raise ValueError(f"readout {k} out of range for {n} index qubits")
    _check_coprime(y, N)
    if k == 0:
        return None
    frac = Fraction(k, 1 << n)
    denominators = []
    a, b = frac.numerator, frac.denominator
    h_prev, h = 1, 0  # convergent denominators q_{-2}, q_{-1}
    while b:
        q, (a, b) = a // b, (b, a % b)
        h_prev, h = h, q * h + h_prev
        denominators.append(h)
    seen = set()
    for d in denominators:
        for i in range(d, N + 1, d):
            if i in seen:
                continue
            seen.add(i)
            if pow(y, i, N) == 1:
                return min(x for x in range(1, i + 1) if i % x == 0 and pow(y, x, N) == 1)
    return None


@dataclass(frozen=True)
class OrderFindingSpec:
    y: int = 7
    N: int = 15
    n: int = 2
    m: int = 4
    index_qubits: tuple[PhysicalQubit, ...] | None = None
    schedule: DelaySchedule | None = None

    def __post_init__(self):
        _check_coprime(self.y, self.N)
        if 1 << self.m < self.N:
            raise ValueError(f"{self.m} target qubits cannot hold residues modulo {self.N}")
        qubits = self.index_qubits
        if qubits is None:
            qubits = tuple(PhysicalQubit(0.0, 0.0) for _ in range(self.n))
        qubits = tuple(qubits)
        if len(qubits) != self.n:
            raise ValueError(f"{len(qubits)} physical qubits given for n={self.n}")
        object.__setattr__(self, "index_qubits", qubits)
        if self.schedule is None:
            object.__setattr__(self, "schedule", DelaySchedule.zero(self.n))

    def pea_spec(self) -> PhaseEstimationSpec:
        return PhaseEstimationSpec(
            n=self.n,
            target_unitary=mod_mul_unitary(self.y, self.N, self.m),
            target_state=new_basis_state(self.m, 1),
            index_qubits=self.index_qubits,
        )


@dataclass(frozen=True, eq=False)
class OrderResult:
    measured_k: int | None
    verified_order: int | None
    failed: bool
    index_distribution: OutcomeDistribution = field(repr=False)
    target_label: int | None = None
    final_state: StateVector | None = field(repr=False, default=None)
    seed: int | None = None


def eigenbasis(spec: OrderFindingSpec) -> list[StateVector]:
    r = multiplicative_order(spec.y, spec.N)
    return [order_eigenstate(spec.y, spec.N, k, spec.m) for k in range(r)]


def conditional_index_distribution(final_state: StateVector, spec: OrderFindingSpec, k: int) -> OutcomeDistribution:
    """Index readout statistics given that the target collapsed onto ``|u_k>``."""
    target = list(range(spec.n, spec.n + spec.m))
    prob, branch = project_onto(final_state, target, order_eigenstate(spec.y, spec.N, k, spec.m).amplitudes)
    if branch is None:
        raise ValueError(f"target never collapses onto |u_{k}>")
    return marginal_distribution(branch, range(spec.n))


def run_order_finding(spec: OrderFindingSpec, seed=None) -> OrderResult:
    """Delayed phase estimation on ``|1>`` of the target, then readout.

    Without a seed only the exact index distribution is returned. With a
    seed, the target is measured in the eigenbasis ``{|u_k>}`` and the index
    register is then sampled from the collapsed state (the two registers are
    disjoint, so this order is immaterial).
    """
    result = run_pea(spec.pea_spec(), spec.schedule)
    dist = result.index_distribution
    if seed is None:
        return OrderResult(None, None, False, dist, final_state=result.final_state)
    rng = _rng(seed)
    target = list(range(spec.n, spec.n + spec.m))
    label, collapsed = measure_in_basis(
        result.final_state, target, [u.amplitudes for u in eigenbasis(spec)], rng
    )
    k, _ = sample_and_collapse(collapsed, range(spec.n), rng)
    r = verify_order(spec.y, spec.N, k, spec.n)
    return OrderResult(
        measured_k=k,
        verified_order=r,
        failed=r is None,
        index_distribution=dist,
        target_label=label,
        final_state=result.final_state,
        seed=seed if isinstance(seed, int) else None,
    )
