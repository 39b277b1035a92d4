"""Bare two-level qubits and the delays between gate operations.

Energies are angular frequencies with hbar = 1, so a delay ``tau`` imprints
the dimensionless phase ``E * tau`` on a level of energy ``E``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .statevec import Gate2x2


@dataclass(frozen=True)
class PhysicalQubit:
    e0: float
    e1: float

    def __post_init__(self):
        if not (math.isfinite(self.e0) and math.isfinite(self.e1)):
            raise ValueError("qubit energies must be finite")

    @classmethod
    def from_delta(cls, delta: float, e0: float = 0.0) -> "PhysicalQubit":
        return cls(float(e0), float(e0) + float(delta))

    @property
    def delta(self) -> float:
        return self.e1 - self.e0


@dataclass(frozen=True)
class DelaySchedule:
    """Idle times per qubit, as a tuple of delay segments for each qubit.

    Phase estimation uses two segments per index qubit (before and after its
    controlled-unitary); counting uses one segment per controlled-Grover
    repetition on its single index qubit.
    """

    segments: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        segs = tuple(tuple(float(t) for t in seg) for seg in self.segments)
        for j, seg in enumerate(segs):
            for t in seg:
                if not math.isfinite(t) or t < 0:
                    raise ValueError(f"delay {t!r} on qubit {j} must be finite and >= 0")
        object.__setattr__(self, "segments", segs)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[float]]) -> "DelaySchedule":
        pairs = [tuple(p) for p in pairs]
        if any(len(p) != 2 for p in pairs):
            raise ValueError("each qubit needs exactly two delays (before, after)")
        return cls(tuple(pairs))

    @classmethod
    def from_totals(cls, totals: Iterable[float], split: float = 0.5) -> "DelaySchedule":
        """Pairs ``(split * t, (1 - split) * t)`` for each total ``t``."""
        if not 0.0 <= split <= 1.0:
            raise ValueError("split must lie in [0, 1]")
        return cls.from_pairs((split * t, t - split * t) for t in totals)

    @classmethod
    def from_repetitions(cls, taus: Iterable[float]) -> "DelaySchedule":
        return cls((tuple(taus),))

    @classmethod
    def zero(cls, n_qubits: int, segments: int = 2) -> "DelaySchedule":
        return cls(tuple((0.0,) * segments for _ in range(n_qubits)))

    @property
    def n_qubits(self) -> int:
        return len(self.segments)

    def totals(self) -> np.ndarray:
        return np.array([sum(seg) for seg in self.segments])


def free_evolution_gate(q: PhysicalQubit, tau: float) -> Gate2x2:
    """``diag(exp(-i e0 tau), exp(-i e1 tau))``."""
    if tau < 0:
        raise ValueError("delay must be nonnegative")
    return Gate2x2(np.diag([np.exp(-1j * q.e0 * tau), np.exp(-1j * q.e1 * tau)]))


def total_delay(s: DelaySchedule, j: int) -> float:
    if not 0 <= j < s.n_qubits:
        raise IndexError(f"qubit {j} is not in a schedule of {s.n_qubits} qubits")
    return float(math.fsum(s.segments[j]))
