"""Closed-form delay analysis and matched-schedule synthesis."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DegenerateQubitError, ScheduleInfeasibleError
from .qubit_model import DelaySchedule, PhysicalQubit

CLASSIFY_ATOL = 1e-9

MATCHED = "matched"
WORST_CASE = "worst_case"
INTERMEDIATE = "intermediate"


@dataclass(frozen=True)
class DelayClass:
    kind: str
    success_probability: float


def success_probability(delta: float, tau: float) -> float:
    """Probability that a delayed index qubit still reads its ideal bit."""
    return 0.5 * (1.0 + math.cos(delta * tau))


def classify_delay(delta: float, tau: float) -> DelayClass:
    c = math.cos(delta * tau)
    p = 0.5 * (1.0 + c)
    if abs(c - 1.0) < CLASSIFY_ATOL:
        return DelayClass(MATCHED, p)
    if abs(c + 1.0) < CLASSIFY_ATOL:
        return DelayClass(WORST_CASE, p)
    return DelayClass(INTERMEDIATE, p)


def _period_check(delta: float, l: int) -> None:
    if delta == 0:
        raise DegenerateQubitError(
            "qubit has zero splitting: every delay is harmless and there is no finite period"
        )
    if int(l) != l or l < 0:
        raise ValueError(f"l must be a nonnegative integer, got {l!r}")


def matching_delay(delta: float, l: int = 0) -> float:
    """Total delay ``2 (l + 1) pi / |delta|``; the readout is unaffected."""
    _period_check(delta, l)
    return 2.0 * (int(l) + 1) * math.pi / abs(delta)


def worst_case_delay(delta: float, l: int = 0) -> float:
    """Total delay ``(2 l + 1) pi / |delta|``; the readout bit flips."""
    _period_check(delta, l)
    return (2.0 * int(l) + 1.0) * math.pi / abs(delta)


def _per_qubit(value, n: int, name: str) -> list:
    if isinstance(value, (int, float)):
        return [value] * n
    value = list(value)
    if len(value) != n:
        raise ValueError(f"{name} has {len(value)} entries for {n} qubits")
    return value


def schedule_for_register(
    qubits: Sequence[PhysicalQubit],
    min_total_delay: float | Sequence[float] = 0.0,
    segment_minima: Sequence[float] | Sequence[Sequence[float]] | None = None,
    l_max: int = 10_000,
) -> DelaySchedule:
    """Smallest matched total delay per qubit that respects the latency floor.

    ``min_total_delay`` is a scalar or one value per qubit. ``segment_minima``
    is a ``(before, after)`` pair shared by all qubits, or one pair per
    qubit. The matched total is split as ``(before_min, rest)``.
    """
    n = len(qubits)
    floors = _per_qubit(min_total_delay, n, "min_total_delay")
    if segment_minima is None:
        minima = [(0.0, 0.0)] * n
    elif len(segment_minima) == 2 and all(isinstance(x, (int, float)) for x in segment_minima):
        minima = [tuple(segment_minima)] * n
    else:
        minima = [tuple(m) for m in _per_qubit(segment_minima, n, "segment_minima")]

    pairs = []
    for j, (q, floor, (m1, m2)) in enumerate(zip(qubits, floors, minima)):
        if floor < 0 or m1 < 0 or m2 < 0:
            raise ValueError(f"qubit {j}: delay constraints must be nonnegative")
        if q.delta == 0:
            raise DegenerateQubitError(f"qubit {j} has zero splitting")
        need = max(floor, m1 + m2)
        period = 2.0 * math.pi / abs(q.delta)
        l = max(0, math.ceil(need / period - 1.0 - 1e-12))
        tau = matching_delay(q.delta, l)
        while tau < need:
            l += 1
            tau = matching_delay(q.delta, l)
        if l > l_max:
            raise ScheduleInfeasibleError(
                f"qubit {j}: no matched delay >= {need:g} with l <= {l_max}"
            )
        pairs.append((m1, tau - m1))
    return DelaySchedule.from_pairs(pairs)


def schedule_for_policy(
    qubits: Sequence[PhysicalQubit], policy: str, l: int = 0, split: float = 0.5
) -> DelaySchedule:
    """Uniform per-qubit schedule: ``zero``, ``matched`` or ``worst``."""
    if policy == "zero":
        return DelaySchedule.zero(len(qubits))
    if policy == "matched":
        totals = [matching_delay(q.delta, l) for q in qubits]
    elif policy == "worst":
        totals = [worst_case_delay(q.delta, l) for q in qubits]
    else:
        raise ValueError(f"unknown schedule policy {policy!r}")
    return DelaySchedule.from_totals(totals, split)
