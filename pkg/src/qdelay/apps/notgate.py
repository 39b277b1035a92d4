"""Estimating the +1/-1 eigenvalue of the NOT gate with a one-qubit index."""
from __future__ import annotations

import math

import numpy as np

from ..pea import PhaseEstimationSpec, diagonal_phase_unitary, run_pea
from ..qubit_model import DelaySchedule, PhysicalQubit
from ..statevec import PAULI_X, BlockUnitary, StateVector

SIGMA_X = BlockUnitary.dense(PAULI_X.matrix)


def sigma_x_eigenstate(sign: int) -> StateVector:
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return StateVector(1, np.array([1.0, sign]) / math.sqrt(2))


def not_gate_spec(sign: int, delta: float, e0: float = 0.0) -> PhaseEstimationSpec:
    return PhaseEstimationSpec(
        n=1,
        target_unitary=SIGMA_X,
        target_state=sigma_x_eigenstate(sign),
        index_qubits=(PhysicalQubit.from_delta(delta, e0),),
        phase_bits=(0,) if sign == 1 else (1,),
    )


def _readout(spec: PhaseEstimationSpec, tau_total: float, split: float) -> tuple[float, float]:
    schedule = DelaySchedule.from_totals([tau_total], split)
    p = run_pea(spec, schedule).index_distribution.probabilities
    return float(p[0]), float(p[1])


def run_not_gate_demo(sign: int, delta: float, tau_total: float, split: float = 0.5, e0: float = 0.0) -> tuple[float, float]:
    """Simulated ``(P0, P1)`` of the index qubit."""
    return _readout(not_gate_spec(sign, delta, e0), tau_total, split)


def run_single_phase_demo(phi: float, delta: float, tau_total: float, split: float = 0.5) -> tuple[float, float]:
    """Same circuit for an arbitrary eigenphase ``phi`` of a diagonal target."""
    spec = PhaseEstimationSpec(
        n=1,
        target_unitary=diagonal_phase_unitary(phi),
        target_state=StateVector(1, [0.0, 1.0]),
        index_qubits=(PhysicalQubit.from_delta(delta),),
    )
    return _readout(spec, tau_total, split)


def not_gate_closed_form(phi: float, delta: float, tau: float) -> tuple[float, float]:
    """``P0 = [1 + cos(phi) cos(delta tau) + sin(phi) sin(delta tau)] / 2``; ``P1 = 1 - P0``."""
    p0 = 0.5 * (1 + math.cos(phi) * math.cos(delta * tau) + math.sin(phi) * math.sin(delta * tau))
    return p0, 1.0 - p0
