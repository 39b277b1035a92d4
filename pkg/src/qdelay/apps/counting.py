"""Quantum counting with delays: controlled Grover iterates on one index qubit."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from ..errors import ModelError
from ..qubit_model import PhysicalQubit
from ..scheduler import matching_delay, worst_case_delay
from ..statevec import (
    HADAMARD,
    BlockUnitary,
    StateVector,
    apply_controlled_block,
    apply_diagonal,
    apply_one_qubit,
    marginal_distribution,
    new_basis_state,
)

MAX_TARGET_QUBITS = 6


def solution_mask(f: Callable[[int], bool] | Iterable[int], m: int) -> np.ndarray:
    """Boolean table of ``f`` over ``0..2**m - 1``; ``f`` may be a set of solutions."""
    size = 1 << m
    if callable(f):
        return np.array([bool(f(x)) for x in range(size)])
    mask = np.zeros(size, dtype=bool)
    for x in f:
        if not 0 <= x < size:
            raise ValueError(f"solution {x} outside 0..{size - 1}")
        mask[x] = True
    return mask


def _walsh_hadamard(m: int) -> np.ndarray:
    mat = np.ones((1, 1))
    for _ in range(m):
        mat = np.kron(mat, HADAMARD.matrix.real)
    return mat


def grover_iterate(f, m: int, max_qubits: int = MAX_TARGET_QUBITS) -> BlockUnitary:
    """``G = -A U0 A^-1 Uf`` with ``A`` the Hadamard transform on ``m`` qubits."""
    if not 1 <= m <= max_qubits:
        raise ValueError(f"dense Grover iterate needs 1 <= m <= {max_qubits}, got {m}")
    mask = solution_mask(f, m)
    a = _walsh_hadamard(m)
    u0 = np.eye(1 << m)
    u0[0, 0] = -1.0
    uf = np.diag(np.where(mask, -1.0, 1.0))
    return BlockUnitary.dense(-a @ u0 @ a.T @ uf)


def omega_for_count(l: int, N: int) -> float:
    """Eigenphase fraction with ``exp(2 pi i omega) = 1 - 2 l/N + 2 i sqrt(l/N - (l/N)**2)``."""
    if not 0 <= l <= N:
        raise ValueError(f"solution count {l} outside 0..{N}")
    return math.acos(max(-1.0, min(1.0, 1.0 - 2.0 * l / N))) / (2 * math.pi)


def count_for_omega(omega: float, N: int) -> float:
    return N * math.sin(math.pi * omega) ** 2


@dataclass(frozen=True, eq=False)
class GroverEigenPair:
    omega: float
    psi_plus: StateVector
    psi_minus: StateVector
    c_plus: complex
    c_minus: complex
    residual: float


def grover_eigensystem(f, m: int, l: int | None = None, atol: float = 1e-10) -> GroverEigenPair:
    """Eigenpairs ``G |psi_pm> = exp(+-2 pi i omega) |psi_pm>`` on the solution plane.

    ``psi_pm = (|X1> +- i |X0>) / sqrt(2)`` where ``X1`` (``X0``) is the
    uniform state over solutions (non-solutions). ``c_pm`` are the overlaps
    of the uniform superposition with ``psi_pm``.
    """
    mask = solution_mask(f, m)
    N = 1 << m
    count = int(mask.sum())
    if l is not None and l != count:
        raise ValueError(f"predicate has {count} solutions, not {l}")
    if count in (0, N):
        raise ModelError(f"eigenvectors are undefined for l = {count} of N = {N}")
    x1 = np.where(mask, 1.0, 0.0) / math.sqrt(count)
    x0 = np.where(mask, 0.0, 1.0) / math.sqrt(N - count)
    plus = (x1 + 1j * x0) / math.sqrt(2)
    minus = (x1 - 1j * x0) / math.sqrt(2)
    omega = omega_for_count(count, N)
    g = grover_iterate(mask.nonzero()[0], m).to_dense()
    lam = np.exp(2j * math.pi * omega)
    residual = max(
        float(np.max(np.abs(g @ plus - lam * plus))),
        float(np.max(np.abs(g @ minus - lam.conjugate() * minus))),
    )
    if residual > atol:
        raise ModelError(f"eigen-relation residual {residual:.3g} exceeds {atol:g}")
    uniform = np.full(N, 1 / math.sqrt(N))
    return GroverEigenPair(
        omega=omega,
        psi_plus=StateVector(m, plus),
        psi_minus=StateVector(m, minus),
        c_plus=complex(np.vdot(plus, uniform)),
        c_minus=complex(np.vdot(minus, uniform)),
        residual=residual,
    )


@dataclass(frozen=True)
class CountingSpec:
    m: int
    solutions: tuple[int, ...]
    k: int
    repetition_delays: tuple[float, ...] = ()
    index_qubit: PhysicalQubit = PhysicalQubit(0.0, 0.0)

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("k must be nonnegative")
        delays = tuple(float(t) for t in self.repetition_delays) or (0.0,) * self.k
        if len(delays) != self.k:
            raise ValueError(f"{len(delays)} delays given for k={self.k} repetitions")
        if any(t < 0 for t in delays):
            raise ValueError("delays must be nonnegative")
        object.__setattr__(self, "repetition_delays", delays)
        object.__setattr__(self, "solutions", tuple(sorted(set(int(x) for x in self.solutions))))
        solution_mask(self.solutions, self.m)

    @property
    def total_delay(self) -> float:
        return math.fsum(self.repetition_delays)


def counting_final_state(spec: CountingSpec, drop_global_phase: bool = True) -> StateVector:
    """Index on qubit 0, target on qubits ``1..m``."""
    g = grover_iterate(spec.solutions, spec.m)
    target = list(range(1, spec.m + 1))
    state = new_basis_state(spec.m + 1, 0)
    for q in range(spec.m + 1):
        state = apply_one_qubit(state, q, HADAMARD)
    q = spec.index_qubit
    for tau in spec.repetition_delays:
        if tau:
            if drop_global_phase:
                state = apply_diagonal(state, 0, 0.0, -q.delta * tau)
            else:
                state = apply_diagonal(state, 0, -q.e0 * tau, -q.e1 * tau)
        state = apply_controlled_block(state, 0, target, g, 1)
    return apply_one_qubit(state, 0, HADAMARD)


def run_counting(spec: CountingSpec) -> float:
    """``<sigma_z>`` of the index qubit, ``P(0) - P(1)``, from the simulated state."""
    p = marginal_distribution(counting_final_state(spec), [0]).probabilities
    return float(p[0] - p[1])


def counting_closed_forms(omega: float, k: int, delta_tau: float) -> dict[str, float]:
    """Two analytic forms of the readout.

    ``product`` is the exact average over both eigen-branches,
    ``cos(2 pi k omega) cos(delta tau)``. ``shifted`` is the single-branch
    form ``cos(2 pi k omega - delta tau)``; the two agree when
    ``delta tau`` is a multiple of ``2 pi``.
    """
    a = 2 * math.pi * k * omega
    return {"product": math.cos(a) * math.cos(delta_tau), "shifted": math.cos(a - delta_tau)}


def policy_delays(policy: str, k: int, qubit: PhysicalQubit, l: int = 0) -> tuple[float, ...]:
    if policy == "zero":
        return (0.0,) * k
    if policy == "matched":
        return (matching_delay(qubit.delta, l),) * k
    if policy == "worst":
        return (worst_case_delay(qubit.delta, l),) * k
    raise ValueError(f"unknown schedule policy {policy!r}")


@dataclass(frozen=True, eq=False)
class CountingSweep:
    ks: np.ndarray
    sigma_z: np.ndarray
    omega: float
    rms_residual: float
    count_estimate: int | None
    confident: bool
    N: int
    rows: list[dict] = field(repr=False, default_factory=list)


def fit_omega(ks: Sequence[int], values: Sequence[float], grid: int = 5001) -> tuple[float, float, float]:
    """Least-squares fit of ``cos(2 pi k omega)`` over ``omega in [0, 1/2]``.

    Returns ``(omega, rms, runner_up_rms)`` where the runner-up is the best
    competing local minimum of the grid scan (``inf`` if there is none).
    """
    ks = np.asarray(ks, dtype=float)
    v = np.asarray(values, dtype=float)
    w = np.linspace(0.0, 0.5, grid)
    sse = ((np.cos(2 * np.pi * np.outer(w, ks)) - v) ** 2).sum(axis=1)
    padded = np.concatenate(([np.inf], sse, [np.inf]))
    minima = np.nonzero((padded[1:-1] <= padded[:-2]) & (padded[1:-1] <= padded[2:]))[0]
    minima = minima[np.argsort(sse[minima])]
    best = minima[0]
    step = w[1] - w[0]
    lo, hi = max(0.0, w[best] - step), min(0.5, w[best] + step)

    def cost(x):
        return float(((np.cos(2 * np.pi * ks * x) - v) ** 2).sum())

    opt = minimize_scalar(cost, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    omega, best_sse = (opt.x, opt.fun) if opt.fun <= sse[best] else (w[best], sse[best])
    rivals = [i for i in minima[1:] if abs(i - best) > 2]
    runner = math.sqrt(sse[rivals[0]] / len(ks)) if rivals else math.inf
    return float(omega), math.sqrt(best_sse / len(ks)), runner


def estimate_count_sweep(
    f,
    m: int,
    k_max: int,
    schedule_policy: str = "zero",
    index_qubit: PhysicalQubit = PhysicalQubit(0.0, 1.0),
    fit_tol: float = 1e-3,
) -> CountingSweep:
    """Run ``k = 1..k_max`` and fit ``omega`` assuming the delay-free model.

    The count is only estimated when the fit is tight (rms below
    ``fit_tol``) and no competing minimum comes within ten times that.
    """
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    mask = solution_mask(f, m)
    solutions = tuple(int(x) for x in mask.nonzero()[0])
    ks = np.arange(1, k_max + 1)
    values = np.array([
        run_counting(CountingSpec(m, solutions, int(k), policy_delays(schedule_policy, int(k), index_qubit), index_qubit))
        for k in ks
    ])
    omega, rms, runner = fit_omega(ks, values)
    confident = rms <= fit_tol and runner > 10 * fit_tol
    N = 1 << m
    estimate = int(round(count_for_omega(omega, N))) if confident else None
    rows = [{"k": int(k), "sigma_z": float(s)} for k, s in zip(ks, values)]
    return CountingSweep(ks, values, omega, rms, estimate, confident, N, rows)
