"""Worked applications: NOT-gate eigenvalue, order finding, quantum counting."""
from .counting import (
    CountingSpec,
    CountingSweep,
    GroverEigenPair,
    count_for_omega,
    counting_closed_forms,
    estimate_count_sweep,
    grover_eigensystem,
    grover_iterate,
    omega_for_count,
    run_counting,
)
from .notgate import not_gate_closed_form, run_not_gate_demo, run_single_phase_demo, sigma_x_eigenstate
from .orderfind import (
    OrderFindingSpec,
    OrderResult,
    conditional_index_distribution,
    mod_mul_unitary,
    multiplicative_order,
    order_eigenstate,
    run_order_finding,
    verify_order,
)
