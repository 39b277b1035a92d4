"""Phase estimation with dynamical phases from delays between gates."""
from .errors import DegenerateQubitError, ModelError, NotUnitaryError, ScheduleInfeasibleError
from .pea import (
    PEAResult,
    PhaseEstimationSpec,
    binary_phase,
    closed_form_success,
    exact_phase_spec,
    initialize,
    inverse_qft,
    kickback_stage,
    qft,
    run_pea,
)
from .qubit_model import DelaySchedule, PhysicalQubit, free_evolution_gate, total_delay
from .scheduler import (
    DelayClass,
    classify_delay,
    matching_delay,
    schedule_for_policy,
    schedule_for_register,
    success_probability,
    worst_case_delay,
)
from .statevec import (
    BlockUnitary,
    Gate2x2,
    OutcomeDistribution,
    StateVector,
    apply_controlled_block,
    apply_diagonal,
    apply_one_qubit,
    fidelity_up_to_global_phase,
    marginal_distribution,
    new_basis_state,
    sample_and_collapse,
)

__version__ = "0.1.0"
