"""Exact simulation and verification of bidirectional controlled teleportation
over the 5-qubit channel class, including probabilistic teleportation and the
entanglement-swapping key-agreement application."""

from .bell import (
    BellKind,
    PauliKind,
    Smo,
    bell_state,
    derive_correction_table,
    diff_tables,
    paper_table_1,
    pauli_matrix,
)
from .channel import (
    ChannelSpec,
    ControlReport,
    QubitLayout,
    build_channel_state,
    check_condition,
    collapse_factorization,
    control_report,
    enumerate_valid,
    published_states,
    verify_published_states,
)
from .keyswap import (
    KeyRound,
    agreement_rate_exhaustive,
    channel_key_secure,
    derive_swap_table,
    infer_alice_outcome,
    paper_table_4,
    run_key_round,
)
from .probabilistic import (
    GenBellParams,
    GenFamily,
    ProbChannelSpec,
    ProbResult,
    derive_prob_correction_table,
    matrix_U,
    matrix_U1,
    paper_table_3,
    run_pbcst,
    success_probability,
)
from .protocol import (
    BcstResult,
    Transcript,
    UnknownQubit,
    average_infidelity_without_disclosure,
    run_bcst,
    run_bcst_exhaustive,
)
from .qcore import (
    DensityMatrix,
    SingleQubitBasis,
    StateVector,
    apply_1q,
    apply_2q,
    equal_up_to_global_phase,
    fidelity_pure,
    measure_bell_pair,
    measure_qubit,
    permute_qubits,
    purity,
    reduced_density,
    tensor,
)

__version__ = "0.1.0"
