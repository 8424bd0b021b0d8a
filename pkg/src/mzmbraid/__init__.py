"""Majorana exchange on a three-site chain: Pauli algebra, imaginary-time evolution,
braiding readout, tomography and lowering onto a post-selected optical pipeline."""

from .pauli import DenseOperator, OperatorSum, PauliString, canonicalize, pauli_sum, to_dense
from .majorana import (
    JWConvention,
    MajoranaOperatorSum,
    jordan_wigner,
    kitaev_hamiltonians,
    spin_hamiltonians,
)
from .ite import (
    AnnihilationError,
    Schedule,
    ScheduleStep,
    braid_schedule,
    eig_hermitian,
    factor_commuting,
    ground_projector,
    ite_apply,
    ite_schedule,
)
from .tomography import BlochVector, ProcessMatrix, process_fidelity, process_tomography
from .braiding import (
    exchange_operator,
    geometric_phase,
    ground_basis_h0,
    noise_immunity_check,
    protection_channel,
)
from .optics import (
    OpticalPipeline,
    Stage,
    braid_pipeline,
    imperfect_dissipation,
    lower,
    simulate_pipeline,
    verify_lowering,
)

__version__ = "0.1.0"
