"""Attractive Bose-Hubbard ground states: exact diagonalization,
uniqueness and positivity checks, and sign-free projector Monte Carlo."""

from .eigensolver import SpectrumResult, degeneracy_count, dense_spectrum, lanczos_lowest
from .fock import (
    OccupationBasis,
    RankOneState,
    SectorVector,
    apply_quadratic_exponential,
    enumerate_basis,
    enumerate_two_component_basis,
    matrix_exponential,
    overlap_rank1,
    rank1_matrix_elements,
    rank1_to_vector,
    reflection_state,
)
from .hamiltonian import (
    SparseOperator,
    SpinOperators,
    build_model1_hamiltonian,
    build_model2_hamiltonian,
    build_model2_hamiltonian_full,
    build_projector_factor,
    build_quadratic_operator,
    build_spin_operators,
)
from .lattice import (
    ModelOneSpec,
    ModelTwoSpec,
    ValidationReport,
    build_standard_lattice,
    validate_spec,
)
from .qmc import (
    ProjectionSchedule,
    Walker,
    mixed_energy_estimator,
    propagate_hopping,
    resample_population,
    run_projection,
    sample_interaction,
    trial_state,
)
from .verify import (
    PreconditionError,
    verify_hs_identity,
    verify_nonnegative_hopping_uniqueness,
    verify_quadratic_exponential,
    verify_singlet_overlap,
    verify_split_identity,
    verify_trotter_scaling,
    verify_two_component_ground_state,
    verify_unique_ground_state,
)

__version__ = "0.1.0"
