"""Asymptotic analysis of quantum Markov chains.

Given a quantum operation by its Kraus operators, the package computes
the superoperator spectrum, the attractor space spanned by the
unit-modulus eigenvectors together with its dual basis, the closed-form
asymptotic propagator, invariant and subinvariant states, and the
reduction onto the recurrent subspace. A CLI (``qmchain``) wraps the
pipeline for channel files in a small JSON format.
"""

from .asymptotics import (
    AsymptoticModel,
    asymptotic_state,
    build_model,
    convergence_report,
)
from .attractor import (
    AttractorBasis,
    AttractorEntry,
    StructureEquationReport,
    algebraic_attractor,
    attractor_basis,
    attractor_basis_algebraic,
    attractor_projector,
    dual_basis_rho,
    product_closure_check,
    projector_matrix,
    verify_structure,
)
from .channels import (
    ChannelClassification,
    KrausMap,
    amplitude_damping,
    bit_flip,
    choi_matrix,
    classify,
    depolarizing,
    direct_sum,
    haar_random_unitary,
    identity_channel,
    is_completely_positive,
    iterate,
    phase_damping,
    random_cptni,
    random_cptp,
    random_density,
    random_unitary_channel,
    standard_channel,
    superoperator_matrix,
    unitary_channel,
)
from .errors import (
    DimensionMismatchError,
    PreconditionError,
    QmchainError,
    TheoremViolationError,
)
from .invariants import (
    InvariantStateResult,
    ReducedChannel,
    cesaro_average,
    check_subinvariant,
    find_invariant_state,
    recurrent_subspace,
    reduce_channel,
    refine_fixed_state,
    subinvariant_candidate,
    support_projection,
)
from .operators import (
    HermitianReport,
    devectorize,
    hs_inner,
    hs_norm,
    identity,
    inverse_of_positive,
    matrix_unit,
    positivity_report,
    rho_inner,
    rho_orthonormalize,
    vectorize,
)
from .spectral import (
    PeripheralCluster,
    SpectralData,
    SubspaceBasis,
    eigenspace_basis,
    full_spectrum,
    ker_ran_intersection_dim,
    peripheral_spectrum,
    range_basis,
)

__version__ = "0.1.0"
