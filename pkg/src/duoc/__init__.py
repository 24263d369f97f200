"""duoc: dits, anti-dits, and the composites they form.

A small operational model in which every elementary system is classical
in isolation, yet composites of the two kinds support entangled states,
purification of classical mixtures, and measurement statistics that
violate a CHSH bound once two copies are regrouped.
"""

from .dynamics import (
    ClassicalChannel,
    ConditionalEvolutionSpec,
    ReversibleSpec,
    apply_reversible,
    build_reversible,
    choi_matrix,
    classical_channel_map,
    conditional_evolution,
    validate_transformation,
)
from .effects import (
    Effect,
    Povm,
    born_probabilities,
    classical_povm,
    conditional_state,
    unit_effect,
    validate_effect,
    witness_povm,
    worst_case_no_probability,
)
from .errors import (
    AssertionFailure,
    DegenerateInputError,
    DensityMatrixError,
    DomainError,
    DuocError,
    NormalizationError,
    NotClassicalError,
    NotEntangledError,
    ParseError,
    ScriptError,
    ShapeError,
    ValidityError,
)
from .nonlocality import (
    ActivationSetup,
    ChshResult,
    LocalBasis,
    PairedBasis,
    activation_F,
    activation_setup,
    chsh_value,
    optimal_chsh_bases,
    p_quantum,
    phi_vector,
    regroup_check,
    side_effect,
    side_povm,
    two_copy_distribution,
    two_copy_state,
)
from .states import (
    DensityState,
    PureStateSpec,
    SeparableSpec,
    ValidityReport,
    basis_state_spec,
    build_pure_state,
    build_separable,
    certificate_matches,
    is_entangled,
    marginal_state,
    purify_classical_state,
    span_dimensions,
    validate_mixed_state,
    validate_pure_state,
)
from .systems import (
    MAX_COMPOSITE_DIM,
    FactorPermutation,
    SystemSignature,
    parity_projector,
    phase_matrix,
    sector_of_basis_pair,
    shift_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "ActivationSetup",
    "AssertionFailure",
    "ChshResult",
    "ClassicalChannel",
    "ConditionalEvolutionSpec",
    "DegenerateInputError",
    "DensityMatrixError",
    "DensityState",
    "DomainError",
    "DuocError",
    "Effect",
    "FactorPermutation",
    "LocalBasis",
    "MAX_COMPOSITE_DIM",
    "NormalizationError",
    "NotClassicalError",
    "NotEntangledError",
    "PairedBasis",
    "ParseError",
    "Povm",
    "PureStateSpec",
    "ReversibleSpec",
    "ScriptError",
    "SeparableSpec",
    "ShapeError",
    "SystemSignature",
    "ValidityError",
    "ValidityReport",
    "activation_F",
    "activation_setup",
    "apply_reversible",
    "basis_state_spec",
    "born_probabilities",
    "build_pure_state",
    "build_reversible",
    "build_separable",
    "certificate_matches",
    "choi_matrix",
    "chsh_value",
    "classical_channel_map",
    "classical_povm",
    "conditional_evolution",
    "conditional_state",
    "is_entangled",
    "marginal_state",
    "optimal_chsh_bases",
    "p_quantum",
    "parity_projector",
    "phase_matrix",
    "phi_vector",
    "purify_classical_state",
    "regroup_check",
    "sector_of_basis_pair",
    "shift_matrix",
    "side_effect",
    "side_povm",
    "span_dimensions",
    "two_copy_distribution",
    "two_copy_state",
    "unit_effect",
    "validate_effect",
    "validate_mixed_state",
    "validate_pure_state",
    "validate_transformation",
    "witness_povm",
    "worst_case_no_probability",
    "__version__",
]
