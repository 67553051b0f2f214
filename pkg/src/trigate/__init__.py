"""Three-qubit gate structure analysis and two-qubit-gate synthesis experiments."""

from .gates import (
    Pair,
    PERMUTATIONS,
    cnot,
    controlled,
    deutsch,
    embed_pair,
    hadamard,
    identity,
    named_gate,
    one_qubit,
    pauli_x,
    pauli_z,
    permute_qubits,
    swap_gate,
    toffoli,
    v_abc,
)
from .linalg import (
    SchmidtDecomposition,
    determinant,
    distance_up_to_phase,
    eigenvalues_unitary,
    haar_unitary,
    is_unitary,
    operator_schmidt_rank,
    operator_schmidt_values,
    partial_trace,
    schmidt_vector,
    tensor,
)
from .structure import (
    ControlledDecomposition,
    ControlledProductForm,
    ObstructionReport,
    controlled_product_form,
    eigen_multiset_match,
    eigen_pair_product_exists,
    find_control_basis,
    is_controlled_computational,
    is_local_product,
    product_state_in_span,
    search_control_basis,
)
from .synth import (
    ParamCircuit,
    SynthesisConfig,
    SynthesisResult,
    build_unitary,
    cost,
    generator_from_gate,
    min_gate_search,
    optimize,
    verify_known_decompositions,
)
from .templates import CircuitTemplate, TemplateClass, canonicalize, enumerate_templates

__version__ = "0.1.0"
