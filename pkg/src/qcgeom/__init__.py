"""Quantum geometry and capacity analysis of layered parametrized circuits."""

__version__ = "0.1.0"

from .circuits import (
    CircuitFamily,
    CircuitTemplate,
    RotationScheme,
    Topology,
    batch_tangent_states,
    build_template,
    entangler_pairs,
    prepare_state,
    rotations_per_layer,
    sample_parameters,
    state_and_tangent_matrix,
    tangent_state,
    template_from_json,
    template_to_json,
)
from .errors import ConfigError, NumericalGuardError
from .qfi import (
    CapacityReport,
    MeasurementCosts,
    Spectrum,
    SpectrumStats,
    capacity_report,
    compute_qfi,
    effective_dimension,
    eigendecompose,
    max_parameter_dimension,
    measurement_costs,
    parameter_dimension,
    parameter_dimension_samples,
    predict_transition_depth,
    qfi_from_tangents,
    redundancy,
    spectrum_stats,
)
from .statevector import (
    GateKind,
    PauliString,
    StateVector,
    apply_entangler,
    apply_pauli_string,
    apply_rotation,
    apply_sqrt_hadamard,
    init_zero_state,
    inner_product,
)
from .config import ExperimentConfig, config_from_dict, config_from_file, config_from_json
from .experiments import run_experiment
from .pruning import (
    LayerCompaction,
    PruneLog,
    layer_compaction_report,
    prune,
    render_slot_grid,
    verify_prune,
)
from .vqa import (
    ASweepRow,
    EnsembleExperiment,
    EnsembleStats,
    Hamiltonian,
    a_sweep,
    apply_hamiltonian,
    build_ising,
    build_zz,
    energy,
    ensemble_value,
    ensemble_variance,
    expectation,
    gradient,
    gradient_component,
    natural_gradient,
    qng_component,
)
