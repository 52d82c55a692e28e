"""Lossless two-photon micromaser simulator."""

__version__ = "0.1.0"

from .errors import ConfigError, ConsistencyError, InvalidParameterError
from .fock import (
    DensityMatrix,
    FieldDiagnostics,
    dephased_coherent_state,
    diagnostics,
    ensure_headroom,
    fock_state,
    photon_distribution,
    thermal_state,
    truncate,
)
from .kick import (
    AtomPreparation,
    InteractionParams,
    RabiCoefficients,
    apply_kick,
    apply_kicks,
    intra_transit_trace,
    joint_unitary_oracle,
    rabi_coefficients,
    trace_distance,
)
from .quasiprob import QuasiprobGrid, displaced_number_overlap, quasiprob_grid, quasiprob_value
from .experiments import (
    EvolutionRecord,
    ExperimentConfig,
    detect_saturation,
    evolve_and_record,
    find_optimum_time,
    sweep_interaction_time,
)
