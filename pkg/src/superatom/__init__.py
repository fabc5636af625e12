"""Dissipative adiabatic-passage simulator for blockaded three-level ensembles."""

from .algebra import (
    DimensionError,
    check_density_matrix,
    check_state_vector,
    expectation,
    ground_product_state,
    kron_embed,
    op_apply,
)
from .analysis import (
    adiabaticity_margin,
    collective_coherent_evolve,
    dark_state_decomposition,
    excitation_linewidth,
    jx_zero_overlap,
    rydberg_projector,
    steady_state_ground_population,
    superatom_excitation_estimate,
)
from .mcwf import (
    JumpEvent,
    TrajectoryRecord,
    average_trajectories,
    effective_hamiltonian,
    evolve_trajectory,
)
from .mesolve import (
    IntegrationError,
    IntegratorSettings,
    MasterEquationResult,
    ObservableSeries,
    integrate,
    lindblad_rhs,
    single_excitation_mixture,
    single_excitation_mixture_overlap,
)
from .model import (
    InteractionSpec,
    JumpChannel,
    ModelConfig,
    PulseParams,
    RateSet,
    SuperatomModel,
    build_hamiltonian,
    build_jump_channels,
    default_uniform_shift,
    interaction_matrix,
    pulse_envelope,
)

__version__ = "0.1.0"
