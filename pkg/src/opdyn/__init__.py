"""Information spreading on a multi-layer agent network, modeled with
fermionic mode operators: closed-form Heisenberg dynamics, rule-updated
piecewise dynamics, and a dissipative master-equation engine."""

from .errors import (ConfigError, DimensionError, OpdynError, ParameterError,
                     ValidationError)
from .fock import (CarReport, FockBasisIndex, ModeKind, annihilator, basis_index,
                   check_car, creation, flat_index, number_operator, occupation_of)
from .gksl import (AsymptoteResult, ChannelKind, ChannelSpec, DensityState,
                   LindbladSet, SweepPoint, build_initial_density, build_lindblads,
                   build_single_excitation_density, channel_matrix, find_asymptote,
                   integrate, jump_drift_probabilities, liouvillian_apply,
                   mean_values, sweep)
from .heisenberg import (MeanState, Propagator, Trajectory, evolve_means,
                         global_means, propagator, run_heisenberg)
from .hrho import (DeltaReport, HrhoSchedule, RuleSpec, apply_rule,
                   compute_deltas, run_hrho)
from .model import (NetworkSpec, build_hamiltonian_matrix, build_v_matrix,
                    free_hamiltonian_diagonal, validate_spec)

__version__ = "1.0.0"

__all__ = [
    "AsymptoteResult", "CarReport", "ChannelKind", "ChannelSpec", "ConfigError",
    "DeltaReport", "DensityState", "DimensionError", "FockBasisIndex",
    "HrhoSchedule", "LindbladSet", "MeanState", "ModeKind", "NetworkSpec",
    "OpdynError", "ParameterError", "Propagator", "RuleSpec", "SweepPoint",
    "Trajectory", "ValidationError", "annihilator", "apply_rule", "basis_index",
    "build_hamiltonian_matrix", "build_initial_density", "build_lindblads",
    "build_single_excitation_density", "build_v_matrix", "channel_matrix",
    "check_car", "compute_deltas", "creation", "evolve_means", "find_asymptote",
    "flat_index", "free_hamiltonian_diagonal", "global_means", "integrate",
    "jump_drift_probabilities", "liouvillian_apply", "mean_values",
    "number_operator", "occupation_of", "propagator", "run_heisenberg",
    "run_hrho", "sweep", "validate_spec",
]
