"""Leader-following consensus with distributed velocity observers over
switching network topologies: simulation, gain synthesis, and common
Lyapunov certificates with disturbance ultimate bounds."""

from .certificate import (
    CertCheck,
    DecayReport,
    LyapunovCertificate,
    NoisyBoundAnalysis,
    attach_lyapunov,
    certify,
    clf_matrix,
    decay_check,
    decay_matrix,
    decay_witness_matrix,
    lyapunov_value,
    noisy_bound,
)
from .config import ConfigError, ScenarioConfig, config_from_mapping, load_config, preset_paper_example
from .dynamics import (
    ErrorTrajectory,
    LeaderPolicy,
    NoiseModel,
    SimulationDiverged,
    SystemState,
    Trajectory,
    control_input,
    error_coordinates,
    error_system_matrix,
    observer_rate,
    simulate,
    simulate_error_system,
    state_from_error_coordinates,
    step,
)
from .gains import Gains, GainValidation, synthesize_gains, validate_gains
from .spectral import (
    SymmetryError,
    eigenvalues_sym,
    is_positive_definite,
    schur_positive_definite,
    spectral_bounds,
)
from .topology import (
    ScheduleExhausted,
    SwitchingSchedule,
    Topology,
    coupling_matrix,
    is_jointly_connected,
    laplacian,
    segments,
    topology_at,
)
from .waveforms import Constant, Polynomial, Sinusoid, cosine

__version__ = "0.1.0"
