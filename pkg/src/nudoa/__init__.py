"""Non-iterative two-phase subspace DOA estimation under nonuniform noise."""
from .array_model import (
    ArrayGeometry,
    NoiseProfile,
    SourceSet,
    population_covariance,
    signal_power_for_snr,
    snr_of,
    steering_matrix,
    steering_vector,
    wnpr,
)
from .estimator import (
    ALL_METHODS,
    DoaEstimate,
    GridSpec,
    Method,
    NoiseCovEstimate,
    NoiseSubspace,
    Pseudospectrum,
    build_qnun,
    classical_noise_subspace,
    estimate_common_power,
    estimate_doa,
    estimate_noise_cov,
    find_peaks,
    music_pseudospectrum,
    phase1_noise_subspace,
    phase2_from_phase1,
    phase2_noise_subspace,
    smallest_diag_index,
    strip_diagonal,
)
from .harness import (
    RandomNoiseSpec,
    ScenarioConfig,
    SweepResult,
    TrialResult,
    random_q_experiment,
    run_trial,
    sweep_snr,
)
from .config import ConfigError, example1_config, example2_config, load_config
from .hermitian_linalg import EigenPairs, eigh, generalized_eigh, orthonormalize
from .snapshots import RngSeed, generate_snapshots, sample_covariance

__version__ = "0.1.0"
