"""Coarse-grained observational entropy on the 1D quasiperiodic (Aubry-Andre) lattice.

Submodules
----------
model     Hamiltonian construction, diagonalization, basis changes.
entropy   Coarse-graining partitions and the entropy functionals.
dynamics  Quench evolution, entropy time series, free-lattice oracle.
analysis  Eigenstate-ensemble statistics, fits, finite-size metrics.
runner    Presets, validation, CSV/JSON emission.
"""

__version__ = "0.1.0"

from .model import (
    DELOCALIZED,
    GOLDEN_RATIO_INVERSE,
    EigenSystem,
    HamiltonianMatrix,
    ModelParams,
    MomentumBasis,
    build_hamiltonian,
    eigendecompose,
    estimate_localization_length,
    kinetic_index_order,
    momentum_basis,
    plane_wave_state,
    site_state,
    to_momentum,
    to_real,
)
from .entropy import (
    CoarseGraining,
    MacrostateDistribution,
    is_rougher,
    macrostate_probs,
    make_block_partition,
    observational_entropy,
    partition_from_blocks,
    shannon_entropy,
    uniform_block_entropy,
)
from .dynamics import (
    BESSEL_MAX_ARG,
    BESSEL_MAX_ORDER,
    EntropySeries,
    QuenchSpec,
    bessel_j,
    bessel_j_sequence,
    bessel_reference_entropy,
    evolve,
    evolve_many,
    quench_entropy_series,
    quench_entropy_table,
)
from .analysis import (
    FitResult,
    FluctuationResult,
    SizeScalingReport,
    SweepPoint,
    SweepResult,
    eigenstate_entropy_table,
    fit_log_slope,
    fluctuation_table,
    mid_spectrum_states,
    normalized_fluctuation,
    phase_averaged_eigen_entropy,
    resolve_mid_count,
    size_scaling_report,
)
from .sampling import phase_sequence, phase_stream
from .runner import ConfigError, ExperimentConfig, config_from_mapping, make_config, run, validate
