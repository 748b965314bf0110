"""Off-grid sparse Bayesian estimation for Kronecker-structured
measurements: rank-(1,...,1) decomposition, per-dimension EM-based sparse
Bayesian learning with grid refinement, scenario generators, metrics and
a Monte-Carlo benchmark CLI."""

from .baselines import OmpConfig, omp
from .decomposition import (
    DecompositionResult,
    hosvd_rank1,
    recompose,
    recursive_rank1,
)
from .dictionaries import (
    CompressedColumns,
    ParamGrid,
    SteeringColumns,
    build_dictionary,
    init_uniform_grid,
    steering_column,
    uniform_grid,
)
from .dsbl import (
    DsblResult,
    reconstruct_irs_channel,
    reconstruct_kron_estimate,
    run_dsbl,
)
from .metrics import (
    angle_mse,
    channel_nmse,
    nmse,
    residual_energy,
    srr,
    success_probability,
    support_indices,
)
from .offsbl import (
    SblConfig,
    SblResult,
    SblState,
    compute_posterior,
    coordinate_objective,
    extract_estimates,
    g_value,
    grid_sweep,
    line_search_1d,
    negative_log_likelihood,
    prune,
    run_offsbl,
    run_sbl_dictionary,
    update_gamma,
    update_noise,
)
from .scenarios import (
    GroundTruth,
    IrsScenario,
    add_noise_at_snr,
    gen_irs_scene,
    gen_kron_sparse,
    gen_offgrid_scene,
    gen_worst_case,
)
from .tensor_core import (
    ComplexTensor,
    from_kron_vector,
    kron_vectors,
    leading_singular_pair,
    mode_matricize,
    mode_vector_product,
)

__version__ = "0.1.0"
