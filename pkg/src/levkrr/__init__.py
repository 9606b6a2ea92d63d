"""Kernel ridge regression with leverage-score-driven Nystrom sketching."""

from .kernels import (
    KernelSpec,
    eval_kernel,
    kernel_columns,
    kernel_diagonal,
    kernel_matrix,
)
from .sketch import (
    DegenerateSketchError,
    NystromSketch,
    SketchingMatrix,
    apply_regularized_sketch,
    build_sketch,
    sketch_to_dense,
    sketching_matrix,
)
from .leverage import (
    LeverageScores,
    SpectralData,
    approx_ridge_leverage,
    effective_dimension,
    exact_ridge_leverage,
    max_dof,
)
from .sampling import (
    SamplingPlan,
    beta_factor,
    make_distribution,
    sample_with_replacement,
    split_seed,
    sufficient_p,
)
from .regression import (
    GroundTruth,
    KrrModel,
    RiskReport,
    analytic_risk,
    bias_squared,
    krr_fit,
    krr_fit_nystrom,
    monte_carlo_risk,
    variance_term,
)
from .bounds import (
    DeviationCheck,
    TailExperiment,
    bernstein_bound,
    deviation_lambda_max,
    deviation_matrix_check,
    empirical_tail,
    psi_matrix,
)
from .datagen import (
    RegressionDataset,
    SyntheticConfig,
    arcsine_points,
    grid_points,
    load_csv,
    make_f_star,
    save_csv,
    synthesize,
)

__version__ = "0.1.0"
