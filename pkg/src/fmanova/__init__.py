"""Global and multiple parametric-bootstrap tests for multivariate functional data.

Given k independent groups of p-dimensional curves observed on a shared
grid, the package tests general linear hypotheses H eta(t) = c(t) about the
group mean functions without assuming equal covariance functions across
groups.  Pointwise Hotelling-type statistics are globalized by their
supremum or integral over the grid; critical values come from a Gaussian
parametric bootstrap, and families of hypotheses are tested jointly with
family-wise error calibration that exploits the dependence between blocks.
"""

from .bootstrap import (
    BootstrapReplicates,
    GlobalTestReport,
    bootstrap_replicates,
    draw_bootstrap_group,
    global_pvalue,
    run_global_test,
)
from .contrasts import DesignSpec, build_design, centering_matrix
from .dataset import (
    FunctionalDataset,
    Group,
    TimeGrid,
    apply_scaling,
    load_csv,
    write_csv,
)
from .inference import GlobalHotellingTest, MultipleHotellingTest
from .moments import PointwiseEstimates, group_cov, group_mean, lambda_hat
from .multiplicity import (
    TestReport,
    bonferroni_decisions,
    compute_beta,
    fwer_at,
    multiple_test,
)
from .numerics import empirical_quantile, kronecker, sym_pseudo_inverse
from .simulation import (
    MODEL1_VARIANCES,
    MODEL2_VARIANCES,
    ModelConfig,
    StudyReport,
    StudySpec,
    fourier_basis,
    generate,
    population_means,
    run_study,
    scaling_function,
)
from .stats import HypothesisBlocks, int_stat, pointwise_hotelling, sup_stat

__version__ = "0.1.0"

__all__ = [
    "BootstrapReplicates",
    "DesignSpec",
    "FunctionalDataset",
    "GlobalHotellingTest",
    "GlobalTestReport",
    "Group",
    "HypothesisBlocks",
    "MODEL1_VARIANCES",
    "MODEL2_VARIANCES",
    "ModelConfig",
    "MultipleHotellingTest",
    "PointwiseEstimates",
    "StudyReport",
    "StudySpec",
    "TestReport",
    "TimeGrid",
    "apply_scaling",
    "bonferroni_decisions",
    "bootstrap_replicates",
    "build_design",
    "centering_matrix",
    "compute_beta",
    "draw_bootstrap_group",
    "empirical_quantile",
    "fourier_basis",
    "fwer_at",
    "generate",
    "global_pvalue",
    "group_cov",
    "group_mean",
    "int_stat",
    "kronecker",
    "lambda_hat",
    "load_csv",
    "multiple_test",
    "pointwise_hotelling",
    "population_means",
    "run_global_test",
    "run_study",
    "scaling_function",
    "sup_stat",
    "sym_pseudo_inverse",
    "write_csv",
]
