from .baselines import RandomSampleConfig, random_sample, random_sample_indices
from .benchmark import (
    BenchmarkConfig,
    BenchmarkResult,
    BenchmarkSuite,
    benchmark_suite,
    rand_ratio_grid,
    sweep_configs,
)
from .config import DEFAULT_SETTINGS, Settings
from .data_io import (
    load_csv,
    load_model,
    read_indices,
    save_model,
    write_dataset_csv,
    write_indices,
    write_report,
)
from .data_schema import Dataset, IndexSet, Label, LabelVector
from .density import (
    BoundarySet,
    DensityVector,
    boundary_points,
    density_quantile_threshold,
    empirical_density,
    level_set_classify,
    level_set_predict,
)
from .evaluation import (
    ConfusionCounts,
    Pipeline,
    PipelineConfig,
    RunReport,
    evaluate_pipeline,
    mcc,
)
from .exceptions import (
    ConvergenceError,
    DataFormatError,
    DegenerateDataError,
    GramMatrixTooLargeError,
    PipelineStageError,
    PrefilterError,
    RapidSvddError,
    SopInstanceTooLargeError,
)
from .kernel import (
    GammaRule,
    GramMatrix,
    KernelSpec,
    bandwidth_modified_mean,
    bandwidth_scott,
    gaussian_kernel,
    gram_matrix,
)
from .prefilter import PrefilterResult, prefilter
from .rapid import (
    RapidSampler,
    RapidTrace,
    ThetaMinScope,
    rapid_sample,
    rapid_sample_traced,
)
from .solutions import SampleSelection
from .sop import SopCpSatSolver, SopSolution, check_feasible, solve_sop_exact
from .svdd import Prediction, SvddModel, SvddTrainer, predict, predict_batch, train_svdd
from .synthetic import MixtureConfig, generate_mixture

__all__ = [
    "Dataset",
    "LabelVector",
    "Label",
    "IndexSet",
    "load_csv",
    "write_report",
    "write_dataset_csv",
    "write_indices",
    "read_indices",
    "save_model",
    "load_model",
    "KernelSpec",
    "GramMatrix",
    "GammaRule",
    "gaussian_kernel",
    "gram_matrix",
    "bandwidth_scott",
    "bandwidth_modified_mean",
    "DensityVector",
    "BoundarySet",
    "empirical_density",
    "level_set_classify",
    "level_set_predict",
    "density_quantile_threshold",
    "boundary_points",
    "PrefilterResult",
    "prefilter",
    "SampleSelection",
    "RapidSampler",
    "RapidTrace",
    "ThetaMinScope",
    "rapid_sample",
    "rapid_sample_traced",
    "SopSolution",
    "SopCpSatSolver",
    "check_feasible",
    "solve_sop_exact",
    "SvddModel",
    "SvddTrainer",
    "Prediction",
    "train_svdd",
    "predict",
    "predict_batch",
    "RandomSampleConfig",
    "random_sample",
    "random_sample_indices",
    "MixtureConfig",
    "generate_mixture",
    "ConfusionCounts",
    "RunReport",
    "Pipeline",
    "PipelineConfig",
    "mcc",
    "evaluate_pipeline",
    "BenchmarkConfig",
    "BenchmarkSuite",
    "BenchmarkResult",
    "benchmark_suite",
    "sweep_configs",
    "rand_ratio_grid",
    "Settings",
    "DEFAULT_SETTINGS",
    "RapidSvddError",
    "DataFormatError",
    "DegenerateDataError",
    "GramMatrixTooLargeError",
    "PrefilterError",
    "SopInstanceTooLargeError",
    "ConvergenceError",
    "PipelineStageError",
]
