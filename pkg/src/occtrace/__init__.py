"""Host-based anomaly detection on system-call traces.

Pipeline: fixed-window vectorization of traces, projection onto the
eigenbasis of the training window scatter, and a one-class classifier that
combines a learned target-class probability with a Gaussian reference
density to recover the target log density, thresholded at a calibrated
rejection rate.
"""

__version__ = "0.1.0"

from .base import PROB_EPS, clamp_probability
from .eigen import (
    EigenModel,
    EigentraceProjector,
    fit_eigenmodel,
    symmetric_eigendecomposition,
)
from .errors import (
    DatasetError,
    DimensionError,
    ModelFormatError,
    NonConvergenceError,
    NonSymmetricError,
    NotEnoughDataError,
    NotFittedError,
    PipelineError,
    ProbabilityRangeError,
    SingleClassError,
    TraceParseError,
)
from .estimators import (
    ForestEstimator,
    GmmModel,
    ProbabilityEstimator,
    RbfnEstimator,
    fit_gmm_em,
    forest_class_probability,
    kmeans_cluster,
    rbf_activation,
    resolve_split_features,
    shared_width,
    tree_class_probability,
)
from .metrics import (
    ConfusionMatrix,
    MetricsReport,
    build_confusion,
    compute_metrics,
    roc_auc,
    single_point_auc,
)
from .model_io import DetectorModel, load_model, save_model
from .occ import (
    DEFAULT_TRR_GRID,
    OccConfig,
    OccModel,
    OccScore,
    OneClassBayesClassifier,
    ReferenceDistribution,
    TrainingReport,
    calibrate_threshold,
    combine_bayes,
    fit_reference,
    reference_log_density,
    sample_artificial,
    sweep_trr,
    train_occ,
)
from .traces import (
    Dataset,
    Label,
    Role,
    SynthConfig,
    SyscallTrace,
    format_trace,
    generate_synthetic_dataset,
    load_dataset,
    parse_trace_file,
    save_dataset_flat,
)
from .windows import (
    WindowConfig,
    WindowMatrix,
    build_matrix,
    window_count,
    window_dataset,
    window_trace,
)

__all__ = [name for name in dir() if not name.startswith("_")]
