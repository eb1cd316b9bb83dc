"""Recognition-aware quality scoring for identity-labeled embeddings.

Generates per-sample quality pseudo-labels from the Wasserstein distance
between within-identity and cross-identity similarity distributions, trains
a small Huber-loss regressor on them, and evaluates any scorer with
FMR/FNMR/EVRC/AOC biometric metrics.
"""

__version__ = "0.1.0"

from .dataset import (
    EmbeddingDataset,
    SamplingConfig,
    SimilarityProfile,
    cosine_similarity,
    derive_seed,
    load_dataset,
    sample_profile,
    save_dataset,
    similarity_profile,
)
from .errors import (
    DegenerateInputError,
    DivergenceError,
    FormatError,
    PairingError,
    SddqError,
    ValidationError,
)
from .labels import (
    QualityLabels,
    exact_raw_quality,
    generate_labels,
    normalize_scores,
    read_labels,
    sampled_raw_quality,
    write_labels,
)
from .recognition_eval import (
    EvrcCurve,
    EvrcPoint,
    PairPool,
    aoc,
    aoc_from_arrays,
    evrc,
    fmr,
    fmr_grid_linear,
    fmr_grid_log,
    fnmr,
    fnmr_diff_oracle,
    fnmr_diff_oracle_all,
    pair_pool,
    read_curve,
    threshold_at_fmr,
    write_curve,
)
from .regressor import (
    ParameterGradients,
    RegressorModel,
    TrainConfig,
    forward,
    huber_loss,
    init_model,
    load_model,
    loss_gradient,
    predict,
    save_model,
    train,
)
from .synth import SynthConfig, SynthTruth, generate, write_truth
from .transport import wasserstein_1d, wasserstein_oracle

__all__ = [
    "EmbeddingDataset",
    "SamplingConfig",
    "SimilarityProfile",
    "cosine_similarity",
    "derive_seed",
    "load_dataset",
    "sample_profile",
    "save_dataset",
    "similarity_profile",
    "SddqError",
    "FormatError",
    "ValidationError",
    "DegenerateInputError",
    "PairingError",
    "DivergenceError",
    "QualityLabels",
    "exact_raw_quality",
    "sampled_raw_quality",
    "normalize_scores",
    "generate_labels",
    "write_labels",
    "read_labels",
    "PairPool",
    "EvrcPoint",
    "EvrcCurve",
    "fmr",
    "fnmr",
    "threshold_at_fmr",
    "pair_pool",
    "evrc",
    "aoc",
    "aoc_from_arrays",
    "fmr_grid_log",
    "fmr_grid_linear",
    "fnmr_diff_oracle",
    "fnmr_diff_oracle_all",
    "write_curve",
    "read_curve",
    "TrainConfig",
    "RegressorModel",
    "ParameterGradients",
    "huber_loss",
    "forward",
    "predict",
    "loss_gradient",
    "init_model",
    "train",
    "save_model",
    "load_model",
    "SynthConfig",
    "SynthTruth",
    "generate",
    "write_truth",
    "wasserstein_1d",
    "wasserstein_oracle",
]
