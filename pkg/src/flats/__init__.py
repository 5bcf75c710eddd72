"""Feature-space OOD detection via likelihood-ratio scoring.

The flagship score subtracts an auxiliary-corpus neighbor distance from
the usual in-distribution neighbor distance, turning a density estimate
into a likelihood-ratio estimate; everything else here exists to fit,
evaluate, or stress-test that move against the standard baselines.
"""

from .confidence import (
    CONFIDENCE_SCORES,
    d2u_score,
    energy_score,
    mls_score,
    msp_score,
    odin_score,
)
from .density import (
    GaussianModel,
    KnnIndex,
    build_knn_index,
    fit_gaussian,
    gaussian_max_loglik,
    gaussian_max_logliks,
    knn_density,
    knn_score,
    knn_scores,
    lof_score,
    lof_scores,
    maha_score,
    maha_scores,
)
from .errors import (
    BadMagic,
    ClassTooSmall,
    ConfigError,
    DegenerateRadius,
    DimConflict,
    DimMismatch,
    EmptySeries,
    FlatsError,
    IoFailure,
    KTooLarge,
    LengthMismatch,
    MissingRole,
    NonFinite,
    SingularCovariance,
    SizeMismatch,
    ZeroVector,
)
from .manifest import Manifest, load_manifest
from .metrics import EvalReport, auroc, evaluate, fpr_at_tpr, roc_curve
from .packs import (
    FeaturePack,
    LabelPack,
    LogitPack,
    load_feature_pack,
    load_label_pack,
    load_logit_pack,
    peek_pack,
    write_feature_pack,
    write_label_pack,
    write_logit_pack,
)
from .ratio import (
    DEFAULT_ALPHA,
    DEFAULT_K,
    Estimator,
    RatioSpec,
    compose_score,
    flats_score,
    flats_scores,
    setting1_enhance,
    setting2_grid,
)
from .synth import (
    GaussianSpec,
    SynthRun,
    analytic_lr_score,
    brute_force_knn,
    dominance_suite,
    gaussian_log_density,
    neg_ind_density_scorer,
    nested_circle_benchmark,
    nested_gaussian_specs,
    sample,
    splitmix64,
    ump_auroc_check,
    uniform01,
    uniform_circle,
)

__version__ = "0.1.0"
