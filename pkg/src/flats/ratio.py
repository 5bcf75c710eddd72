"""Likelihood-ratio OOD scores: compose an IND energy with an OOD energy.

The core move is one subtraction: with E_in an energy for the training
distribution (higher = less likely under IND) and E_out an energy for an
outlier distribution, E_in(x) - alpha*E_out(x) ranks exactly like a log
likelihood ratio; the partition constants drop out because adding any
constant to either energy shifts every score equally and leaves rankings,
AUROC, and FPR@95 untouched.

The flagship instance plugs in k-NN distances on normalized features:
score against the IND training set minus alpha times the score against an
auxiliary outlier corpus. Two ablation generators reuse the composition:
one enhances an arbitrary baseline series with the aux term, the other
crosses {uniform, maha, knn} estimators for both energies into a 3x3
grid. The uniform estimator stands for "no information" and emits the
constant 0.0; any other constant would rank identically.

Defaults k = 10 and alpha = 0.5 live here and are imported everywhere
else, CLI included.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .density import (
    GaussianModel,
    KnnIndex,
    build_knn_index,
    fit_gaussian,
    knn_score,
    knn_scores,
    maha_scores,
)
from .errors import LengthMismatch, NonFinite
from .packs import FeaturePack, LabelPack

DEFAULT_K = 10
DEFAULT_ALPHA = 0.5

ESTIMATOR_KINDS = ("uniform", "maha", "knn")


def compose_score(e_in: float, e_out: float, alpha: float) -> float:
    """e_in - alpha*e_out, the whole ratio trick in one line."""
    if not (math.isfinite(e_in) and math.isfinite(e_out) and math.isfinite(alpha)):
        raise NonFinite(
            f"compose_score needs finite inputs, got e_in={e_in}, e_out={e_out}, alpha={alpha}"
        )
    return e_in - alpha * e_out


def flats_score(
    ind_index: KnnIndex, aux_index: KnnIndex, query, alpha: float = DEFAULT_ALPHA
) -> float:
    """Neighbor distance to the IND set minus alpha times the aux-set distance.

    At alpha = 0 this is bit-for-bit the plain k-NN score; the aux term
    only ever subtracts, so queries close to the auxiliary corpus get
    pushed up the OOD ranking relative to queries merely far from IND.
    """
    return compose_score(
        knn_score(ind_index, query), knn_score(aux_index, query), alpha
    )


def flats_scores(
    ind_index: KnnIndex, aux_index: KnnIndex, queries, alpha: float = DEFAULT_ALPHA
) -> np.ndarray:
    """Batch :func:`flats_score` over query rows."""
    e_in = knn_scores(ind_index, queries)
    e_out = knn_scores(aux_index, queries)
    if not math.isfinite(alpha):
        raise NonFinite(f"alpha must be finite, got {alpha}")
    return e_in - alpha * e_out


def setting1_enhance(baseline, aux_knn, alpha: float = DEFAULT_ALPHA) -> np.ndarray:
    """Element-wise enhancement of any baseline score series with an aux term.

    baseline_i - alpha*aux_knn_i for every i; the baseline can be any
    score in the "higher = more OOD" orientation (confidence scores
    included), which is what the first ablation sweeps.
    """
    base = np.asarray(baseline, dtype=np.float64).reshape(-1)
    aux = np.asarray(aux_knn, dtype=np.float64).reshape(-1)
    if base.shape[0] != aux.shape[0]:
        raise LengthMismatch(
            f"baseline has {base.shape[0]} scores but aux series has {aux.shape[0]}"
        )
    if not math.isfinite(alpha):
        raise NonFinite(f"alpha must be finite, got {alpha}")
    if not (np.isfinite(base).all() and np.isfinite(aux).all()):
        raise NonFinite("score series contain non-finite values")
    return base - alpha * aux


@dataclass(frozen=True)
class Estimator:
    """One energy estimator: a kind tag plus its fitted artifact.

    kind "uniform" carries no artifact and scores everything 0.0; "maha"
    carries a GaussianModel; "knn" carries a KnnIndex.
    """

    kind: str
    artifact: GaussianModel | KnnIndex | None = None

    def __post_init__(self) -> None:
        if self.kind not in ESTIMATOR_KINDS:
            raise ValueError(f"kind must be one of {ESTIMATOR_KINDS}, got {self.kind!r}")
        if self.kind == "uniform":
            if self.artifact is not None:
                raise ValueError("uniform estimator takes no artifact")
        elif self.kind == "maha":
            if not isinstance(self.artifact, GaussianModel):
                raise ValueError("maha estimator needs a GaussianModel artifact")
        elif not isinstance(self.artifact, KnnIndex):
            raise ValueError("knn estimator needs a KnnIndex artifact")

    def scores(self, queries) -> np.ndarray:
        if self.kind == "uniform":
            n = queries.n_rows if isinstance(queries, FeaturePack) else len(queries)
            return np.zeros(n)
        if self.kind == "maha":
            return maha_scores(self.artifact, queries)
        return knn_scores(self.artifact, queries)


@dataclass(frozen=True)
class RatioSpec:
    """A fully specified composed score: two estimators and the weight."""

    ind_estimator: Estimator
    ood_estimator: Estimator
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self) -> None:
        if not math.isfinite(self.alpha) or self.alpha < 0:
            raise ValueError(f"alpha must be finite and >= 0, got {self.alpha}")

    def scores(self, queries) -> np.ndarray:
        e_in = self.ind_estimator.scores(queries)
        e_out = self.ood_estimator.scores(queries)
        return e_in - self.alpha * e_out


def _pseudo_labels(pack: FeaturePack) -> LabelPack:
    # Aux corpora come unlabeled; a single pseudo-class makes the Gaussian
    # fit use the corpus mean and its own scatter.
    return LabelPack(np.zeros(pack.n_rows, dtype=np.int64))


def setting2_grid(
    ind_train: FeaturePack,
    labels: LabelPack,
    aux: FeaturePack,
    queries: FeaturePack,
    k: int = DEFAULT_K,
    alpha: float = DEFAULT_ALPHA,
) -> dict[str, dict[str, np.ndarray]]:
    """Cross {uniform, maha, knn} estimators for both energies, 3x3 grid.

    Returns grid[ind_kind][ood_kind] = composed score series over the
    queries. IND-side artifacts fit on (ind_train, labels); OOD-side
    artifacts fit on the aux corpus, with Maha-on-aux using one
    pseudo-class since the corpus is unlabeled. The (knn, knn) cell equals
    the flagship score value-for-value; the (uniform, uniform) cell is a
    constant-zero series.
    """
    ind_side = {
        "uniform": Estimator("uniform"),
        "maha": Estimator("maha", fit_gaussian(ind_train, labels)),
        "knn": Estimator("knn", build_knn_index(ind_train, k)),
    }
    ood_side = {
        "uniform": Estimator("uniform"),
        "maha": Estimator("maha", fit_gaussian(aux, _pseudo_labels(aux))),
        "knn": Estimator("knn", build_knn_index(aux, k)),
    }
    ind_scores = {kind: est.scores(queries) for kind, est in ind_side.items()}
    ood_scores = {kind: est.scores(queries) for kind, est in ood_side.items()}
    if not math.isfinite(alpha):
        raise NonFinite(f"alpha must be finite, got {alpha}")
    return {
        ind_kind: {
            ood_kind: ind_scores[ind_kind] - alpha * ood_scores[ood_kind]
            for ood_kind in ESTIMATOR_KINDS
        }
        for ind_kind in ESTIMATOR_KINDS
    }
