"""Detection metrics over two score series: one IND, one OOD.

OOD is the positive class throughout, and scores are oriented "higher =
more OOD", so a detector classifies a sample positive when its score is >=
some threshold. AUROC is computed exactly from ranks (Mann-Whitney with
ties counted one half), never by trapezoid approximation; the ROC curve is
exposed separately and its step integration agrees with the rank AUROC,
which the tests exploit as a consistency check.

FPR@95 picks the largest threshold whose true-positive rate reaches the
requested level, with no interpolation between operating points, and
reports the false-positive rate there.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import EmptySeries, NonFinite

DEFAULT_TPR_LEVEL = 0.95


def _series(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise EmptySeries(f"{name} score series is empty")
    if not np.isfinite(arr).all():
        bad = int(np.nonzero(~np.isfinite(arr))[0][0])
        raise NonFinite(f"{name} score series has a non-finite value at index {bad}")
    return arr


def auroc(ind, ood) -> float:
    """Probability a random OOD score exceeds a random IND score, ties count 1/2.

    Rank formulation of the Mann-Whitney U statistic: with midranks over the
    pooled series, U = sum(ranks of OOD) - n_ood*(n_ood+1)/2 and AUROC =
    U / (n_ind * n_ood). Exact, and identical to enumerating all pairs.
    """
    x = _series(ind, "ind")
    y = _series(ood, "ood")
    ranks = rankdata(np.concatenate([x, y]), method="average")
    u = ranks[x.size :].sum() - y.size * (y.size + 1) / 2.0
    return float(u / (x.size * y.size))


def fpr_at_tpr(ind, ood, level: float = DEFAULT_TPR_LEVEL) -> tuple[float, float]:
    """False-positive rate at the loosest threshold reaching the TPR level.

    The threshold is the largest score t with fraction(ood >= t) >= level,
    chosen among the OOD scores themselves (no interpolation): the c-th
    largest OOD score where c is the smallest count with c/n_ood >= level.
    Returns (fpr, threshold).
    """
    x = _series(ind, "ind")
    y = _series(ood, "ood")
    if not 0.0 < level <= 1.0:
        raise ValueError(f"level must be in (0, 1], got {level}")
    n_ood = y.size
    counts = np.arange(1, n_ood + 1)
    c = int(counts[np.nonzero(counts / n_ood >= level)[0][0]])
    threshold = float(np.sort(y)[::-1][c - 1])
    fpr = float((x >= threshold).sum() / x.size)
    return fpr, threshold


def roc_curve(ind, ood) -> list[tuple[float, float]]:
    """Step-curve vertices (fpr, tpr), one per distinct score, plus (0, 0).

    Thresholds sweep the distinct pooled scores in descending order; each
    yields the operating point of the ">= t" classifier. The final point is
    always (1, 1). Trapezoid integration of these vertices reproduces
    :func:`auroc` because both resolve ties the same way.
    """
    x = _series(ind, "ind")
    y = _series(ood, "ood")
    points = [(0.0, 0.0)]
    for t in np.unique(np.concatenate([x, y]))[::-1]:
        fpr = float((x >= t).sum() / x.size)
        tpr = float((y >= t).sum() / y.size)
        points.append((fpr, tpr))
    return points


@dataclass(frozen=True)
class EvalReport:
    """The two headline metrics plus the context needed to read them."""

    auroc: float
    fpr_at_95_tpr: float
    n_ind: int
    n_ood: int
    threshold: float

    def to_json_dict(self) -> dict:
        """Stable serialization names used by every emitted report."""
        return {
            "auroc": self.auroc,
            "fpr95": self.fpr_at_95_tpr,
            "n_ind": self.n_ind,
            "n_ood": self.n_ood,
            "threshold": self.threshold,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=False)


def evaluate(ind, ood, level: float = DEFAULT_TPR_LEVEL) -> EvalReport:
    """Bundle AUROC and FPR@level for one IND/OOD score pair."""
    x = _series(ind, "ind")
    y = _series(ood, "ood")
    fpr, threshold = fpr_at_tpr(x, y, level)
    return EvalReport(
        auroc=auroc(x, y),
        fpr_at_95_tpr=fpr,
        n_ind=int(x.size),
        n_ood=int(y.size),
        threshold=threshold,
    )
