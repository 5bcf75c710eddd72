"""Distance-based OOD scores that double as density estimators.

Two families live here. The Gaussian family fits per-class means with a
shared covariance and scores a query by its smallest squared Mahalanobis
distance to any class centroid; the same fit yields the maximum class
log-likelihood, and the two are linked by an exact algebraic identity

    maha(x) = -2 * max_loglik(x) - m * ln(2*pi) - ln det(Sigma)

which the test suite checks on random models. The neighbor family stores an
L2-normalized reference set and scores a query by the Euclidean distance to
its k-th nearest reference row; that distance also gives a nonparametric
density estimate

    p(x) ~= k * Gamma((m-1)/2 + 1) / (pi^((m-1)/2) * n * r^(m-1))

for points on the unit sphere in m dimensions. LOF is computed on the same
normalized features.

All scores are oriented "higher = more OOD". Models and indexes are
immutable after construction; scoring is pure and thread-safe. Batch entry
points honor the ``FLATS_THREADS`` environment variable (default 1) and
return results in query order regardless of thread count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (
    ClassTooSmall,
    DegenerateRadius,
    DimMismatch,
    KTooLarge,
    SingularCovariance,
    ZeroVector,
)
from .packs import FeaturePack, LabelPack

_SELF_DISTANCE = 1e-12

DEFAULT_RIDGE = 1e-6


def _as_matrix(data) -> np.ndarray:
    if isinstance(data, FeaturePack):
        return np.asarray(data.values, dtype=np.float64)
    out = np.asarray(data, dtype=np.float64)
    if out.ndim != 2:
        raise DimMismatch(f"expected a 2-D sample matrix, got ndim={out.ndim}")
    return out


def _as_labels(data) -> np.ndarray:
    if isinstance(data, LabelPack):
        return data.labels
    return LabelPack(np.asarray(data)).labels


def _thread_count() -> int:
    raw = os.environ.get("FLATS_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# -- Gaussian model --------------------------------------------------------

@dataclass(frozen=True)
class GaussianModel:
    """Per-class means with one shared covariance, held via its Cholesky factor.

    ``chol`` is the lower-triangular L with L @ L.T == covariance; scoring
    solves against L instead of forming an explicit inverse.
    """

    means: np.ndarray
    covariance: np.ndarray
    chol: np.ndarray
    log_det: float

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    @property
    def n_classes(self) -> int:
        return self.means.shape[0]

    @classmethod
    def from_moments(cls, means, covariance) -> "GaussianModel":
        """Build a model from explicit moments, validating and factorizing."""
        means = np.atleast_2d(np.asarray(means, dtype=np.float64))
        cov = np.atleast_2d(np.asarray(covariance, dtype=np.float64))
        m = means.shape[1]
        if cov.shape != (m, m):
            raise DimMismatch(f"covariance shape {cov.shape} does not match dim {m}")
        sym_gap = np.abs(cov - cov.T).max()
        scale = max(np.abs(cov).max(), 1.0)
        if sym_gap > 1e-9 * scale:
            raise SingularCovariance(f"covariance asymmetric: max |C - C.T| = {sym_gap:g}")
        cov = (cov + cov.T) / 2.0
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            smallest = float(np.linalg.eigvalsh(cov).min())
            raise SingularCovariance(
                f"covariance factorization failed; smallest eigenvalue ~ {smallest:.3e}"
            ) from None
        log_det = 2.0 * float(np.log(np.diag(chol)).sum())
        for arr in (means, cov, chol):
            arr.flags.writeable = False
        return cls(means=means, covariance=cov, chol=chol, log_det=log_det)


def fit_gaussian(features, labels, ridge: float = DEFAULT_RIDGE) -> GaussianModel:
    """Fit class centroids and the pooled within-class covariance.

    Each sample is centered by its class mean; the scatter is averaged over
    all n samples (the maximum-likelihood normalization, not n - K). A ridge
    of ``ridge * trace/m`` is added to the diagonal; when the scatter has
    zero trace the ridge falls back to an absolute ``ridge * I`` so any
    positive ridge still yields an SPD matrix.
    """
    x = _as_matrix(features)
    y = _as_labels(labels)
    if ridge < 0:
        raise ValueError(f"ridge must be >= 0, got {ridge}")
    if y.shape[0] != x.shape[0]:
        raise DimMismatch(f"{x.shape[0]} samples but {y.shape[0]} labels")
    n, m = x.shape
    n_classes = int(y.max()) + 1
    counts = np.bincount(y, minlength=n_classes)
    if counts.min() < 2:
        cls = int(np.argmin(counts))
        raise ClassTooSmall(f"class {cls} has {counts[cls]} samples, need >= 2")

    means = np.zeros((n_classes, m))
    np.add.at(means, y, x)
    means /= counts[:, None]

    centered = x - means[y]
    cov = centered.T @ centered / n
    cov = (cov + cov.T) / 2.0
    if ridge > 0:
        scale = float(np.trace(cov)) / m
        if scale <= 0.0:
            scale = 1.0
        cov[np.diag_indices_from(cov)] += ridge * scale
    return GaussianModel.from_moments(means, cov)


def _maha_all_classes(model: GaussianModel, queries: np.ndarray) -> np.ndarray:
    """Squared Mahalanobis distance to every class mean, shape (n, K)."""
    out = np.empty((queries.shape[0], model.n_classes))
    for c in range(model.n_classes):
        diff = queries - model.means[c]
        w = solve_triangular(model.chol, diff.T, lower=True)
        out[:, c] = np.einsum("ij,ij->j", w, w)
    return out


def _check_query(query, dim: int) -> np.ndarray:
    q = np.asarray(query, dtype=np.float64)
    if q.ndim != 1 or q.shape[0] != dim:
        raise DimMismatch(f"query has shape {q.shape}, model expects ({dim},)")
    return q


def maha_score(model: GaussianModel, query) -> float:
    """Smallest squared Mahalanobis distance from ``query`` to any class centroid."""
    q = _check_query(query, model.dim)
    d = _maha_all_classes(model, q[None, :])
    return float(max(d.min(), 0.0))


def maha_scores(model: GaussianModel, queries) -> np.ndarray:
    """Batch :func:`maha_score` over the rows of ``queries``."""
    x = _as_matrix(queries)
    if x.shape[1] != model.dim:
        raise DimMismatch(f"queries have dim {x.shape[1]}, model expects {model.dim}")
    return np.maximum(_maha_all_classes(model, x).min(axis=1), 0.0)


def gaussian_max_loglik(model: GaussianModel, query) -> float:
    """log-likelihood of ``query`` under its best-fitting class conditional."""
    score = maha_score(model, query)
    m = model.dim
    return -0.5 * score - 0.5 * m * math.log(2.0 * math.pi) - 0.5 * model.log_det


def gaussian_max_logliks(model: GaussianModel, queries) -> np.ndarray:
    scores = maha_scores(model, queries)
    m = model.dim
    return -0.5 * scores - 0.5 * m * math.log(2.0 * math.pi) - 0.5 * model.log_det


# -- k-nearest-neighbor index ----------------------------------------------

def _normalize_rows(matrix: np.ndarray, what: str) -> np.ndarray:
    norms = np.sqrt((matrix**2).sum(axis=1))
    zero = np.nonzero(norms == 0.0)[0]
    if zero.size:
        raise ZeroVector(f"{what}: row {zero[0]} has zero L2 norm")
    return matrix / norms[:, None]


@dataclass(frozen=True)
class KnnIndex:
    """L2-normalized reference rows plus the neighbor count k."""

    reference: np.ndarray
    k: int
    _lof_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n_ref(self) -> int:
        return self.reference.shape[0]

    @property
    def dim(self) -> int:
        return self.reference.shape[1]


def build_knn_index(features, k: int) -> KnnIndex:
    """Normalize the reference rows and freeze them with the neighbor count."""
    x = _as_matrix(features)
    if not 1 <= k <= x.shape[0]:
        raise KTooLarge(f"k={k} outside [1, {x.shape[0]}]")
    ref = _normalize_rows(x, "knn reference")
    ref.flags.writeable = False
    return KnnIndex(reference=ref, k=int(k))


def _normalized_query(index: KnnIndex, query) -> np.ndarray:
    q = np.asarray(query, dtype=np.float64)
    if q.ndim != 1 or q.shape[0] != index.dim:
        raise DimMismatch(f"query has shape {q.shape}, index expects ({index.dim},)")
    norm = float(np.sqrt((q**2).sum()))
    if norm == 0.0:
        raise ZeroVector("query has zero L2 norm")
    return q / norm


def _kth_distance(index: KnnIndex, q: np.ndarray, exclude_self: bool) -> float:
    d = np.sqrt(((index.reference - q) ** 2).sum(axis=1))
    kth = index.k - 1
    if exclude_self and d.min() < _SELF_DISTANCE:
        kth += 1
        if kth >= d.shape[0]:
            raise KTooLarge(f"k={index.k} with self excluded exceeds {d.shape[0]} references")
    part = np.partition(d, kth)
    return float(part[kth])


def knn_score(index: KnnIndex, query, exclude_self: bool = False) -> float:
    """Distance from the normalized query to its k-th nearest reference row.

    Distances sort ascending with ties broken by lower row index; with
    ``exclude_self`` one reference closer than 1e-12 is skipped, for scoring
    training points against their own index. Result lies in [0, 2].
    """
    return _kth_distance(index, _normalized_query(index, query), exclude_self)


def knn_scores(index: KnnIndex, queries, exclude_self: bool = False) -> np.ndarray:
    """Batch :func:`knn_score`; parallel over queries when FLATS_THREADS > 1."""
    x = _as_matrix(queries)
    if x.shape[1] != index.dim:
        raise DimMismatch(f"queries have dim {x.shape[1]}, index expects {index.dim}")
    qs = _normalize_rows(x, "knn queries")
    threads = _thread_count()
    if threads == 1 or qs.shape[0] < 2 * threads:
        return np.array([_kth_distance(index, q, exclude_self) for q in qs])
    with ThreadPoolExecutor(max_workers=threads) as pool:
        out = list(pool.map(lambda q: _kth_distance(index, q, exclude_self), qs))
    return np.array(out)


def knn_density(index: KnnIndex, query, exclude_self: bool = False) -> float:
    """Nonparametric density on the unit (m-1)-sphere from the k-NN radius."""
    m = index.dim
    if m < 2:
        raise DimMismatch(f"density estimate needs dim >= 2, got {m}")
    r = knn_score(index, query, exclude_self)
    if r == 0.0:
        raise DegenerateRadius("k-th neighbor at distance 0; density undefined here")
    half = (m - 1) / 2.0
    log_p = (
        math.log(index.k)
        + math.lgamma(half + 1.0)
        - half * math.log(math.pi)
        - math.log(index.n_ref)
        - (m - 1) * math.log(r)
    )
    return math.exp(log_p)


# -- local outlier factor --------------------------------------------------

def _lof_reference_stats(index: KnnIndex) -> tuple[np.ndarray, np.ndarray]:
    """Per-reference k-distance and local reachability density.

    Within the reference set each point's neighbors exclude the point
    itself, per the standard LOF definition with MinPts = k. Cached on the
    index after the first call; the arrays are deterministic so a racing
    recomputation is harmless.
    """
    cached = index._lof_cache.get("stats")
    if cached is not None:
        return cached
    ref = index.reference
    n = ref.shape[0]
    k = index.k
    if n <= k:
        raise KTooLarge(f"LOF needs n_ref > k, got n_ref={n}, k={k}")

    k_dist = np.empty(n)
    neighbors: list[np.ndarray] = []
    neighbor_dists: list[np.ndarray] = []
    for i in range(n):
        d = np.sqrt(((ref - ref[i]) ** 2).sum(axis=1))
        d[i] = np.inf  # self is not its own neighbor
        kd = float(np.partition(d, k - 1)[k - 1])
        k_dist[i] = kd
        nb = np.nonzero(d <= kd)[0]
        neighbors.append(nb)
        neighbor_dists.append(d[nb])

    lrd = np.empty(n)
    for i in range(n):
        reach = np.maximum(k_dist[neighbors[i]], neighbor_dists[i])
        lrd[i] = 1.0 / reach.mean()
    stats = (k_dist, lrd)
    index._lof_cache["stats"] = stats
    return stats


def lof_score(index: KnnIndex, query) -> float:
    """Local outlier factor of ``query`` against the reference set, MinPts = k.

    Computed from the textbook quantities: k-distance, reachability
    distance, local reachability density, and the final ratio. Values near 1
    mean the query sits inside a uniform neighborhood; larger means more OOD.
    """
    q = _normalized_query(index, query)
    k_dist, lrd = _lof_reference_stats(index)
    d = np.sqrt(((index.reference - q) ** 2).sum(axis=1))
    kd_q = np.partition(d, index.k - 1)[index.k - 1]
    nb = np.nonzero(d <= kd_q)[0]
    reach = np.maximum(k_dist[nb], d[nb])
    lrd_q = 1.0 / reach.mean()
    return float(lrd[nb].mean() / lrd_q)


def lof_scores(index: KnnIndex, queries) -> np.ndarray:
    """Batch :func:`lof_score` over the rows of ``queries``."""
    x = _as_matrix(queries)
    if x.shape[1] != index.dim:
        raise DimMismatch(f"queries have dim {x.shape[1]}, index expects {index.dim}")
    _lof_reference_stats(index)  # warm the cache once, outside any thread pool
    return np.array([lof_score(index, q) for q in x])
