"""Output-space OOD scores computed from classifier logits.

Every function takes one logit vector (or a matrix of them, rows =
examples) and returns a scalar (or vector) oriented so that a HIGHER value
means MORE out-of-distribution. That convention lets any score feed the
same evaluation path, but it flips the sign of the familiar definitions:
maximum softmax probability becomes its negation, energy is reported as
-T*logsumexp(logits/T), and so on. Softmax intermediates subtract the max
logit before exponentiating so large logits cannot overflow.

The scalar functions accept any vector with K >= 1 entries; validating
that a logit *file* has at least two classes is the job of the pack
loader, not of these formulas.
"""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp, softmax

from .errors import DimMismatch, NonFinite
from .packs import LogitPack

DEFAULT_ENERGY_T = 1.0
DEFAULT_ODIN_T = 1000.0


def _as_logit_rows(logits) -> tuple[np.ndarray, bool]:
    """Coerce to a 2-D float64 row matrix; second value tells if input was 1-D."""
    if isinstance(logits, LogitPack):
        return np.asarray(logits.values, dtype=np.float64), False
    arr = np.asarray(logits, dtype=np.float64)
    if arr.ndim == 1:
        if arr.shape[0] < 1:
            raise DimMismatch("logit vector is empty")
        arr = arr[None, :]
        single = True
    elif arr.ndim == 2 and arr.shape[1] >= 1:
        single = False
    else:
        raise DimMismatch(f"expected logit rows, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise NonFinite("logits contain a non-finite value")
    return arr, single


def _scalar_or_vector(values: np.ndarray, was_vector: bool):
    return float(values[0]) if was_vector else values


def msp_score(logits):
    """Negated maximum softmax probability."""
    arr, single = _as_logit_rows(logits)
    out = -softmax(arr, axis=1).max(axis=1)
    return _scalar_or_vector(out, single)


def energy_score(logits, temperature: float = DEFAULT_ENERGY_T):
    """Negative free energy, -T * logsumexp(logits / T)."""
    if temperature <= 0:
        raise ValueError(f"temperature must be > 0, got {temperature}")
    arr, single = _as_logit_rows(logits)
    out = -temperature * logsumexp(arr / temperature, axis=1)
    return _scalar_or_vector(out, single)


def mls_score(logits):
    """Negated maximum raw logit."""
    arr, single = _as_logit_rows(logits)
    out = -arr.max(axis=1)
    return _scalar_or_vector(out, single)


def odin_score(logits, temperature: float = DEFAULT_ODIN_T):
    """Negated max softmax probability after temperature scaling.

    This is the temperature half of the original recipe; the input
    perturbation half needs gradients and is out of scope for a
    feature-file pipeline. The high default temperature flattens the
    softmax, which is what separates it from :func:`msp_score`.
    """
    if temperature <= 0:
        raise ValueError(f"temperature must be > 0, got {temperature}")
    arr, single = _as_logit_rows(logits)
    out = -softmax(arr / temperature, axis=1).max(axis=1)
    return _scalar_or_vector(out, single)


def d2u_score(logits):
    """Negated KL divergence from the softmax to the uniform distribution.

    KL(p || u) = ln K - H(p), always >= 0, and 0 exactly when the softmax
    is uniform. In-distribution inputs give peaked softmaxes, hence large
    divergence, hence very negative scores; OOD inputs drift toward 0.
    """
    arr, single = _as_logit_rows(logits)
    k = arr.shape[1]
    p = softmax(arr, axis=1)
    # H(p) via logsumexp-shifted log-probabilities; p*log p with 0*log 0 = 0.
    logp = arr - logsumexp(arr, axis=1, keepdims=True)
    entropy = -(p * logp).sum(axis=1)
    out = -(np.log(k) - entropy)
    return _scalar_or_vector(out, single)


CONFIDENCE_SCORES = {
    "msp": msp_score,
    "energy": energy_score,
    "mls": mls_score,
    "odin": odin_score,
    "d2u": d2u_score,
}
