"""Dataset manifests: a flat JSON object binding pack files to roles.

Known keys:

* role -> path: ``ind_train``, ``ind_test``, ``ood_test`` (required),
  ``aux_ood``, ``logits_ind_test``, ``logits_ood_test``, ``labels_train``
  (optional; required by specific scores).
* ``dim``: declared feature dimension, checked against every feature pack.
* ``k``, ``alpha``: default hyperparameters for runs over this manifest.
* ``provenance``: free-form object recording how the packs were produced.

Unknown keys are ignored with a warning so newer writers stay readable.
Relative paths resolve against the manifest's own directory.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

from .errors import DimConflict, IoFailure, MissingRole
from .packs import peek_pack

REQUIRED_ROLES = ("ind_train", "ind_test", "ood_test")
FEATURE_ROLES = ("ind_train", "ind_test", "ood_test", "aux_ood")
OPTIONAL_ROLES = ("aux_ood", "logits_ind_test", "logits_ood_test", "labels_train")
_KNOWN_KEYS = set(REQUIRED_ROLES) | set(OPTIONAL_ROLES) | {"dim", "k", "alpha", "provenance"}


@dataclass(frozen=True)
class Manifest:
    """Resolved manifest: absolute paths per role plus declared hyperparameters."""

    paths: dict[str, Path]
    dim: int
    k: int | None = None
    alpha: float | None = None

    def path(self, role: str) -> Path:
        if role not in self.paths:
            raise MissingRole(f"manifest has no '{role}' entry")
        return self.paths[role]

    def has(self, role: str) -> bool:
        return role in self.paths


def load_manifest(path: str | Path) -> Manifest:
    """Parse, resolve, and cross-validate a manifest document.

    Checks that the required roles are present, that every referenced file
    exists, and that all feature packs agree on the declared dimension.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise IoFailure(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise IoFailure(f"{path}: manifest must be a JSON object")

    unknown = sorted(set(raw) - _KNOWN_KEYS)
    if unknown:
        warnings.warn(f"{path}: ignoring unknown manifest keys {unknown}", stacklevel=2)

    for role in REQUIRED_ROLES:
        if role not in raw:
            raise MissingRole(f"{path}: required role '{role}' missing")

    base = path.parent
    paths: dict[str, Path] = {}
    for role in REQUIRED_ROLES + OPTIONAL_ROLES:
        if role in raw:
            target = (base / raw[role]).resolve()
            if not target.is_file():
                raise IoFailure(f"{path}: role '{role}' points to missing file {target}")
            paths[role] = target

    # feature packs must agree on dim; labels are one column and logits count
    # classes, so only the feature roles take part in the check
    dims: dict[str, int] = {}
    for role in FEATURE_ROLES:
        if role in paths:
            dims[role] = peek_pack(paths[role])["dim"]
    first_role = next(iter(dims))
    for role, dim in dims.items():
        if dim != dims[first_role]:
            raise DimConflict(
                f"{path}: '{first_role}' ({paths[first_role]}) has dim {dims[first_role]} "
                f"but '{role}' ({paths[role]}) has dim {dim}"
            )

    declared = raw.get("dim")
    if declared is not None and int(declared) != dims[first_role]:
        raise DimConflict(
            f"{path}: manifest declares dim {declared} but '{first_role}' has dim {dims[first_role]}"
        )

    logit_dims = {
        role: peek_pack(paths[role])["dim"]
        for role in ("logits_ind_test", "logits_ood_test")
        if role in paths
    }
    if len(set(logit_dims.values())) > 1:
        detail = ", ".join(f"'{r}' has {d} classes" for r, d in logit_dims.items())
        raise DimConflict(f"{path}: logit packs disagree: {detail}")

    return Manifest(
        paths=paths,
        dim=dims[first_role],
        k=int(raw["k"]) if "k" in raw else None,
        alpha=float(raw["alpha"]) if "alpha" in raw else None,
    )
