"""Manifest loading: role resolution, dim agreement, forward compatibility."""

import json

import numpy as np
import pytest

from flats.errors import DimConflict, IoFailure, MissingRole
from flats.manifest import load_manifest
from flats.packs import (
    FeaturePack,
    LabelPack,
    LogitPack,
    write_feature_pack,
    write_label_pack,
    write_logit_pack,
)


def write_dataset(root, dim=3, with_optional=False, n=6):
    rng = np.random.default_rng(42)
    entries = {}
    for role in ("ind_train", "ind_test", "ood_test"):
        name = f"{role}.flts"
        write_feature_pack(
            FeaturePack(rng.standard_normal((n, dim)).astype(np.float32)), root / name
        )
        entries[role] = name
    if with_optional:
        write_feature_pack(
            FeaturePack(rng.standard_normal((n, dim)).astype(np.float32)),
            root / "aux.flts",
        )
        entries["aux_ood"] = "aux.flts"
        for role in ("logits_ind_test", "logits_ood_test"):
            name = f"{role}.fltg"
            write_logit_pack(
                LogitPack(rng.standard_normal((n, 4)).astype(np.float32)), root / name
            )
            entries[role] = name
        write_label_pack(LabelPack(np.arange(n) % 2), root / "y.fltl")
        entries["labels_train"] = "y.fltl"
    return entries


def write_manifest(root, entries, name="m.json"):
    path = root / name
    path.write_text(json.dumps(entries, indent=1))
    return path


class TestLoading:
    def test_required_roles_resolve(self, tmp_path):
        entries = write_dataset(tmp_path)
        man = load_manifest(write_manifest(tmp_path, entries))
        assert man.dim == 3
        assert man.path("ind_train").is_file()
        assert man.has("ind_test") and not man.has("aux_ood")
        with pytest.raises(MissingRole, match="aux_ood"):
            man.path("aux_ood")

    def test_optional_roles(self, tmp_path):
        entries = write_dataset(tmp_path, with_optional=True)
        man = load_manifest(write_manifest(tmp_path, entries))
        for role in entries:
            assert man.has(role)

    def test_hyperparameters_parsed(self, tmp_path):
        entries = write_dataset(tmp_path)
        entries.update({"k": 5, "alpha": 0.25, "dim": 3})
        man = load_manifest(write_manifest(tmp_path, entries))
        assert man.k == 5 and man.alpha == 0.25

    def test_hyperparameters_default_none(self, tmp_path):
        entries = write_dataset(tmp_path)
        man = load_manifest(write_manifest(tmp_path, entries))
        assert man.k is None and man.alpha is None

    def test_relative_paths_resolve_against_manifest_dir(self, tmp_path):
        packs = tmp_path / "packs"
        packs.mkdir()
        entries = write_dataset(packs)
        sub = tmp_path / "runs"
        sub.mkdir()
        moved = {role: f"../packs/{name}" for role, name in entries.items()}
        man = load_manifest(write_manifest(sub, moved))
        assert man.path("ind_train") == (packs / "ind_train.flts").resolve()

    def test_unknown_keys_warn_but_load(self, tmp_path):
        entries = write_dataset(tmp_path)
        entries["favourite_color"] = "green"
        with pytest.warns(UserWarning, match="favourite_color"):
            man = load_manifest(write_manifest(tmp_path, entries))
        assert man.dim == 3

    def test_provenance_key_accepted_silently(self, tmp_path):
        import warnings

        entries = write_dataset(tmp_path)
        entries["provenance"] = {"tool": "by-hand", "note": "fixture"}
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            load_manifest(write_manifest(tmp_path, entries))


class TestValidation:
    def test_missing_required_role(self, tmp_path):
        entries = write_dataset(tmp_path)
        del entries["ood_test"]
        with pytest.raises(MissingRole, match="ood_test"):
            load_manifest(write_manifest(tmp_path, entries))

    def test_missing_file(self, tmp_path):
        entries = write_dataset(tmp_path)
        entries["ind_test"] = "gone.flts"
        with pytest.raises(IoFailure, match="ind_test"):
            load_manifest(write_manifest(tmp_path, entries))

    def test_feature_dim_conflict_names_both(self, tmp_path):
        entries = write_dataset(tmp_path)
        rng = np.random.default_rng(0)
        write_feature_pack(
            FeaturePack(rng.standard_normal((4, 5)).astype(np.float32)),
            tmp_path / "wide.flts",
        )
        entries["ood_test"] = "wide.flts"
        with pytest.raises(DimConflict, match="dim 3.*dim 5"):
            load_manifest(write_manifest(tmp_path, entries))

    def test_declared_dim_conflict(self, tmp_path):
        entries = write_dataset(tmp_path)
        entries["dim"] = 8
        with pytest.raises(DimConflict, match="declares dim 8"):
            load_manifest(write_manifest(tmp_path, entries))

    def test_logit_class_count_conflict(self, tmp_path):
        entries = write_dataset(tmp_path, with_optional=True)
        rng = np.random.default_rng(1)
        write_logit_pack(
            LogitPack(rng.standard_normal((6, 7)).astype(np.float32)),
            tmp_path / "odd.fltg",
        )
        entries["logits_ood_test"] = "odd.fltg"
        with pytest.raises(DimConflict, match="logit packs disagree"):
            load_manifest(write_manifest(tmp_path, entries))

    def test_labels_and_logits_exempt_from_feature_dim_check(self, tmp_path):
        # labels are one column and logits have K columns; neither is dim 3
        entries = write_dataset(tmp_path, with_optional=True)
        man = load_manifest(write_manifest(tmp_path, entries))
        assert man.dim == 3

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(IoFailure, match="not valid JSON"):
            load_manifest(path)

    def test_non_object_json(self, tmp_path):
        path = tmp_path / "arr.json"
        path.write_text("[1, 2, 3]")
        with pytest.raises(IoFailure, match="JSON object"):
            load_manifest(path)


def test_manifest_schema_accepts_valid_document(tmp_path):
    import jsonschema
    from pathlib import Path

    entries = write_dataset(tmp_path, with_optional=True)
    entries.update({"dim": 3, "k": 10, "alpha": 0.5})
    schema = json.loads(
        (Path(__file__).resolve().parent.parent / "schemas" / "manifest.schema.json").read_text()
    )
    jsonschema.validate(entries, schema)
    bad = dict(entries)
    del bad["ind_train"]
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(bad, schema)
