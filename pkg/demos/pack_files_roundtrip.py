"""
From arrays to files and back: packs, manifests, reports
========================================================

Everything the scoring pipeline consumes lives in three tiny binary
formats (features, logits, labels) plus a JSON manifest naming the role
of each file. This walkthrough writes a dataset to disk, inspects it,
and produces an evaluation report without touching the arrays again.
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from flats import (
    build_knn_index,
    evaluate,
    flats_scores,
    load_manifest,
    nested_circle_benchmark,
    peek_pack,
    write_feature_pack,
)
from flats.packs import load_feature_pack

root = Path(tempfile.mkdtemp(prefix="flats_demo_"))
data = nested_circle_benchmark(seed=7, n_train=600, n_test=150, n_aux=600)

# One .flts file per role; float32 payload, little-endian, magic "FLTS".
entries = {"dim": 2, "k": 10, "alpha": 0.5}
for role, pack in data.items():
    write_feature_pack(pack, root / f"{role}.flts")
    entries[role] = f"{role}.flts"
manifest_path = root / "manifest.json"
manifest_path.write_text(json.dumps(entries, indent=2))

# peek reads just the header: no payload is touched.
print(f"{'file':<16} {'kind':<10} {'rows':>6} {'dim':>4}")
for role in data:
    info = peek_pack(root / f"{role}.flts")
    print(f"{role + '.flts':<16} {info['kind']:<10} {info['n_rows']:>6} {info['dim']:>4}")

# The manifest loader resolves relative paths and cross-checks that every
# feature role agrees on the dimension before anything is scored.
manifest = load_manifest(manifest_path)
print(f"\nmanifest dim={manifest.dim} k={manifest.k} alpha={manifest.alpha}")

ind_index = build_knn_index(load_feature_pack(manifest.path("ind_train")), k=manifest.k)
aux_index = build_knn_index(load_feature_pack(manifest.path("aux_ood")), k=manifest.k)
ind = flats_scores(ind_index, aux_index, load_feature_pack(manifest.path("ind_test")))
ood = flats_scores(ind_index, aux_index, load_feature_pack(manifest.path("ood_test")))

# The report serializes with stable keys, ready for regression diffing.
report = evaluate(ind, ood)
print("\n" + report.to_json())

# Same bytes in, same bytes out: write the inliers again and compare.
write_feature_pack(data["ind_test"], root / "again.flts")
same = (root / "again.flts").read_bytes() == (root / "ind_test.flts").read_bytes()
print(f"re-serialized ind_test byte-identical: {same}")
