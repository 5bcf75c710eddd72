"""Command-line front door: score runs, ablations, synthetic checks, inspection.

Four subcommands, one output discipline: every run emits a single JSON
report (stdout by default, ``--out`` for a file), written atomically via a
temp file and rename so a crashed run never leaves a half-written report.
Key order is fixed by construction, so identical inputs give identical
bytes and CI can diff reports directly.

Exit codes: 0 success, 2 configuration error (bad flags, missing manifest
role, undersized synthetic run), 3 data error (unreadable or inconsistent
pack files). Messages name the manifest role at fault where one exists.

``FLATS_THREADS`` caps internal batch-scoring parallelism; the default of
1 keeps runs single-threaded and bit-reproducible everywhere.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .confidence import (
    DEFAULT_ENERGY_T,
    DEFAULT_ODIN_T,
    d2u_score,
    energy_score,
    mls_score,
    msp_score,
    odin_score,
)
from .density import (
    DEFAULT_RIDGE,
    build_knn_index,
    fit_gaussian,
    knn_scores,
    lof_scores,
    maha_scores,
)
from .errors import ConfigError, FlatsError, MissingRole
from .manifest import load_manifest
from .metrics import evaluate
from .packs import FeaturePack, load_feature_pack, load_label_pack, load_logit_pack, peek_pack
from .ratio import DEFAULT_ALPHA, DEFAULT_K, flats_scores, setting1_enhance, setting2_grid
from .synth import (
    MIN_RUN_SAMPLES,
    SynthRun,
    analytic_lr_score,
    dominance_suite,
    neg_ind_density_scorer,
    nested_gaussian_specs,
    uniform01,
    ump_auroc_check,
)

CONFIDENCE_NAMES = ("msp", "energy", "odin", "d2u", "mls")
FEATURE_NAMES = ("maha", "knn", "lof", "flats")
SCORE_NAMES = CONFIDENCE_NAMES + FEATURE_NAMES


def _emit(report: dict, out: str | None, pretty_lines: list[str] | None = None) -> None:
    text = json.dumps(report, indent=2) + "\n"
    if out is None or out == "-":
        if pretty_lines is None:
            sys.stdout.write(text)
        else:
            sys.stdout.write("\n".join(pretty_lines) + "\n")
        return
    path = Path(out)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    if pretty_lines is not None:
        sys.stdout.write("\n".join(pretty_lines) + "\n")


def _load_role(manifest, role: str, loader):
    """Load one pack, tagging any failure with the role it belongs to."""
    path = manifest.path(role)
    try:
        return loader(path)
    except ConfigError:
        raise
    except FlatsError as err:
        raise type(err)(f"role {role}: {err}") from err


def _subsample(pack: FeaturePack, n: int | None, seed: int) -> FeaturePack:
    if n is None or n >= pack.n_rows:
        return pack
    if n < 1:
        raise ConfigError(f"--aux-sample must be >= 1, got {n}")
    order = np.argsort(uniform01(seed, pack.n_rows), kind="stable")
    return FeaturePack(pack.values[np.sort(order[:n])])


def _report_block(ev) -> dict:
    return ev.to_json_dict()


def cmd_score(args) -> int:
    manifest = load_manifest(args.manifest)
    score = args.score
    k = args.k if args.k is not None else (manifest.k or DEFAULT_K)
    alpha = args.alpha if args.alpha is not None else (
        manifest.alpha if manifest.alpha is not None else DEFAULT_ALPHA
    )
    if score == "flats" and not manifest.has("aux_ood"):
        raise MissingRole("aux_ood required by score 'flats' but missing from manifest")
    if score in CONFIDENCE_NAMES:
        for role in ("logits_ind_test", "logits_ood_test"):
            if not manifest.has(role):
                raise MissingRole(f"{role} required by score '{score}' but missing from manifest")
    if score == "maha" and not manifest.has("labels_train"):
        raise MissingRole("labels_train required by score 'maha' but missing from manifest")

    if score in CONFIDENCE_NAMES:
        logits_ind = _load_role(manifest, "logits_ind_test", load_logit_pack)
        logits_ood = _load_role(manifest, "logits_ood_test", load_logit_pack)
        if score == "energy":
            temp = args.temperature if args.temperature is not None else DEFAULT_ENERGY_T
            ind = energy_score(logits_ind, temp)
            ood = energy_score(logits_ood, temp)
        elif score == "odin":
            temp = args.temperature if args.temperature is not None else DEFAULT_ODIN_T
            ind = odin_score(logits_ind, temp)
            ood = odin_score(logits_ood, temp)
        else:
            temp = None
            fn = {"msp": msp_score, "d2u": d2u_score, "mls": mls_score}[score]
            ind = fn(logits_ind)
            ood = fn(logits_ood)
    else:
        temp = None
        train = _load_role(manifest, "ind_train", load_feature_pack)
        ind_test = _load_role(manifest, "ind_test", load_feature_pack)
        ood_test = _load_role(manifest, "ood_test", load_feature_pack)
        if score == "maha":
            labels = _load_role(manifest, "labels_train", load_label_pack)
            model = fit_gaussian(train, labels, ridge=args.ridge)
            ind = maha_scores(model, ind_test)
            ood = maha_scores(model, ood_test)
        elif score == "knn":
            index = build_knn_index(train, k)
            ind = knn_scores(index, ind_test)
            ood = knn_scores(index, ood_test)
        elif score == "lof":
            index = build_knn_index(train, k)
            ind = lof_scores(index, ind_test)
            ood = lof_scores(index, ood_test)
        else:
            aux = _subsample(
                _load_role(manifest, "aux_ood", load_feature_pack), args.aux_sample, args.seed
            )
            ind_index = build_knn_index(train, k)
            aux_index = build_knn_index(aux, k)
            ind = flats_scores(ind_index, aux_index, ind_test, alpha)
            ood = flats_scores(ind_index, aux_index, ood_test, alpha)

    ev = evaluate(ind, ood)
    report = {
        "command": "score",
        "score": score,
        "manifest": str(args.manifest),
        "params": {
            "k": int(k),
            "alpha": float(alpha),
            "temperature": temp,
            "ridge": float(args.ridge),
            "aux_sample": args.aux_sample,
            "seed": int(args.seed),
        },
        "report": _report_block(ev),
        "scores": {
            "ind_test": [float(v) for v in np.asarray(ind).ravel()],
            "ood_test": [float(v) for v in np.asarray(ood).ravel()],
        },
    }
    pretty = None
    if args.pretty:
        pretty = [
            f"score   {score}",
            f"auroc   {ev.auroc:.4f}",
            f"fpr95   {ev.fpr_at_95_tpr:.4f}",
            f"n       {ev.n_ind} ind / {ev.n_ood} ood",
        ]
    _emit(report, args.out, pretty)
    return 0


def cmd_ablate(args) -> int:
    manifest = load_manifest(args.manifest)
    k = args.k if args.k is not None else (manifest.k or DEFAULT_K)
    alpha = args.alpha if args.alpha is not None else (
        manifest.alpha if manifest.alpha is not None else DEFAULT_ALPHA
    )
    for role in ("aux_ood", "logits_ind_test", "logits_ood_test", "labels_train"):
        if not manifest.has(role):
            raise MissingRole(f"{role} required by ablate but missing from manifest")

    train = _load_role(manifest, "ind_train", load_feature_pack)
    ind_test = _load_role(manifest, "ind_test", load_feature_pack)
    ood_test = _load_role(manifest, "ood_test", load_feature_pack)
    aux = _subsample(
        _load_role(manifest, "aux_ood", load_feature_pack), args.aux_sample, args.seed
    )
    labels = _load_role(manifest, "labels_train", load_label_pack)
    logits_ind = _load_role(manifest, "logits_ind_test", load_logit_pack)
    logits_ood = _load_role(manifest, "logits_ood_test", load_logit_pack)

    ind_index = build_knn_index(train, k)
    aux_index = build_knn_index(aux, k)
    model = fit_gaussian(train, labels, ridge=args.ridge)
    aux_ind = knn_scores(aux_index, ind_test)
    aux_ood = knn_scores(aux_index, ood_test)

    baselines = {
        "msp": (msp_score(logits_ind), msp_score(logits_ood)),
        "energy": (energy_score(logits_ind), energy_score(logits_ood)),
        "odin": (odin_score(logits_ind), odin_score(logits_ood)),
        "d2u": (d2u_score(logits_ind), d2u_score(logits_ood)),
        "mls": (mls_score(logits_ind), mls_score(logits_ood)),
        "maha": (maha_scores(model, ind_test), maha_scores(model, ood_test)),
        "knn": (knn_scores(ind_index, ind_test), knn_scores(ind_index, ood_test)),
    }
    setting1 = {}
    for name, (ind, ood) in baselines.items():
        plain = evaluate(ind, ood)
        enhanced = evaluate(
            setting1_enhance(ind, aux_ind, alpha), setting1_enhance(ood, aux_ood, alpha)
        )
        setting1[name] = {
            "plain": _report_block(plain),
            "enhanced": _report_block(enhanced),
        }

    n_ind = ind_test.n_rows
    merged = FeaturePack(np.concatenate([ind_test.values, ood_test.values], axis=0))
    grid = setting2_grid(train, labels, aux, merged, k=k, alpha=alpha)
    setting2 = {}
    for ind_kind, row in grid.items():
        setting2[ind_kind] = {}
        for ood_kind, series in row.items():
            ev = evaluate(series[:n_ind], series[n_ind:])
            setting2[ind_kind][ood_kind] = _report_block(ev)

    report = {
        "command": "ablate",
        "manifest": str(args.manifest),
        "params": {
            "k": int(k),
            "alpha": float(alpha),
            "ridge": float(args.ridge),
            "aux_sample": args.aux_sample,
            "seed": int(args.seed),
        },
        "setting1": setting1,
        "setting2": setting2,
    }
    pretty = None
    if args.pretty:
        pretty = ["baseline   plain auroc   enhanced auroc"]
        for name, cell in setting1.items():
            pretty.append(
                f"{name:<10} {cell['plain']['auroc']:<13.4f} {cell['enhanced']['auroc']:.4f}"
            )
    _emit(report, args.out, pretty)
    return 0


def cmd_synth(args) -> int:
    if args.n_per_side < MIN_RUN_SAMPLES:
        raise ConfigError(
            f"--n-per-side must be >= {MIN_RUN_SAMPLES}, got {args.n_per_side}"
        )
    in_spec, out_spec = nested_gaussian_specs()
    run = SynthRun(
        seed=args.seed, n_per_side=args.n_per_side, in_spec=in_spec, out_spec=out_spec
    )
    auroc_candidate, auroc_lr = ump_auroc_check(run, neg_ind_density_scorer(in_spec))
    pairs = dominance_suite(seed=args.seed, n_per_side=args.n_per_side)
    report = {
        "command": "synth",
        "seed": int(args.seed),
        "n_per_side": int(args.n_per_side),
        "lr_at_zero": analytic_lr_score(in_spec, out_spec, 0.0),
        "lr_at_one": analytic_lr_score(in_spec, out_spec, 1.0),
        "nested": {
            "auroc_lr": auroc_lr,
            "auroc_neg_ind_density": auroc_candidate,
            "gap": auroc_lr - auroc_candidate,
        },
        "dominance": {
            "n_pairs": len(pairs),
            "all_hold": all(row["ok"] for row in pairs),
            "pairs": pairs,
        },
    }
    pretty = None
    if args.pretty:
        pretty = [
            f"lr at 0       {report['lr_at_zero']:.6f}  (ln 10 = {math.log(10):.6f})",
            f"lr at 1       {report['lr_at_one']:.6f}",
            f"auroc lr      {auroc_lr:.4f}",
            f"auroc -p_in   {auroc_candidate:.4f}",
            f"dominance     {'all hold' if report['dominance']['all_hold'] else 'VIOLATED'}",
        ]
    _emit(report, args.out, pretty)
    return 0


def cmd_info(args) -> int:
    path = Path(args.path)
    if path.suffix == ".json":
        manifest = load_manifest(path)
        roles = {}
        for role in sorted(manifest.paths):
            role_path = manifest.paths[role]
            roles[role] = {"path": str(role_path), **peek_pack(role_path)}
        report = {"command": "info", "kind": "manifest", "path": str(path), "dim": manifest.dim,
                  "k": manifest.k, "alpha": manifest.alpha, "roles": roles}
    else:
        report = {"command": "info", "kind": "pack", "path": str(path), **peek_pack(path)}
    _emit(report, args.out, None)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flats",
        description="Feature-space OOD scoring toolkit: likelihood-ratio, "
        "distance, and confidence scores over binary feature packs.",
        epilog="Set FLATS_THREADS to parallelize batch scoring (default 1).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    score = sub.add_parser("score", help="score a manifest with one method")
    score.add_argument("--manifest", required=True, help="dataset manifest JSON")
    score.add_argument("--score", required=True, choices=SCORE_NAMES)
    score.add_argument("--k", type=int, default=None, help=f"neighbor count (default {DEFAULT_K})")
    score.add_argument(
        "--alpha", type=float, default=None, help=f"aux-term weight (default {DEFAULT_ALPHA})"
    )
    score.add_argument(
        "--temperature", type=float, default=None,
        help="temperature for energy/odin (defaults 1.0 / 1000.0)",
    )
    score.add_argument("--ridge", type=float, default=DEFAULT_RIDGE)
    score.add_argument(
        "--aux-sample", type=int, default=None,
        help="subsample the aux corpus to this many rows (default: all)",
    )
    score.add_argument("--seed", type=int, default=0)
    score.add_argument("--out", default=None, help="report path (default stdout)")
    score.add_argument("--pretty", action="store_true")
    score.set_defaults(func=cmd_score)

    ablate = sub.add_parser("ablate", help="run both ablation tables")
    ablate.add_argument("--manifest", required=True)
    ablate.add_argument("--k", type=int, default=None)
    ablate.add_argument("--alpha", type=float, default=None)
    ablate.add_argument("--ridge", type=float, default=DEFAULT_RIDGE)
    ablate.add_argument("--aux-sample", type=int, default=None)
    ablate.add_argument("--seed", type=int, default=0)
    ablate.add_argument("--out", default=None)
    ablate.add_argument("--pretty", action="store_true")
    ablate.set_defaults(func=cmd_ablate)

    synth = sub.add_parser("synth", help="run the synthetic-theory checks")
    synth.add_argument("--seed", type=int, default=7)
    synth.add_argument("--n-per-side", type=int, default=10_000)
    synth.add_argument("--out", default=None)
    synth.add_argument("--pretty", action="store_true")
    synth.set_defaults(func=cmd_synth)

    info = sub.add_parser("info", help="inspect a pack file or manifest")
    info.add_argument("--path", required=True)
    info.add_argument("--out", default=None)
    info.set_defaults(func=cmd_info)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except FlatsError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
