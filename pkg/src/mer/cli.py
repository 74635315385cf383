"""``mer`` command-line entry point.

Exit codes: 0 success, 1 validation error, 2 data error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import warnings
from dataclasses import asdict
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .au_mapping import ClassScheme, audit_distribution, label_dataset
from .cache import FeatureCache, cache_path, config_hash, load_if_current, write_cache
from .config import ExperimentConfig, feature_name, load_config
from .core_data import load_clip, load_manifest, make_grid
from .descriptors import descriptor_id, extract
from .errors import DataError, ExtractionError, MerError, ValidationError
from .evaluation import plan_folds, run_experiment
from .report import (confusion_filename, read_confusion, read_results, render_confusion,
                     render_results_table, result_row, write_confusion, write_results)
from .svm import save_model, train_multiclass

logger = logging.getLogger("mer")

RESULTS_FILE = "results.csv"
CONFIG_SNAPSHOT = "experiment.yaml"


class _ArgumentError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 by default; usage errors are validation errors here
    def error(self, message):
        raise _ArgumentError(f"{self.prog}: {message}")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--manifest", help="clip manifest CSV")
    g.add_argument("--config", help="YAML experiment config")
    g.add_argument("--seed", type=int, help="seed for fold shuffling")
    g.add_argument("--cache-dir", help="feature cache directory")
    g.add_argument("--out-dir", help="directory for results and figures")
    g.add_argument("--dataset", help="dataset name (default: manifest file stem)")
    g.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="mer", description="Micro-expression recognition on objective AU classes.")
    parser.add_argument("--version", action="version", version=f"mer {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    sub.add_parser("ingest", parents=[common], help="validate a manifest and its frames")

    p = sub.add_parser("map-classes", parents=[common], help="label clips under a class scheme")
    p.add_argument("--scheme", default="I-VII", help="I-V, I-VI, I-VII or original (default I-VII)")
    p.add_argument("--output", help="write labels CSV here instead of stdout")

    sub.add_parser("audit", parents=[common], help="per-class counts against the published distribution")

    p = sub.add_parser("extract", parents=[common], help="compute descriptor caches")
    p.add_argument("--feature", action="append", help="lbp-top, hog3d or hoof (repeatable)")
    p.add_argument("--bins", type=int, help="HOOF orientation bins")

    p = sub.add_parser("train", parents=[common], help="train a one-vs-one SVM on all labelled clips")
    p.add_argument("--feature", required=True)
    p.add_argument("--scheme", required=True)
    p.add_argument("--model", help="output model path (default OUT_DIR/model__FEATURE__SCHEME.json)")
    p.add_argument("--bins", type=int, help="HOOF orientation bins")

    p = sub.add_parser("evaluate", parents=[common], help="run the feature x scheme x protocol grid")
    p.add_argument("--feature", action="append")
    p.add_argument("--scheme", action="append")
    p.add_argument("--protocol", action="append", help="kfold, <k>-fold or loso (repeatable)")
    p.add_argument("--bins", type=int, help="HOOF orientation bins")

    p = sub.add_parser("report", parents=[common], help="render saved results as text and figures")
    p.add_argument("--no-figures", action="store_true", help="skip PNG figures")

    p = sub.add_parser("synth", parents=[common], help="write the synthetic three-class dataset")
    p.add_argument("--subjects", type=int, default=10)
    p.add_argument("--clips-per-class", type=int, default=3)
    p.add_argument("--size", type=int, default=40)
    p.add_argument("--frames", type=int, default=20)
    return parser


def resolve_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    cfg = cfg.updated(manifest=args.manifest, seed=args.seed, cache_dir=args.cache_dir, out_dir=args.out_dir,
                      dataset=args.dataset)
    if getattr(args, "feature", None):
        cfg.features = list(args.feature) if isinstance(args.feature, list) else [args.feature]
    if getattr(args, "scheme", None) and isinstance(args.scheme, list):
        cfg.schemes = list(args.scheme)
    if getattr(args, "protocol", None):
        cfg.protocols = list(args.protocol)
    if getattr(args, "bins", None) is not None:
        cfg.descriptors.setdefault("hoof", {})["bins"] = args.bins
    cfg.validate()
    return cfg


def _manifest(cfg: ExperimentConfig):
    if not cfg.manifest:
        raise ValidationError("no manifest given; use --manifest or set 'manifest' in the config")
    return load_manifest(cfg.manifest, cfg.dataset)


def cmd_ingest(cfg: ExperimentConfig, args, out) -> int:
    manifest = _manifest(cfg)
    shapes: dict[tuple[int, int, int], int] = {}
    failures = []
    for entry in manifest:
        try:
            clip = load_clip(entry, manifest)
        except ValidationError as exc:
            failures.append(f"{entry.subject_id}/{entry.clip_id}: {exc}")
            continue
        shapes[clip.frames.shape] = shapes.get(clip.frames.shape, 0) + 1
    subjects = sorted({e.subject_id for e in manifest})
    print(f"dataset {manifest.dataset_name}: {len(manifest)} clips, {len(subjects)} subjects", file=out)
    for (t, h, w), n in sorted(shapes.items()):
        print(f"  {n} clip(s) of {t} frames at {w}x{h}", file=out)
    if failures:
        print(f"{len(failures)} clip(s) could not be read:", file=out)
        for f in failures:
            print(f"  {f}", file=out)
        return 1
    return 0


def cmd_map_classes(cfg: ExperimentConfig, args, out) -> int:
    manifest = _manifest(cfg)
    scheme = ClassScheme.parse(args.scheme)
    labelling = label_dataset(manifest, scheme, cfg.emotion_classes)
    au = {e.key: e.au_code for e in manifest}
    fh = open(args.output, "w", newline="", encoding="utf-8") if args.output else out
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["subject_id", "clip_id", "au_code", "class"])
        for key, label in sorted(labelling.labels.items()):
            w.writerow([key[0], key[1], au[key], label])
    finally:
        if args.output:
            fh.close()
    summary = ", ".join(f"{c}={n}" for c, n in labelling.frequencies.items())
    print(f"scheme {scheme.value}: {len(labelling)} labelled, {len(labelling.excluded)} excluded ({summary})",
          file=sys.stderr if not args.output else out)
    return 0


def cmd_audit(cfg: ExperimentConfig, args, out) -> int:
    report = audit_distribution(_manifest(cfg), cfg.dataset)
    print(report.render(), file=out)
    return 0


def extract_feature(cfg: ExperimentConfig, manifest, feature: str, out) -> FeatureCache:
    """Bring the cache for ``feature`` up to date; only missing or stale rows are computed."""
    desc = descriptor_id(feature)
    dcfg = cfg.descriptor_config(feature)
    path = cache_path(cfg.cache_dir, manifest.dataset_name, desc)
    current = load_if_current(path, desc, dcfg)
    cache = FeatureCache(desc, (), asdict(dcfg), config_hash(desc, dcfg))
    if current is not None:
        cache.layout = current.layout
    wanted = {e.key for e in manifest}
    cached = 0
    if current is not None:
        for key, values in current.rows.items():
            if key in wanted:
                cache.rows[key] = values
                cached += 1
    recomputed, failed = 0, []
    for entry in manifest:
        if entry.key in cache.rows:
            continue
        try:
            clip = load_clip(entry, manifest)
            fv = extract(desc, clip, make_grid(clip.width, clip.height), dcfg)
        except (ValidationError, ExtractionError) as exc:
            failed.append((entry, exc))
            print(f"  skipped {entry.subject_id}/{entry.clip_id}: {exc}", file=sys.stderr)
            continue
        if cache.layout and tuple(fv.layout) != tuple(cache.layout):
            raise ExtractionError(f"{entry.subject_id}/{entry.clip_id}: layout {fv.layout} differs from {cache.layout}")
        cache.layout = tuple(fv.layout)
        cache.rows[entry.key] = fv.values
        recomputed += 1
        logger.info("extracted %s %s/%s", desc, entry.subject_id, entry.clip_id)
    if len(manifest) and not cache.rows:
        raise ExtractionError(f"{feature}: extraction failed for all {len(failed)} clip(s)")
    if cache.rows:
        write_cache(path, cache)
    print(f"{feature_name(feature)}: {recomputed} recomputed, {cached} cached"
          + (f", {len(failed)} failed" if failed else "") + f" -> {path}", file=out)
    return cache


def cmd_extract(cfg: ExperimentConfig, args, out) -> int:
    manifest = _manifest(cfg)
    for feature in cfg.features:
        extract_feature(cfg, manifest, feature, out)
    return 0


def _require_cache(cfg: ExperimentConfig, manifest, feature: str) -> FeatureCache:
    desc = descriptor_id(feature)
    path = cache_path(cfg.cache_dir, manifest.dataset_name, desc)
    cache = load_if_current(path, desc, cfg.descriptor_config(feature))
    hint = f"run: mer extract --feature {feature_name(feature)} --manifest {cfg.manifest} --cache-dir {cfg.cache_dir}"
    if cache is None:
        state = "is stale (descriptor settings changed)" if path.is_file() else "is missing"
        raise DataError(f"feature cache {path} {state}; {hint}")
    missing = [e.key for e in manifest if e.key not in cache.rows]
    if missing:
        raise DataError(f"feature cache {path} lacks {len(missing)} clip(s), e.g. {missing[0]}; {hint}")
    return cache


def cmd_train(cfg: ExperimentConfig, args, out) -> int:
    manifest = _manifest(cfg)
    cache = _require_cache(cfg, manifest, args.feature)
    labelling = label_dataset(manifest, ClassScheme.parse(args.scheme), cfg.emotion_classes)
    keys = sorted(labelling.labels)
    if not keys:
        raise DataError("no labelled clips to train on")
    X = np.stack([cache.rows[k] for k in keys])
    model = train_multiclass(X, [labelling.labels[k] for k in keys], cfg.smo_config())
    path = Path(args.model) if args.model else (
        Path(cfg.out_dir) / f"model__{feature_name(args.feature)}__{ClassScheme.parse(args.scheme).value}.json")
    save_model(model, path)
    print(f"trained {len(model.binaries)} pairwise machine(s) on {len(keys)} clips, "
          f"classes {model.classes} -> {path}", file=out)
    return 0


def cmd_evaluate(cfg: ExperimentConfig, args, out) -> int:
    manifest = _manifest(cfg)
    caches = {f: _require_cache(cfg, manifest, f) for f in cfg.features}
    smo = cfg.smo_config()
    out_dir = Path(cfg.out_dir)
    rows = []
    for scheme in cfg.schemes:
        labelling = label_dataset(manifest, ClassScheme.parse(scheme), cfg.emotion_classes)
        labels = labelling.labels
        for feature in cfg.features:
            feats = {k: caches[feature].rows[k] for k in labels}
            for proto_name in cfg.protocols:
                plan = plan_folds(labels, cfg.protocol(proto_name))
                report = run_experiment(feats, labels, plan, smo, feature=feature, scheme=scheme)
                rows.append(result_row(report, manifest.dataset_name))
                write_confusion(out_dir / confusion_filename(feature, scheme, report.protocol),
                                report.confusion, report.classes)
                logger.info("%s %s %s: accuracy %.4f", feature, scheme, report.protocol, report.metrics.accuracy)
    write_results(out_dir / RESULTS_FILE, rows)
    cfg.dump(out_dir / CONFIG_SNAPSHOT)
    print(render_results_table(rows), file=out)
    print(f"\n{len(rows)} result row(s) -> {out_dir / RESULTS_FILE}", file=out)
    return 0


def cmd_report(cfg: ExperimentConfig, args, out) -> int:
    out_dir = Path(cfg.out_dir)
    results = out_dir / RESULTS_FILE
    if not results.is_file():
        raise DataError(f"{results} not found; run: mer evaluate --out-dir {out_dir}")
    rows = read_results(results)
    print(render_results_table(rows), file=out)
    figures = []
    if not args.no_figures:
        from .plotting import plot_accuracy, plot_confusion
        for proto in dict.fromkeys(r["protocol"] for r in rows):
            figures.append(plot_accuracy(rows, proto, out_dir / "figures" / f"accuracy__{proto}.png"))
    for r in rows:
        cell = (r["feature"], r["scheme"], r["protocol"])
        path = out_dir / confusion_filename(*cell)
        if not path.is_file():
            print(f"\n(no confusion matrix for {' / '.join(cell)})", file=out)
            continue
        cm, classes = read_confusion(path)
        text = render_confusion(cm, classes, title=f"{' / '.join(cell)} (row %)")
        (out_dir / confusion_filename(*cell, suffix=".txt")).write_text(text + "\n", encoding="utf-8")
        print("\n" + text, file=out)
        if not args.no_figures:
            figures.append(plot_confusion(cm, classes, out_dir / "figures" / confusion_filename(*cell, suffix=".png"),
                                          title=" / ".join(cell)))
    if figures:
        print(f"\n{len(figures)} figure(s) -> {out_dir / 'figures'}", file=out)
    return 0


def cmd_synth(cfg: ExperimentConfig, args, out) -> int:
    from .synthetic import write_synthetic_dataset
    target = Path(args.out_dir or "synthetic")
    path = write_synthetic_dataset(target, args.subjects, args.clips_per_class, args.size, args.frames,
                                   seed=cfg.seed)
    print(f"wrote {args.subjects * args.clips_per_class * 3} clips; manifest {path}", file=out)
    return 0


COMMANDS = {
    "ingest": cmd_ingest, "map-classes": cmd_map_classes, "audit": cmd_audit, "extract": cmd_extract,
    "train": cmd_train, "evaluate": cmd_evaluate, "report": cmd_report, "synth": cmd_synth,
}


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _ArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            warnings.showwarning = _show_warning
            cfg = resolve_config(args)
            return COMMANDS[args.command](cfg, args, out)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
