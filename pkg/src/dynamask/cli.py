"""Command-line entry point: extract, eval, and synth subcommands.

Configuration precedence is CLI flag > config file > built-in defaults.
Exit codes: 0 success; 1 configuration error; 2 I/O error (missing or
unmatched inputs); 3 when some clips failed and were skipped.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import re
import sys
from dataclasses import replace
from pathlib import Path

import configparser

from . import evaluation, pipeline, synthgen
from .diffvote import VoteConfig
from .errors import ConfigError, DynamaskError
from .imagecore import load_label_raster, load_mask, save_gray_png, save_mask
from .morphology import MorphConfig
from .superpixel import SuperpixelConfig

log = logging.getLogger("dynamask")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_PARTIAL = 3

# Directory names that carry structure, not identity, when matching
# prediction and truth files by key.
STRUCTURAL_DIRS = {"masks", "truth", "instances", "intermediates"}

_CONFIG_SCHEMA = {
    "vote": {"tau_c": float},
    "superpixel": {
        "target_region_size": int,
        "compactness": float,
        "dynamic_fraction": float,
        "iterations": int,
    },
    "morphology": {
        "kernel_size": int,
        "min_component_fraction": float,
    },
    "pipeline": {
        "query_count": int,
        "query_sampling": str,
        "sampling_seed": int,
        "dump_intermediates": bool,
    },
}


def _coerce(raw: str, kind, name: str):
    if kind is bool:
        value = raw.strip().lower()
        if value in ("1", "true", "yes", "on"):
            return True
        if value in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"bad value for {name}: {raw!r} is not a boolean")
    try:
        return kind(raw)
    except ValueError as e:
        raise ConfigError(f"bad value for {name}: {e}") from e


def load_config_file(path) -> dict:
    """Parse an INI config file into {section: {key: value}}, strictly.

    Unknown sections or keys are configuration errors so typos never
    silently fall back to defaults.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except configparser.Error as e:
        raise ConfigError(f"malformed config {path}: {e}") from e

    values: dict = {}
    for section in parser.sections():
        if section not in _CONFIG_SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        schema = _CONFIG_SCHEMA[section]
        for key, raw in parser[section].items():
            if key not in schema:
                raise ConfigError(f"unknown config key {section}.{key}")
            values.setdefault(section, {})[key] = _coerce(raw, schema[key], f"{section}.{key}")
    return values


def build_pipeline_config(file_values: dict, overrides: dict) -> pipeline.PipelineConfig:
    """Layer config file values and CLI overrides over the defaults."""
    merged = {s: dict(v) for s, v in file_values.items()}
    for (section, key), value in overrides.items():
        if value is not None:
            merged.setdefault(section, {})[key] = value
    try:
        return pipeline.PipelineConfig(
            vote=VoteConfig(**merged.get("vote", {})),
            superpixel=SuperpixelConfig(**merged.get("superpixel", {})),
            morph=MorphConfig(**merged.get("morphology", {})),
            **merged.get("pipeline", {}),
        )
    except ValueError as e:
        raise ConfigError(str(e)) from e


def resolve_config(args) -> pipeline.PipelineConfig:
    file_values = load_config_file(args.config) if args.config else {}
    overrides = {
        ("vote", "tau_c"): getattr(args, "tau_c", None),
        ("superpixel", "target_region_size"): getattr(args, "superpixel_size", None),
        ("morphology", "min_component_fraction"): getattr(args, "min_component_fraction", None),
        ("pipeline", "sampling_seed"): getattr(args, "seed", None),
        ("pipeline", "dump_intermediates"): True if getattr(args, "dump_intermediates", False) else None,
    }
    cfg = build_pipeline_config(file_values, overrides)
    if getattr(args, "seed", None) is not None and cfg.query_sampling == "even":
        cfg = replace(cfg, query_sampling="random")
    return cfg


# ---------------------------------------------------------------- extract


def _write_manifest(path: Path, images: list, annotations: list) -> None:
    manifest = {
        "images": images,
        "annotations": annotations,
        "categories": [{"id": 1, "name": "dynamic"}],
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def cmd_extract(args) -> int:
    try:
        cfg = resolve_config(args)
    except ConfigError as e:
        log.error("configuration error: %s", e)
        return EXIT_CONFIG

    input_root = Path(args.input_root)
    output_root = Path(args.output_root)
    if not input_root.is_dir():
        log.error("input root %s is not a directory", input_root)
        return EXIT_IO
    clip_dirs = sorted(d for d in input_root.iterdir() if d.is_dir())
    if not clip_dirs:
        log.error("input root %s contains no clip directories", input_root)
        return EXIT_IO

    try:
        output_root.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        log.error("cannot create output root %s: %s", output_root, e)
        return EXIT_IO

    images = []
    annotations = []
    annotation_id = 0
    failures = 0
    for clip_dir in clip_dirs:
        try:
            clip, sources = pipeline.load_clip(clip_dir)
            mask_dir = output_root / clip.clip_id / "masks"
            inst_dir = output_root / clip.clip_id / "instances"
            mask_dir.mkdir(parents=True, exist_ok=True)
            inst_dir.mkdir(parents=True, exist_ok=True)
            dump_root = None
            if cfg.dump_intermediates:
                dump_root = output_root / clip.clip_id / "intermediates"

            results = pipeline.extract_clip(clip, cfg, jobs=args.jobs, dump_root=dump_root)

            instance_total = 0
            for frame_index, union, instances in results:
                source = sources[frame_index]
                save_mask(union, mask_dir / f"{source.stem}.png")
                paths = instances.save_instance_masks(inst_dir)
                image_id = len(images)
                images.append(
                    {
                        "id": image_id,
                        "file_name": str(source.relative_to(input_root)),
                        "width": union.width,
                        "height": union.height,
                        "clip_id": clip.clip_id,
                        "frame_index": frame_index,
                    }
                )
                for inst, inst_path in zip(instances.instances, paths):
                    annotations.append(
                        {
                            "id": annotation_id,
                            "image_id": image_id,
                            "category_id": 1,
                            "bbox": list(inst.bbox),
                            "area": inst.area,
                            "mask_file": str(inst_path.relative_to(output_root)),
                        }
                    )
                    annotation_id += 1
                instance_total += len(instances)
            log.info(
                "clip %s: %d query frames, %d instances",
                clip.clip_id,
                len(results),
                instance_total,
            )
        except (DynamaskError, OSError) as e:
            log.error("clip %s failed: %s", clip_dir.name, e)
            failures += 1

    try:
        _write_manifest(output_root / "manifest.json", images, annotations)
    except OSError as e:
        log.error("cannot write manifest: %s", e)
        return EXIT_IO

    return EXIT_PARTIAL if failures else EXIT_OK


# ------------------------------------------------------------------- eval


def _collect_masks(root: Path, pattern: str | None, preferred: str, suffix: str) -> dict[str, Path]:
    """Map matching keys to mask files under a root.

    A key is the file's path relative to the root with structural
    directory names removed, the extension dropped, and an optional
    filename suffix stripped.
    """
    if pattern:
        files = sorted(root.glob(pattern))
    else:
        files = sorted(root.glob(preferred))
        if not files:
            files = [
                p
                for p in sorted(root.rglob("*.png"))
                if not STRUCTURAL_DIRS.intersection(p.relative_to(root).parts[:-1])
            ]
    mapping: dict[str, Path] = {}
    for p in files:
        if not p.is_file():
            continue
        parts = [part for part in p.relative_to(root).parts[:-1] if part not in STRUCTURAL_DIRS]
        stem = p.stem
        if suffix and stem.endswith(suffix):
            stem = stem[: -len(suffix)]
        key = "/".join(parts + [stem])
        mapping[key] = p
    return mapping


def cmd_eval(args) -> int:
    pred_root = Path(args.pred_root)
    truth_root = Path(args.truth_root)
    if not pred_root.is_dir() or not truth_root.is_dir():
        log.error("prediction and truth roots must be directories")
        return EXIT_IO

    preds = _collect_masks(pred_root, args.pred_glob, "*/masks/*.png", args.pred_suffix)
    truths = _collect_masks(truth_root, args.truth_glob, "*/truth/*.png", args.truth_suffix)
    if not preds or not truths:
        log.error("no prediction or truth masks found")
        return EXIT_IO

    common = sorted(set(preds) & set(truths))
    missing = sorted(set(preds) ^ set(truths))
    if missing and not args.allow_partial:
        log.error(
            "unmatched frames (%d); first few: %s", len(missing), ", ".join(missing[:5])
        )
        return EXIT_IO
    if not common:
        log.error("prediction and truth sets share no frames")
        return EXIT_IO

    fusion = None
    if args.fusion_ids:
        try:
            ids = frozenset(int(t) for t in re.split(r"[,\s]+", args.fusion_ids.strip()) if t)
            fusion = evaluation.LabelFusionSpec(dynamic_label_ids=ids)
        except ValueError as e:
            log.error("bad --fusion-ids: %s", e)
            return EXIT_CONFIG

    records = []
    try:
        for key in common:
            pred = load_mask(preds[key])
            if fusion is not None:
                truth = evaluation.fuse_ground_truth(load_label_raster(truths[key]), fusion)
            else:
                truth = load_mask(truths[key])
            records.append(evaluation.score_frame(pred, truth, key=key))
    except DynamaskError as e:
        log.error("scoring failed: %s", e)
        return EXIT_IO

    pattern = re.compile(args.group_pattern)

    def group_of(key: str) -> str:
        m = pattern.search(key)
        if m and m.groups():
            return m.group(1)
        return "all"

    report = evaluation.aggregate(records, group_of, average=args.average)

    print(f"{'group':<24}{'frames':>8}{'f1':>12}")
    for name, score in sorted(report.groups.items()):
        shown = "undefined" if score.f1 is None else f"{score.f1:.4f}"
        print(f"{name:<24}{score.frames:>8}{shown:>12}")
    overall = "undefined" if report.overall_f1 is None else f"{report.overall_f1:.4f}"
    print(f"{'overall':<24}{len(records) - report.undefined_frames:>8}{overall:>12}")

    report_path = Path(args.report) if args.report else pred_root / "eval_report.json"
    try:
        report_path.write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    except OSError as e:
        log.error("cannot write report: %s", e)
        return EXIT_IO
    return EXIT_OK


# ------------------------------------------------------------------ synth


def cmd_synth(args) -> int:
    try:
        spec = synthgen.load_scene_spec(args.scene)
        if args.seed is not None:
            spec = replace(spec, seed=args.seed)
        clip, truths = synthgen.generate(spec)
    except DynamaskError as e:
        log.error("scene error: %s", e)
        return EXIT_CONFIG

    out = Path(args.output_root) / spec.clip_id
    truth_dir = out / "truth"
    try:
        truth_dir.mkdir(parents=True, exist_ok=True)
        for frame, truth in zip(clip.frames, truths):
            name = f"frame_{frame.frame_index:04d}.png"
            save_gray_png(frame.gray, out / name)
            save_mask(truth, truth_dir / name)
    except (DynamaskError, OSError) as e:
        log.error("cannot write clip: %s", e)
        return EXIT_IO
    log.info("wrote %d frames to %s", len(clip.frames), out)
    return EXIT_OK


# ------------------------------------------------------------------ main


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dynamask",
        description="Extract dynamic-object instance masks from static-camera frame sets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_extract = sub.add_parser("extract", help="run mask extraction over a directory of clips")
    p_extract.add_argument("input_root", help="directory with one subdirectory per clip")
    p_extract.add_argument("output_root", help="destination for masks, instances, manifest")
    p_extract.add_argument("--config", help="INI config file")
    p_extract.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker threads")
    p_extract.add_argument("--dump-intermediates", action="store_true", help="write per-stage artifacts")
    p_extract.add_argument("--tau-c", type=float, default=None, help="vote fraction threshold")
    p_extract.add_argument("--superpixel-size", type=int, default=None, help="target superpixel side")
    p_extract.add_argument(
        "--min-component-fraction", type=float, default=None, help="minimum instance area fraction"
    )
    p_extract.add_argument(
        "--seed", type=int, default=None, help="use seeded random query sampling with this seed"
    )
    p_extract.set_defaults(func=cmd_extract)

    p_eval = sub.add_parser("eval", help="score predicted masks against ground truth")
    p_eval.add_argument("pred_root", help="root of predicted masks")
    p_eval.add_argument("truth_root", help="root of ground-truth masks or label rasters")
    p_eval.add_argument("--allow-partial", action="store_true", help="score only matched frames")
    p_eval.add_argument("--fusion-ids", default=None, help="comma-separated label ids to fuse as dynamic")
    p_eval.add_argument("--group-pattern", default=r"^([^/]+)/", help="regex; group 1 names the group")
    p_eval.add_argument("--pred-glob", default=None, help="glob for prediction masks")
    p_eval.add_argument("--truth-glob", default=None, help="glob for truth files")
    p_eval.add_argument("--pred-suffix", default="", help="strip this suffix from prediction stems")
    p_eval.add_argument("--truth-suffix", default="", help="strip this suffix from truth stems")
    p_eval.add_argument("--average", choices=("macro", "micro"), default="macro")
    p_eval.add_argument("--report", default=None, help="JSON report path")
    p_eval.set_defaults(func=cmd_eval)

    p_synth = sub.add_parser("synth", help="generate a synthetic clip with ground truth")
    p_synth.add_argument("scene", help="scene description file")
    p_synth.add_argument("output_root", help="destination root")
    p_synth.add_argument("--seed", type=int, default=None, help="override the scene seed")
    p_synth.set_defaults(func=cmd_synth)

    return parser


def _setup_logging() -> None:
    level = os.environ.get("DYNAMASK_LOG", "INFO").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
