"""Command-line interface.

Subcommands cover the full workflow: ``synth`` builds a synthetic dataset,
``propose`` materializes built-in proposals as mask files, ``train`` fits
the dual-forest model, ``predict`` writes saliency maps, ``eval`` produces
the PR/F report, and ``config`` dumps the effective configuration. Every
command is deterministic given identical inputs and seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .config import RunConfig
from .core_types import load_image, load_manifest, load_mask, save_mask
from .errors import CtxsalError, MissingFile
from .evaluation import pr_curve, write_curve_csv, write_summary_json
from .pipeline import (
    SaliencyModel,
    _map_jobs,
    entry_proposals,
    load_saliency_png,
    predict_entry,
    save_saliency_png,
    train_pipeline,
)
from .synth import DEFAULT_SIZE, generate_dataset

ENV_SEED = "CTXSAL_SEED"


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--lambda", dest="lam", type=float, help="contrast damping constant")
    p.add_argument("--sigma", type=float, help="context smoothing sigma in pixels")
    p.add_argument("--orientations", type=float, nargs="+", help="ray orientations in radians")
    p.add_argument("--trees", dest="n_trees", type=int, help="trees per forest")
    p.add_argument("--seed", type=int, help=f"RNG seed (falls back to ${ENV_SEED})")
    p.add_argument("--min-area", dest="min_area", type=int, help="minimum proposal area in px")
    p.add_argument("--max-proposals", dest="max_proposals", type=int)
    p.add_argument("--features", dest="feature_source", choices=["rgb", "tensor"])
    p.add_argument("--fusion", dest="fusion_mode", choices=["mean", "max"])
    p.add_argument("--k-scales", dest="k_scales", type=float, nargs="+",
                   help="scales for the built-in proposal generator")
    p.add_argument("--normalize-by-mask-area", action="store_true", default=None,
                   help="divide context features by |M| instead of valid pair count")
    p.add_argument("--no-map-normalization", action="store_true", default=None,
                   help="clip fused maps instead of min-max normalizing")
    p.add_argument("--pr-aggregate", dest="pr_aggregate", choices=["mean", "micro"])
    p.add_argument("--beta2", type=float, help="beta^2 of the F-measure")
    p.add_argument("--jobs", type=int, help="worker processes for per-image stages")


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        doc["orientations"] = tuple(doc.get("orientations", cfg.orientations))
        doc["k_scales"] = tuple(doc.get("k_scales", cfg.k_scales))
        cfg = RunConfig.from_dict(doc)
    seed = getattr(args, "seed", None)
    if seed is None and os.environ.get(ENV_SEED):
        seed = int(os.environ[ENV_SEED])
    overrides = dict(
        lam=getattr(args, "lam", None),
        sigma=getattr(args, "sigma", None),
        n_trees=getattr(args, "n_trees", None),
        seed=seed,
        min_area=getattr(args, "min_area", None),
        max_proposals=getattr(args, "max_proposals", None),
        feature_source=getattr(args, "feature_source", None),
        fusion_mode=getattr(args, "fusion_mode", None),
        pr_aggregate=getattr(args, "pr_aggregate", None),
        beta2=getattr(args, "beta2", None),
        jobs=getattr(args, "jobs", None),
    )
    if getattr(args, "orientations", None):
        overrides["orientations"] = tuple(args.orientations)
    if getattr(args, "k_scales", None):
        overrides["k_scales"] = tuple(args.k_scales)
    if getattr(args, "normalize_by_mask_area", None):
        overrides["normalize_by_valid_pairs"] = False
    if getattr(args, "no_map_normalization", None):
        overrides["normalize_map"] = False
    return cfg.override(**overrides)


def cmd_synth(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    manifest = generate_dataset(
        args.out, args.count, cfg.seed, width=args.width, height=args.height
    )
    print(f"wrote {len(manifest)} images under {args.out}")
    return 0


def _propose_one(task) -> int:
    entry, cfg, out_dir = task
    if entry.proposals_dir is not None:
        return 0  # external proposals are replayed, never regenerated
    img = load_image(entry.image_path)
    pset = entry_proposals(entry, img, cfg)
    target = os.path.join(out_dir, entry.image_id)
    os.makedirs(target, exist_ok=True)
    for k, mask in enumerate(pset.masks):
        save_mask(mask, os.path.join(target, f"{k}.png"))
    return len(pset.masks)


def cmd_propose(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    manifest = load_manifest(args.manifest)
    os.makedirs(args.out, exist_ok=True)
    counts = _map_jobs(_propose_one, [(e, cfg, args.out) for e in manifest.entries], cfg.jobs)
    print(f"wrote proposals for {len(counts)} images under {args.out}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    manifest = load_manifest(args.manifest)
    train_pipeline(manifest, cfg, args.model_out)
    print(f"model written to {args.model_out}")
    return 0


_worker_model_cache: dict = {}


def _predict_one(task):
    entry, cfg, model_path, out_dir = task
    model = _worker_model_cache.get(model_path)
    if model is None:
        model = SaliencyModel.load(model_path)
        _worker_model_cache[model_path] = model
    sal = predict_entry(entry, cfg, model)
    save_saliency_png(sal, os.path.join(out_dir, f"{entry.image_id}.png"))
    return entry.image_id


def cmd_predict(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    manifest = load_manifest(args.manifest)
    os.makedirs(args.out, exist_ok=True)
    tasks = [(e, cfg, args.model, args.out) for e in manifest.entries]
    done = _map_jobs(_predict_one, tasks, cfg.jobs)
    print(f"wrote {len(done)} saliency maps under {args.out}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    manifest = load_manifest(args.manifest)
    maps = []
    gts = []
    for entry in manifest.entries:
        map_path = os.path.join(args.maps, f"{entry.image_id}.png")
        if not os.path.isfile(map_path):
            raise MissingFile(f"saliency map missing for {entry.image_id}: {map_path}")
        if entry.gt_path is None:
            raise MissingFile(f"entry {entry.image_id} has no ground truth; cannot evaluate")
        maps.append(load_saliency_png(map_path))
        gts.append(load_mask(entry.gt_path))
    curve = pr_curve(maps, gts, aggregate=cfg.pr_aggregate)
    os.makedirs(args.report, exist_ok=True)
    write_curve_csv(curve, os.path.join(args.report, "pr_curve.csv"), cfg.beta2)
    summary = write_summary_json(curve, os.path.join(args.report, "summary.json"), cfg.beta2)
    print(
        f"best F = {summary['f']:.4f} at threshold {summary['threshold']:.4f} "
        f"(P = {summary['precision']:.4f}, R = {summary['recall']:.4f})"
    )
    return 0


def cmd_config(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    print(cfg.to_json())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctxsal",
        description="Salient object detection with context proposals",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--width", type=int, default=DEFAULT_SIZE[0])
    p.add_argument("--height", type=int, default=DEFAULT_SIZE[1])
    _add_config_flags(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("propose", help="write built-in proposal masks per image")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_propose)

    p = sub.add_parser("train", help="train the dual-forest model")
    p.add_argument("--manifest", required=True)
    p.add_argument("--model-out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="write saliency maps for a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="PR curve and best-threshold F report")
    p.add_argument("--manifest", required=True)
    p.add_argument("--maps", required=True)
    p.add_argument("--report", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("config", help="print the effective configuration as JSON")
    _add_config_flags(p)
    p.set_defaults(func=cmd_config)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CtxsalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
