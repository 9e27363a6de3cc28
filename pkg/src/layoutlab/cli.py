"""Command-line front end for the benchmark pipeline.

All commands share one workspace directory (--out) with a fixed layout:

    manifests/{skill}_{split}.jsonl   scene manifests (generate-bench)
    gt/{image_id}.png|.json           reference renders (render-gt)
    runs/{run name}/{image_id}.png    backend outputs (run)
    reports/{method}_{skill}_{split}.json
    training/                         exported tuples (export-training)

Exit codes: 0 on success, 1 for usage errors, 2 for runtime failures
with the diagnostic on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from .backends import BackendConfig, make_backend
from .core import Scene, load_image, save_image, scene_to_dict
from .engine import EngineOptions, generate
from .evaluate import (
    EvalReport,
    average_precision,
    detect_with_id,
    evaluate_run,
    load_detections,
    load_manifest,
    report_table,
    scene_ground_truths,
    shuffled_baseline,
)
from .render import render_scene
from .sampler import OOD_SPLITS, SPLITS, sample_scene
from .training import export_manifest, validate_manifest

DEFAULT_N = 200
DEFAULT_PORT = 8601

ORDER_NAMES = {
    "given": "given",
    "random": "random",
    "top": "top_to_bottom",
    "bottom": "bottom_to_top",
}


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 2


def _split_keys(args: argparse.Namespace) -> list[tuple[str, str]]:
    """Splits selected by --skill/--split; all benchmark splits if unset."""
    if args.skill is None and args.split is None:
        return list(OOD_SPLITS)
    keys = [
        (skill, split)
        for skill, split in SPLITS
        if (args.skill is None or skill == args.skill)
        and (args.split is None or split == args.split)
    ]
    if not keys:
        known = ", ".join(f"{a}/{b}" for a, b in sorted(SPLITS))
        raise ValueError(
            f"no split matches skill={args.skill} split={args.split}; "
            f"known: {known}"
        )
    return keys


def _manifest_path(out: Path, skill: str, split: str) -> Path:
    return out / "manifests" / f"{skill}_{split}.jsonl"


def _load_split_scenes(out: Path, skill: str, split: str) -> dict[str, Scene]:
    path = _manifest_path(out, skill, split)
    if not path.exists():
        raise FileNotFoundError(
            f"{path} missing; run generate-bench first"
        )
    return load_manifest(path)


def _backend_config(args: argparse.Namespace) -> BackendConfig:
    endpoint = os.environ.get("LAYOUTLAB_ENDPOINT", args.endpoint)
    return BackendConfig(
        kind=args.backend,
        endpoint=endpoint,
        guidance_scale=args.guidance,
        steps=args.steps,
        jitter_px=args.jitter,
    )


def _run_name(args: argparse.Namespace) -> str:
    name = f"{args.backend}_{args.mode}_{args.order}"
    if args.jitter:
        name += f"_j{args.jitter}"
    return name


def cmd_generate_bench(args: argparse.Namespace) -> int:
    out = Path(args.out)
    (out / "manifests").mkdir(parents=True, exist_ok=True)
    for skill, split in _split_keys(args):
        path = _manifest_path(out, skill, split)
        with open(path, "w", encoding="utf-8") as fh:
            for seed in range(args.seed, args.seed + args.n):
                scene = sample_scene(skill, split, seed)
                fh.write(json.dumps({
                    "skill": skill,
                    "split": split,
                    "seed": seed,
                    "scene": scene_to_dict(scene),
                }) + "\n")
        print(f"wrote {path} ({args.n} scenes)")
    return 0


def cmd_render_gt(args: argparse.Namespace) -> int:
    out = Path(args.out)
    gt_dir = out / "gt"
    gt_dir.mkdir(parents=True, exist_ok=True)
    total = 0
    for skill, split in _split_keys(args):
        for image_id, scene in _load_split_scenes(out, skill, split).items():
            img, layout = render_scene(scene)
            save_image(img, gt_dir / f"{image_id}.png")
            with open(gt_dir / f"{image_id}.json", "w", encoding="utf-8") as fh:
                json.dump({
                    "image_id": image_id,
                    "regions": [
                        {"caption": r.caption, "box": list(r.box.as_tuple())}
                        for r in layout.regions
                    ],
                }, fh)
            total += 1
    print(f"rendered {total} images into {gt_dir}")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    out = Path(args.out)
    backend = make_backend(_backend_config(args), seed=args.seed)
    opts_order = ORDER_NAMES[args.order]
    run_dir = out / "runs" / _run_name(args)
    run_dir.mkdir(parents=True, exist_ok=True)
    total = 0
    t0 = time.perf_counter()
    for skill, split in _split_keys(args):
        for image_id, scene in _load_split_scenes(out, skill, split).items():
            opts = EngineOptions(
                mode=args.mode, order=opts_order, seed=scene.seed
            )
            img, traces = generate(scene.to_layout(), backend, opts)
            save_image(img, run_dir / f"{image_id}.png")
            with open(run_dir / f"{image_id}.trace.json", "w",
                      encoding="utf-8") as fh:
                json.dump({
                    "image_id": image_id,
                    "steps": [
                        {"step": t.step_index, "prompt": t.prompt}
                        for t in traces
                    ],
                }, fh)
            total += 1
    dt = time.perf_counter() - t0
    print(f"generated {total} images into {run_dir} in {dt:.1f}s")
    return 0


def _write_report(out: Path, method: str, skill: str, split: str,
                  rep: EvalReport) -> Path:
    reports = out / "reports"
    reports.mkdir(parents=True, exist_ok=True)
    path = reports / f"{method}_{skill}_{split}.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({
            "method": method,
            "skill": skill,
            "split": split,
            "ap": rep.ap,
            "ap50": rep.ap50,
            "n_images": rep.n_images,
            "n_ground_truths": rep.n_ground_truths,
            "n_detections": rep.n_detections,
        }, fh)
    return path


def _eval_images(image_dir: Path, scenes: dict[str, Scene],
                 producer: str) -> EvalReport:
    dets = []
    for image_id in scenes:
        path = image_dir / f"{image_id}.png"
        if not path.exists():
            raise FileNotFoundError(f"{path} missing; run '{producer}' first")
        dets.extend(detect_with_id(load_image(path), image_id))
    return average_precision(dets, scene_ground_truths(scenes))


def cmd_eval(args: argparse.Namespace) -> int:
    out = Path(args.out)
    target = args.target
    for skill, split in _split_keys(args):
        scenes = _load_split_scenes(out, skill, split)
        if target == "gt":
            rep = _eval_images(out / "gt", scenes, "render-gt")
            method = "gt"
        elif target == "run":
            method = _run_name(args)
            rep = _eval_images(out / "runs" / method, scenes, "run")
        elif target == "shuffled":
            rep = shuffled_baseline(scenes, seed=args.seed)
            method = "shuffled"
        else:
            dets = [
                d for d in load_detections(target) if d.image_id in scenes
            ]
            rep = evaluate_run(scenes, dets)
            method = Path(target).stem
        _write_report(out, method, skill, split, rep)
        print(f"{method} {skill}/{split}: "
              f"AP {rep.ap:.4f} AP50 {rep.ap50:.4f} "
              f"({rep.n_detections} det / {rep.n_ground_truths} gt)")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    out = Path(args.out)
    reports_dir = out / "reports"
    reports: dict[tuple[str, str], EvalReport] = {}
    for path in sorted(reports_dir.glob("*.json")):
        with open(path, encoding="utf-8") as fh:
            row = json.load(fh)
        reports[(row["method"], row["split"])] = EvalReport(
            ap=row["ap"], ap50=row["ap50"], per_class={},
            n_images=row["n_images"],
            n_ground_truths=row["n_ground_truths"],
            n_detections=row["n_detections"],
        )
    if not reports:
        raise FileNotFoundError(f"no reports under {reports_dir}; run eval")
    text, csv = report_table(reports)
    (out / "report.txt").write_text(text + "\n", encoding="utf-8")
    (out / "report.csv").write_text(csv, encoding="utf-8")
    print(text)
    return 0


def cmd_export_training(args: argparse.Namespace) -> int:
    out = Path(args.out)
    scenes: list[Scene] = []
    for skill, split in _split_keys(args):
        scenes.extend(_load_split_scenes(out, skill, split).values())
    manifest = export_manifest(
        scenes, args.n, fg_ratio=args.fg_ratio,
        out_dir=out / "training", seed=args.seed,
    )
    checked = validate_manifest(out / "training")
    print(f"wrote {manifest} ({checked} examples validated)")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import build_app

    app = build_app(_backend_config(args), seed=args.seed, mode=args.mode)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _add_split_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--skill", help="restrict to one skill")
    p.add_argument("--split", help="restrict to one split")


def _add_backend_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--backend", default="procedural",
                   choices=("procedural", "remote", "perturb"))
    p.add_argument("--endpoint",
                   help="remote backend URL (env LAYOUTLAB_ENDPOINT wins)")
    p.add_argument("--guidance", type=float, default=4.0)
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--jitter", type=int, default=0,
                   help="perturb backend box jitter in pixels")


def _add_engine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", default="paste", choices=("paste", "repaint"))
    p.add_argument("--order", default="given",
                   choices=tuple(ORDER_NAMES))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="layoutlab",
        description="Layout-conditioned benchmark pipeline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-bench", help="sample scenes into manifests")
    _add_split_flags(p)
    p.add_argument("--n", type=int, default=DEFAULT_N)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="bench")
    p.set_defaults(func=cmd_generate_bench)

    p = sub.add_parser("render-gt", help="render reference images + layouts")
    _add_split_flags(p)
    p.add_argument("--out", default="bench")
    p.set_defaults(func=cmd_render_gt)

    p = sub.add_parser("run", help="generate images for manifests")
    _add_split_flags(p)
    _add_backend_flags(p)
    _add_engine_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="bench")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("eval", help="detect and score a target")
    p.add_argument(
        "target", nargs="?", default="gt",
        help="gt | run | shuffled | path to detections JSONL",
    )
    _add_split_flags(p)
    _add_backend_flags(p)
    _add_engine_flags(p)
    p.add_argument("--seed", type=int, default=0,
                   help="pairing seed for the shuffled target")
    p.add_argument("--out", default="bench")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("report", help="merge reports into one table")
    p.add_argument("--out", default="bench")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("export-training", help="export training tuples")
    _add_split_flags(p)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--fg-ratio", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="bench")
    p.set_defaults(func=cmd_export_training)

    p = sub.add_parser("serve", help="start the session HTTP service")
    _add_backend_flags(p)
    p.add_argument("--mode", default="paste", choices=("paste", "repaint"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=DEFAULT_PORT)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 1
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return 2
    except Exception as e:  # noqa: BLE001 - single CLI boundary
        return _fail(f"{type(e).__name__}: {e}")


if __name__ == "__main__":
    sys.exit(main())
