"""Training-tuple construction and export for the inpainting loop.

A foreground example shows a context subset of a scene's objects and asks
for one more to be added inside its box mask; a background example shows
the finished scene and asks for the backdrop around all boxes. Tuples are
written to disk as PNG triples plus a JSONL manifest so any external
trainer can consume them; nothing here depends on a model.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .codec import BACKGROUND_PROMPT, PromptParseError, iterinpaint_prompt, parse_add_prompt
from .core import (
    Scene,
    background_mask,
    load_image,
    load_mask,
    mask_from_box,
    save_image,
    save_mask,
)
from .render import DEFAULT_PALETTE, Palette, render_objects

TASKS = ("foreground", "background")


class NoObjectError(ValueError):
    """Foreground example requested from a scene with no objects."""


class ManifestError(ValueError):
    """An exported example violates the training-tuple contract."""


@dataclass(frozen=True, eq=False)
class TrainingExample:
    context: np.ndarray
    mask: np.ndarray
    prompt: str
    target: np.ndarray
    task: str

    def __post_init__(self) -> None:
        if self.task not in TASKS:
            raise ValueError(f"task {self.task!r} not in {TASKS}")
        if (
            self.context.shape != self.target.shape
            or self.context.shape[:2] != self.mask.shape
        ):
            raise ValueError(
                f"context {self.context.shape}, target {self.target.shape} "
                f"and mask {self.mask.shape} do not share dimensions"
            )


def make_fg_example(
    scene: Scene, rng: np.random.Generator, palette: Palette = DEFAULT_PALETTE
) -> TrainingExample:
    """Draw a target object uniformly and a context subset of the rest,
    each included independently with probability one half.

    Both images render the kept objects in scene order, so the target
    appears exactly as the finished scene would show it and the pixel
    difference stays inside the target's box.
    """
    if not scene.objects:
        raise NoObjectError(f"{scene.skill}/{scene.split} seed {scene.seed}")
    idx = int(rng.integers(len(scene.objects)))
    keep = rng.random(len(scene.objects)) < 0.5
    keep[idx] = False
    context_objs = tuple(o for o, k in zip(scene.objects, keep) if k)
    with_target = tuple(
        o for i, o in enumerate(scene.objects) if keep[i] or i == idx
    )
    target_obj = scene.objects[idx]
    return TrainingExample(
        context=render_objects(scene.canvas, context_objs, palette),
        mask=mask_from_box(target_obj.box, scene.canvas),
        prompt=iterinpaint_prompt(target_obj.caption),
        target=render_objects(scene.canvas, with_target, palette),
        task="foreground",
    )


def make_bg_example(
    scene: Scene, palette: Palette = DEFAULT_PALETTE
) -> TrainingExample:
    """Full render on both sides; the mask covers everything outside the
    object boxes (all ones for an empty scene)."""
    img = render_objects(scene.canvas, scene.objects, palette)
    return TrainingExample(
        context=img,
        mask=background_mask(scene.to_layout()),
        prompt=BACKGROUND_PROMPT,
        target=img.copy(),
        task="background",
    )


def export_manifest(
    scenes: list[Scene],
    n_examples: int,
    fg_ratio: float = 0.3,
    out_dir: str | Path = "training",
    seed: int = 0,
    palette: Palette = DEFAULT_PALETTE,
) -> Path:
    """Write n_examples training tuples drawn from scenes.

    Each example flips a Bernoulli(fg_ratio) coin for its task, then
    draws its scene uniformly: foreground tasks from the scenes with at
    least one object, background tasks from all of them. Files land in
    {out_dir}/{context,mask,target}/{id}.png with rows appended to
    manifest.jsonl; the same seed reproduces the tree byte for byte.
    """
    if not 0.0 <= fg_ratio <= 1.0:
        raise ValueError(f"fg_ratio {fg_ratio} outside [0, 1]")
    if not scenes:
        raise ValueError("no scenes to export from")
    out = Path(out_dir)
    for sub in ("context", "mask", "target"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    populated = [s for s in scenes if s.objects]
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n_examples):
        foreground = rng.random() < fg_ratio
        if foreground:
            if not populated:
                raise NoObjectError("every scene is empty")
            scene = populated[int(rng.integers(len(populated)))]
            ex = make_fg_example(scene, rng, palette)
        else:
            scene = scenes[int(rng.integers(len(scenes)))]
            ex = make_bg_example(scene, palette)
        name = f"{i:06d}.png"
        save_image(ex.context, out / "context" / name)
        save_mask(ex.mask, out / "mask" / name)
        save_image(ex.target, out / "target" / name)
        rows.append({
            "context": f"context/{name}",
            "mask": f"mask/{name}",
            "target": f"target/{name}",
            "prompt": ex.prompt,
            "task": ex.task,
        })
    manifest = out / "manifest.jsonl"
    with open(manifest, "w") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")
    return manifest


def validate_manifest(
    out_dir: str | Path, palette: Palette = DEFAULT_PALETTE
) -> int:
    """Re-check every exported tuple against the contract; returns the
    number of rows checked, raising ManifestError on the first violation.

    Checked per row: task and prompt wellformedness, shared dimensions,
    foreground masks being one solid box with all pixel changes inside
    it, background rows having identical images whose masked area is
    untouched backdrop.
    """
    out = Path(out_dir)
    backdrop = np.array(palette.background, dtype=np.uint8)
    n = 0
    with open(out / "manifest.jsonl") as fh:
        for line in fh:
            row = json.loads(line)
            n += 1
            if row["task"] not in TASKS:
                raise ManifestError(f"row {n}: task {row['task']!r}")
            context = load_image(out / row["context"])
            target = load_image(out / row["target"])
            mask = load_mask(out / row["mask"])
            if context.shape != target.shape or mask.shape != context.shape[:2]:
                raise ManifestError(f"row {n}: dimension mismatch")
            if row["task"] == "background":
                if row["prompt"] != BACKGROUND_PROMPT:
                    raise ManifestError(f"row {n}: prompt {row['prompt']!r}")
                if (context != target).any():
                    raise ManifestError(f"row {n}: background images differ")
                # Object boxes are painted over the backdrop, so nothing
                # outside them may stray from the backdrop tone.
                if (context[mask] != backdrop).any():
                    raise ManifestError(f"row {n}: painted pixels under the mask")
                continue
            try:
                parsed = parse_add_prompt(row["prompt"])
            except PromptParseError as e:
                raise ManifestError(f"row {n}: {e}") from None
            if parsed is None:
                raise ManifestError(f"row {n}: foreground row with background prompt")
            if not mask.any():
                raise ManifestError(f"row {n}: empty foreground mask")
            ys, xs = np.nonzero(mask)
            solid = (
                int(mask.sum())
                == (ys.max() + 1 - ys.min()) * (xs.max() + 1 - xs.min())
            )
            if not solid:
                raise ManifestError(f"row {n}: foreground mask not one box")
            if ((context != target).any(axis=2) & ~mask).any():
                raise ManifestError(f"row {n}: pixels changed outside the mask")
    return n


__all__ = [
    "ManifestError",
    "NoObjectError",
    "TASKS",
    "TrainingExample",
    "export_manifest",
    "make_bg_example",
    "make_fg_example",
    "validate_manifest",
]
