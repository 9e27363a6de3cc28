"""Iterative inpainting loop: one step per region, then a background step.

A layout with N regions turns into N+1 backend calls. Each foreground
step prompts "Add {caption}" over the region's box mask; the final step
prompts for the background over everything no box covers. Paste mode
composites each backend output through its mask so pixels outside the
mask can never drift; repaint mode trusts the backend with the whole
frame. Sessions wrap the same machinery for add/remove/undo editing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .codec import BACKGROUND_PROMPT, iterinpaint_prompt
from .core import (
    BBox,
    Canvas,
    DEFAULT_CANVAS,
    Layout,
    background_mask,
    blank_image,
    composite,
    image_canvas,
    mask_from_box,
    save_image,
    save_mask,
)
from .render import DEFAULT_PALETTE, Palette

MODES = ("paste", "repaint")
ORDER_POLICIES = ("given", "random", "top_to_bottom", "bottom_to_top")


class HistoryEmptyError(RuntimeError):
    pass


@dataclass(frozen=True)
class EngineOptions:
    mode: str = "paste"
    order: str = "given"
    seed: int = 0
    background_prompt: str = BACKGROUND_PROMPT

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.order not in ORDER_POLICIES:
            raise ValueError(f"order must be one of {ORDER_POLICIES}")


@dataclass(eq=False)
class StepTrace:
    step_index: int
    prompt: str
    mask: np.ndarray
    backend_output: np.ndarray
    committed: np.ndarray


def order_regions(layout: Layout, policy: str, seed: int = 0) -> tuple[int, ...]:
    """Permutation of region indices for the chosen generation order.

    top_to_bottom sorts by (y1, x1, input index); bottom_to_top is its
    exact reverse; random shuffles deterministically from the seed.
    """
    n = len(layout.regions)
    if policy == "given":
        return tuple(range(n))
    if policy == "top_to_bottom":
        keyed = sorted(
            range(n),
            key=lambda i: (layout.regions[i].box.y1, layout.regions[i].box.x1, i),
        )
        return tuple(keyed)
    if policy == "bottom_to_top":
        return tuple(reversed(order_regions(layout, "top_to_bottom")))
    if policy == "random":
        rng = np.random.default_rng(seed)
        return tuple(int(i) for i in rng.permutation(n))
    raise ValueError(f"unknown order policy {policy!r}")


def _commit(prev: np.ndarray, out: np.ndarray, mask: np.ndarray,
            mode: str) -> np.ndarray:
    if mode == "paste":
        return composite(prev, out, mask)
    return out.copy()


def _run_step(img: np.ndarray, prompt: str, mask: np.ndarray, backend,
              mode: str, step_index: int) -> tuple[np.ndarray, StepTrace]:
    try:
        out = backend(img, prompt, mask)
    except Exception as e:
        e.step_index = step_index
        raise
    committed = _commit(img, out, mask, mode)
    return committed, StepTrace(step_index, prompt, mask, out, committed)


def generate(
    layout: Layout,
    backend,
    opts: EngineOptions = EngineOptions(),
    initial: np.ndarray | None = None,
    palette: Palette = DEFAULT_PALETTE,
) -> tuple[np.ndarray, list[StepTrace]]:
    """Run the full N+1-step loop for a layout. Returns the final image
    and one StepTrace per step (an empty layout is a single background
    step over an all-ones mask)."""
    canvas = layout.canvas
    if initial is None:
        img = blank_image(canvas, palette.background)
    else:
        if image_canvas(initial) != canvas:
            raise ValueError(
                f"initial image is {image_canvas(initial)}, layout wants {canvas}"
            )
        img = initial.copy()
    traces: list[StepTrace] = []
    for k, idx in enumerate(order_regions(layout, opts.order, opts.seed)):
        region = layout.regions[idx]
        prompt = iterinpaint_prompt(region.caption)
        mask = mask_from_box(region.box, canvas)
        img, trace = _run_step(img, prompt, mask, backend, opts.mode, k)
        traces.append(trace)
    if layout.regions:
        bg_mask = background_mask(layout)
    else:
        bg_mask = np.ones((canvas.h, canvas.w), dtype=bool)
    img, trace = _run_step(
        img, opts.background_prompt, bg_mask, backend, opts.mode, len(traces)
    )
    traces.append(trace)
    return img, traces


@dataclass(eq=False)
class Session:
    """Single-owner interactive editing state with exact undo."""

    image: np.ndarray
    objects: list[tuple[str, BBox]] = field(default_factory=list)
    history: list[tuple[StepTrace, np.ndarray, tuple]] = field(
        default_factory=list
    )
    mode: str = "paste"
    background_prompt: str = BACKGROUND_PROMPT

    @property
    def canvas(self) -> Canvas:
        return image_canvas(self.image)


def new_session(
    canvas: Canvas = DEFAULT_CANVAS,
    initial: np.ndarray | None = None,
    mode: str = "paste",
    palette: Palette = DEFAULT_PALETTE,
) -> Session:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if initial is None:
        image = blank_image(canvas, palette.background)
    else:
        image = initial.copy()
    return Session(image=image, mode=mode)


def _apply_edit(session: Session, prompt: str, mask: np.ndarray,
                backend, objects_after: list[tuple[str, BBox]]) -> Session:
    before_image = session.image
    before_objects = tuple(session.objects)
    committed, trace = _run_step(
        session.image, prompt, mask, backend, session.mode,
        len(session.history),
    )
    session.history.append((trace, before_image, before_objects))
    session.image = committed
    session.objects = objects_after
    return session


def session_add(session: Session, caption: str, box: BBox,
                backend) -> Session:
    """Inpaint one object into the session image and record it."""
    box.validate(session.canvas)
    mask = mask_from_box(box, session.canvas)
    return _apply_edit(
        session, iterinpaint_prompt(caption), mask, backend,
        session.objects + [(caption, box)],
    )


def session_remove(session: Session, box: BBox, backend) -> Session:
    """Paint background over a box and drop objects recorded at exactly
    that box."""
    box.validate(session.canvas)
    mask = mask_from_box(box, session.canvas)
    kept = [o for o in session.objects if o[1] != box]
    return _apply_edit(session, session.background_prompt, mask, backend, kept)


def session_undo(session: Session) -> Session:
    if not session.history:
        raise HistoryEmptyError("nothing to undo")
    _trace, before_image, before_objects = session.history.pop()
    session.image = before_image
    session.objects = list(before_objects)
    return session


def export_trace(traces: list[StepTrace], out_dir: str | Path) -> Path:
    """Write step_{k}.png, mask_{k}.png and trace.jsonl into a directory."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = out / "trace.jsonl"
    with manifest.open("w", encoding="utf-8") as fh:
        for t in traces:
            image_file = f"step_{t.step_index}.png"
            mask_file = f"mask_{t.step_index}.png"
            save_image(t.committed, out / image_file)
            save_mask(t.mask, out / mask_file)
            fh.write(json.dumps({
                "step": t.step_index,
                "prompt": t.prompt,
                "mask_file": mask_file,
                "image_file": image_file,
            }) + "\n")
    return manifest


__all__ = [
    "EngineOptions",
    "HistoryEmptyError",
    "MODES",
    "ORDER_POLICIES",
    "Session",
    "StepTrace",
    "export_trace",
    "generate",
    "new_session",
    "order_regions",
    "session_add",
    "session_remove",
    "session_undo",
]
