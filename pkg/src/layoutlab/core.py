"""Domain types and exact geometry/raster primitives.

Boxes are half-open integer pixel rectangles [x1, x2) x [y1, y2) so that
areas, IoU, and mask popcounts are exact integer arithmetic. Images are
(H, W, 3) uint8 arrays, masks are (H, W) bool arrays; value 1 marks a
pixel to be updated, 0 a pixel to be preserved.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np
from PIL import Image as PILImage

SHAPES = ("cube", "sphere", "cylinder")
MATERIALS = ("rubber", "metal")
COLORS = ("gray", "blue", "brown", "yellow", "red", "green", "purple", "cyan")

NUM_CLASSES = len(COLORS) * len(MATERIALS) * len(SHAPES)

DEFAULT_CANVAS_SIDE = 512


class DimensionError(ValueError):
    """Raised when images/masks of mismatched dimensions are combined."""


class Canvas(NamedTuple):
    w: int
    h: int


DEFAULT_CANVAS = Canvas(DEFAULT_CANVAS_SIDE, DEFAULT_CANVAS_SIDE)


@dataclass(frozen=True, order=True)
class BBox:
    """Axis-aligned half-open pixel rectangle [x1, x2) x [y1, y2)."""

    x1: int
    y1: int
    x2: int
    y2: int

    def __post_init__(self) -> None:
        if not (self.x1 < self.x2 and self.y1 < self.y2):
            raise ValueError(f"degenerate box {self.as_tuple()}")
        if self.x1 < 0 or self.y1 < 0:
            raise ValueError(f"negative coordinates in {self.as_tuple()}")

    @property
    def width(self) -> int:
        return self.x2 - self.x1

    @property
    def height(self) -> int:
        return self.y2 - self.y1

    @property
    def area(self) -> int:
        return self.width * self.height

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.x1, self.y1, self.x2, self.y2)

    def within(self, canvas: Canvas) -> bool:
        return self.x2 <= canvas.w and self.y2 <= canvas.h

    def validate(self, canvas: Canvas) -> "BBox":
        if not self.within(canvas):
            raise ValueError(f"box {self.as_tuple()} exceeds canvas {canvas}")
        return self

    def intersection_area(self, other: "BBox") -> int:
        iw = min(self.x2, other.x2) - max(self.x1, other.x1)
        ih = min(self.y2, other.y2) - max(self.y1, other.y1)
        if iw <= 0 or ih <= 0:
            return 0
        return iw * ih

    def dilate(self, px: int, canvas: Canvas) -> "BBox":
        return BBox(
            max(0, self.x1 - px),
            max(0, self.y1 - px),
            min(canvas.w, self.x2 + px),
            min(canvas.h, self.y2 + px),
        )


@dataclass(frozen=True)
class ObjectSpec:
    """One object: shape/material/color attributes plus its box."""

    shape: str
    material: str
    color: str
    box: BBox

    def __post_init__(self) -> None:
        if self.shape not in SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}")
        if self.material not in MATERIALS:
            raise ValueError(f"unknown material {self.material!r}")
        if self.color not in COLORS:
            raise ValueError(f"unknown color {self.color!r}")

    @property
    def class_id(self) -> int:
        return (
            COLORS.index(self.color) * 6
            + MATERIALS.index(self.material) * 3
            + SHAPES.index(self.shape)
        )

    @property
    def caption(self) -> str:
        return f"{self.color} {self.material} {self.shape}"


def class_id_to_attributes(class_id: int) -> tuple[str, str, str]:
    """Inverse of ObjectSpec.class_id; returns (color, material, shape)."""
    if not 0 <= class_id < NUM_CLASSES:
        raise ValueError(f"class id {class_id} outside [0, {NUM_CLASSES})")
    color, rem = divmod(class_id, 6)
    material, shape = divmod(rem, 3)
    return COLORS[color], MATERIALS[material], SHAPES[shape]


def caption_to_class_id(caption: str) -> int:
    parts = caption.split()
    if len(parts) != 3:
        raise ValueError(f"caption {caption!r} is not '<color> <material> <shape>'")
    color, material, shape = parts
    return ObjectSpec(shape=shape, material=material, color=color,
                      box=BBox(0, 0, 1, 1)).class_id


@dataclass(frozen=True)
class Region:
    caption: str
    box: BBox


@dataclass(frozen=True)
class Layout:
    """Ordered (caption, box) regions on a fixed canvas."""

    canvas: Canvas
    regions: tuple[Region, ...]

    def __post_init__(self) -> None:
        for r in self.regions:
            r.box.validate(self.canvas)

    @staticmethod
    def of(canvas: Canvas, regions: Iterable[tuple[str, BBox]]) -> "Layout":
        return Layout(canvas, tuple(Region(c, b) for c, b in regions))


@dataclass(frozen=True)
class Scene:
    """A sampled scene: objects on a canvas plus its provenance tags."""

    canvas: Canvas
    objects: tuple[ObjectSpec, ...]
    skill: str
    split: str
    seed: int

    def __post_init__(self) -> None:
        for obj in self.objects:
            obj.box.validate(self.canvas)

    def to_layout(self) -> Layout:
        return Layout.of(self.canvas, ((o.caption, o.box) for o in self.objects))


# ---------------------------------------------------------------------------
# Geometry / raster operations
# ---------------------------------------------------------------------------

def iou(a: BBox, b: BBox) -> float:
    """Exact intersection-over-union of two boxes via integer pixel areas."""
    inter = a.intersection_area(b)
    union = a.area + b.area - inter
    return inter / union


def mask_from_box(box: BBox, canvas: Canvas) -> np.ndarray:
    box.validate(canvas)
    m = np.zeros((canvas.h, canvas.w), dtype=bool)
    m[box.y1:box.y2, box.x1:box.x2] = True
    return m


def union_mask(boxes: Iterable[BBox], canvas: Canvas) -> np.ndarray:
    m = np.zeros((canvas.h, canvas.w), dtype=bool)
    for box in boxes:
        m[box.y1:box.y2, box.x1:box.x2] = True
    return m


def background_mask(layout: Layout) -> np.ndarray:
    """Complement of the union of all region box masks."""
    return ~union_mask((r.box for r in layout.regions), layout.canvas)


def composite(ctx: np.ndarray, gen: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Pixelwise select: gen where mask is set, ctx elsewhere. No blending."""
    if ctx.shape != gen.shape or ctx.shape[:2] != mask.shape:
        raise DimensionError(
            f"shape mismatch: ctx {ctx.shape}, gen {gen.shape}, mask {mask.shape}"
        )
    return np.where(mask[:, :, None], gen, ctx)


def blank_image(canvas: Canvas, rgb: tuple[int, int, int]) -> np.ndarray:
    img = np.empty((canvas.h, canvas.w, 3), dtype=np.uint8)
    img[:] = rgb
    return img


def image_canvas(img: np.ndarray) -> Canvas:
    return Canvas(int(img.shape[1]), int(img.shape[0]))


# ---------------------------------------------------------------------------
# Serialization: JSON schemas and PNG I/O
# ---------------------------------------------------------------------------

def box_to_list(box: BBox) -> list[int]:
    return [box.x1, box.y1, box.x2, box.y2]


def box_from_list(raw: Iterable[int]) -> BBox:
    x1, y1, x2, y2 = (int(v) for v in raw)
    return BBox(x1, y1, x2, y2)


def scene_to_dict(scene: Scene) -> dict:
    return {
        "canvas": {"w": scene.canvas.w, "h": scene.canvas.h},
        "objects": [
            {
                "shape": o.shape,
                "material": o.material,
                "color": o.color,
                "box": box_to_list(o.box),
            }
            for o in scene.objects
        ],
    }


def scene_from_dict(raw: dict, skill: str = "", split: str = "", seed: int = 0) -> Scene:
    canvas = Canvas(int(raw["canvas"]["w"]), int(raw["canvas"]["h"]))
    objects = tuple(
        ObjectSpec(
            shape=o["shape"],
            material=o["material"],
            color=o["color"],
            box=box_from_list(o["box"]),
        )
        for o in raw["objects"]
    )
    return Scene(canvas=canvas, objects=objects, skill=skill, split=split, seed=seed)


def scene_to_json(scene: Scene) -> str:
    return json.dumps(scene_to_dict(scene), sort_keys=True)


def layout_to_dict(layout: Layout) -> dict:
    return {
        "canvas": {"w": layout.canvas.w, "h": layout.canvas.h},
        "regions": [
            {"caption": r.caption, "box": box_to_list(r.box)} for r in layout.regions
        ],
    }


def layout_from_dict(raw: dict) -> Layout:
    canvas = Canvas(int(raw["canvas"]["w"]), int(raw["canvas"]["h"]))
    return Layout.of(
        canvas,
        ((r["caption"], box_from_list(r["box"])) for r in raw.get("regions", ())),
    )


def save_image(img: np.ndarray, path) -> None:
    PILImage.fromarray(img, mode="RGB").save(path, format="PNG")


def load_image(path) -> np.ndarray:
    with PILImage.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def save_mask(mask: np.ndarray, path) -> None:
    PILImage.fromarray(mask.astype(np.uint8) * 255, mode="L").save(path, format="PNG")


def load_mask(path) -> np.ndarray:
    with PILImage.open(path) as im:
        return np.asarray(im.convert("L")) >= 128
