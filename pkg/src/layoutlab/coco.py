"""Layout/caption suite over real-world object categories.

Four skills (number, position, size, combination) with fixed, exhaustively
enumerated layout pools: 720 + 320 + 720 + 360 = 2120 layouts. Geometry is
pure arithmetic on the 512 canvas, so enumeration is deterministic and
needs no random state. Region captions name the category to place in each
box; the top-level caption follows the per-skill template.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import BBox, Canvas, DEFAULT_CANVAS, Layout

COCO_CATEGORIES: tuple[str, ...] = (
    "person", "bicycle", "car", "motorcycle", "airplane",
    "bus", "train", "truck", "boat", "bench",
    "bird", "cat", "dog", "horse", "sheep",
    "elephant", "backpack", "umbrella", "handbag", "suitcase",
    "parking meter", "skateboard", "surfboard", "tennis racket", "bottle",
    "cup", "banana", "apple", "orange", "broccoli",
    "carrot", "pizza", "donut", "cake", "chair",
    "couch", "potted plant", "bed", "laptop", "clock",
)

RELATIONS: tuple[str, ...] = ("holding", "next to", "sitting on")

NUMBER_TEMPLATE = "a photo of {n} {objects}"
COMBINATION_TEMPLATE = "{a} is {relation} {b}"

_IRREGULAR_PLURALS = {"person": "people", "sheep": "sheep"}


def plural(category: str) -> str:
    if category in _IRREGULAR_PLURALS:
        return _IRREGULAR_PLURALS[category]
    if category.endswith(("s", "x", "z", "ch", "sh")):
        return category + "es"
    return category + "s"


@dataclass(frozen=True)
class CocoLayoutSpec:
    skill: str
    split: str
    object_vocabulary: tuple[str, ...]
    caption_template: str


# 20 object pairs per (relation, split). The common/uncommon contrast is
# the point of the skill: "person sitting on chair" versus "elephant
# sitting on banana".
COMBINATION_PAIRS: dict[tuple[str, str], tuple[tuple[str, str], ...]] = {
    ("holding", "common"): (
        ("person", "tennis racket"), ("person", "umbrella"),
        ("person", "bottle"), ("person", "cup"),
        ("person", "banana"), ("person", "apple"),
        ("person", "orange"), ("person", "broccoli"),
        ("person", "carrot"), ("person", "pizza"),
        ("person", "donut"), ("person", "cake"),
        ("person", "laptop"), ("person", "clock"),
        ("person", "handbag"), ("person", "backpack"),
        ("person", "suitcase"), ("person", "skateboard"),
        ("person", "surfboard"), ("person", "bicycle"),
    ),
    ("holding", "uncommon"): (
        ("bird", "laptop"), ("cat", "umbrella"),
        ("dog", "tennis racket"), ("horse", "handbag"),
        ("sheep", "bottle"), ("elephant", "cup"),
        ("bird", "pizza"), ("cat", "donut"),
        ("dog", "cake"), ("horse", "clock"),
        ("sheep", "backpack"), ("elephant", "suitcase"),
        ("bird", "carrot"), ("cat", "broccoli"),
        ("dog", "orange"), ("horse", "apple"),
        ("sheep", "banana"), ("elephant", "laptop"),
        ("bird", "handbag"), ("cat", "surfboard"),
    ),
    ("next to", "common"): (
        ("car", "truck"), ("bus", "car"),
        ("chair", "couch"), ("laptop", "cup"),
        ("bottle", "cup"), ("banana", "apple"),
        ("orange", "apple"), ("pizza", "bottle"),
        ("bench", "bicycle"), ("person", "dog"),
        ("person", "bicycle"), ("cat", "couch"),
        ("dog", "bench"), ("chair", "potted plant"),
        ("bed", "potted plant"), ("train", "bench"),
        ("motorcycle", "car"), ("truck", "bus"),
        ("backpack", "bench"), ("umbrella", "chair"),
    ),
    ("next to", "uncommon"): (
        ("parking meter", "clock"), ("bed", "boat"),
        ("couch", "airplane"), ("elephant", "laptop"),
        ("sheep", "surfboard"), ("horse", "donut"),
        ("train", "bed"), ("airplane", "banana"),
        ("boat", "pizza"), ("bird", "suitcase"),
        ("cat", "parking meter"), ("dog", "airplane"),
        ("elephant", "cake"), ("horse", "laptop"),
        ("sheep", "umbrella"), ("train", "couch"),
        ("boat", "chair"), ("airplane", "orange"),
        ("bed", "broccoli"), ("parking meter", "cake"),
    ),
    ("sitting on", "common"): (
        ("person", "chair"), ("person", "couch"),
        ("person", "bench"), ("person", "bed"),
        ("person", "bicycle"), ("person", "motorcycle"),
        ("person", "horse"), ("person", "skateboard"),
        ("person", "suitcase"), ("cat", "couch"),
        ("cat", "bed"), ("cat", "chair"),
        ("cat", "laptop"), ("cat", "car"),
        ("dog", "couch"), ("dog", "bed"),
        ("dog", "chair"), ("dog", "bench"),
        ("bird", "bench"), ("bird", "car"),
    ),
    ("sitting on", "uncommon"): (
        ("elephant", "banana"), ("elephant", "chair"),
        ("elephant", "car"), ("elephant", "skateboard"),
        ("elephant", "bicycle"), ("horse", "couch"),
        ("horse", "laptop"), ("horse", "surfboard"),
        ("horse", "bed"), ("sheep", "bed"),
        ("sheep", "bicycle"), ("sheep", "laptop"),
        ("sheep", "chair"), ("dog", "pizza"),
        ("dog", "donut"), ("cat", "cake"),
        ("cat", "pizza"), ("bird", "donut"),
        ("bird", "cake"), ("person", "potted plant"),
    ),
}

NUMBER_COUNTS = tuple(range(2, 11))
NUMBER_SPLITS = {"few": (2, 3, 4), "many": (8, 9, 10)}
POSITION_SPLITS = ("boundary", "center")
SIZE_SPLITS = ("tiny", "large")
COMBINATION_SPLITS = ("common", "uncommon")

_N_NUMBER_VARIANTS = 2
_N_POSITION_VARIANTS = 4
_N_SIZE_VARIANTS = 9
_N_COMBINATION_VARIANTS = 3
_POSITION_COUNT = 5
_SIZE_COUNT = 3


def _grid_boxes(n: int, canvas: Canvas) -> list[BBox]:
    g = math.ceil(math.sqrt(n))
    cell = canvas.w // g
    side = cell * 3 // 5
    rows = math.ceil(n / g)
    y_off = (canvas.h - rows * cell) // 2
    boxes = []
    for k in range(n):
        r, c = divmod(k, g)
        in_row = min(g, n - r * g)
        x_off = (canvas.w - in_row * cell) // 2
        cx = x_off + c * cell + cell // 2
        cy = y_off + r * cell + cell // 2
        boxes.append(BBox(cx - side // 2, cy - side // 2,
                          cx - side // 2 + side, cy - side // 2 + side))
    return boxes


def _ring_boxes(n: int, canvas: Canvas) -> list[BBox]:
    side = 88 if n <= 6 else 64
    radius = 180
    cx0, cy0 = canvas.w // 2, canvas.h // 2
    boxes = []
    for k in range(n):
        ang = 2 * math.pi * k / n - math.pi / 2
        cx = cx0 + round(radius * math.cos(ang))
        cy = cy0 + round(radius * math.sin(ang))
        boxes.append(BBox(cx - side // 2, cy - side // 2,
                          cx - side // 2 + side, cy - side // 2 + side))
    return boxes


def _number_boxes(n: int, variant: int, canvas: Canvas) -> list[BBox]:
    return _grid_boxes(n, canvas) if variant == 0 else _ring_boxes(n, canvas)


def _edge_row(canvas: Canvas, side: int, edge: str) -> list[BBox]:
    n = _POSITION_COUNT
    gap = (canvas.w - n * side) // (n + 1)
    starts = [gap + k * (side + gap) for k in range(n)]
    if edge == "top":
        return [BBox(s, 0, s + side, side) for s in starts]
    if edge == "bottom":
        return [BBox(s, canvas.h - side, s + side, canvas.h) for s in starts]
    if edge == "left":
        return [BBox(0, s, side, s + side) for s in starts]
    return [BBox(canvas.w - side, s, canvas.w, s + side) for s in starts]


def _position_boxes(split: str, variant: int, canvas: Canvas) -> list[BBox]:
    side = 88
    if split == "boundary":
        if variant < 3:
            return _edge_row(canvas, side, ("top", "bottom", "left")[variant])
        corners = [
            (0, 0), (canvas.w - side, 0),
            (0, canvas.h - side), (canvas.w - side, canvas.h - side),
        ]
        mid = ((canvas.w - side) // 2, canvas.h - side)
        return [BBox(x, y, x + side, y + side) for x, y in corners + [mid]]
    # center split: all box centers inside the central quarter-area window
    cx0, cy0 = canvas.w // 2, canvas.h // 2
    side = 80
    if variant == 0:
        d = 64
        centers = [(cx0, cy0), (cx0 - d, cy0 - d), (cx0 + d, cy0 - d),
                   (cx0 - d, cy0 + d), (cx0 + d, cy0 + d)]
    elif variant == 1:
        centers = [(cx0 + dx, cy0) for dx in (-120, -60, 0, 60, 120)]
    elif variant == 2:
        centers = [(cx0, cy0 + dy) for dy in (-120, -60, 0, 60, 120)]
    else:
        centers = [(cx0 + d, cy0 + d) for d in (-120, -60, 0, 60, 120)]
    return [BBox(cx - side // 2, cy - side // 2,
                 cx - side // 2 + side, cy - side // 2 + side)
            for cx, cy in centers]


def _anchor_cells(variant: int) -> list[tuple[int, int]]:
    """Three (row, col) picks from a 3x3 grid, nine distinct patterns."""
    if variant < 3:
        return [(variant, c) for c in range(3)]
    if variant < 6:
        return [(r, variant - 3) for r in range(3)]
    if variant == 6:
        return [(0, 0), (1, 1), (2, 2)]
    if variant == 7:
        return [(0, 2), (1, 1), (2, 0)]
    return [(1, 0), (1, 1), (1, 2)]


def _size_boxes(split: str, variant: int, canvas: Canvas) -> list[BBox]:
    side = 56 if split == "tiny" else 320
    step = canvas.w // 3
    boxes = []
    for r, c in _anchor_cells(variant):
        cx = c * step + step // 2
        cy = r * step + step // 2
        x1 = min(max(cx - side // 2, 0), canvas.w - side)
        y1 = min(max(cy - side // 2, 0), canvas.h - side)
        boxes.append(BBox(x1, y1, x1 + side, y1 + side))
    return boxes


def _combination_boxes(
    relation: str, variant: int, canvas: Canvas
) -> tuple[BBox, BBox]:
    if relation == "holding":
        a = BBox(96, 96, 276, 456)
        s = (72, 96, 120)[variant]
        b = BBox(246, 132, 246 + s, 132 + s)
        return a, b
    if relation == "next to":
        sa, sb = ((160, 160), (200, 120), (120, 200))[variant]
        base = 400
        a = BBox(64, base - sa, 64 + sa, base)
        bx = 64 + sa + 48
        b = BBox(bx, base - sb, bx + sb, base)
        return a, b
    # sitting on: a rests on top of supporter b
    b = BBox(96, 320, 416, 480)
    sa = (120, 160, 200)[variant]
    ax = canvas.w // 2 - sa // 2
    a = BBox(ax, 320 - sa, ax + sa, 320)
    return a, b


def _number_entries(split: str | None) -> list[tuple[int, int, str]]:
    if split:
        if split not in NUMBER_SPLITS:
            raise KeyError(f"unknown number split {split!r}")
        counts = NUMBER_SPLITS[split]
    else:
        counts = NUMBER_COUNTS
    return [
        (n, v, cat)
        for n in counts
        for v in range(_N_NUMBER_VARIANTS)
        for cat in COCO_CATEGORIES
    ]


def _tagged_entries(
    split: str | None, splits: tuple[str, ...], n_variants: int
) -> list[tuple[str, int, str]]:
    if split:
        if split not in splits:
            raise KeyError(f"unknown split {split!r}; expected one of {splits}")
        pool = (split,)
    else:
        pool = splits
    return [
        (s, v, cat)
        for s in pool
        for v in range(n_variants)
        for cat in COCO_CATEGORIES
    ]


def _combination_entries(
    split: str | None,
) -> list[tuple[str, str, int, tuple[str, str]]]:
    if split:
        if split not in COMBINATION_SPLITS:
            raise KeyError(
                f"unknown combination split {split!r}; "
                f"expected one of {COMBINATION_SPLITS}"
            )
        pool = (split,)
    else:
        pool = COMBINATION_SPLITS
    return [
        (s, rel, v, pair)
        for s in pool
        for rel in RELATIONS
        for v in range(_N_COMBINATION_VARIANTS)
        for pair in COMBINATION_PAIRS[(rel, s)]
    ]


def coco_layout_count(skill: str, split: str | None = None) -> int:
    """Number of layouts enumerated for a skill (optionally one split)."""
    if skill == "number":
        return len(_number_entries(split))
    if skill == "position":
        return len(_tagged_entries(split, POSITION_SPLITS, _N_POSITION_VARIANTS))
    if skill == "size":
        return len(_tagged_entries(split, SIZE_SPLITS, _N_SIZE_VARIANTS))
    if skill == "combination":
        return len(_combination_entries(split))
    raise KeyError(f"unknown skill {skill!r}")


def sample_coco_layout(
    skill: str, split: str | None, index: int,
    canvas: Canvas = DEFAULT_CANVAS,
) -> tuple[str, Layout]:
    """Return (caption, Layout) for one enumerated layout.

    The pool is ordered deterministically; index must be below
    coco_layout_count(skill, split). Passing a falsy split enumerates the
    whole skill.
    """
    if index < 0:
        raise IndexError(f"layout index {index} out of range")
    if skill == "number":
        entries = _number_entries(split)
        if index >= len(entries):
            raise IndexError(f"layout index {index} out of range")
        n, v, cat = entries[index]
        caption = NUMBER_TEMPLATE.format(n=n, objects=plural(cat))
        boxes = _number_boxes(n, v, canvas)
        return caption, Layout.of(canvas, [(cat, b) for b in boxes])
    if skill in ("position", "size"):
        splits = POSITION_SPLITS if skill == "position" else SIZE_SPLITS
        n_var = _N_POSITION_VARIANTS if skill == "position" else _N_SIZE_VARIANTS
        entries = _tagged_entries(split, splits, n_var)
        if index >= len(entries):
            raise IndexError(f"layout index {index} out of range")
        s, v, cat = entries[index]
        if skill == "position":
            boxes = _position_boxes(s, v, canvas)
        else:
            boxes = _size_boxes(s, v, canvas)
        caption = NUMBER_TEMPLATE.format(n=len(boxes), objects=plural(cat))
        return caption, Layout.of(canvas, [(cat, b) for b in boxes])
    if skill == "combination":
        entries = _combination_entries(split)
        if index >= len(entries):
            raise IndexError(f"layout index {index} out of range")
        s, rel, v, (a, b) = entries[index]
        caption = COMBINATION_TEMPLATE.format(a=a, relation=rel, b=b)
        box_a, box_b = _combination_boxes(rel, v, canvas)
        return caption, Layout.of(canvas, [(a, box_a), (b, box_b)])
    raise KeyError(f"unknown skill {skill!r}")


def coco_spec(skill: str, split: str) -> CocoLayoutSpec:
    template = (
        COMBINATION_TEMPLATE if skill == "combination" else NUMBER_TEMPLATE
    )
    if coco_layout_count(skill, split) == 0:
        raise KeyError(f"empty pool for {skill}/{split}")
    return CocoLayoutSpec(skill, split, COCO_CATEGORIES, template)
