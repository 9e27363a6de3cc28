"""Box quantization and prompt serialization for layout conditioning.

Three text styles are supported: bin-token + class-token lines, bin-token
+ region-caption lines, and the per-step "Add ..." prompt grammar used by
the iterative engine. Quantization maps pixel coordinates into 1000 bins
with exact integer arithmetic; dequantization targets bin centers with
half-up rounding so the worst-case round-trip error is half a bin width.
"""

from __future__ import annotations

import re
from typing import NamedTuple

from .core import (
    BBox,
    Canvas,
    Layout,
    caption_to_class_id,
)

N_BINS = 1000

BACKGROUND_CAPTION = "gray background"
BACKGROUND_PROMPT = "Add gray background"


class DegenerateBoxError(ValueError):
    """Dequantized box would have zero or negative extent."""


class ClassMapError(KeyError):
    """Caption has no class-token mapping."""


class PromptParseError(ValueError):
    """Prompt does not match the 'Add ...' grammar."""


class QuantizedBox(NamedTuple):
    x1: int
    y1: int
    x2: int
    y2: int


def _quantize_coord(coord: int, dim: int) -> int:
    return min(coord * N_BINS // dim, N_BINS - 1)


def _dequantize_coord(b: int, dim: int) -> int:
    # floor((b + 0.5)/1000 * dim + 0.5) without float error.
    return ((2 * b + 1) * dim + N_BINS) // (2 * N_BINS)


def quantize_box(box: BBox, canvas: Canvas) -> QuantizedBox:
    return QuantizedBox(
        _quantize_coord(box.x1, canvas.w),
        _quantize_coord(box.y1, canvas.h),
        _quantize_coord(box.x2, canvas.w),
        _quantize_coord(box.y2, canvas.h),
    )


def dequantize_box(q: QuantizedBox, canvas: Canvas) -> BBox:
    x1 = _dequantize_coord(q.x1, canvas.w)
    y1 = _dequantize_coord(q.y1, canvas.h)
    x2 = _dequantize_coord(q.x2, canvas.w)
    y2 = _dequantize_coord(q.y2, canvas.h)
    if x1 >= x2 or y1 >= y2:
        raise DegenerateBoxError(f"bins {tuple(q)} collapse to [{x1},{y1},{x2},{y2}]")
    return BBox(x1, y1, min(x2, canvas.w), min(y2, canvas.h))


def _bin_tokens(q: QuantizedBox) -> str:
    return " ".join(f"<{b:03d}>" for b in q)


REGION_SEPARATOR = " ; "

_RECO_REGION = re.compile(
    r"^<(\d{3})> <(\d{3})> <(\d{3})> <(\d{3})> (.+)$"
)
_LDM_REGION = re.compile(
    r"^<(\d{3})> <(\d{3})> <(\d{3})> <(\d{3})> <cls(\d+)>$"
)


def serialize_reco(layout: Layout) -> str:
    """Bin tokens followed by the region caption, one chunk per region."""
    parts = []
    for region in layout.regions:
        q = quantize_box(region.box, layout.canvas)
        parts.append(f"{_bin_tokens(q)} {region.caption}")
    return REGION_SEPARATOR.join(parts)


def parse_reco(text: str) -> list[tuple[QuantizedBox, str]]:
    """Inverse of serialize_reco, recovering bins and captions exactly."""
    if not text:
        return []
    out = []
    for chunk in text.split(REGION_SEPARATOR):
        m = _RECO_REGION.match(chunk)
        if m is None:
            raise PromptParseError(f"bad region chunk {chunk!r}")
        bins = QuantizedBox(*(int(g) for g in m.groups()[:4]))
        out.append((bins, m.group(5)))
    return out


def serialize_ldm(layout: Layout, class_map: dict[str, int] | None = None) -> str:
    """Bin tokens followed by a class token per region."""
    parts = []
    for region in layout.regions:
        if class_map is not None:
            if region.caption not in class_map:
                raise ClassMapError(region.caption)
            cls = class_map[region.caption]
        else:
            try:
                cls = caption_to_class_id(region.caption)
            except ValueError as exc:
                raise ClassMapError(region.caption) from exc
        q = quantize_box(region.box, layout.canvas)
        parts.append(f"{_bin_tokens(q)} <cls{cls}>")
    return REGION_SEPARATOR.join(parts)


def parse_ldm(text: str) -> list[tuple[QuantizedBox, int]]:
    if not text:
        return []
    out = []
    for chunk in text.split(REGION_SEPARATOR):
        m = _LDM_REGION.match(chunk)
        if m is None:
            raise PromptParseError(f"bad region chunk {chunk!r}")
        bins = QuantizedBox(*(int(g) for g in m.groups()[:4]))
        out.append((bins, int(m.group(5))))
    return out


def iterinpaint_prompt(caption: str) -> str:
    return f"Add {caption}"


def parse_add_prompt(prompt: str) -> tuple[str, str, str] | None:
    """Return (color, material, shape), or None for the background prompt.

    Anything outside the grammar raises PromptParseError.
    """
    if prompt == BACKGROUND_PROMPT:
        return None
    if not prompt.startswith("Add "):
        raise PromptParseError(f"prompt {prompt!r} lacks the 'Add ' prefix")
    caption = prompt[4:]
    parts = caption.split(" ")
    if len(parts) != 3:
        raise PromptParseError(f"caption {caption!r} is not 'color material shape'")
    color, material, shape = parts
    try:
        caption_to_class_id(caption)
    except ValueError as exc:
        raise PromptParseError(str(exc)) from exc
    return color, material, shape
