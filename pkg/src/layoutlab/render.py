"""Deterministic 2D raster renderer for scenes and single-object patches.

Silhouettes are exact (no anti-aliasing): cube = filled rectangle,
sphere = inscribed ellipse, cylinder = rounded rectangle with corner
radius min(w, h) / 3. Rubber is a flat fill; metal is a two-band radial
fill (center highlight over the base tone). Every tone is an exact RGB
value so downstream pixel analysis can segment and classify without
thresholds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    BBox,
    Canvas,
    Layout,
    ObjectSpec,
    Scene,
    blank_image,
)

# Channel-wise L-inf distance of at least 48 between any two base colors
# keeps color classification unambiguous (CLEVR's brown nudged away from red).
CLEVR_RGB: dict[str, tuple[int, int, int]] = {
    "gray": (87, 87, 87),
    "blue": (42, 75, 215),
    "brown": (101, 67, 33),
    "yellow": (255, 238, 51),
    "red": (173, 35, 35),
    "green": (29, 105, 20),
    "purple": (129, 38, 192),
    "cyan": (41, 208, 208),
}

BACKGROUND_RGB: tuple[int, int, int] = (180, 180, 180)

# Fraction of the radial extent covered by the metal highlight band.
METAL_HIGHLIGHT_RADIUS = 0.55
METAL_HIGHLIGHT_LIGHTEN = 0.45

CYLINDER_CORNER_DIVISOR = 3


def _lighten(rgb: tuple[int, int, int], amount: float) -> tuple[int, int, int]:
    return tuple(int(round(c + amount * (255 - c))) for c in rgb)


@dataclass(frozen=True)
class Palette:
    """Exact tone table for rendering and pixel classification."""

    colors: dict[str, tuple[int, int, int]] = field(
        default_factory=lambda: dict(CLEVR_RGB)
    )
    background: tuple[int, int, int] = BACKGROUND_RGB

    def highlight(self, color: str) -> tuple[int, int, int]:
        return _lighten(self.colors[color], METAL_HIGHLIGHT_LIGHTEN)

    def tones(self, color: str) -> tuple[tuple[int, int, int], ...]:
        """All exact RGB values an object of this color may emit."""
        return (self.colors[color], self.highlight(color))

    def all_tones(self) -> dict[tuple[int, int, int], str]:
        """Exact RGB -> color name, over base and highlight tones."""
        table: dict[tuple[int, int, int], str] = {}
        for name in self.colors:
            for tone in self.tones(name):
                table[tone] = name
        return table


DEFAULT_PALETTE = Palette()


def silhouette_mask(shape: str, w: int, h: int) -> np.ndarray:
    """Boolean (h, w) mask of the shape silhouette filling the box extent."""
    if shape == "cube":
        return np.ones((h, w), dtype=bool)

    ys = (np.arange(h, dtype=np.float64) + 0.5 - h / 2.0) / (h / 2.0)
    xs = (np.arange(w, dtype=np.float64) + 0.5 - w / 2.0) / (w / 2.0)
    if shape == "sphere":
        return (xs[None, :] ** 2 + ys[:, None] ** 2) <= 1.0

    if shape == "cylinder":
        r = min(w, h) / CYLINDER_CORNER_DIVISOR
        px = np.arange(w, dtype=np.float64) + 0.5
        py = np.arange(h, dtype=np.float64) + 0.5
        # Distance beyond the corner-inset core rectangle, per axis.
        dx = np.maximum(np.maximum(r - px, px - (w - r)), 0.0)
        dy = np.maximum(np.maximum(r - py, py - (h - r)), 0.0)
        return (dx[None, :] ** 2 + dy[:, None] ** 2) <= r * r

    raise ValueError(f"unknown shape {shape!r}")


def expected_fill_ratio(shape: str, w: int, h: int) -> float:
    """Analytic silhouette-area / box-area ratio for classification."""
    if shape == "cube":
        return 1.0
    if shape == "sphere":
        return np.pi / 4.0
    if shape == "cylinder":
        r = min(w, h) / CYLINDER_CORNER_DIVISOR
        return 1.0 - (4.0 - np.pi) * r * r / (w * h)
    raise ValueError(f"unknown shape {shape!r}")


def highlight_band(w: int, h: int) -> np.ndarray:
    """Radial region that carries the metal highlight tone inside a box."""
    ys = (np.arange(h, dtype=np.float64) + 0.5 - h / 2.0) / (h / 2.0)
    xs = (np.arange(w, dtype=np.float64) + 0.5 - w / 2.0) / (w / 2.0)
    radial = xs[None, :] ** 2 + ys[:, None] ** 2
    return radial <= METAL_HIGHLIGHT_RADIUS ** 2


def _styled_pixels(obj: ObjectSpec, w: int, h: int, palette: Palette) -> tuple[np.ndarray, np.ndarray]:
    """(silhouette mask, (h, w, 3) tones) for the object at the given extent."""
    sil = silhouette_mask(obj.shape, w, h)
    pix = np.empty((h, w, 3), dtype=np.uint8)
    base = palette.colors[obj.color]
    pix[:] = base
    if obj.material == "metal":
        pix[highlight_band(w, h)] = palette.highlight(obj.color)
    return sil, pix


def draw_object(img: np.ndarray, obj: ObjectSpec, palette: Palette = DEFAULT_PALETTE) -> None:
    """Paint the object's silhouette pixels into img (in place)."""
    b = obj.box
    sil, pix = _styled_pixels(obj, b.width, b.height, palette)
    region = img[b.y1:b.y2, b.x1:b.x2]
    region[sil] = pix[sil]


def render_object_patch(obj: ObjectSpec, target_box: BBox,
                        palette: Palette = DEFAULT_PALETTE) -> np.ndarray:
    """Patch image of the box extent: silhouette over background ground."""
    w, h = target_box.width, target_box.height
    sil, pix = _styled_pixels(obj, w, h, palette)
    patch = np.empty((h, w, 3), dtype=np.uint8)
    patch[:] = palette.background
    patch[sil] = pix[sil]
    return patch


def render_scene(scene: Scene,
                 palette: Palette = DEFAULT_PALETTE) -> tuple[np.ndarray, Layout]:
    """Render objects in scene order over a uniform background.

    Later objects occlude earlier ones where silhouettes overlap. The
    returned layout holds the exact drawn boxes with their captions.
    """
    img = blank_image(scene.canvas, palette.background)
    for obj in scene.objects:
        draw_object(img, obj, palette)
    return img, scene.to_layout()


def render_objects(canvas: Canvas, objects: tuple[ObjectSpec, ...],
                   palette: Palette = DEFAULT_PALETTE) -> np.ndarray:
    """Render an arbitrary object subset (used for training examples)."""
    img = blank_image(canvas, palette.background)
    for obj in objects:
        draw_object(img, obj, palette)
    return img
