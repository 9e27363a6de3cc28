"""Deterministic scene generators for the benchmark splits.

Each (skill, split) pair carries a SplitSpec pinning object counts,
allowed scales, box aspect ratios and the placement policy. Sampling is a
pure function of (skill, split, seed): the random stream is derived by
hashing those parts, so identical inputs reproduce identical scenes on
any platform.

Placement keeps every box separated from every other by at least one
pixel for all splits except Size-large, whose mandated scales make
overlap geometrically unavoidable on a 512 canvas (two 288 px boxes
cannot be disjoint). The overlapping placer admits a proposal only when
every partially hidden object would still be recovered by the pixel
detector: a single connected visible region whose bounds stay within a
comfortable IoU margin of the true box, shape classification agreeing
with the truth on exactly the crops the detector will see, and surviving
highlight pixels for metal objects.

Overlapping scenes additionally survive the inpainting loop under every
generation order. The loop paints whole box patches (background corners
included), so an object painted early loses every pixel under any later
box. Admissibility therefore also checks the worst case, each object
minus the union of all other overlapping boxes, and a completed
arrangement is only accepted after simulating every paint order of each
object's overlap neighbourhood and re-running the detector's classifier
on what it would see. Over-constrained parameter combinations (e.g.
several scale-15 objects, which would bury each other) step down the
object count rather than producing degraded scenes.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import ndimage

from .core import (
    BBox,
    COLORS,
    Canvas,
    DEFAULT_CANVAS,
    MATERIALS,
    ObjectSpec,
    SHAPES,
    Scene,
)
from .evaluate import classify_silhouette
from .render import highlight_band, silhouette_mask

CLEVR_SIZES: tuple[float, ...] = (3.5, 7.0)
SQUARE: tuple[tuple[int, int], ...] = ((1, 1),)

PX_PER_SCALE = 32
# Object centers for the center split stay inside this window (512 canvas:
# [80, 432]); wide enough that maximum-count scenes remain packable.
CENTER_MARGIN_FRACTION = 0.15625

MAX_ATTEMPTS = 150
MAX_RESTARTS = 200
# Floors on the any-order worst case: an object minus every other
# overlapping box. Every paint order, the stacked render included, leaves
# at least this view visible, so these floors bound all of them. The
# bounds floor stays above 0.5 so detector boxes still match at AP50.
ANYORDER_VISIBLE_FRACTION = 0.2
ANYORDER_BOX_IOU = 0.52
ANYORDER_HIGHLIGHT_PIXELS = 24
PAIRWISE_IOU_CAP = 0.3

_EIGHT_CONN = np.ones((3, 3), dtype=int)


@lru_cache(maxsize=64)
def _cached_silhouette(shape: str, side: int) -> np.ndarray:
    sil = silhouette_mask(shape, side, side)
    sil.setflags(write=False)
    return sil


@lru_cache(maxsize=64)
def _cached_band(side: int) -> np.ndarray:
    band = highlight_band(side, side)
    band.setflags(write=False)
    return band


class PlacementError(RuntimeError):
    """Rejection sampling exhausted its budget; parameters over-constrained."""


class BucketError(ValueError):
    """Unknown fine-grained bucket for the given skill."""


@dataclass(frozen=True)
class SplitSpec:
    skill: str
    split: str
    count_range: tuple[int, int]
    size_set: tuple[float, ...]
    aspect_set: tuple[tuple[int, int], ...] = SQUARE
    placement: str = "uniform"  # uniform | center | boundary
    overlap: bool = False


SPLITS: dict[tuple[str, str], SplitSpec] = {
    ("id", "clevr"): SplitSpec("id", "clevr", (3, 10), CLEVR_SIZES),
    ("number", "few"): SplitSpec("number", "few", (0, 2), CLEVR_SIZES),
    ("number", "many"): SplitSpec("number", "many", (11, 16), CLEVR_SIZES),
    ("position", "center"): SplitSpec(
        "position", "center", (3, 10), CLEVR_SIZES, placement="center"
    ),
    ("position", "boundary"): SplitSpec(
        "position", "boundary", (3, 10), CLEVR_SIZES, placement="boundary"
    ),
    ("size", "tiny"): SplitSpec("size", "tiny", (3, 5), (2.0,)),
    ("size", "large"): SplitSpec(
        "size", "large", (3, 5), (9.0, 11.0, 13.0, 15.0), overlap=True
    ),
    ("shape", "horizontal"): SplitSpec(
        "shape", "horizontal", (3, 5), CLEVR_SIZES, aspect_set=((2, 1), (3, 1))
    ),
    ("shape", "vertical"): SplitSpec(
        "shape", "vertical", (3, 5), CLEVR_SIZES, aspect_set=((1, 2), (1, 3))
    ),
}

OOD_SPLITS: tuple[tuple[str, str], ...] = tuple(
    k for k in SPLITS if k != ("id", "clevr")
)


def rng_for(*parts: object) -> np.random.Generator:
    digest = hashlib.sha256("/".join(str(p) for p in parts).encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


def scale_to_px(scale: float) -> int:
    return int(round(scale * PX_PER_SCALE))


def box_dims(scale: float, aspect: tuple[int, int]) -> tuple[int, int]:
    """Width and height for a scale at a w:h aspect, preserving area."""
    rw, rh = aspect
    if rw == rh:
        side = scale_to_px(scale)
        return side, side
    unit = int(round(scale * PX_PER_SCALE / math.sqrt(rw * rh)))
    return rw * unit, rh * unit


def _center_window(canvas: Canvas) -> tuple[int, int, int, int]:
    mx = int(round(canvas.w * CENTER_MARGIN_FRACTION))
    my = int(round(canvas.h * CENTER_MARGIN_FRACTION))
    return mx, canvas.w - mx, my, canvas.h - my


def _separated(a: BBox, b: BBox) -> bool:
    # At least one empty pixel row or column between the boxes.
    return a.x2 < b.x1 or b.x2 < a.x1 or a.y2 < b.y1 or b.y2 < a.y1


def _position_range(
    w: int, h: int, spec: SplitSpec, canvas: Canvas
) -> tuple[int, int, int, int] | None:
    x_lo, x_hi = 0, canvas.w - w
    y_lo, y_hi = 0, canvas.h - h
    if spec.placement == "center":
        cx_lo, cx_hi, cy_lo, cy_hi = _center_window(canvas)
        x_lo = max(x_lo, cx_lo - w // 2)
        x_hi = min(x_hi, cx_hi - w // 2)
        y_lo = max(y_lo, cy_lo - h // 2)
        y_hi = min(y_hi, cy_hi - h // 2)
    if x_lo > x_hi or y_lo > y_hi:
        return None
    return x_lo, x_hi, y_lo, y_hi


def _propose_box(
    rng: np.random.Generator, spec: SplitSpec, canvas: Canvas
) -> BBox | None:
    scale = spec.size_set[rng.integers(len(spec.size_set))]
    aspect = spec.aspect_set[rng.integers(len(spec.aspect_set))]
    w, h = box_dims(scale, aspect)
    if w > canvas.w or h > canvas.h:
        return None

    if spec.placement == "boundary":
        edge = int(rng.integers(4))  # left, right, top, bottom
        if edge in (0, 1):
            cut = int(rng.integers(0, w // 3 + 1))
            y1 = int(rng.integers(0, canvas.h - h + 1))
            if edge == 0:
                return BBox(0, y1, w - cut, y1 + h)
            return BBox(canvas.w - (w - cut), y1, canvas.w, y1 + h)
        cut = int(rng.integers(0, h // 3 + 1))
        x1 = int(rng.integers(0, canvas.w - w + 1))
        if edge == 2:
            return BBox(x1, 0, x1 + w, h - cut)
        return BBox(x1, canvas.h - (h - cut), x1 + w, canvas.h)

    rng_range = _position_range(w, h, spec, canvas)
    if rng_range is None:
        return None
    x_lo, x_hi, y_lo, y_hi = rng_range
    x1 = int(rng.integers(x_lo, x_hi + 1))
    y1 = int(rng.integers(y_lo, y_hi + 1))
    return BBox(x1, y1, x1 + w, y1 + h)


def _place_separated_rsa(
    rng: np.random.Generator, spec: SplitSpec, canvas: Canvas, n: int
) -> list[BBox] | None:
    boxes: list[BBox] = []
    for _ in range(n):
        for _attempt in range(MAX_ATTEMPTS):
            box = _propose_box(rng, spec, canvas)
            if box is None:
                continue
            if all(_separated(box, b) for b in boxes):
                boxes.append(box)
                break
        else:
            return None
    return boxes


def _place_separated_grid(
    rng: np.random.Generator, spec: SplitSpec, canvas: Canvas, n: int
) -> list[BBox] | None:
    """Jittered-grid placement for dense square-box scenes.

    Sequential rejection cannot reach the box densities of the Number-many
    split (16 boxes of 112 px cover 77% of the canvas, past the jamming
    point of random sequential placement), so dense scenes are laid out on
    a shuffled grid of cells with per-cell jitter instead.
    """
    if spec.aspect_set != SQUARE or spec.placement == "boundary":
        return None
    g = math.ceil(math.sqrt(n))
    if spec.placement == "center":
        # Grid over the position window of the smallest configured scale.
        probe = min(scale_to_px(s) for s in spec.size_set)
        window = _position_range(probe, probe, spec, canvas)
        if window is None:
            return None
        x_lo, x_hi, y_lo, y_hi = window
        span_x = x_hi - x_lo + probe
        span_y = y_hi - y_lo + probe
    else:
        x_lo, y_lo = 0, 0
        span_x, span_y = canvas.w, canvas.h
    cell_w = span_x // g
    cell_h = span_y // g
    fitting = [s for s in spec.size_set
               if scale_to_px(s) <= min(cell_w, cell_h) - 2]
    if not fitting:
        return None
    cells = rng.permutation(g * g)[:n]
    boxes: list[BBox] = []
    for cell in cells:
        row, col = divmod(int(cell), g)
        side = scale_to_px(fitting[rng.integers(len(fitting))])
        jx = int(rng.integers(1, cell_w - side))
        jy = int(rng.integers(1, cell_h - side))
        x1 = x_lo + col * cell_w + jx
        y1 = y_lo + row * cell_h + jy
        boxes.append(BBox(x1, y1, x1 + side, y1 + side))
    if spec.placement == "center":
        cx_lo, cx_hi, cy_lo, cy_hi = _center_window(canvas)
        for b in boxes:
            cx, cy = b.x1 + b.width // 2, b.y1 + b.height // 2
            if not (cx_lo <= cx <= cx_hi and cy_lo <= cy <= cy_hi):
                return None
    return boxes


def _sample_attributes(
    rng: np.random.Generator, n: int, distinct_colors: bool
) -> list[tuple[str, str, str]]:
    if distinct_colors:
        color_idx = rng.permutation(len(COLORS))[:n]
    else:
        color_idx = rng.integers(0, len(COLORS), size=n)
    out = []
    for i in range(n):
        shape = SHAPES[rng.integers(len(SHAPES))]
        material = MATERIALS[rng.integers(len(MATERIALS))]
        out.append((shape, material, COLORS[int(color_idx[i])]))
    return out


def _box_overlap(a: BBox, b: BBox) -> bool:
    return not (a.x2 <= b.x1 or b.x2 <= a.x1 or a.y2 <= b.y1 or b.y2 <= a.y1)


def _mask_sat(mask: np.ndarray) -> np.ndarray:
    h, w = mask.shape
    sat = np.zeros((h + 1, w + 1), dtype=np.int64)
    np.cumsum(np.cumsum(mask, axis=0, dtype=np.int64), axis=1, out=sat[1:, 1:])
    return sat


class _OverlapState:
    """Stacked-silhouette bookkeeping for the overlapping placer.

    Tracks two views per placed object: the scene-order visible mask
    (later silhouettes drawn on top, what the ground-truth render shows)
    and the any-order worst case, its silhouette minus every other
    overlapping box so far (what survives being painted first in the
    inpainting loop).
    """

    def __init__(self, canvas: Canvas) -> None:
        self.canvas = canvas
        self.owner = np.full((canvas.h, canvas.w), -1, dtype=np.int16)
        self.boxes: list[BBox] = []
        self.shapes: list[str] = []
        self.materials: list[str] = []
        self.sils: list[np.ndarray] = []
        self.sil_counts: list[int] = []
        self.bands: list[np.ndarray] = []
        self.worst: list[np.ndarray] = []
        self._w_sats: list[tuple[np.ndarray, int] | None] = []

    def _visible(self, j: int) -> np.ndarray:
        b = self.boxes[j]
        return self.owner[b.y1:b.y2, b.x1:b.x2] == j

    def _w_sat(self, j: int) -> tuple[np.ndarray, int]:
        """Summed-area table of object j's worst-case mask plus its count,
        rebuilt only after a commit has bitten the object."""
        cached = self._w_sats[j]
        if cached is not None:
            return cached
        w = self.worst[j]
        entry = (_mask_sat(w), int(w.sum()))
        self._w_sats[j] = entry
        return entry

    def screen(self, xs: np.ndarray, ys: np.ndarray, side: int,
               shape: str) -> np.ndarray:
        """Keep only candidate positions not burying a prior object's
        worst case below the visibility floor.

        The worst-case view loses the candidate's whole box bite, so four
        summed-area lookups per candidate per object decide this exactly:
        the surviving ranked order picks the same position a full scan
        would.
        """
        alive = np.ones(len(xs), dtype=bool)
        for j, bj in enumerate(self.boxes):
            wsat, wcount = self._w_sat(j)
            ix1 = np.maximum(xs, bj.x1)
            iy1 = np.maximum(ys, bj.y1)
            ix2 = np.minimum(xs + side, bj.x2)
            iy2 = np.minimum(ys + side, bj.y2)
            w = np.maximum(ix2 - ix1, 0)
            h = np.maximum(iy2 - iy1, 0)
            hit = (w * h) > 0
            if not hit.any():
                continue
            bx1, by1 = (ix1 - bj.x1)[hit], (iy1 - bj.y1)[hit]
            bx2, by2 = bx1 + w[hit], by1 + h[hit]
            in_w = (
                wsat[by2, bx2] - wsat[by1, bx2]
                - wsat[by2, bx1] + wsat[by1, bx1]
            )
            floor = ANYORDER_VISIBLE_FRACTION * self.sil_counts[j]
            dead = (wcount - in_w) < floor
            idx = np.flatnonzero(hit)[dead]
            alive[idx] = False
        return alive

    @staticmethod
    def _worst_geometry_ok(
        w: np.ndarray, box: BBox, material: str, band: np.ndarray | None,
        sil_count: int,
    ) -> bool:
        """Floors on the any-order worst-case view: enough pixels, bounds
        still near the true box, one piece, highlight surviving."""
        if int(w.sum()) < ANYORDER_VISIBLE_FRACTION * sil_count:
            return False
        cols = np.flatnonzero(w.any(axis=0))
        rows = np.flatnonzero(w.any(axis=1))
        comp_area = (int(cols[-1]) + 1 - int(cols[0])) * (
            int(rows[-1]) + 1 - int(rows[0])
        )
        if comp_area < ANYORDER_BOX_IOU * box.area:
            return False
        if material == "metal" and band is not None:
            if int((w & band).sum()) < ANYORDER_HIGHLIGHT_PIXELS:
                return False
        # Connectivity of the worst-case view is left to the final
        # whole-scene pass: box bites disconnect these convex silhouettes
        # so rarely that labeling every candidate costs more than the
        # occasional extra restart.
        return True

    def admissible(self, box: BBox, sil: np.ndarray, material: str) -> bool:
        """Cheap floors keeping this placement plausibly recoverable: a
        pairwise box IoU cap, then visibility fraction, component bounds
        and highlight floors for both the render view and the any-order
        worst case. Exact classification agreement is left to finalize."""
        w_self: np.ndarray | None = None
        for j, bj in enumerate(self.boxes):
            if not _box_overlap(box, bj):
                continue
            inter_x1 = max(box.x1, bj.x1)
            inter_y1 = max(box.y1, bj.y1)
            inter_x2 = min(box.x2, bj.x2)
            inter_y2 = min(box.y2, bj.y2)
            rect = (inter_x2 - inter_x1) * (inter_y2 - inter_y1)
            if rect > PAIRWISE_IOU_CAP * (box.area + bj.area - rect):
                return False
            j_rows = slice(inter_y1 - bj.y1, inter_y2 - bj.y1)
            j_cols = slice(inter_x1 - bj.x1, inter_x2 - bj.x1)
            # Worst case for j: painted before the newcomer, whose whole
            # box wipes it. The stored view already subtracts every other
            # placed box.
            wsat, wcount = self._w_sat(j)
            in_w = int(
                wsat[j_rows.stop, j_cols.stop] - wsat[j_rows.start, j_cols.stop]
                - wsat[j_rows.stop, j_cols.start]
                + wsat[j_rows.start, j_cols.start]
            )
            if in_w > 0:
                wj = self.worst[j].copy()
                wj[j_rows, j_cols] = False
                if not self._worst_geometry_ok(
                    wj, bj, self.materials[j], self.bands[j],
                    self.sil_counts[j],
                ):
                    return False
            # Worst case for the newcomer: painted before all of them.
            # The render view needs no checks of its own here: it always
            # contains the worst case, so the floors below imply it.
            if w_self is None:
                w_self = sil.copy()
            w_self[
                inter_y1 - box.y1:inter_y2 - box.y1,
                inter_x1 - box.x1:inter_x2 - box.x1,
            ] = False
        if w_self is not None:
            band = _cached_band(box.width) if material == "metal" else None
            if not self._worst_geometry_ok(
                w_self, box, material, band, int(sil.sum()),
            ):
                return False
        return True

    def commit(self, box: BBox, shape: str, material: str,
               sil: np.ndarray) -> None:
        idx = len(self.boxes)
        crop = self.owner[box.y1:box.y2, box.x1:box.x2]
        crop[sil] = idx
        w_new = sil.copy()
        for j, bj in enumerate(self.boxes):
            if not _box_overlap(box, bj):
                continue
            self._w_sats[j] = None
            ix1, iy1 = max(box.x1, bj.x1), max(box.y1, bj.y1)
            ix2, iy2 = min(box.x2, bj.x2), min(box.y2, bj.y2)
            self.worst[j][iy1 - bj.y1:iy2 - bj.y1,
                          ix1 - bj.x1:ix2 - bj.x1] = False
            w_new[iy1 - box.y1:iy2 - box.y1,
                  ix1 - box.x1:ix2 - box.x1] = False
        self.boxes.append(box)
        self.shapes.append(shape)
        self.materials.append(material)
        self.sils.append(sil)
        self.sil_counts.append(int(sil.sum()))
        self.bands.append(highlight_band(box.width, box.height))
        self.worst.append(w_new)
        self._w_sats.append(None)

    def _cube_neighborhood_ok(self, j: int) -> bool:
        """True when object j and everything its box overlaps are cubes
        and no subset of the bite rects leaves j empty or in pieces.

        Cube silhouettes fill their boxes, so a bite is exactly the box
        intersection and its pixels are always occluded; connectivity on
        the compressed grid of rect edges matches pixel connectivity.
        """
        if self.shapes[j] != "cube":
            return False
        bj = self.boxes[j]
        rects: list[tuple[int, int, int, int]] = []
        for k, bk in enumerate(self.boxes):
            if k == j or not _box_overlap(bj, bk):
                continue
            if self.shapes[k] != "cube":
                return False
            rects.append((
                max(bj.x1, bk.x1) - bj.x1, max(bj.y1, bk.y1) - bj.y1,
                min(bj.x2, bk.x2) - bj.x1, min(bj.y2, bk.y2) - bj.y1,
            ))
        if not rects:
            return True
        xs = sorted({0, bj.width} | {r[0] for r in rects} | {r[2] for r in rects})
        ys = sorted({0, bj.height} | {r[1] for r in rects} | {r[3] for r in rects})
        nx, ny = len(xs) - 1, len(ys) - 1
        for bits in range(1, 1 << len(rects)):
            covered = np.zeros((ny, nx), dtype=bool)
            for i, (x1, y1, x2, y2) in enumerate(rects):
                if not bits >> i & 1:
                    continue
                covered[ys.index(y1):ys.index(y2),
                        xs.index(x1):xs.index(x2)] = True
            open_cells = ~covered
            if not open_cells.any():
                return False
            _, n_comp = ndimage.label(open_cells, structure=_EIGHT_CONN)
            if n_comp != 1:
                return False
        return True

    def finalize(self) -> bool:
        """Accept the completed arrangement only if the detector would
        classify every object correctly in the stacked render and under
        every paint order of the editing loop.

        The loop paints whole box patches, so inside object j's box only
        the objects painted after it are ever visible; their relative
        order decides which one owns box-intersection pixels. Simulating
        every ordered subset of j's overlap neighbourhood therefore
        covers every full-scene permutation exactly.
        """
        n = len(self.boxes)
        for j in range(n):
            bj = self.boxes[j]
            if self._cube_neighborhood_ok(j):
                # A cube bitten only by cubes classifies right under
                # every subset for free: each bitten pixel is occluded
                # by its biter, so the cube model scores zero mismatch
                # and wins the tie as first in SHAPES order. Only the
                # one-piece condition needs real checking, done exactly
                # on a coordinate-compressed grid of the bite rects.
                continue
            vis_gt = self._visible(j)
            if int(vis_gt.sum()) != self.sil_counts[j]:
                cols = np.flatnonzero(vis_gt.any(axis=0))
                rows = np.flatnonzero(vis_gt.any(axis=1))
                x0, x1c = int(cols[0]), int(cols[-1]) + 1
                y0, y1c = int(rows[0]), int(rows[-1]) + 1
                comp_crop = vis_gt[y0:y1c, x0:x1c]
                _, n_comp = ndimage.label(comp_crop, structure=_EIGHT_CONN)
                if n_comp != 1:
                    return False
                crop = self.owner[bj.y1:bj.y2, bj.x1:bj.x2]
                occ = (crop >= 0) & (crop != j)
                shape, _ = classify_silhouette(
                    comp_crop, occ[y0:y1c, x0:x1c], x1c - x0, y1c - y0,
                )
                if shape != self.shapes[j]:
                    return False
            rects = {}
            for k in range(n):
                if k == j or not _box_overlap(bj, self.boxes[k]):
                    continue
                bk = self.boxes[k]
                ix1, iy1 = max(bj.x1, bk.x1), max(bj.y1, bk.y1)
                ix2, iy2 = min(bj.x2, bk.x2), min(bj.y2, bk.y2)
                bites = self.sils[j][iy1 - bj.y1:iy2 - bj.y1,
                                     ix1 - bj.x1:ix2 - bj.x1].any()
                intrudes = self.sils[k][iy1 - bk.y1:iy2 - bk.y1,
                                        ix1 - bk.x1:ix2 - bk.x1].any()
                if bites or intrudes:
                    rects[k] = (ix1, iy1, ix2, iy2)
            nbrs = sorted(rects)
            if not nbrs:
                continue
            base = np.where(self.sils[j], np.int16(j), np.int16(-1))
            for r in range(1, len(nbrs) + 1):
                for subset in itertools.combinations(nbrs, r):
                    vis = self.sils[j].copy()
                    for k in subset:
                        ix1, iy1, ix2, iy2 = rects[k]
                        vis[iy1 - bj.y1:iy2 - bj.y1,
                            ix1 - bj.x1:ix2 - bj.x1] = False
                    cols = np.flatnonzero(vis.any(axis=0))
                    if len(cols) == 0:
                        return False
                    rows = np.flatnonzero(vis.any(axis=1))
                    x0, x1c = int(cols[0]), int(cols[-1]) + 1
                    y0, y1c = int(rows[0]), int(rows[-1]) + 1
                    comp_crop = vis[y0:y1c, x0:x1c]
                    _, n_comp = ndimage.label(comp_crop, structure=_EIGHT_CONN)
                    if n_comp != 1:
                        return False
                    seen: set[bytes] = set()
                    for seq in itertools.permutations(subset):
                        top = base.copy()
                        for k in seq:
                            ix1, iy1, ix2, iy2 = rects[k]
                            bk = self.boxes[k]
                            sub = top[iy1 - bj.y1:iy2 - bj.y1,
                                      ix1 - bj.x1:ix2 - bj.x1]
                            sub[:] = -1
                            silk = self.sils[k][iy1 - bk.y1:iy2 - bk.y1,
                                                ix1 - bk.x1:ix2 - bk.x1]
                            sub[silk] = k
                        occ = (top != j) & (top != -1)
                        occ_crop = occ[y0:y1c, x0:x1c]
                        # Different orders often leave the same occlusion
                        # map (always, for box-filling silhouettes).
                        key = occ_crop.tobytes()
                        if key in seen:
                            continue
                        seen.add(key)
                        shape, _ = classify_silhouette(
                            comp_crop, occ_crop, x1c - x0, y1c - y0,
                        )
                        if shape != self.shapes[j]:
                            return False
        return True


def _feasible_scale_multiset(sides: list[int], canvas: Canvas) -> bool:
    # Two boxes of 352 px and up can never keep each other's full extent
    # visible on a 512 canvas, so such multisets are rejected up front.
    threshold = round(0.6875 * min(canvas.w, canvas.h))
    return sum(1 for s in sides if s >= threshold) <= 1


def _max_robust_count(spec: SplitSpec, canvas: Canvas) -> int:
    """Largest object count that can survive every paint order.

    When even the smallest allowed box cannot be disjoint from another
    (2 x side > canvas), robust arrangements are same-size boxes near the
    four corners: any fifth box is wholly covered by the other four, and
    its worst case vanishes.
    """
    smallest = min(scale_to_px(s) for s in spec.size_set)
    if 2 * smallest > min(canvas.w, canvas.h):
        return 4
    return spec.count_range[1]


OVERLAP_CANDIDATES = 48
OVERLAP_RESTARTS_PER_COUNT = 40


def _ranked_positions(
    rng: np.random.Generator, state: _OverlapState, side: int, shape: str
) -> np.ndarray:
    """Random candidate positions for a side x side box, least crowded
    first, pre-screened against the placed objects.

    Crowding is plain box-intersection area against the placed boxes, so
    the expensive pixel admissibility check runs on promising spots first.
    """
    canvas = state.canvas
    lim_x, lim_y = canvas.w - side, canvas.h - side
    # Feasible spots for near-canvas-sized boxes hug the corners and
    # edges, so seed candidates from a jittered 3x3 anchor grid before
    # topping up with uniform positions.
    gx = np.array([0, lim_x // 2, lim_x])
    gy = np.array([0, lim_y // 2, lim_y])
    ax = np.repeat(np.tile(gx, 3), 2)
    ay = np.repeat(np.repeat(gy, 3), 2)
    jitter = rng.integers(-16, 17, size=(2, 18))
    n_uniform = OVERLAP_CANDIDATES - 18
    xs = np.concatenate([
        np.clip(ax + jitter[0], 0, lim_x),
        rng.integers(0, lim_x + 1, size=n_uniform),
    ])
    ys = np.concatenate([
        np.clip(ay + jitter[1], 0, lim_y),
        rng.integers(0, lim_y + 1, size=n_uniform),
    ])
    alive = state.screen(xs, ys, side, shape)
    xs, ys = xs[alive], ys[alive]
    cost = np.zeros(len(xs), dtype=np.int64)
    for bj in state.boxes:
        ox = np.minimum(xs + side, bj.x2) - np.maximum(xs, bj.x1)
        oy = np.minimum(ys + side, bj.y2) - np.maximum(ys, bj.y1)
        cost += np.maximum(ox, 0) * np.maximum(oy, 0)
    order = np.argsort(cost, kind="stable")
    return np.stack([xs[order], ys[order]], axis=1)


def _try_overlap_arrangement(
    rng: np.random.Generator, spec: SplitSpec, canvas: Canvas, m: int
) -> list[ObjectSpec] | None:
    # Draw sizes, then cap to what paint-order robustness permits: boxes
    # at or past the threshold can never coexist, so the first
    # over-threshold draw becomes the largest workable scale and the rest
    # the smallest. Four boxes only fit as same-size corner placements,
    # so counts above three force every draw to the smallest scale.
    threshold = round(0.6875 * min(canvas.w, canvas.h))
    smallest = min(spec.size_set, key=scale_to_px)
    workable = [s for s in spec.size_set if scale_to_px(s) <= threshold]
    biggest = max(workable, key=scale_to_px) if workable else smallest
    crowded = m >= 4 and 2 * scale_to_px(smallest) > min(canvas.w, canvas.h)
    scales = []
    big_seen = crowded
    for _ in range(m):
        s = float(spec.size_set[rng.integers(len(spec.size_set))])
        if scale_to_px(s) >= threshold or (crowded and s != float(smallest)):
            s = float(smallest) if big_seen else float(biggest)
            big_seen = True
        scales.append(s)
    sides = sorted((scale_to_px(s) for s in scales), reverse=True)
    if not _feasible_scale_multiset(sides, canvas):
        return None
    attrs = _sample_attributes(rng, m, distinct_colors=True)
    state = _OverlapState(canvas)
    placed_attrs: list[tuple[str, str, str]] = []
    corner_spots: list[tuple[int, int]] = []
    if crowded:
        # Four boxes past half the canvas only fit one to a corner, and
        # more than a few pixels of jitter sinks the worst-case bounds
        # floor, so the spots are built outright instead of scanned for.
        # An object painted first there keeps only the quadrant its two
        # strip bites leave, with the biters outside the surviving
        # bounds; of the three silhouettes only the full-box one still
        # reads as itself from that view, so these scenes draw cubes.
        # Jitter is shared per edge: independent corners can leave a
        # sliver of a box uncovered by its two flanking neighbours alone,
        # a stray component whenever the diagonal box paints first.
        attrs = [("cube", mat, col) for _, mat, col in attrs]
        lim_x, lim_y = canvas.w - sides[0], canvas.h - sides[0]
        left, top, right, bottom = (int(v) for v in rng.integers(0, 7, size=4))
        spots = [
            (left, top),
            (lim_x - right, top),
            (left, lim_y - bottom),
            (lim_x - right, lim_y - bottom),
        ]
        corner_spots = [spots[int(c)] for c in rng.permutation(4)[:m]]
    for i, (side, (shape, material, color)) in enumerate(zip(sides, attrs)):
        sil = _cached_silhouette(shape, side)
        placed = False
        candidates = (
            corner_spots[i:i + 1] if crowded
            else _ranked_positions(rng, state, side, shape)
        )
        for x1, y1 in candidates:
            box = BBox(int(x1), int(y1), int(x1) + side, int(y1) + side)
            if state.admissible(box, sil, material):
                state.commit(box, shape, material, sil)
                placed_attrs.append((shape, material, color))
                placed = True
                break
        if not placed:
            return None
    if not state.finalize():
        return None
    return [
        ObjectSpec(sh, mat, col, box)
        for (sh, mat, col), box in zip(placed_attrs, state.boxes)
    ]


def _place_overlapping(
    rng: np.random.Generator, spec: SplitSpec, canvas: Canvas, n: int
) -> list[ObjectSpec]:
    # Crowded counts can be geometrically hopeless for an unlucky size
    # draw, so after exhausting restarts the count steps down toward the
    # low end of the range rather than failing the whole scene.
    start = min(n, _max_robust_count(spec, canvas))
    for m in range(start, spec.count_range[0] - 1, -1):
        for _restart in range(OVERLAP_RESTARTS_PER_COUNT):
            objects = _try_overlap_arrangement(rng, spec, canvas, m)
            if objects is not None:
                return objects
    raise PlacementError(
        f"{spec.skill}/{spec.split}: no admissible arrangement for {n} objects"
    )


def _place(
    rng: np.random.Generator, spec: SplitSpec, canvas: Canvas, n: int
) -> list[ObjectSpec]:
    if n == 0:
        return []
    if spec.overlap:
        return _place_overlapping(rng, spec, canvas, n)
    for _restart in range(MAX_RESTARTS):
        if n >= 9 and spec.placement in ("uniform", "center"):
            boxes = _place_separated_grid(rng, spec, canvas, n)
        else:
            boxes = _place_separated_rsa(rng, spec, canvas, n)
            if boxes is None:
                boxes = _place_separated_grid(rng, spec, canvas, n)
        if boxes is not None:
            attrs = _sample_attributes(rng, n, distinct_colors=False)
            return [
                ObjectSpec(sh, mat, col, b)
                for (sh, mat, col), b in zip(attrs, boxes)
            ]
    raise PlacementError(
        f"{spec.skill}/{spec.split}: placement failed for {n} objects"
    )


def sample_scene(
    skill: str, split: str, seed: int, canvas: Canvas = DEFAULT_CANVAS
) -> Scene:
    key = (skill, split)
    if key not in SPLITS:
        known = ", ".join(f"{a}/{b}" for a, b in sorted(SPLITS))
        raise ValueError(f"unknown split {skill}/{split}; expected one of {known}")
    spec = SPLITS[key]
    return _sample_from_spec(spec, seed, canvas)


def _sample_from_spec(spec: SplitSpec, seed: int, canvas: Canvas) -> Scene:
    rng = rng_for("scene", spec.skill, spec.split, seed)
    lo, hi = spec.count_range
    n = int(rng.integers(lo, hi + 1))
    objects = _place(rng, spec, canvas, n)
    return Scene(
        canvas=canvas,
        objects=tuple(objects),
        skill=spec.skill,
        split=spec.split,
        seed=seed,
    )


FINE_NUMBER_RANGE = range(0, 17)
FINE_SIZE_BUCKETS: tuple[float, ...] = (2.0, 3.5, 7.0, 9.0, 11.0, 13.0, 15.0)
FINE_SHAPE_BUCKETS: dict[str, tuple[int, int]] = {
    # Named by height:width ratio; value is the (w, h) aspect pair.
    "H1W1": (1, 1),
    "H2W1": (1, 2),
    "H3W1": (1, 3),
    "H1W2": (2, 1),
    "H1W3": (3, 1),
}
FINE_POSITION_BUCKETS: tuple[str, ...] = ("random", "center", "boundary")


def fine_spec(skill: str, bucket: object) -> SplitSpec:
    """SplitSpec pinned to a single fine-grained bucket value."""
    if skill == "number":
        text = str(bucket)
        try:
            k = int(text.removeprefix("n"))
        except ValueError:
            raise BucketError(f"number bucket {bucket!r}") from None
        if k not in FINE_NUMBER_RANGE:
            raise BucketError(f"number bucket {bucket!r} outside 0..16")
        return SplitSpec("number", f"n{k}", (k, k), CLEVR_SIZES)
    if skill == "size":
        text = str(bucket)
        try:
            s = float(text.removeprefix("s"))
        except ValueError:
            raise BucketError(f"size bucket {bucket!r}") from None
        if s not in FINE_SIZE_BUCKETS:
            raise BucketError(f"size bucket {bucket!r} not one of {FINE_SIZE_BUCKETS}")
        # Boxes of 352 px and up cannot coexist recoverably; a single
        # object is the only detectable configuration at those scales.
        counts = (3, 5) if s <= 9 else (1, 1)
        tag = f"s{s:g}"
        return SplitSpec("size", tag, counts, (s,), overlap=s >= 7)
    if skill == "shape":
        b = str(bucket)
        if b not in FINE_SHAPE_BUCKETS:
            raise BucketError(
                f"shape bucket {bucket!r} not one of {sorted(FINE_SHAPE_BUCKETS)}"
            )
        return SplitSpec(
            "shape", b.lower(), (3, 5), CLEVR_SIZES,
            aspect_set=(FINE_SHAPE_BUCKETS[b],),
        )
    if skill == "position":
        b = str(bucket)
        if b not in FINE_POSITION_BUCKETS:
            raise BucketError(
                f"position bucket {bucket!r} not one of {FINE_POSITION_BUCKETS}"
            )
        placement = "uniform" if b == "random" else b
        return SplitSpec("position", b, (3, 10), CLEVR_SIZES, placement=placement)
    raise BucketError(f"unknown fine-grained skill {skill!r}")


def sample_fine(
    skill: str, bucket: object, seed: int, canvas: Canvas = DEFAULT_CANVAS
) -> Scene:
    return _sample_from_spec(fine_spec(skill, bucket), seed, canvas)


# Layout/caption enumeration over real-world categories lives in coco.py;
# re-exported here because it is part of the same sampling surface.
from .coco import (  # noqa: E402
    CocoLayoutSpec,
    coco_layout_count,
    sample_coco_layout,
)
