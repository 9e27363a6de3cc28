"""Shared fixtures and independent oracles the tests check against.

The oracles here recompute results through deliberately different
routes than the package (pixel rasterization instead of closed-form
area arithmetic, exact fractions plus scalar loops instead of
vectorized numpy) so agreement is evidence, not tautology.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
from hypothesis import settings

from layoutlab.core import (
    BBox,
    COLORS,
    Canvas,
    MATERIALS,
    ObjectSpec,
    SHAPES,
    Scene,
    iou,
)
from layoutlab.sampler import CENTER_MARGIN_FRACTION, PAIRWISE_IOU_CAP, box_dims

settings.register_profile("suite", deadline=None, max_examples=60)
settings.load_profile("suite")


Box = tuple[int, int, int, int]


def _corners(box) -> Box:
    if hasattr(box, "x1"):
        return (box.x1, box.y1, box.x2, box.y2)
    return tuple(box)


def pixel_iou(a: Box, b: Box) -> float:
    """IoU by rasterizing both boxes onto a shared boolean grid."""
    a, b = _corners(a), _corners(b)
    w = max(a[2], b[2])
    h = max(a[3], b[3])
    ga = np.zeros((h, w), dtype=bool)
    gb = np.zeros((h, w), dtype=bool)
    ga[a[1]:a[3], a[0]:a[2]] = True
    gb[b[1]:b[3], b[0]:b[2]] = True
    union = int((ga | gb).sum())
    if union == 0:
        return 0.0
    return int((ga & gb).sum()) / union


IOU_THRESHOLDS = tuple(t / 100 for t in range(50, 100, 5))


def _interp101(points: list[tuple[Fraction, Fraction]]) -> float:
    """Average of max precision at recall >= r over r in {0, .01, .., 1}."""
    total = 0.0
    for i in range(101):
        r = Fraction(i, 100)
        best = 0.0
        hit = False
        for recall, precision in points:
            if float(recall) >= float(r) - 1e-12:
                hit = True
                best = max(best, float(precision))
        total += best if hit else 0.0
    return total / 101.0


def _one_class_ap(dets: list[tuple[str, Box, float, int]],
                  gts: dict[str, list[Box]], threshold: float) -> float:
    n_gt = sum(len(v) for v in gts.values())
    if n_gt == 0:
        return 0.0
    order = sorted(range(len(dets)), key=lambda i: (-dets[i][2], dets[i][3]))
    used: set[tuple[str, int]] = set()
    points: list[tuple[Fraction, Fraction]] = []
    tp = 0
    for rank, i in enumerate(order, start=1):
        image_id, box, _score, _idx = dets[i]
        best_iou, best_j = 0.0, -1
        for j, gt_box in enumerate(gts.get(image_id, [])):
            if (image_id, j) in used:
                continue
            v = pixel_iou(box, gt_box)
            if v > best_iou:
                best_iou, best_j = v, j
        if best_j >= 0 and best_iou >= threshold:
            used.add((image_id, best_j))
            tp += 1
        points.append((Fraction(tp, n_gt), Fraction(tp, rank)))
    return _interp101(points)


def ap_oracle(
    dets: list[tuple[str, int, Box, float]],
    gts: dict[str, list[tuple[int, Box]]],
    thresholds: tuple[float, ...] = IOU_THRESHOLDS,
) -> tuple[float, float]:
    """(AP, AP50) via scalar greedy matching over exact fractions.

    Matching rules: detections in descending score, insertion order on
    ties; each one takes the unmatched ground truth with the highest
    IoU, earliest index on ties, when that IoU clears the threshold.
    Classes absent from the ground truth are skipped.
    """
    per_image: dict[str, list[tuple[str, int, Box, float, int]]] = {}
    for idx, (image_id, cls, box, score) in enumerate(dets):
        per_image.setdefault(image_id, []).append(
            (image_id, cls, box, score, idx)
        )
    kept: list[tuple[str, int, Box, float, int]] = []
    for rows in per_image.values():
        rows = sorted(rows, key=lambda r: (-r[3], r[4]))[:100]
        kept.extend(rows)
    kept.sort(key=lambda r: r[4])

    classes = sorted({cls for rows in gts.values() for cls, _ in rows})
    ap_total, ap50_total = 0.0, 0.0
    for cls in classes:
        cls_gts = {
            image_id: [box for c, box in rows if c == cls]
            for image_id, rows in gts.items()
        }
        cls_gts = {k: v for k, v in cls_gts.items() if v}
        cls_dets = [
            (image_id, box, score, idx)
            for image_id, c, box, score, idx in kept
            if c == cls
        ]
        values = [_one_class_ap(cls_dets, cls_gts, t) for t in thresholds]
        ap_total += sum(values) / len(values)
        ap50_total += values[thresholds.index(0.5)]
    n = len(classes)
    return ap_total / n, ap50_total / n


def check_scene_conformance(scene, spec) -> None:
    """Assert a sampled scene obeys every promise its split makes."""
    lo, hi = spec.count_range
    assert lo <= len(scene.objects) <= hi
    allowed_dims = {
        box_dims(s, a) for s in spec.size_set for a in spec.aspect_set
    }
    for obj in scene.objects:
        b = obj.box
        b.validate(scene.canvas)
        w, h = b.x2 - b.x1, b.y2 - b.y1
        if spec.placement == "boundary":
            # Edge snapping trims up to a third off the clipped dimension.
            assert any(
                (w == nw and nh - nh // 3 <= h <= nh)
                or (h == nh and nw - nw // 3 <= w <= nw)
                for nw, nh in allowed_dims
            ), (w, h)
        else:
            assert (w, h) in allowed_dims
        assert obj.shape in SHAPES
        assert obj.material in MATERIALS
        assert obj.color in COLORS
    if spec.placement == "center":
        mx = int(round(scene.canvas.w * CENTER_MARGIN_FRACTION))
        my = int(round(scene.canvas.h * CENTER_MARGIN_FRACTION))
        for obj in scene.objects:
            b = obj.box
            assert mx <= b.x1 + (b.x2 - b.x1) // 2 <= scene.canvas.w - mx
            assert my <= b.y1 + (b.y2 - b.y1) // 2 <= scene.canvas.h - my
    if spec.placement == "boundary":
        for obj in scene.objects:
            b = obj.box
            assert (
                b.x1 == 0
                or b.y1 == 0
                or b.x2 == scene.canvas.w
                or b.y2 == scene.canvas.h
            )
    for a, b in itertools.combinations(scene.objects, 2):
        if spec.overlap:
            assert iou(a.box, b.box) <= PAIRWISE_IOU_CAP + 1e-12
        else:
            # Disjoint with a one-pixel gap in at least one direction.
            assert (
                a.box.x2 < b.box.x1
                or b.box.x2 < a.box.x1
                or a.box.y2 < b.box.y1
                or b.box.y2 < a.box.y1
            )


def make_scene(objects: list[tuple[str, str, str, Box]],
               side: int = 512, skill: str = "number",
               split: str = "few", seed: int = 0) -> Scene:
    canvas = Canvas(side, side)
    specs = tuple(
        ObjectSpec(shape=s, material=m, color=c, box=BBox(*box))
        for s, m, c, box in objects
    )
    return Scene(canvas=canvas, objects=specs, skill=skill,
                 split=split, seed=seed)
