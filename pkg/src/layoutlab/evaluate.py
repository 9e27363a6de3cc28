"""Layout-accuracy evaluation.

A deterministic connected-component detector recovers objects from
rendered images by exact palette tone, and detections are scored against
ground-truth layouts with COCO-style average precision (IoU thresholds
0.50:0.05:0.95, 101-point interpolated PR curves, class mean over classes
present in the ground truth).

The detector handles partially occluded objects: a component whose pixel
mask is not exactly a complete silhouette is classified by testing which
shape model is consistent with the visible pixels, counting as admissible
only hidden pixels that lie under some other object.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import ndimage

from .core import (
    BBox,
    COLORS,
    MATERIALS,
    SHAPES,
    Scene,
    iou,
    scene_from_dict,
)
from .render import (
    DEFAULT_PALETTE,
    Palette,
    render_scene,
    silhouette_mask,
)

IOU_THRESHOLDS: tuple[float, ...] = tuple(np.arange(50, 100, 5) / 100.0)
UNKNOWN_CLASS = -1
MAX_DETECTIONS_PER_IMAGE = 100

_EIGHT_CONN = np.ones((3, 3), dtype=int)


class UndefinedMetricError(ValueError):
    """AP requested with no ground-truth objects at all."""


class ManifestMismatchError(ValueError):
    """Detections reference image ids absent from the manifest."""


@dataclass(frozen=True)
class Detection:
    image_id: str
    class_id: int
    box: BBox
    score: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [0,1]")


@dataclass(frozen=True)
class EvalReport:
    ap: float
    ap50: float
    per_class: dict[int, tuple[float, float]]
    n_images: int
    n_ground_truths: int
    n_detections: int


@lru_cache(maxsize=8192)
def _model(shape: str, w: int, h: int) -> np.ndarray:
    m = silhouette_mask(shape, w, h)
    m.setflags(write=False)
    return m


@lru_cache(maxsize=8192)
def _model_count(shape: str, w: int, h: int) -> int:
    return int(_model(shape, w, h).sum())


def classify_silhouette(vis: np.ndarray, occluded: np.ndarray,
                        w: int, h: int) -> tuple[str | None, bool]:
    """Classify a visible pixel mask spanning a w x h box.

    vis is the component's pixels within its bounding box; occluded marks
    pixels covered by other objects (admissible hiding places). Returns
    (shape name or None, whether the silhouette is complete). A complete
    silhouette must equal a shape model exactly; otherwise the shape whose
    model is consistent with the visible evidence at minimal cost wins.
    """
    npix = int(vis.sum())
    for shape in SHAPES:
        if npix == _model_count(shape, w, h) and bool(
            np.array_equal(vis, _model(shape, w, h))
        ):
            return shape, True
    best: str | None = None
    best_cost = None
    for shape in SHAPES:
        model = _model(shape, w, h)
        spill = int(np.count_nonzero(vis & ~model))
        unexplained = int(np.count_nonzero(model & ~vis & ~occluded))
        cost = spill + unexplained
        if best_cost is None or cost < best_cost:
            best, best_cost = shape, cost
    return best, False


def _tone_tables(palette: Palette) -> tuple[dict[int, int], set[int], int]:
    """Exact-tone lookup: RGB key -> color index, highlight keys, bg key."""
    def key(rgb: tuple[int, int, int]) -> int:
        return (rgb[0] << 16) | (rgb[1] << 8) | rgb[2]

    family: dict[int, int] = {}
    highlights: set[int] = set()
    for idx, name in enumerate(COLORS):
        family[key(palette.colors[name])] = idx
        hk = key(palette.highlight(name))
        family[hk] = idx
        highlights.add(hk)
    return family, highlights, key(palette.background)


def detect(image: np.ndarray, palette: Palette = DEFAULT_PALETTE) -> list[Detection]:
    """Recover object detections from a rendered image.

    Components are found per color family over exact palette tones; each
    component yields one detection with its pixel bounds. Components that
    resist classification come back with the unknown sentinel class and
    score 0.5 rather than being dropped.
    """
    return detect_with_id(image, "", palette)


def detect_with_id(image: np.ndarray, image_id: str,
                   palette: Palette = DEFAULT_PALETTE) -> list[Detection]:
    h, w = image.shape[:2]
    keys = (
        image[:, :, 0].astype(np.uint32) << 16
        | image[:, :, 1].astype(np.uint32) << 8
        | image[:, :, 2].astype(np.uint32)
    )
    family, highlight_keys, bg_key = _tone_tables(palette)

    fam_map = np.full((h, w), -2, dtype=np.int8)
    fam_map[keys == bg_key] = -1
    highlight_map = np.zeros((h, w), dtype=bool)
    present = np.unique(keys)
    for k in present.tolist():
        if k == bg_key:
            continue
        if k in family:
            fam_map[keys == k] = family[k]
            if k in highlight_keys:
                highlight_map[keys == k] = True
    nonbg = fam_map != -1

    detections: list[Detection] = []
    for fam in np.unique(fam_map).tolist():
        if fam < 0 and fam != -2:
            continue
        if fam == -1:
            continue
        labels, n = ndimage.label(fam_map == fam, structure=_EIGHT_CONN)
        slices = ndimage.find_objects(labels)
        for comp_idx, sl in enumerate(slices, start=1):
            comp = labels[sl] == comp_idx
            ys, xs = sl
            box = BBox(xs.start, ys.start, xs.stop, ys.stop)
            if fam == -2 or box.width < 2 or box.height < 2:
                detections.append(
                    Detection(image_id, UNKNOWN_CLASS, box, 0.5)
                )
                continue
            occluded = nonbg[sl] & (fam_map[sl] != fam)
            shape, _complete = classify_silhouette(
                comp, occluded, box.width, box.height
            )
            if shape is None:
                detections.append(Detection(image_id, UNKNOWN_CLASS, box, 0.5))
                continue
            metal = bool((highlight_map[sl] & comp).any())
            material = "metal" if metal else "rubber"
            class_id = (
                fam * len(MATERIALS) * len(SHAPES)
                + MATERIALS.index(material) * len(SHAPES)
                + SHAPES.index(shape)
            )
            detections.append(Detection(image_id, class_id, box, 1.0))

    if len(detections) > MAX_DETECTIONS_PER_IMAGE:
        detections.sort(
            key=lambda d: (-d.score, d.class_id, d.box.as_tuple())
        )
        detections = detections[:MAX_DETECTIONS_PER_IMAGE]
    return detections


def _sorted_detections(dets: list[tuple[int, Detection]]) -> list[tuple[int, Detection]]:
    # Stable descending-score order; insertion order breaks score ties.
    return sorted(dets, key=lambda pair: -pair[1].score)


def _class_ap(dets: list[tuple[int, Detection]],
              gts_by_image: dict[str, list[BBox]],
              threshold: float) -> float:
    n_gt = sum(len(v) for v in gts_by_image.values())
    order = _sorted_detections(dets)
    matched: set[tuple[str, int]] = set()
    tp = np.zeros(len(order))
    for i, (_, det) in enumerate(order):
        gts = gts_by_image.get(det.image_id, [])
        best_iou = 0.0
        best_j = -1
        for j, gt_box in enumerate(gts):
            if (det.image_id, j) in matched:
                continue
            v = iou(det.box, gt_box)
            if v > best_iou:
                best_iou, best_j = v, j
        if best_j >= 0 and best_iou >= threshold:
            matched.add((det.image_id, best_j))
            tp[i] = 1.0
    if n_gt == 0:
        return 0.0
    cum_tp = np.cumsum(tp)
    cum_fp = np.cumsum(1.0 - tp)
    recall = cum_tp / n_gt
    precision = cum_tp / np.maximum(cum_tp + cum_fp, 1e-12)
    # 101-point interpolation: max precision at recall >= r.
    ap = 0.0
    for r in np.linspace(0.0, 1.0, 101):
        mask = recall >= r - 1e-12
        ap += float(precision[mask].max()) if mask.any() else 0.0
    return ap / 101.0


def average_precision(
    detections: list[Detection],
    ground_truths: dict[str, list[tuple[int, BBox]]],
    iou_thresholds: tuple[float, ...] = IOU_THRESHOLDS,
) -> EvalReport:
    n_gt_total = sum(len(v) for v in ground_truths.values())
    if n_gt_total == 0:
        raise UndefinedMetricError("no ground-truth objects to score against")

    capped: list[tuple[int, Detection]] = []
    by_image: dict[str, list[tuple[int, Detection]]] = {}
    for i, det in enumerate(detections):
        by_image.setdefault(det.image_id, []).append((i, det))
    for img_dets in by_image.values():
        kept = _sorted_detections(img_dets)[:MAX_DETECTIONS_PER_IMAGE]
        capped.extend(kept)
    capped.sort(key=lambda pair: pair[0])

    classes = sorted({cls for gts in ground_truths.values() for cls, _ in gts})
    per_class: dict[int, tuple[float, float]] = {}
    ap_sum = 0.0
    ap50_sum = 0.0
    for cls in classes:
        gts_by_image = {
            img: [box for c, box in gts if c == cls]
            for img, gts in ground_truths.items()
        }
        gts_by_image = {img: v for img, v in gts_by_image.items() if v}
        cls_dets = [(i, d) for i, d in capped if d.class_id == cls]
        aps = [
            _class_ap(cls_dets, gts_by_image, t) for t in iou_thresholds
        ]
        cls_ap = float(np.mean(aps))
        cls_ap50 = aps[iou_thresholds.index(0.5)] if 0.5 in iou_thresholds else aps[0]
        per_class[cls] = (cls_ap, cls_ap50)
        ap_sum += cls_ap
        ap50_sum += cls_ap50

    n_cls = len(classes)
    return EvalReport(
        ap=ap_sum / n_cls,
        ap50=ap50_sum / n_cls,
        per_class=per_class,
        n_images=len(ground_truths),
        n_ground_truths=n_gt_total,
        n_detections=len(detections),
    )


def scene_ground_truths(scenes: dict[str, Scene]) -> dict[str, list[tuple[int, BBox]]]:
    return {
        image_id: [(obj.class_id, obj.box) for obj in scene.objects]
        for image_id, scene in scenes.items()
    }


def manifest_image_id(row: dict) -> str:
    return f"{row['skill']}_{row['split']}_{row['seed']}"


def load_manifest(path: str | Path) -> dict[str, Scene]:
    scenes: dict[str, Scene] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            scene = scene_from_dict(
                row["scene"], skill=row["skill"], split=row["split"],
                seed=int(row["seed"]),
            )
            scenes[manifest_image_id(row)] = scene
    return scenes


def load_detections(path: str | Path) -> list[Detection]:
    out: list[Detection] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            x1, y1, x2, y2 = row["box"]
            out.append(
                Detection(
                    image_id=row["image_id"],
                    class_id=int(row["class_id"]),
                    box=BBox(int(x1), int(y1), int(x2), int(y2)),
                    score=float(row["score"]),
                )
            )
    return out


def save_detections(dets: list[Detection], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for d in dets:
            fh.write(json.dumps({
                "image_id": d.image_id,
                "class_id": d.class_id,
                "box": list(d.box.as_tuple()),
                "score": d.score,
            }) + "\n")


def evaluate_run(
    gt_manifest: str | Path | dict[str, Scene],
    detections_file: str | Path | list[Detection],
) -> EvalReport:
    scenes = (
        gt_manifest if isinstance(gt_manifest, dict) else load_manifest(gt_manifest)
    )
    dets = (
        detections_file
        if isinstance(detections_file, list)
        else load_detections(detections_file)
    )
    unknown_ids = {d.image_id for d in dets} - set(scenes)
    if unknown_ids:
        raise ManifestMismatchError(
            f"detections reference unknown image ids: {sorted(unknown_ids)[:5]}"
        )
    return average_precision(dets, scene_ground_truths(scenes))


def shuffled_baseline(
    gt_manifest: str | Path | dict[str, Scene],
    seed: int,
    palette: Palette = DEFAULT_PALETTE,
) -> EvalReport:
    """Score each layout against a different image's detections.

    Every layout is paired with the detections of a uniformly chosen
    other ground-truth image, the sanity baseline expected to land at
    roughly zero AP.
    """
    scenes = (
        gt_manifest if isinstance(gt_manifest, dict) else load_manifest(gt_manifest)
    )
    ids = sorted(scenes)
    if len(ids) < 2:
        raise ValueError("shuffled baseline needs at least two images")
    rng = np.random.default_rng(seed)
    per_image: dict[str, list[Detection]] = {}
    for image_id in ids:
        img, _ = render_scene(scenes[image_id], palette)
        per_image[image_id] = detect_with_id(img, image_id, palette)
    shuffled: list[Detection] = []
    for i, image_id in enumerate(ids):
        j = int(rng.integers(0, len(ids) - 1))
        if j >= i:
            j += 1
        for d in per_image[ids[j]]:
            shuffled.append(Detection(image_id, d.class_id, d.box, d.score))
    return average_precision(shuffled, scene_ground_truths(scenes))


SPLIT_COLUMNS: tuple[str, ...] = (
    "few", "many", "center", "boundary", "tiny", "large",
    "horizontal", "vertical",
)


def report_table(reports: dict[tuple[str, str], EvalReport]) -> tuple[str, str]:
    """Render per-method, per-split AP/AP50 as text and CSV."""
    methods = sorted({m for m, _ in reports})
    splits = [s for s in SPLIT_COLUMNS if any((m, s) in reports for m in methods)]
    if not splits:
        splits = sorted({s for _, s in reports})

    def cell(m: str, s: str) -> str:
        rep = reports.get((m, s))
        if rep is None:
            return "-"
        return f"{rep.ap * 100:.1f}/{rep.ap50 * 100:.1f}"

    def avg_cell(m: str) -> str:
        reps = [reports[(m, s)] for s in splits if (m, s) in reports]
        if not reps:
            return "-"
        ap = float(np.mean([r.ap for r in reps]))
        ap50 = float(np.mean([r.ap50 for r in reps]))
        return f"{ap * 100:.1f}/{ap50 * 100:.1f}"

    header = ["method", *splits, "avg"]
    rows = [[m, *[cell(m, s) for s in splits], avg_cell(m)] for m in methods]

    widths = [
        max(len(header[c]), *(len(r[c]) for r in rows)) if rows else len(header[c])
        for c in range(len(header))
    ]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(header, widths)),
        "  ".join("-" * w for w in widths),
    ]
    for r in rows:
        lines.append("  ".join(v.ljust(w) for v, w in zip(r, widths)))
    text = "\n".join(lines)

    csv_lines = [",".join(header)]
    for r in rows:
        csv_lines.append(",".join(r))
    return text, "\n".join(csv_lines) + "\n"
