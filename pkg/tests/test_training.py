import json

import numpy as np
import pytest

from layoutlab.codec import BACKGROUND_PROMPT
from layoutlab.core import load_image, mask_from_box, save_image
from layoutlab.render import DEFAULT_PALETTE
from layoutlab.training import (
    ManifestError,
    NoObjectError,
    TrainingExample,
    export_manifest,
    make_bg_example,
    make_fg_example,
    validate_manifest,
)

from conftest import make_scene

QUAD_BOXES = {
    "red": (4, 4, 20, 20),
    "blue": (28, 4, 44, 20),
    "green": (4, 28, 20, 44),
    "purple": (28, 28, 44, 44),
}


def quad_scene():
    return make_scene(
        [("cube", "rubber", color, box) for color, box in QUAD_BOXES.items()],
        side=64,
    )


def test_fg_example_from_single_object_scene():
    scene = make_scene([("sphere", "metal", "cyan", (8, 8, 40, 40))], side=64)
    ex = make_fg_example(scene, np.random.default_rng(0))
    assert ex.task == "foreground"
    assert ex.prompt == "Add cyan metal sphere"
    assert (ex.context == DEFAULT_PALETTE.background).all()
    assert np.array_equal(
        ex.mask, mask_from_box(scene.objects[0].box, scene.canvas)
    )
    assert (ex.target != DEFAULT_PALETTE.background).any()


def test_fg_example_requires_an_object():
    empty = make_scene([], side=64)
    with pytest.raises(NoObjectError):
        make_fg_example(empty, np.random.default_rng(0))


def test_fg_changes_confined_to_mask():
    scene = quad_scene()
    rng = np.random.default_rng(3)
    for _ in range(50):
        ex = make_fg_example(scene, rng)
        changed = (ex.context != ex.target).any(axis=2)
        assert not (changed & ~ex.mask).any()
        assert changed.any()


def test_fg_context_excludes_target_object():
    scene = quad_scene()
    rng = np.random.default_rng(5)
    for _ in range(50):
        ex = make_fg_example(scene, rng)
        assert (ex.context[ex.mask] == DEFAULT_PALETTE.background).all()


def test_fg_subset_and_target_distributions():
    scene = quad_scene()
    rng = np.random.default_rng(0)
    tones = {c: DEFAULT_PALETTE.colors[c] for c in QUAD_BOXES}
    sizes = {0: 0, 1: 0, 2: 0, 3: 0}
    targets = dict.fromkeys(QUAD_BOXES, 0)
    n = 4000
    for _ in range(n):
        ex = make_fg_example(scene, rng)
        present = sum(
            (ex.context == tone).all(axis=2).any() for tone in tones.values()
        )
        sizes[present] += 1
        ys, xs = np.nonzero(ex.mask)
        bb = (xs.min(), ys.min(), xs.max() + 1, ys.max() + 1)
        color = next(c for c, b in QUAD_BOXES.items() if b == bb)
        targets[color] += 1
    # Context keeps each leftover object with probability one half.
    binomial = {0: 1 / 8, 1: 3 / 8, 2: 3 / 8, 3: 1 / 8}
    for k, p in binomial.items():
        assert abs(sizes[k] / n - p) < 0.03, (k, sizes[k])
    for color, count in targets.items():
        assert abs(count / n - 0.25) < 0.03, color


def test_fg_examples_are_rng_driven_but_reproducible():
    scene = quad_scene()
    a = make_fg_example(scene, np.random.default_rng(42))
    b = make_fg_example(scene, np.random.default_rng(42))
    assert np.array_equal(a.context, b.context)
    assert np.array_equal(a.target, b.target)
    assert a.prompt == b.prompt


def test_bg_example_contract():
    scene = quad_scene()
    ex = make_bg_example(scene)
    assert ex.task == "background"
    assert ex.prompt == BACKGROUND_PROMPT
    assert np.array_equal(ex.context, ex.target)
    boxes = np.zeros((64, 64), dtype=bool)
    for x1, y1, x2, y2 in QUAD_BOXES.values():
        boxes[y1:y2, x1:x2] = True
    assert np.array_equal(ex.mask, ~boxes)


def test_bg_example_of_empty_scene_masks_everything():
    ex = make_bg_example(make_scene([], side=64))
    assert ex.mask.all()
    assert (ex.context == DEFAULT_PALETTE.background).all()


def test_training_example_validation():
    img = np.zeros((8, 8, 3), dtype=np.uint8)
    mask = np.zeros((8, 8), dtype=bool)
    with pytest.raises(ValueError):
        TrainingExample(img, mask, "Add red metal cube", img, "inpaint")
    with pytest.raises(ValueError):
        TrainingExample(
            img, np.zeros((4, 4), dtype=bool), "Add red metal cube", img,
            "foreground",
        )


def scenes_for_export():
    return [
        quad_scene(),
        make_scene([("cylinder", "metal", "yellow", (10, 20, 40, 56))], side=64),
        make_scene([], side=64),
    ]


def test_export_then_validate(tmp_path):
    manifest = export_manifest(
        scenes_for_export(), n_examples=40, fg_ratio=0.5,
        out_dir=tmp_path / "t", seed=0,
    )
    assert manifest.name == "manifest.jsonl"
    rows = [json.loads(line) for line in manifest.read_text().splitlines()]
    assert len(rows) == 40
    assert {r["task"] for r in rows} == {"foreground", "background"}
    assert validate_manifest(tmp_path / "t") == 40


def test_export_is_deterministic(tmp_path):
    scenes = scenes_for_export()
    m1 = export_manifest(scenes, 12, out_dir=tmp_path / "a", seed=5)
    m2 = export_manifest(scenes, 12, out_dir=tmp_path / "b", seed=5)
    assert m1.read_bytes() == m2.read_bytes()
    for sub in ("context", "mask", "target"):
        a = (tmp_path / "a" / sub / "000003.png").read_bytes()
        b = (tmp_path / "b" / sub / "000003.png").read_bytes()
        assert a == b


def test_export_fg_ratio_extremes(tmp_path):
    rows = export_manifest(
        scenes_for_export(), 15, fg_ratio=0.0, out_dir=tmp_path / "bg", seed=1
    ).read_text().splitlines()
    assert all(json.loads(r)["task"] == "background" for r in rows)
    rows = export_manifest(
        scenes_for_export(), 15, fg_ratio=1.0, out_dir=tmp_path / "fg", seed=1
    ).read_text().splitlines()
    assert all(json.loads(r)["task"] == "foreground" for r in rows)


def test_export_fg_ratio_is_respected(tmp_path):
    manifest = export_manifest(
        scenes_for_export(), 600, fg_ratio=0.3, out_dir=tmp_path / "t", seed=2
    )
    rows = [json.loads(line) for line in manifest.read_text().splitlines()]
    frac = sum(r["task"] == "foreground" for r in rows) / len(rows)
    assert abs(frac - 0.3) < 0.06


def test_export_rejections(tmp_path):
    with pytest.raises(ValueError):
        export_manifest([], 5, out_dir=tmp_path / "x")
    with pytest.raises(ValueError):
        export_manifest(scenes_for_export(), 5, fg_ratio=1.5,
                        out_dir=tmp_path / "y")
    with pytest.raises(NoObjectError):
        export_manifest(
            [make_scene([], side=64)], 5, fg_ratio=1.0, out_dir=tmp_path / "z",
            seed=0,
        )


def _exported(tmp_path):
    out = tmp_path / "t"
    export_manifest(scenes_for_export(), 30, fg_ratio=0.5, out_dir=out, seed=0)
    rows = [
        json.loads(line)
        for line in (out / "manifest.jsonl").read_text().splitlines()
    ]
    return out, rows


def test_validator_catches_pixels_outside_mask(tmp_path):
    out, rows = _exported(tmp_path)
    row = next(r for r in rows if r["task"] == "foreground")
    target = load_image(out / row["target"]).copy()
    target[0, 0] = (1, 2, 3)
    save_image(target, out / row["target"])
    with pytest.raises(ManifestError, match="outside the mask"):
        validate_manifest(out)


def test_validator_catches_holed_mask(tmp_path):
    out, rows = _exported(tmp_path)
    row = next(r for r in rows if r["task"] == "foreground")
    from layoutlab.core import load_mask, save_mask

    mask = load_mask(out / row["mask"]).copy()
    ys, xs = np.nonzero(mask)
    mask[ys[0], xs[0]] = False
    save_mask(mask, out / row["mask"])
    with pytest.raises(ManifestError, match="not one box"):
        validate_manifest(out)


def test_validator_catches_painted_background(tmp_path):
    out, rows = _exported(tmp_path)
    row = next(r for r in rows if r["task"] == "background")
    from layoutlab.core import load_mask

    img = load_image(out / row["context"]).copy()
    mask = load_mask(out / row["mask"])
    ys, xs = np.nonzero(mask)
    img[ys[0], xs[0]] = DEFAULT_PALETTE.colors["red"]
    save_image(img, out / row["context"])
    save_image(img, out / row["target"])
    with pytest.raises(ManifestError, match="painted pixels under the mask"):
        validate_manifest(out)


def test_validator_catches_bad_prompt(tmp_path):
    out, rows = _exported(tmp_path)
    idx = next(i for i, r in enumerate(rows) if r["task"] == "background")
    rows[idx]["prompt"] = "Add blue backdrop"
    with open(out / "manifest.jsonl", "w") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")
    with pytest.raises(ManifestError, match="prompt"):
        validate_manifest(out)
