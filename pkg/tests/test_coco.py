import pytest

from layoutlab.coco import (
    COCO_CATEGORIES,
    COMBINATION_PAIRS,
    NUMBER_SPLITS,
    RELATIONS,
    coco_layout_count,
    plural,
    sample_coco_layout,
)
from layoutlab.core import Canvas


def test_pool_cardinalities():
    assert coco_layout_count("number") == 720
    assert coco_layout_count("position") == 320
    assert coco_layout_count("size") == 720
    assert coco_layout_count("combination") == 360


def test_total_layout_count():
    total = sum(
        coco_layout_count(skill)
        for skill in ("number", "position", "size", "combination")
    )
    assert total == 2120


def test_split_counts_partition_each_skill():
    assert coco_layout_count("number", "few") + coco_layout_count(
        "number", "many"
    ) == 480
    for skill, splits in [
        ("position", ("boundary", "center")),
        ("size", ("tiny", "large")),
        ("combination", ("common", "uncommon")),
    ]:
        parts = [coco_layout_count(skill, s) for s in splits]
        assert sum(parts) == coco_layout_count(skill)
        assert parts[0] == parts[1]


def test_vocabulary_size():
    assert len(COCO_CATEGORIES) == 40
    assert len(set(COCO_CATEGORIES)) == 40


def test_number_caption_template():
    caption, layout = sample_coco_layout("number", "few", 0)
    n = len(layout.regions)
    assert n in NUMBER_SPLITS["few"]
    first = COCO_CATEGORIES[0]
    assert caption == f"a photo of {n} {plural(first)}"
    assert all(r.caption == first for r in layout.regions)


def test_plural_forms():
    assert plural("person") == "people"
    assert plural("sheep") == "sheep"
    assert plural("bus") == "buses"
    assert plural("dog") == "dogs"


def test_combination_caption_template():
    caption, layout = sample_coco_layout("combination", "common", 0)
    rel = RELATIONS[0]
    a, b = COMBINATION_PAIRS[(rel, "common")][0]
    assert caption == f"{a} is {rel} {b}"
    assert [r.caption for r in layout.regions] == [a, b]
    assert len(layout.regions) == 2


def test_layouts_fit_canvas():
    for skill in ("number", "position", "size", "combination"):
        count = coco_layout_count(skill)
        for index in range(0, count, 37):
            _, layout = sample_coco_layout(skill, None, index)
            assert layout.regions
            for region in layout.regions:
                region.box.validate(layout.canvas)


def test_enumeration_is_deterministic():
    a = sample_coco_layout("size", "large", 123)
    b = sample_coco_layout("size", "large", 123)
    assert a[0] == b[0]
    assert a[1].regions == b[1].regions


def test_split_enumeration_prefixes_skill_pool():
    # Whole-skill enumeration walks few before many in the same order.
    caption, layout = sample_coco_layout("number", "few", 5)
    whole_caption, whole_layout = sample_coco_layout("number", None, 5)
    assert caption == whole_caption
    assert layout.regions == whole_layout.regions


def test_index_out_of_range():
    with pytest.raises(IndexError):
        sample_coco_layout("number", None, 720)
    with pytest.raises(IndexError):
        sample_coco_layout("number", None, -1)
    with pytest.raises(IndexError):
        sample_coco_layout("position", "center", 160)


def test_unknown_skill_and_split():
    with pytest.raises(KeyError):
        coco_layout_count("texture")
    with pytest.raises(KeyError):
        coco_layout_count("number", "all")
    with pytest.raises(KeyError):
        sample_coco_layout("combination", "rare", 0)


def test_custom_canvas_scales_geometry():
    _, small = sample_coco_layout("position", "center", 3, canvas=Canvas(256, 256))
    assert small.canvas == Canvas(256, 256)
    for region in small.regions:
        region.box.validate(small.canvas)
