import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from layoutlab.backends import ProceduralBackend
from layoutlab.codec import BACKGROUND_PROMPT
from layoutlab.core import (
    BBox,
    Canvas,
    Layout,
    background_mask,
    load_image,
)
from layoutlab.engine import (
    EngineOptions,
    HistoryEmptyError,
    export_trace,
    generate,
    new_session,
    order_regions,
    session_add,
    session_remove,
    session_undo,
)
from layoutlab.render import DEFAULT_PALETTE

CANVAS = Canvas(256, 256)
BACKEND = ProceduralBackend()


def layout_of(pairs, canvas=CANVAS):
    return Layout.of(canvas, pairs)


FIVE = layout_of([
    ("red metal cube", BBox(10, 10, 60, 60)),
    ("blue rubber sphere", BBox(70, 10, 120, 60)),
    ("green metal cylinder", BBox(10, 70, 60, 120)),
    ("yellow rubber cube", BBox(70, 70, 120, 120)),
    ("purple metal sphere", BBox(130, 130, 200, 200)),
])


def test_five_objects_make_six_steps():
    _, traces = generate(FIVE, BACKEND)
    assert len(traces) == 6
    prompts = [t.prompt for t in traces]
    assert prompts == [
        "Add red metal cube",
        "Add blue rubber sphere",
        "Add green metal cylinder",
        "Add yellow rubber cube",
        "Add purple metal sphere",
        BACKGROUND_PROMPT,
    ]
    assert [t.step_index for t in traces] == list(range(6))


def test_empty_layout_is_one_background_step():
    layout = layout_of([])
    img, traces = generate(layout, BACKEND)
    assert len(traces) == 1
    assert traces[0].prompt == BACKGROUND_PROMPT
    assert traces[0].mask.all()
    assert (img == DEFAULT_PALETTE.background).all()


def test_background_step_mask_is_box_complement():
    _, traces = generate(FIVE, BACKEND)
    assert np.array_equal(traces[-1].mask, background_mask(FIVE))


def test_order_given_is_identity():
    assert order_regions(FIVE, "given") == (0, 1, 2, 3, 4)


def test_order_top_to_bottom_sorts_by_y():
    layout = layout_of([
        ("red metal cube", BBox(0, 10, 40, 50)),
        ("red metal cube", BBox(0, 300, 40, 340)),
        ("red metal cube", BBox(0, 150, 40, 190)),
    ], canvas=Canvas(512, 512))
    assert order_regions(layout, "top_to_bottom") == (0, 2, 1)
    assert order_regions(layout, "bottom_to_top") == (1, 2, 0)


def test_order_ties_break_by_x_then_index():
    layout = layout_of([
        ("red metal cube", BBox(90, 20, 130, 60)),
        ("red metal cube", BBox(10, 20, 50, 60)),
        ("red metal cube", BBox(10, 20, 60, 70)),
    ])
    assert order_regions(layout, "top_to_bottom") == (1, 2, 0)


def test_order_random_is_a_seeded_permutation():
    a = order_regions(FIVE, "random", seed=3)
    b = order_regions(FIVE, "random", seed=3)
    assert a == b
    assert sorted(a) == [0, 1, 2, 3, 4]
    assert order_regions(FIVE, "random", seed=4) != a


def test_options_reject_unknown_mode_and_order():
    with pytest.raises(ValueError):
        EngineOptions(mode="blend")
    with pytest.raises(ValueError):
        EngineOptions(order="spiral")


def test_paste_never_touches_pixels_outside_masks():
    rng = np.random.default_rng(0)
    initial = rng.integers(0, 256, size=(256, 256, 3), dtype=np.uint8)
    img, traces = generate(FIVE, BACKEND, initial=initial)
    outside = np.ones((256, 256), dtype=bool)
    for trace in traces:
        outside &= ~trace.mask
    assert np.array_equal(img[outside], initial[outside])


def test_initial_canvas_mismatch_rejected():
    wrong = np.zeros((64, 64, 3), dtype=np.uint8)
    with pytest.raises(ValueError):
        generate(FIVE, BACKEND, initial=wrong)


def test_non_overlapping_layout_is_order_invariant():
    finals = []
    for order in ("given", "top_to_bottom", "bottom_to_top", "random"):
        img, _ = generate(FIVE, BACKEND, EngineOptions(order=order, seed=9))
        finals.append(img)
    for other in finals[1:]:
        assert np.array_equal(finals[0], other)


def test_overlap_resolves_to_later_step():
    a = BBox(20, 20, 120, 120)
    b = BBox(70, 70, 170, 170)
    layout = layout_of([
        ("red metal cube", a),
        ("blue metal cube", b),
    ])
    img, _ = generate(layout, BACKEND)
    solo_b, _ = generate(layout_of([("blue metal cube", b)]), BACKEND)
    inter = np.zeros((256, 256), dtype=bool)
    inter[70:120, 70:120] = True
    assert np.array_equal(img[inter], solo_b[inter])


class Scribbler:
    """Backend that vandalizes a pixel outside the mask on every call."""

    def __call__(self, ctx, prompt, mask):
        out = ctx.copy()
        out[mask] = (9, 9, 9)
        out[0, 0] = (1, 2, 3)
        return out


def test_paste_clips_backend_output_to_mask():
    layout = layout_of([("red metal cube", BBox(50, 50, 100, 100))])
    _, traces = generate(layout, Scribbler(), EngineOptions(mode="paste"))
    assert tuple(traces[0].committed[0, 0]) == tuple(
        np.full(3, DEFAULT_PALETTE.background, dtype=np.uint8)
    )


def test_repaint_trusts_backend_output():
    layout = layout_of([("red metal cube", BBox(50, 50, 100, 100))])
    _, traces = generate(layout, Scribbler(), EngineOptions(mode="repaint"))
    assert tuple(traces[0].committed[0, 0]) == (1, 2, 3)


def test_repaint_matches_paste_for_well_behaved_backend():
    paste, _ = generate(FIVE, BACKEND, EngineOptions(mode="paste"))
    repaint, _ = generate(FIVE, BACKEND, EngineOptions(mode="repaint"))
    assert np.array_equal(paste, repaint)


def test_backend_failure_carries_step_index():
    calls = []

    def flaky(ctx, prompt, mask):
        calls.append(prompt)
        if len(calls) == 3:
            raise RuntimeError("boom")
        return ctx.copy()

    with pytest.raises(RuntimeError) as info:
        generate(FIVE, flaky)
    assert info.value.step_index == 2


@settings(max_examples=25)
@given(st.data())
def test_generated_traces_cover_every_region(data):
    n = data.draw(st.integers(min_value=0, max_value=4))
    boxes = []
    for i in range(n):
        x = data.draw(st.integers(min_value=0, max_value=200))
        y = data.draw(st.integers(min_value=0, max_value=200))
        w = data.draw(st.integers(min_value=8, max_value=56))
        h = data.draw(st.integers(min_value=8, max_value=56))
        boxes.append(BBox(x, y, x + w, y + h))
    layout = layout_of([("red metal cube", b) for b in boxes])
    img, traces = generate(layout, BACKEND)
    assert len(traces) == n + 1
    union = np.zeros((256, 256), dtype=bool)
    for t in traces:
        union |= t.mask
    assert union.all()
    assert np.array_equal(img, traces[-1].committed)


def test_session_starts_blank():
    session = new_session(CANVAS)
    assert session.canvas == CANVAS
    assert (session.image == DEFAULT_PALETTE.background).all()
    assert session.objects == []


def test_session_add_confines_change_to_box():
    session = new_session(CANVAS)
    before = session.image.copy()
    box = BBox(30, 40, 90, 100)
    session = session_add(session, "cyan metal sphere", box, BACKEND)
    assert session.objects == [("cyan metal sphere", box)]
    changed = (session.image != before).any(axis=2)
    ys, xs = np.nonzero(changed)
    assert xs.min() >= 30 and xs.max() < 90
    assert ys.min() >= 40 and ys.max() < 100


def test_session_add_rejects_out_of_bounds_box():
    session = new_session(CANVAS)
    with pytest.raises(ValueError):
        session_add(session, "red metal cube", BBox(200, 200, 300, 300), BACKEND)


def test_session_undo_restores_bytes():
    session = new_session(CANVAS)
    session = session_add(session, "red metal cube", BBox(10, 10, 70, 70), BACKEND)
    snapshot = session.image.copy()
    objects = list(session.objects)
    session = session_add(session, "blue rubber cube", BBox(100, 100, 160, 160), BACKEND)
    session = session_undo(session)
    assert np.array_equal(session.image, snapshot)
    assert session.objects == objects
    session = session_undo(session)
    assert (session.image == DEFAULT_PALETTE.background).all()
    assert session.objects == []


def test_session_undo_empty_history():
    with pytest.raises(HistoryEmptyError):
        session_undo(new_session(CANVAS))


def test_session_remove_restores_background_and_drops_object():
    box = BBox(40, 40, 120, 120)
    session = new_session(CANVAS)
    session = session_add(session, "green metal cylinder", box, BACKEND)
    session = session_remove(session, box, BACKEND)
    assert session.objects == []
    assert (session.image == DEFAULT_PALETTE.background).all()


def test_session_remove_only_matches_exact_box():
    box = BBox(40, 40, 120, 120)
    session = new_session(CANVAS)
    session = session_add(session, "green metal cylinder", box, BACKEND)
    session = session_remove(session, BBox(40, 40, 120, 121), BACKEND)
    assert session.objects == [("green metal cylinder", box)]


def test_disjoint_adds_commute():
    a = ("red metal cube", BBox(10, 10, 60, 60))
    b = ("blue rubber sphere", BBox(100, 100, 150, 150))
    one = new_session(CANVAS)
    one = session_add(one, *a, BACKEND)
    one = session_add(one, *b, BACKEND)
    two = new_session(CANVAS)
    two = session_add(two, *b, BACKEND)
    two = session_add(two, *a, BACKEND)
    assert np.array_equal(one.image, two.image)


def test_new_session_rejects_unknown_mode():
    with pytest.raises(ValueError):
        new_session(CANVAS, mode="blend")


def test_export_trace_round_trips(tmp_path):
    img, traces = generate(FIVE, BACKEND)
    manifest = export_trace(traces, tmp_path / "trace")
    rows = [json.loads(line) for line in manifest.read_text().splitlines()]
    assert [r["step"] for r in rows] == list(range(6))
    assert rows[-1]["prompt"] == BACKGROUND_PROMPT
    final = load_image(manifest.parent / rows[-1]["image_file"])
    assert np.array_equal(final, img)
