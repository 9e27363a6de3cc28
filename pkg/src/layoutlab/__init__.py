"""Benchmark harness for layout-guided image synthesis.

Scenes of colored primitives are sampled per spatial-control skill,
rendered deterministically, synthesized step by step through inpainting
backends, and scored with detection-based average precision.
"""

from .core import (
    BBox,
    Canvas,
    COLORS,
    DimensionError,
    Layout,
    MATERIALS,
    NUM_CLASSES,
    ObjectSpec,
    Region,
    SHAPES,
    Scene,
    background_mask,
    caption_to_class_id,
    class_id_to_attributes,
    composite,
    iou,
    load_image,
    load_mask,
    mask_from_box,
    save_image,
    save_mask,
    scene_from_dict,
    scene_to_dict,
    union_mask,
)
from .render import DEFAULT_PALETTE, Palette, render_object_patch, render_scene
from .sampler import OOD_SPLITS, SPLITS, sample_fine, sample_scene
from .codec import (
    BACKGROUND_PROMPT,
    iterinpaint_prompt,
    parse_add_prompt,
    parse_reco,
    serialize_reco,
)
from .backends import BackendConfig, make_backend
from .engine import (
    EngineOptions,
    StepTrace,
    generate,
    new_session,
    session_add,
    session_remove,
    session_undo,
)
from .evaluate import (
    Detection,
    EvalReport,
    average_precision,
    detect,
    detect_with_id,
    evaluate_run,
    report_table,
    shuffled_baseline,
)
from .training import (
    TrainingExample,
    export_manifest,
    make_bg_example,
    make_fg_example,
    validate_manifest,
)
from .coco import coco_layout_count, sample_coco_layout

__version__ = "0.1.0"

__all__ = [
    "BACKGROUND_PROMPT",
    "BBox",
    "BackendConfig",
    "Canvas",
    "COLORS",
    "DEFAULT_PALETTE",
    "Detection",
    "DimensionError",
    "EngineOptions",
    "EvalReport",
    "Layout",
    "MATERIALS",
    "NUM_CLASSES",
    "ObjectSpec",
    "OOD_SPLITS",
    "Palette",
    "Region",
    "SHAPES",
    "SPLITS",
    "Scene",
    "StepTrace",
    "TrainingExample",
    "average_precision",
    "background_mask",
    "caption_to_class_id",
    "class_id_to_attributes",
    "coco_layout_count",
    "composite",
    "detect",
    "detect_with_id",
    "evaluate_run",
    "export_manifest",
    "generate",
    "iou",
    "iterinpaint_prompt",
    "load_image",
    "load_mask",
    "make_backend",
    "make_bg_example",
    "make_fg_example",
    "mask_from_box",
    "new_session",
    "parse_add_prompt",
    "parse_reco",
    "render_object_patch",
    "render_scene",
    "report_table",
    "sample_coco_layout",
    "sample_fine",
    "sample_scene",
    "save_image",
    "save_mask",
    "scene_from_dict",
    "scene_to_dict",
    "serialize_reco",
    "session_add",
    "session_remove",
    "session_undo",
    "shuffled_baseline",
    "union_mask",
    "validate_manifest",
]
