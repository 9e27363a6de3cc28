"""HTTP facade over engine sessions and evaluation.

State is one in-process session table; each session serializes its own
mutations behind a lock and idle sessions expire after a TTL. Images
cross the wire as base64 PNG strings. Error bodies are always
{"error": message}: 400 for schema or domain violations, 404 for unknown
sessions, 502 when the generation backend fails.
"""

from __future__ import annotations

import threading
import time
import uuid

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .backends import (
    BackendConfig,
    BackendRejected,
    BackendTimeout,
    BackendUnavailable,
    _encode_png,
    make_backend,
)
from .core import BBox, Canvas, Layout, caption_to_class_id
from .engine import (
    EngineOptions,
    HistoryEmptyError,
    Session,
    generate,
    new_session,
    session_add,
    session_remove,
    session_undo,
)
from .evaluate import (
    Detection,
    UndefinedMetricError,
    average_precision,
)

DEFAULT_TTL_S = 3600.0

ORDER_ALIASES = {"top": "top_to_bottom", "bottom": "bottom_to_top"}


class CanvasBody(BaseModel):
    w: int = 512
    h: int = 512


class SessionBody(BaseModel):
    canvas: CanvasBody = CanvasBody()


class RegionBody(BaseModel):
    caption: str
    box: list[int]


class AddBody(BaseModel):
    caption: str
    box: list[int]


class RemoveBody(BaseModel):
    box: list[int]


class GenerateBody(BaseModel):
    regions: list[RegionBody]
    canvas: CanvasBody = CanvasBody()
    mode: str = "paste"
    order: str = "given"
    seed: int = 0


class DetectionBody(BaseModel):
    image_id: str
    class_id: int
    box: list[int]
    score: float = 1.0


class GroundTruthBody(BaseModel):
    image_id: str
    regions: list[RegionBody]


class EvaluateBody(BaseModel):
    ground_truths: list[GroundTruthBody]
    detections: list[DetectionBody]


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        self.status = status
        self.message = message
        super().__init__(message)


class _Entry:
    def __init__(self, session: Session):
        self.session = session
        self.lock = threading.Lock()
        self.last_access = time.monotonic()


MAX_CANVAS_SIDE = 2048


def _parse_canvas(body: CanvasBody) -> Canvas:
    if not (1 <= body.w <= MAX_CANVAS_SIDE and 1 <= body.h <= MAX_CANVAS_SIDE):
        raise ApiError(
            400, f"canvas {body.w}x{body.h} outside 1..{MAX_CANVAS_SIDE}"
        )
    return Canvas(body.w, body.h)


def _parse_box(raw: list[int], canvas: Canvas) -> BBox:
    if len(raw) != 4:
        raise ApiError(400, f"box must be [x1,y1,x2,y2], got {raw}")
    try:
        box = BBox(*(int(v) for v in raw))
        box.validate(canvas)
    except ValueError as e:
        raise ApiError(400, str(e)) from None
    return box


def _b64_image(img: np.ndarray) -> str:
    return _encode_png(img, "RGB")


def _session_payload(session: Session) -> dict:
    return {
        "image": _b64_image(session.image),
        "objects": [
            {"caption": caption, "box": list(box.as_tuple())}
            for caption, box in session.objects
        ],
        "steps": len(session.history),
    }


def build_app(
    config: BackendConfig = BackendConfig(),
    seed: int = 0,
    mode: str = "paste",
    ttl_s: float = DEFAULT_TTL_S,
) -> FastAPI:
    backend = make_backend(config, seed=seed)
    store: dict[str, _Entry] = {}
    store_lock = threading.Lock()
    app = FastAPI(title="layoutlab service")

    def sweep() -> None:
        now = time.monotonic()
        with store_lock:
            dead = [
                sid for sid, e in store.items()
                if now - e.last_access > ttl_s
            ]
            for sid in dead:
                del store[sid]

    def entry_for(session_id: str) -> _Entry:
        sweep()
        with store_lock:
            entry = store.get(session_id)
            if entry is None:
                raise ApiError(404, f"unknown session {session_id}")
            entry.last_access = time.monotonic()
            return entry

    @app.exception_handler(ApiError)
    async def on_api_error(_req: Request, exc: ApiError) -> JSONResponse:
        return JSONResponse({"error": exc.message}, status_code=exc.status)

    @app.exception_handler(RequestValidationError)
    async def on_validation(_req: Request,
                            exc: RequestValidationError) -> JSONResponse:
        return JSONResponse({"error": str(exc.errors())}, status_code=400)

    def run_backend(fn, *args):
        """Invoke an engine operation, mapping backend faults to 502."""
        try:
            return fn(*args)
        except (BackendUnavailable, BackendTimeout, BackendRejected) as e:
            raise ApiError(502, f"backend failure: {e}") from e

    @app.post("/session")
    def create_session(body: SessionBody = SessionBody()) -> dict:
        sweep()
        canvas = _parse_canvas(body.canvas)
        session = new_session(canvas, mode=mode)
        session_id = uuid.uuid4().hex
        with store_lock:
            store[session_id] = _Entry(session)
        return {"id": session_id, **_session_payload(session)}

    @app.post("/session/{session_id}/add")
    def add_object(session_id: str, body: AddBody) -> dict:
        entry = entry_for(session_id)
        with entry.lock:
            session = entry.session
            box = _parse_box(body.box, session.canvas)
            try:
                caption_to_class_id(body.caption)
            except ValueError as e:
                raise ApiError(400, str(e)) from None
            run_backend(session_add, session, body.caption, box, backend)
            prompt = session.history[-1][0].prompt
            return {"prompt": prompt, **_session_payload(session)}

    @app.post("/session/{session_id}/remove")
    def remove_object(session_id: str, body: RemoveBody) -> dict:
        entry = entry_for(session_id)
        with entry.lock:
            session = entry.session
            box = _parse_box(body.box, session.canvas)
            run_backend(session_remove, session, box, backend)
            prompt = session.history[-1][0].prompt
            return {"prompt": prompt, **_session_payload(session)}

    @app.post("/session/{session_id}/undo")
    def undo(session_id: str) -> dict:
        entry = entry_for(session_id)
        with entry.lock:
            try:
                session_undo(entry.session)
            except HistoryEmptyError as e:
                raise ApiError(400, str(e)) from None
            return _session_payload(entry.session)

    @app.get("/session/{session_id}/image")
    def session_image(session_id: str) -> dict:
        entry = entry_for(session_id)
        with entry.lock:
            return {"image": _b64_image(entry.session.image)}

    @app.post("/generate")
    def generate_layout(body: GenerateBody) -> dict:
        canvas = _parse_canvas(body.canvas)
        regions = []
        for region in body.regions:
            box = _parse_box(region.box, canvas)
            try:
                caption_to_class_id(region.caption)
            except ValueError as e:
                raise ApiError(400, str(e)) from None
            regions.append((region.caption, box))
        order = ORDER_ALIASES.get(body.order, body.order)
        try:
            opts = EngineOptions(mode=body.mode, order=order, seed=body.seed)
        except ValueError as e:
            raise ApiError(400, str(e)) from None
        layout = Layout.of(canvas, regions)
        img, traces = run_backend(generate, layout, backend, opts)
        return {
            "image": _b64_image(img),
            "steps": [
                {
                    "step": t.step_index,
                    "prompt": t.prompt,
                    "image": _b64_image(t.committed),
                }
                for t in traces
            ],
        }

    @app.post("/evaluate")
    def evaluate(body: EvaluateBody) -> dict:
        gts: dict[str, list[tuple[int, BBox]]] = {}
        for row in body.ground_truths:
            items = []
            for region in row.regions:
                if len(region.box) != 4:
                    raise ApiError(400, f"box must be 4 ints: {region.box}")
                try:
                    cls = caption_to_class_id(region.caption)
                    box = BBox(*(int(v) for v in region.box))
                except ValueError as e:
                    raise ApiError(400, str(e)) from None
                items.append((cls, box))
            gts[row.image_id] = items
        dets = []
        for d in body.detections:
            if len(d.box) != 4:
                raise ApiError(400, f"box must be 4 ints: {d.box}")
            if d.image_id not in gts:
                raise ApiError(
                    400, f"detection references unknown image {d.image_id!r}"
                )
            try:
                dets.append(Detection(
                    d.image_id, int(d.class_id),
                    BBox(*(int(v) for v in d.box)), float(d.score),
                ))
            except ValueError as e:
                raise ApiError(400, str(e)) from None
        try:
            rep = average_precision(dets, gts)
        except UndefinedMetricError as e:
            raise ApiError(400, str(e)) from None
        return {
            "ap": rep.ap,
            "ap50": rep.ap50,
            "n_images": rep.n_images,
            "n_ground_truths": rep.n_ground_truths,
            "n_detections": rep.n_detections,
        }

    return app


__all__ = ["build_app", "DEFAULT_TTL_S"]
