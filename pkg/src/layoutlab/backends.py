"""Inpainting backends behind a single contract: inpaint(ctx, prompt, mask).

Three implementations: a deterministic procedural reference that draws
exactly what the prompt asks into the mask's bounding box, an HTTP client
for a real diffusion service, and a perturbing wrapper that displaces the
target box to emulate a model with localization errors.
"""

from __future__ import annotations

import base64
import hashlib
import io
import threading
from dataclasses import dataclass

import numpy as np
import requests
from PIL import Image

from .codec import BACKGROUND_PROMPT, parse_add_prompt
from .core import BBox, DimensionError, ObjectSpec, image_canvas, mask_from_box
from .render import DEFAULT_PALETTE, Palette, render_object_patch

DEFAULT_GUIDANCE_SCALE = 4.0
DEFAULT_STEPS = 50
DEFAULT_TIMEOUT_MS = 60_000
DEFAULT_MAX_INFLIGHT = 4

BACKEND_KINDS = ("procedural", "remote", "perturb")


class EmptyMaskError(ValueError):
    pass


class BackendUnavailable(RuntimeError):
    pass


class BackendTimeout(RuntimeError):
    pass


class BackendRejected(RuntimeError):
    def __init__(self, status: int, body: str):
        super().__init__(f"backend rejected request: HTTP {status}: {body}")
        self.status = status
        self.body = body


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "procedural"
    endpoint: str | None = None
    guidance_scale: float = DEFAULT_GUIDANCE_SCALE
    steps: int = DEFAULT_STEPS
    jitter_px: int = 0
    timeout_ms: int = DEFAULT_TIMEOUT_MS
    max_inflight: int = DEFAULT_MAX_INFLIGHT

    def __post_init__(self) -> None:
        if self.kind not in BACKEND_KINDS:
            raise ValueError(f"kind must be one of {BACKEND_KINDS}")
        if self.guidance_scale <= 0:
            raise ValueError("guidance_scale must be positive")
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        if self.jitter_px < 0:
            raise ValueError("jitter_px must be non-negative")
        if self.jitter_px and self.kind != "perturb":
            raise ValueError("jitter_px applies only to the perturb kind")
        if self.kind == "remote" and not self.endpoint:
            raise ValueError("remote kind requires an endpoint")
        if self.timeout_ms < 1:
            raise ValueError("timeout_ms must be positive")
        if self.max_inflight < 1:
            raise ValueError("max_inflight must be at least 1")


def bbox_of_mask(mask: np.ndarray) -> BBox:
    """Tightest box around the set pixels of a mask."""
    rows = np.flatnonzero(mask.any(axis=1))
    if rows.size == 0:
        raise EmptyMaskError("mask has no set pixels")
    cols = np.flatnonzero(mask.any(axis=0))
    return BBox(int(cols[0]), int(rows[0]), int(cols[-1]) + 1, int(rows[-1]) + 1)


class ProceduralBackend:
    """Draws the prompted object into the mask's bounding box, or fills
    the masked region with background for the background prompt. Pure and
    deterministic; the reference oracle for the whole pipeline."""

    def __init__(self, palette: Palette = DEFAULT_PALETTE):
        self.palette = palette

    def __call__(self, ctx: np.ndarray, prompt: str,
                 mask: np.ndarray) -> np.ndarray:
        if ctx.shape[:2] != mask.shape:
            raise DimensionError(
                f"ctx {ctx.shape[:2]} and mask {mask.shape} disagree"
            )
        out = ctx.copy()
        parsed = parse_add_prompt(prompt)
        if parsed is None:
            out[mask.astype(bool)] = self.palette.background
            return out
        color, material, shape = parsed
        box = bbox_of_mask(mask)
        obj = ObjectSpec(shape, material, color, box)
        out[box.y1:box.y2, box.x1:box.x2] = render_object_patch(
            obj, box, self.palette
        )
        return out


class PerturbBackend:
    """Wraps another backend, displacing the target box by a deterministic
    offset uniform in [-jitter_px, +jitter_px] per axis (clipped to the
    canvas). jitter_px=0 passes every call through untouched. Background
    prompts are never displaced; only object placements suffer."""

    def __init__(self, inner, jitter_px: int, seed: int = 0):
        if jitter_px < 0:
            raise ValueError("jitter_px must be non-negative")
        self.inner = inner
        self.jitter_px = jitter_px
        self.seed = seed

    def _offset(self, box: BBox, prompt: str) -> tuple[int, int]:
        j = self.jitter_px
        key = f"perturb/{self.seed}/{box.as_tuple()}/{prompt}".encode()
        digest = hashlib.sha256(key).digest()
        span = 2 * j + 1
        dx = int.from_bytes(digest[:8], "little") % span - j
        dy = int.from_bytes(digest[8:16], "little") % span - j
        return dx, dy

    def __call__(self, ctx: np.ndarray, prompt: str,
                 mask: np.ndarray) -> np.ndarray:
        if self.jitter_px == 0 or parse_add_prompt(prompt) is None:
            return self.inner(ctx, prompt, mask)
        canvas = image_canvas(ctx)
        box = bbox_of_mask(mask)
        dx, dy = self._offset(box, prompt)
        x1 = min(max(box.x1 + dx, 0), canvas.w - box.width)
        y1 = min(max(box.y1 + dy, 0), canvas.h - box.height)
        shifted = BBox(x1, y1, x1 + box.width, y1 + box.height)
        return self.inner(ctx, prompt, mask_from_box(shifted, canvas))


def _encode_png(array: np.ndarray, mode: str) -> str:
    img = Image.fromarray(array, mode=mode)
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def _decode_png(data: str) -> np.ndarray:
    raw = base64.b64decode(data)
    img = Image.open(io.BytesIO(raw)).convert("RGB")
    return np.asarray(img, dtype=np.uint8)


class RemoteBackend:
    """HTTP client for a diffusion inpainting service.

    POST {endpoint}/inpaint with JSON {image, mask, prompt,
    guidance_scale, steps}; images travel as base64 PNG (mask grayscale,
    255=update). At most max_inflight requests run concurrently.
    """

    def __init__(self, config: BackendConfig,
                 session: requests.Session | None = None):
        if not config.endpoint:
            raise ValueError("remote backend requires an endpoint")
        self.config = config
        self.session = session or requests.Session()
        self._gate = threading.Semaphore(config.max_inflight)

    def __call__(self, ctx: np.ndarray, prompt: str,
                 mask: np.ndarray) -> np.ndarray:
        if ctx.shape[:2] != mask.shape:
            raise DimensionError(
                f"ctx {ctx.shape[:2]} and mask {mask.shape} disagree"
            )
        body = {
            "image": _encode_png(ctx, "RGB"),
            "mask": _encode_png(
                mask.astype(np.uint8) * np.uint8(255), "L"
            ),
            "prompt": prompt,
            "guidance_scale": self.config.guidance_scale,
            "steps": self.config.steps,
        }
        url = self.config.endpoint.rstrip("/") + "/inpaint"
        with self._gate:
            try:
                resp = self.session.post(
                    url, json=body, timeout=self.config.timeout_ms / 1000.0
                )
            except requests.Timeout as e:
                raise BackendTimeout(f"no response within "
                                     f"{self.config.timeout_ms} ms") from e
            except requests.RequestException as e:
                raise BackendUnavailable(str(e)) from e
        if not 200 <= resp.status_code < 300:
            raise BackendRejected(resp.status_code, resp.text[:2000])
        out = _decode_png(resp.json()["image"])
        if out.shape != ctx.shape:
            raise DimensionError(
                f"service returned {out.shape}, expected {ctx.shape}"
            )
        return out


def make_backend(config: BackendConfig, seed: int = 0,
                 palette: Palette = DEFAULT_PALETTE):
    """Build the callable for a BackendConfig. seed feeds the perturb
    wrapper's deterministic offsets and is ignored otherwise."""
    if config.kind == "procedural":
        return ProceduralBackend(palette)
    if config.kind == "perturb":
        return PerturbBackend(
            ProceduralBackend(palette), config.jitter_px, seed
        )
    return RemoteBackend(config)


__all__ = [
    "BACKEND_KINDS",
    "BACKGROUND_PROMPT",
    "BackendConfig",
    "BackendRejected",
    "BackendTimeout",
    "BackendUnavailable",
    "EmptyMaskError",
    "PerturbBackend",
    "ProceduralBackend",
    "RemoteBackend",
    "bbox_of_mask",
    "make_backend",
]
