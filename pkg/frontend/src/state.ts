// Pure editor state: everything the DOM layer renders, nothing it owns.
// Images and step lists always come from server responses verbatim, so
// replaying the same endpoint calls reproduces the same state.

import type { Box, CanvasDims, SceneObject, TraceStep } from "./api";

export const SHAPES = ["cube", "sphere", "cylinder"] as const;
export const MATERIALS = ["rubber", "metal"] as const;
export const COLORS = [
  "gray",
  "red",
  "blue",
  "green",
  "brown",
  "purple",
  "cyan",
  "yellow",
] as const;

export const MODES = ["paste", "repaint"] as const;
export const ORDERS = ["given", "random", "top", "bottom"] as const;

// Drags smaller than this on either side are discarded as accidents.
export const MIN_BOX_SIDE = 4;

export interface GalleryStep {
  prompt: string;
  image: string;
}

export interface Attributes {
  shape: string;
  material: string;
  color: string;
}

export interface EditorState {
  canvas: CanvasDims;
  sessionId: string | null;
  image: string;
  objects: SceneObject[];
  gallery: GalleryStep[];
  attributes: Attributes;
  mode: string;
  order: string;
  busy: boolean;
  banner: string | null;
}

export function initialState(canvas: CanvasDims): EditorState {
  return {
    canvas,
    sessionId: null,
    image: "",
    objects: [],
    gallery: [],
    attributes: { shape: "cube", material: "metal", color: "red" },
    mode: "paste",
    order: "given",
    busy: false,
    banner: null,
  };
}

export function captionOf(attrs: Attributes): string {
  return `${attrs.color} ${attrs.material} ${attrs.shape}`;
}

export function clampBox(box: Box, canvas: CanvasDims): Box {
  const clampX = (v: number) => Math.min(Math.max(v, 0), canvas.w);
  const clampY = (v: number) => Math.min(Math.max(v, 0), canvas.h);
  return {
    x1: clampX(box.x1),
    y1: clampY(box.y1),
    x2: clampX(box.x2),
    y2: clampY(box.y2),
  };
}

/** Two drag endpoints to a canvas-clamped box, or null when the drag
 * is too small to mean anything. */
export function boxFromDrag(
  ax: number,
  ay: number,
  bx: number,
  by: number,
  canvas: CanvasDims,
): Box | null {
  const box = clampBox(
    {
      x1: Math.round(Math.min(ax, bx)),
      y1: Math.round(Math.min(ay, by)),
      x2: Math.round(Math.max(ax, bx)),
      y2: Math.round(Math.max(ay, by)),
    },
    canvas,
  );
  if (box.x2 - box.x1 < MIN_BOX_SIDE || box.y2 - box.y1 < MIN_BOX_SIDE) {
    return null;
  }
  return box;
}

/** Server trace steps to gallery entries, order preserved exactly. */
export function galleryFromTrace(steps: TraceStep[]): GalleryStep[] {
  return steps.map((s) => ({ prompt: s.prompt, image: s.image }));
}

export function sameBox(a: Box, b: Box): boolean {
  return a.x1 === b.x1 && a.y1 === b.y1 && a.x2 === b.x2 && a.y2 === b.y2;
}
