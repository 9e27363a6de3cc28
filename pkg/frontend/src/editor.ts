// Canvas-pixel box drawing surface: a positioned <div> over the session
// image. Boxes are drawn by pointer drag in image coordinates and sent
// to the caller unquantized; outlines of confirmed objects are overlaid
// and clickable for selection.

import type { Box, CanvasDims, SceneObject } from "./api";
import { boxFromDrag } from "./state";

export class BoxEditor {
  readonly root: HTMLDivElement;
  private readonly img: HTMLImageElement;
  private readonly rubber: HTMLDivElement;
  private readonly outlines: HTMLDivElement;
  private canvas: CanvasDims;
  private dragStart: { x: number; y: number } | null = null;
  enabled = true;
  onDraw: ((box: Box) => void) | null = null;
  onPick: ((index: number) => void) | null = null;

  constructor(doc: Document, canvas: CanvasDims) {
    this.canvas = canvas;
    this.root = doc.createElement("div");
    this.root.className = "editor-surface";
    this.root.style.position = "relative";
    this.root.style.width = `${canvas.w}px`;
    this.root.style.height = `${canvas.h}px`;
    this.root.style.touchAction = "none";

    this.img = doc.createElement("img");
    this.img.className = "editor-image";
    this.img.alt = "session canvas";
    this.img.draggable = false;
    this.img.style.width = "100%";
    this.img.style.height = "100%";
    this.root.appendChild(this.img);

    this.outlines = doc.createElement("div");
    this.outlines.className = "editor-outlines";
    this.root.appendChild(this.outlines);

    this.rubber = doc.createElement("div");
    this.rubber.className = "editor-rubber";
    this.rubber.style.position = "absolute";
    this.rubber.style.display = "none";
    this.rubber.style.border = "1px dashed #fff";
    this.rubber.style.pointerEvents = "none";
    this.root.appendChild(this.rubber);

    this.root.addEventListener("pointerdown", (ev) => this.start(ev));
    this.root.addEventListener("pointermove", (ev) => this.move(ev));
    this.root.addEventListener("pointerup", (ev) => this.finish(ev));
    this.root.addEventListener("pointerleave", () => this.cancel());
  }

  setImage(base64Png: string): void {
    this.img.src = base64Png ? `data:image/png;base64,${base64Png}` : "";
  }

  setObjects(objects: SceneObject[]): void {
    this.outlines.textContent = "";
    const doc = this.root.ownerDocument;
    objects.forEach((obj, index) => {
      const el = doc.createElement("div");
      el.className = "editor-object";
      el.dataset.index = String(index);
      el.title = obj.caption;
      el.style.position = "absolute";
      el.style.left = `${obj.box.x1}px`;
      el.style.top = `${obj.box.y1}px`;
      el.style.width = `${obj.box.x2 - obj.box.x1}px`;
      el.style.height = `${obj.box.y2 - obj.box.y1}px`;
      el.style.border = "1px solid #6cf";
      el.addEventListener("click", () => {
        if (this.enabled) this.onPick?.(index);
      });
      this.outlines.appendChild(el);
    });
  }

  private point(ev: MouseEvent): { x: number; y: number } {
    const rect = this.root.getBoundingClientRect();
    return { x: ev.clientX - rect.left, y: ev.clientY - rect.top };
  }

  private start(ev: MouseEvent): void {
    if (!this.enabled) return;
    this.dragStart = this.point(ev);
  }

  private move(ev: MouseEvent): void {
    if (!this.dragStart) return;
    const p = this.point(ev);
    const x = Math.min(this.dragStart.x, p.x);
    const y = Math.min(this.dragStart.y, p.y);
    this.rubber.style.display = "block";
    this.rubber.style.left = `${x}px`;
    this.rubber.style.top = `${y}px`;
    this.rubber.style.width = `${Math.abs(p.x - this.dragStart.x)}px`;
    this.rubber.style.height = `${Math.abs(p.y - this.dragStart.y)}px`;
  }

  private finish(ev: MouseEvent): void {
    if (!this.dragStart) return;
    const start = this.dragStart;
    const end = this.point(ev);
    this.cancel();
    const box = boxFromDrag(start.x, start.y, end.x, end.y, this.canvas);
    if (box) this.onDraw?.(box);
  }

  private cancel(): void {
    this.dragStart = null;
    this.rubber.style.display = "none";
  }
}
