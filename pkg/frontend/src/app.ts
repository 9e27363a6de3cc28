// Wires the surface, controls, gallery, and banner to the service
// client. One session per App; every mutation round-trips before the
// view updates, and all controls disable while a request is in flight.

import { ApiError, LayoutlabClient } from "./api";
import type { Box, CanvasDims } from "./api";
import { Banner } from "./banner";
import { BoxEditor } from "./editor";
import { renderGallery } from "./gallery";
import {
  COLORS,
  EditorState,
  MATERIALS,
  MODES,
  ORDERS,
  SHAPES,
  captionOf,
  galleryFromTrace,
  initialState,
} from "./state";

function select(
  doc: Document,
  name: string,
  options: readonly string[],
): HTMLSelectElement {
  const el = doc.createElement("select");
  el.name = name;
  for (const value of options) {
    const opt = doc.createElement("option");
    opt.value = value;
    opt.textContent = value;
    el.appendChild(opt);
  }
  return el;
}

function button(doc: Document, name: string, label: string): HTMLButtonElement {
  const el = doc.createElement("button");
  el.name = name;
  el.type = "button";
  el.textContent = label;
  return el;
}

export class App {
  state: EditorState;
  readonly editor: BoxEditor;
  readonly banner: Banner;
  private readonly client: LayoutlabClient;
  private readonly doc: Document;
  private readonly galleryEl: HTMLDivElement;
  private readonly objectsEl: HTMLUListElement;
  private readonly statusEl: HTMLSpanElement;
  private readonly controls: {
    shape: HTMLSelectElement;
    material: HTMLSelectElement;
    color: HTMLSelectElement;
    mode: HTMLSelectElement;
    order: HTMLSelectElement;
    run: HTMLButtonElement;
    undo: HTMLButtonElement;
  };

  constructor(
    root: HTMLElement,
    client: LayoutlabClient,
    canvas: CanvasDims = { w: 512, h: 512 },
  ) {
    this.client = client;
    this.doc = root.ownerDocument;
    this.state = initialState(canvas);

    this.banner = new Banner(this.doc);
    root.appendChild(this.banner.root);

    this.editor = new BoxEditor(this.doc, canvas);
    this.editor.onDraw = (box) => void this.addAt(box);
    this.editor.onPick = (index) => void this.removeAt(index);
    root.appendChild(this.editor.root);

    const bar = this.doc.createElement("div");
    bar.className = "controls";
    this.controls = {
      shape: select(this.doc, "shape", SHAPES),
      material: select(this.doc, "material", MATERIALS),
      color: select(this.doc, "color", COLORS),
      mode: select(this.doc, "mode", MODES),
      order: select(this.doc, "order", ORDERS),
      run: button(this.doc, "run", "Run layout"),
      undo: button(this.doc, "undo", "Undo"),
    };
    for (const el of Object.values(this.controls)) bar.appendChild(el);
    this.statusEl = this.doc.createElement("span");
    this.statusEl.className = "status";
    bar.appendChild(this.statusEl);
    root.appendChild(bar);

    this.objectsEl = this.doc.createElement("ul");
    this.objectsEl.className = "object-list";
    root.appendChild(this.objectsEl);

    this.galleryEl = this.doc.createElement("div");
    this.galleryEl.className = "gallery";
    root.appendChild(this.galleryEl);

    this.controls.shape.addEventListener("change", () => this.readAttrs());
    this.controls.material.addEventListener("change", () => this.readAttrs());
    this.controls.color.addEventListener("change", () => this.readAttrs());
    this.controls.mode.addEventListener("change", () => {
      this.state.mode = this.controls.mode.value;
    });
    this.controls.order.addEventListener("change", () => {
      this.state.order = this.controls.order.value;
    });
    this.controls.run.addEventListener("click", () => void this.run());
    this.controls.undo.addEventListener("click", () => void this.undo());

    this.syncControls();
    this.render();
  }

  private readAttrs(): void {
    this.state.attributes = {
      shape: this.controls.shape.value,
      material: this.controls.material.value,
      color: this.controls.color.value,
    };
  }

  private syncControls(): void {
    this.controls.shape.value = this.state.attributes.shape;
    this.controls.material.value = this.state.attributes.material;
    this.controls.color.value = this.state.attributes.color;
    this.controls.mode.value = this.state.mode;
    this.controls.order.value = this.state.order;
  }

  /** Run one service call with the whole UI locked; errors banner. */
  private async guard<T>(work: () => Promise<T>): Promise<T | null> {
    if (this.state.busy) return null;
    this.state.busy = true;
    this.render();
    try {
      const result = await work();
      this.banner.clear();
      return result;
    } catch (err) {
      if (err instanceof ApiError) {
        this.banner.show(err.message);
        return null;
      }
      throw err;
    } finally {
      this.state.busy = false;
      this.render();
    }
  }

  async init(): Promise<void> {
    await this.guard(async () => {
      const session = await this.client.createSession(this.state.canvas);
      this.state.sessionId = session.id;
      this.state.image = session.image;
      this.state.objects = session.objects;
    });
  }

  async addAt(box: Box): Promise<void> {
    const sessionId = this.state.sessionId;
    if (!sessionId) return;
    const caption = captionOf(this.state.attributes);
    await this.guard(async () => {
      const result = await this.client.addObject(sessionId, caption, box);
      this.state.image = result.image;
      this.state.objects = result.objects;
      this.state.gallery = [
        ...this.state.gallery,
        { prompt: result.prompt, image: result.image },
      ];
    });
  }

  async removeAt(index: number): Promise<void> {
    const sessionId = this.state.sessionId;
    const target = this.state.objects[index];
    if (!sessionId || !target) return;
    await this.guard(async () => {
      const result = await this.client.removeObject(sessionId, target.box);
      this.state.image = result.image;
      this.state.objects = result.objects;
      this.state.gallery = [
        ...this.state.gallery,
        { prompt: result.prompt, image: result.image },
      ];
    });
  }

  async undo(): Promise<void> {
    const sessionId = this.state.sessionId;
    if (!sessionId) return;
    await this.guard(async () => {
      const session = await this.client.undo(sessionId);
      this.state.image = session.image;
      this.state.objects = session.objects;
      this.state.gallery = this.state.gallery.slice(0, -1);
    });
  }

  /** Replay the session's objects as one full trace: N+1 steps. */
  async run(): Promise<void> {
    await this.guard(async () => {
      const result = await this.client.generate(
        this.state.objects,
        this.state.canvas,
        this.state.mode,
        this.state.order,
      );
      this.state.image = result.image;
      this.state.gallery = galleryFromTrace(result.steps);
    });
  }

  render(): void {
    const busy = this.state.busy;
    this.editor.enabled = !busy;
    this.controls.run.disabled = busy;
    this.controls.undo.disabled = busy;
    this.statusEl.textContent = busy ? "working..." : "";

    this.editor.setImage(this.state.image);
    this.editor.setObjects(this.state.objects);

    this.objectsEl.textContent = "";
    this.state.objects.forEach((obj, index) => {
      const item = this.doc.createElement("li");
      item.textContent = `${obj.caption} [${obj.box.x1},${obj.box.y1},${obj.box.x2},${obj.box.y2}]`;
      const rm = button(this.doc, "remove", "remove");
      rm.disabled = busy;
      rm.addEventListener("click", () => void this.removeAt(index));
      item.appendChild(rm);
      this.objectsEl.appendChild(item);
    });

    renderGallery(this.galleryEl, this.state.gallery);
  }
}
