// @vitest-environment jsdom
// End-to-end smoke against a real service process: draw three boxes,
// run the layout, watch the four-step gallery, remove an object, undo.

import { spawn, type ChildProcess } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { LayoutlabClient } from "../src/api";
import { App } from "../src/app";

const PORT = 8900 + (process.pid % 500);
const BASE = `http://127.0.0.1:${PORT}`;

let service: ChildProcess;

async function until(cond: () => boolean, ms = 15000): Promise<void> {
  const start = Date.now();
  while (!cond()) {
    if (Date.now() - start > ms) throw new Error("timed out waiting");
    await new Promise((r) => setTimeout(r, 25));
  }
}

async function settled(app: App): Promise<void> {
  await until(() => !app.state.busy);
}

function drawBox(app: App, x1: number, y1: number, x2: number, y2: number) {
  const surface = app.editor.root;
  const opts = { bubbles: true };
  surface.dispatchEvent(
    new MouseEvent("pointerdown", { ...opts, clientX: x1, clientY: y1 }),
  );
  surface.dispatchEvent(
    new MouseEvent("pointermove", { ...opts, clientX: x2, clientY: y2 }),
  );
  surface.dispatchEvent(
    new MouseEvent("pointerup", { ...opts, clientX: x2, clientY: y2 }),
  );
}

function pickColor(color: string) {
  const el = document.querySelector<HTMLSelectElement>("select[name=color]")!;
  el.value = color;
  el.dispatchEvent(new Event("change"));
}

beforeAll(async () => {
  service = spawn(
    "python3",
    ["-m", "layoutlab.cli", "serve", "--backend", "procedural",
     "--port", String(PORT)],
    { stdio: "ignore" },
  );
  const deadline = Date.now() + 30000;
  for (;;) {
    try {
      const res = await fetch(`${BASE}/openapi.json`);
      if (res.ok) break;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) throw new Error("service did not come up");
    await new Promise((r) => setTimeout(r, 150));
  }
}, 40000);

afterAll(() => {
  service?.kill("SIGTERM");
});

describe("live session smoke", () => {
  it("draws three boxes, runs, removes, undoes", async () => {
    document.body.innerHTML = "";
    const app = new App(
      document.body,
      new LayoutlabClient(BASE),
      { w: 512, h: 512 },
    );
    await app.init();
    expect(app.state.sessionId).toBeTruthy();
    expect(app.state.image.length).toBeGreaterThan(0);

    pickColor("red");
    drawBox(app, 40, 60, 200, 220);
    await until(() => app.state.objects.length === 1);
    await settled(app);
    pickColor("blue");
    drawBox(app, 260, 80, 420, 240);
    await until(() => app.state.objects.length === 2);
    await settled(app);
    pickColor("green");
    drawBox(app, 150, 290, 310, 470);
    await until(() => app.state.objects.length === 3);
    await settled(app);

    expect(app.state.objects.map((o) => o.caption)).toEqual([
      "red metal cube",
      "blue metal cube",
      "green metal cube",
    ]);
    const imageAfterAdds = app.state.image;

    document.querySelector<HTMLButtonElement>("button[name=run]")!.click();
    await until(() => app.state.gallery.length === 4);
    await settled(app);

    const figures = document.querySelectorAll("figure.gallery-step");
    expect(figures).toHaveLength(4);
    const prompts = Array.from(
      document.querySelectorAll("figure.gallery-step figcaption"),
      (el) => el.textContent ?? "",
    );
    expect(prompts[0]).toContain("Add red metal cube");
    expect(prompts[3]).toContain("Add gray background");
    // replaying the same regions yields the image the edits produced
    expect(app.state.image).toBe(imageAfterAdds);

    const removeButtons = document.querySelectorAll<HTMLButtonElement>(
      "ul.object-list button[name=remove]",
    );
    expect(removeButtons).toHaveLength(3);
    removeButtons[1].click();
    await until(() => app.state.objects.length === 2);
    await settled(app);
    expect(app.state.objects.map((o) => o.caption)).toEqual([
      "red metal cube",
      "green metal cube",
    ]);
    expect(app.state.image).not.toBe(imageAfterAdds);
    expect(app.state.gallery).toHaveLength(5);

    document.querySelector<HTMLButtonElement>("button[name=undo]")!.click();
    await until(() => app.state.objects.length === 3);
    await settled(app);
    expect(app.state.objects.map((o) => o.caption)).toEqual([
      "red metal cube",
      "blue metal cube",
      "green metal cube",
    ]);
    expect(app.state.image).toBe(imageAfterAdds);
    expect(app.state.gallery).toHaveLength(4);
  }, 60000);
});
