import { describe, expect, it } from "vitest";

import {
  MIN_BOX_SIDE,
  boxFromDrag,
  captionOf,
  clampBox,
  galleryFromTrace,
  initialState,
  sameBox,
} from "../src/state";

const CANVAS = { w: 512, h: 512 };

describe("boxFromDrag", () => {
  it("orders corners regardless of drag direction", () => {
    const down = boxFromDrag(10, 20, 110, 220, CANVAS);
    const up = boxFromDrag(110, 220, 10, 20, CANVAS);
    expect(down).toEqual({ x1: 10, y1: 20, x2: 110, y2: 220 });
    expect(up).toEqual(down);
  });

  it("clamps to the canvas", () => {
    const box = boxFromDrag(-40, -10, 600, 520, CANVAS);
    expect(box).toEqual({ x1: 0, y1: 0, x2: 512, y2: 512 });
  });

  it("rounds fractional pointer positions", () => {
    const box = boxFromDrag(10.4, 10.6, 99.5, 200.2, CANVAS);
    expect(box).toEqual({ x1: 10, y1: 11, x2: 100, y2: 200 });
  });

  it("discards drags below the minimum side", () => {
    expect(boxFromDrag(50, 50, 50 + MIN_BOX_SIDE - 1, 300, CANVAS)).toBeNull();
    expect(boxFromDrag(50, 50, 300, 50 + MIN_BOX_SIDE - 1, CANVAS)).toBeNull();
    expect(boxFromDrag(50, 50, 50 + MIN_BOX_SIDE, 50 + MIN_BOX_SIDE, CANVAS))
      .not.toBeNull();
  });

  it("discards drags clamped down to nothing", () => {
    expect(boxFromDrag(-50, -50, 2, 300, CANVAS)).toBeNull();
  });
});

describe("clampBox", () => {
  it("keeps interior boxes untouched", () => {
    const box = { x1: 5, y1: 6, x2: 7, y2: 8 };
    expect(clampBox(box, CANVAS)).toEqual(box);
  });
});

describe("captionOf", () => {
  it("composes color material shape in order", () => {
    expect(captionOf({ shape: "sphere", material: "metal", color: "cyan" }))
      .toBe("cyan metal sphere");
  });
});

describe("galleryFromTrace", () => {
  it("preserves server step order", () => {
    const steps = [
      { step: 0, prompt: "Add red metal cube", image: "aa" },
      { step: 1, prompt: "Add gray background", image: "bb" },
    ];
    expect(galleryFromTrace(steps)).toEqual([
      { prompt: "Add red metal cube", image: "aa" },
      { prompt: "Add gray background", image: "bb" },
    ]);
  });
});

describe("initialState", () => {
  it("starts idle with no session", () => {
    const state = initialState(CANVAS);
    expect(state.sessionId).toBeNull();
    expect(state.busy).toBe(false);
    expect(state.gallery).toEqual([]);
    expect(captionOf(state.attributes)).toBe("red metal cube");
  });
});

describe("sameBox", () => {
  it("compares all four coordinates", () => {
    const a = { x1: 1, y1: 2, x2: 3, y2: 4 };
    expect(sameBox(a, { ...a })).toBe(true);
    expect(sameBox(a, { ...a, x2: 5 })).toBe(false);
  });
});
