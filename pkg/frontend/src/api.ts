// Typed client for the layoutlab session service. Every UI action goes
// through one of these calls; the browser never composites images.

export interface Box {
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export interface CanvasDims {
  w: number;
  h: number;
}

export interface SceneObject {
  caption: string;
  box: Box;
}

export interface SessionState {
  id: string;
  image: string; // base64 PNG
  objects: SceneObject[];
  steps: number;
}

export interface MutationResult extends SessionState {
  prompt: string;
}

export interface TraceStep {
  step: number;
  prompt: string;
  image: string;
}

export interface GenerateResult {
  image: string;
  steps: TraceStep[];
}

export interface EvalResult {
  ap: number;
  ap50: number;
  n_images: number;
  n_ground_truths: number;
  n_detections: number;
}

export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, message: string) {
    super(message);
    this.status = status;
  }
}

function boxList(box: Box): number[] {
  return [box.x1, box.y1, box.x2, box.y2];
}

export function boxFromList(raw: number[]): Box {
  return { x1: raw[0], y1: raw[1], x2: raw[2], y2: raw[3] };
}

type FetchLike = typeof fetch;

export class LayoutlabClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl: FetchLike = fetch) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.fetchImpl = fetchImpl;
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.base}${path}`, {
        method,
        headers: body === undefined ? {} : { "Content-Type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiError(0, `service unreachable: ${String(err)}`);
    }
    const text = await response.text();
    let payload: unknown = undefined;
    try {
      payload = text ? JSON.parse(text) : undefined;
    } catch {
      // non-JSON body falls through to the status check below
    }
    if (!response.ok) {
      const message =
        payload && typeof payload === "object" && "error" in payload
          ? String((payload as { error: unknown }).error)
          : `HTTP ${response.status}`;
      throw new ApiError(response.status, message);
    }
    return payload as T;
  }

  async createSession(canvas: CanvasDims): Promise<SessionState> {
    const raw = await this.request<{
      id: string;
      image: string;
      objects: { caption: string; box: number[] }[];
      steps: number;
    }>("POST", "/session", { canvas });
    return { ...raw, objects: raw.objects.map(objectFromWire) };
  }

  async addObject(
    sessionId: string,
    caption: string,
    box: Box,
  ): Promise<MutationResult> {
    const raw = await this.request<WireMutation>(
      "POST",
      `/session/${sessionId}/add`,
      { caption, box: boxList(box) },
    );
    return mutationFromWire(sessionId, raw);
  }

  async removeObject(sessionId: string, box: Box): Promise<MutationResult> {
    const raw = await this.request<WireMutation>(
      "POST",
      `/session/${sessionId}/remove`,
      { box: boxList(box) },
    );
    return mutationFromWire(sessionId, raw);
  }

  async undo(sessionId: string): Promise<SessionState> {
    const raw = await this.request<WireSession>(
      "POST",
      `/session/${sessionId}/undo`,
    );
    return {
      id: sessionId,
      image: raw.image,
      objects: raw.objects.map(objectFromWire),
      steps: raw.steps,
    };
  }

  async generate(
    regions: SceneObject[],
    canvas: CanvasDims,
    mode: string,
    order: string,
    seed = 0,
  ): Promise<GenerateResult> {
    return this.request<GenerateResult>("POST", "/generate", {
      regions: regions.map((r) => ({ caption: r.caption, box: boxList(r.box) })),
      canvas,
      mode,
      order,
      seed,
    });
  }

  async evaluate(
    groundTruths: { image_id: string; regions: SceneObject[] }[],
    detections: {
      image_id: string;
      class_id: number;
      box: Box;
      score: number;
    }[],
  ): Promise<EvalResult> {
    return this.request<EvalResult>("POST", "/evaluate", {
      ground_truths: groundTruths.map((g) => ({
        image_id: g.image_id,
        regions: g.regions.map((r) => ({
          caption: r.caption,
          box: boxList(r.box),
        })),
      })),
      detections: detections.map((d) => ({ ...d, box: boxList(d.box) })),
    });
  }
}

interface WireSession {
  image: string;
  objects: { caption: string; box: number[] }[];
  steps: number;
}

interface WireMutation extends WireSession {
  prompt: string;
}

function objectFromWire(o: { caption: string; box: number[] }): SceneObject {
  return { caption: o.caption, box: boxFromList(o.box) };
}

function mutationFromWire(id: string, raw: WireMutation): MutationResult {
  return {
    id,
    prompt: raw.prompt,
    image: raw.image,
    objects: raw.objects.map(objectFromWire),
    steps: raw.steps,
  };
}
