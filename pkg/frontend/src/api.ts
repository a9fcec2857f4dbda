/**
 * Typed client for the annotation service HTTP API (see docs/api.md).
 *
 * The endpoint base is the single piece of configuration; everything else
 * is plain fetch. URIs travel through these records for the back-end's
 * sake but are never rendered by the UI layers.
 */

export type ChipState = "neutral" | "accepted" | "rejected";
export type Condition = "LT" | "ST" | "SMT" | "SMT_CTX";

export interface SuggestionView {
  key: string;
  label: string;
  uri: string | null;
  score: number;
  origin: string;
  abstract: string | null;
  state: ChipState;
}

export interface SuggestResponse {
  suggestions: SuggestionView[];
  degraded: boolean;
}

export interface TagView {
  key: string;
  label: string;
  uri: string | null;
  abstract: string | null;
  origin: string;
  state: ChipState;
}

export interface ControlPointIn {
  px: number;
  py: number;
  lon: number;
  lat: number;
  label?: string | null;
}

export interface MapView {
  id: string;
  uri: string;
  title: string;
  image_uri: string;
  width: number;
  height: number;
  metadata: Record<string, string>;
  control_points: ControlPointIn[];
}

export interface AnnotationSummary {
  id: string;
  uri: string;
  map_id: string;
  condition: Condition;
  created_at: string;
  body_text: string;
  tag_count: number;
}

export interface TagBody {
  type: "tag";
  label: string;
  concept?: string;
  polarity: "accepted" | "rejected";
  creator: string;
  created_at: string;
}

export interface TextBody {
  type: "text";
  value: string;
}

export interface AnnotationDocument {
  format: string;
  id: string;
  uri: string;
  created_at: string;
  creator: { id: string; display_name: string };
  condition: Condition;
  target: { map: string; selector: { type: string; value: string } };
  body: Array<TextBody | TagBody>;
}

export interface SearchHit {
  kind: "map" | "annotation";
  id: string;
  uri: string;
  matched_in: string;
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    readonly base: string,
    private readonly fetchFn: typeof fetch = globalThis.fetch.bind(globalThis),
  ) {
    this.base = base.replace(/\/+$/, "");
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.base}${path}`, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        detail = ((await response.json()) as { detail?: string }).detail ?? detail;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  listMaps(): Promise<{ maps: MapView[] }> {
    return this.request("/maps");
  }

  getMap(id: string): Promise<MapView> {
    return this.request(`/maps/${encodeURIComponent(id)}`);
  }

  postControlPoints(mapId: string, points: ControlPointIn[]): Promise<{ control_points: number }> {
    return this.request(`/maps/${encodeURIComponent(mapId)}/control_points`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(points),
    });
  }

  createAnnotation(
    mapId: string,
    payload: {
      shape: Array<[number, number]>;
      body_text: string;
      creator: { id: string; display_name?: string };
      condition: Condition;
    },
  ): Promise<AnnotationDocument> {
    return this.request(`/maps/${encodeURIComponent(mapId)}/annotations`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  getAnnotation(id: string): Promise<AnnotationDocument> {
    return this.request(`/annotations/${encodeURIComponent(id)}`);
  }

  listAnnotations(): Promise<{ annotations: AnnotationSummary[] }> {
    return this.request("/annotations");
  }

  getTags(annotationId: string): Promise<{ tags: TagView[] }> {
    return this.request(`/annotations/${encodeURIComponent(annotationId)}/tags`);
  }

  suggestText(annotationId: string, q: string): Promise<SuggestResponse> {
    const params = new URLSearchParams({ annotation: annotationId, q });
    return this.request(`/suggest/text?${params}`);
  }

  suggestRegion(annotationId: string): Promise<SuggestResponse> {
    const params = new URLSearchParams({ annotation: annotationId });
    return this.request(`/suggest/region?${params}`);
  }

  suggestHistory(annotationId: string, seed = 0): Promise<SuggestResponse> {
    const params = new URLSearchParams({ annotation: annotationId, seed: String(seed) });
    return this.request(`/suggest/history?${params}`);
  }

  setBody(annotationId: string, text: string): Promise<AnnotationDocument> {
    return this.request(`/annotations/${encodeURIComponent(annotationId)}/body`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ text }),
    });
  }

  addLabels(annotationId: string, raw: string): Promise<{ tags: TagView[] }> {
    return this.request(`/annotations/${encodeURIComponent(annotationId)}/labels`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ raw }),
    });
  }

  cycleTag(annotationId: string, key: string): Promise<{ key: string; label: string; state: ChipState }> {
    // Keys may be full URIs; the service routes them as raw path segments.
    return this.request(`/annotations/${encodeURIComponent(annotationId)}/tags/${key}/cycle`, {
      method: "POST",
    });
  }

  search(q: string): Promise<{ hits: SearchHit[] }> {
    const params = new URLSearchParams({ q });
    return this.request(`/search?${params}`);
  }
}

/** Endpoint base: the ?api= query parameter, falling back to the page origin. */
export function endpointBase(location: Location): string {
  const fromQuery = new URLSearchParams(location.search).get("api");
  return (fromQuery ?? location.origin).replace(/\/+$/, "");
}
