/** Typed client for the retrieval service HTTP API. */

export interface SearchResult {
  clip_id: string;
  score: number;
  rank: number;
}

export interface SearchResponse {
  route: "fulltext" | "vector";
  fallback_used: boolean;
  confidence: number;
  results: SearchResult[];
}

export interface CaptionOut {
  text: string;
  origin: string;
}

export interface TranscriptOut {
  text: string;
  source_tag: string;
}

export interface LineageStep {
  tool_name: string;
  tool_version: string;
  training_data_ref: string | null;
  created_at: string;
}

export interface DescriptorOut {
  descriptor_id: string;
  kind: string;
  payload_ref: string;
  facets: Record<string, string>;
  lineage: LineageStep[];
  lineage_error: string | null;
}

export interface ClipDetail {
  clip_id: string;
  split: string;
  captions: CaptionOut[];
  transcript: TranscriptOut | null;
  descriptors: DescriptorOut[];
}

export interface HealthResponse {
  status: string;
  ready: boolean;
  clips: number;
}

export interface InteractionBody {
  participant_id: string;
  action: "click" | "view";
  query_text?: string;
  route?: string;
  target_clip_id?: string;
}

/** Non-2xx response; carries the server's uniform `{"error": ...}` message. */
export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchFn = (input: string, init?: RequestInit) => Promise<Response>;

async function errorMessage(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { error?: unknown };
    if (typeof body.error === "string" && body.error) return body.error;
  } catch {
    // non-JSON error body; fall through to the status line
  }
  return `request failed with status ${response.status}`;
}

export class ApiClient {
  // Bound lazily so tests may stub globalThis.fetch after construction.
  constructor(
    private readonly baseUrl = "",
    private readonly fetchFn: FetchFn = (input, init) => globalThis.fetch(input, init),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path);
    if (!response.ok) throw new ApiError(response.status, await errorMessage(response));
    return (await response.json()) as T;
  }

  health(): Promise<HealthResponse> {
    return this.getJson<HealthResponse>("/healthz");
  }

  search(query: string, k: number, participantId: string): Promise<SearchResponse> {
    const params = new URLSearchParams({
      q: query,
      k: String(k),
      participant_id: participantId,
    });
    return this.getJson<SearchResponse>(`/search?${params}`);
  }

  clipDetail(clipId: string): Promise<ClipDetail> {
    return this.getJson<ClipDetail>(`/clips/${encodeURIComponent(clipId)}`);
  }

  async postInteraction(body: InteractionBody): Promise<string> {
    const response = await this.fetchFn(`${this.baseUrl}/interactions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) throw new ApiError(response.status, await errorMessage(response));
    const parsed = (await response.json()) as { interaction_id: string };
    return parsed.interaction_id;
  }
}
