/** The explorer UI: a search box, a routing badge, a result list, and a
 * clip detail panel. Plain DOM, no framework; every piece of server data
 * lands in textContent, never in markup.
 */

import { ApiError, type ApiClient, type ClipDetail, type SearchResponse } from "./api.js";

export interface ExplorerOptions {
  api: Pick<ApiClient, "search" | "clipDetail" | "postInteraction">;
  participantId: string;
  k?: number;
}

export interface Explorer {
  root: HTMLElement;
  /** Run a search and render the outcome; render errors instead of throwing. */
  search(query: string): Promise<void>;
  /** Log a click on a result, then open its detail panel. */
  clickResult(clipId: string): Promise<void>;
  /** Resolves when the most recent user-triggered operation settles. */
  whenIdle(): Promise<void>;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function messageOf(error: unknown): string {
  if (error instanceof ApiError) return error.message;
  if (error instanceof Error) return `request failed: ${error.message}`;
  return "request failed";
}

export function createExplorer(root: HTMLElement, options: ExplorerOptions): Explorer {
  const { api, participantId } = options;
  const k = options.k ?? 10;
  const doc = root.ownerDocument;

  const header = el(doc, "header");
  header.append(
    el(doc, "h1", undefined, "clip search"),
    el(doc, "span", "participant", `participant ${participantId}`),
  );

  const input = el(doc, "input");
  input.type = "search";
  input.name = "q";
  input.placeholder = 'try a caption, or a "quoted phrase" someone said';
  const button = el(doc, "button", undefined, "search");
  button.type = "submit";
  const form = el(doc, "form", "search-form");
  form.append(input, button);

  // The badge is always present; data-route carries the machine-readable
  // value for styling and tests.
  const badge = el(doc, "span", "route-badge", "no search yet");
  badge.dataset.route = "";
  const confidence = el(doc, "span", "confidence");
  const fallback = el(doc, "span", "fallback-flag", "no full-text hits, fell back to vector");
  fallback.hidden = true;
  const status = el(doc, "div", "status");
  status.append(badge, confidence, fallback);

  const errorBanner = el(doc, "div", "error-banner");
  errorBanner.setAttribute("role", "alert");
  errorBanner.hidden = true;

  const results = el(doc, "ol", "results");
  const detail = el(doc, "section", "detail");
  detail.hidden = true;

  root.append(header, form, status, errorBanner, results, detail);

  let lastQuery = "";
  let lastResponse: SearchResponse | null = null;
  let pending: Promise<void> = Promise.resolve();

  function showError(error: unknown): void {
    errorBanner.textContent = messageOf(error);
    errorBanner.hidden = false;
  }

  function renderStatus(response: SearchResponse): void {
    badge.textContent = response.route;
    badge.dataset.route = response.route;
    confidence.textContent = `confidence ${(response.confidence * 100).toFixed(0)}%`;
    fallback.hidden = !response.fallback_used;
  }

  function renderResults(response: SearchResponse): void {
    results.replaceChildren();
    if (response.results.length === 0) {
      results.append(el(doc, "li", "empty", "no results"));
      return;
    }
    for (const hit of response.results) {
      const li = el(doc, "li", "result");
      const open = el(doc, "button", "result-open");
      open.type = "button";
      open.dataset.clipId = hit.clip_id;
      open.append(
        el(doc, "span", "rank", `#${hit.rank}`),
        el(doc, "span", "clip-id", hit.clip_id),
        el(doc, "span", "score", hit.score.toFixed(4)),
      );
      open.addEventListener("click", () => {
        pending = clickResult(hit.clip_id);
      });
      li.append(open);
      results.append(li);
    }
  }

  function renderFacets(facets: Record<string, string>): HTMLElement {
    const dl = el(doc, "dl", "facets");
    for (const [name, value] of Object.entries(facets)) {
      dl.append(el(doc, "dt", undefined, name), el(doc, "dd", undefined, value));
    }
    return dl;
  }

  function renderDetail(clip: ClipDetail): void {
    detail.replaceChildren();
    detail.hidden = false;
    detail.append(el(doc, "h2", undefined, `${clip.clip_id} (${clip.split})`));

    const captions = el(doc, "ul", "captions");
    for (const caption of clip.captions) {
      const li = el(doc, "li", undefined, caption.text);
      li.append(el(doc, "span", "origin", ` [${caption.origin}]`));
      captions.append(li);
    }
    detail.append(el(doc, "h3", undefined, `captions (${clip.captions.length})`), captions);

    detail.append(el(doc, "h3", undefined, "transcript"));
    if (clip.transcript === null) {
      detail.append(el(doc, "p", "transcript none", "no transcript"));
    } else {
      const p = el(doc, "p", "transcript", clip.transcript.text);
      p.append(el(doc, "span", "origin", ` [${clip.transcript.source_tag}]`));
      detail.append(p);
    }

    detail.append(el(doc, "h3", undefined, `descriptors (${clip.descriptors.length})`));
    for (const descriptor of clip.descriptors) {
      const section = el(doc, "section", "descriptor");
      section.append(
        el(doc, "h4", undefined, `${descriptor.descriptor_id} (${descriptor.kind})`),
        renderFacets(descriptor.facets),
      );
      const lineage = el(doc, "ol", "lineage");
      for (const step of descriptor.lineage) {
        const label = step.tool_version ? `${step.tool_name} v${step.tool_version}` : step.tool_name;
        const li = el(doc, "li", undefined, label);
        if (step.training_data_ref) {
          li.append(el(doc, "span", "ref", ` from ${step.training_data_ref}`));
        }
        lineage.append(li);
      }
      section.append(el(doc, "h5", undefined, "lineage"), lineage);
      if (descriptor.lineage_error) {
        section.append(el(doc, "p", "lineage-error", descriptor.lineage_error));
      }
      detail.append(section);
    }
  }

  async function search(query: string): Promise<void> {
    const trimmed = query.trim();
    if (!trimmed) {
      showError(new ApiError(400, "enter a query first"));
      return;
    }
    try {
      const response = await api.search(trimmed, k, participantId);
      lastQuery = trimmed;
      lastResponse = response;
      errorBanner.hidden = true;
      renderStatus(response);
      renderResults(response);
    } catch (error) {
      // Keep the previous results and badge on screen; only the banner changes.
      showError(error);
    }
  }

  async function clickResult(clipId: string): Promise<void> {
    try {
      await api.postInteraction({
        participant_id: participantId,
        action: "click",
        query_text: lastQuery || undefined,
        route: lastResponse?.route,
        target_clip_id: clipId,
      });
      renderDetail(await api.clipDetail(clipId));
      errorBanner.hidden = true;
    } catch (error) {
      showError(error);
    }
  }

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    pending = search(input.value);
  });

  return {
    root,
    search: (query) => (pending = search(query)),
    clickResult: (clipId) => (pending = clickResult(clipId)),
    whenIdle: () => pending,
  };
}
