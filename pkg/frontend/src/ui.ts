/** DOM rendering and the app controller.
 *
 * The whole panel re-renders from state on every change; images and
 * numbers come verbatim from the API payloads (PNG overlays are fetched
 * from the service, never re-rendered client-side).
 */

import { ApiClient, ApiError } from "./api.js";
import {
  appendAnswer,
  appendFailure,
  appendQuestion,
  applyVerify,
  initialState,
  markExpired,
  selectHeatmap,
  withBanner,
  type UiSessionState,
} from "./state.js";
import { METHOD_LABELS } from "./types.js";

const PART_NAMES: Record<string, string> = {
  image_a: "first image",
  image_b: "second image",
};

export function verifyErrorMessage(error: ApiError): string {
  if (error.code === "NO_FACE_FOUND") {
    const part = error.image ? PART_NAMES[error.image] ?? error.image : "an image";
    return `No face found in the ${part}`;
  }
  return `${error.code}: ${error.message}`;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderDecisionPanel(state: UiSessionState): HTMLElement {
  const panel = el("section", "decision-panel");
  if (state.decision === null || state.confidence === null || state.score === null) {
    panel.appendChild(el("p", "placeholder", "Upload two face images to verify."));
    return panel;
  }
  const badge = el("span", `badge badge-${state.decision}`, state.decision);
  badge.dataset.testid = "decision-badge";
  const confidence = el(
    "span",
    "confidence",
    `${(state.confidence * 100).toFixed(1)}% confidence`,
  );
  confidence.dataset.testid = "confidence-badge";
  const score = el("span", "score", `score ${state.score.toFixed(3)}`);
  panel.append(badge, confidence, score);
  return panel;
}

export function renderTable(state: UiSessionState): HTMLElement {
  const wrap = el("section", "table-panel");
  if (state.table.length === 0) return wrap;
  const table = el("table", "explainability-table");
  const head = el("tr");
  for (const title of [
    "Region", "Single removal", "Greedy removal", "Single aggregation",
    "Greedy aggregation", "Average", "Mean", "Ratio of 1s",
  ]) {
    head.appendChild(el("th", undefined, title));
  }
  table.appendChild(head);
  for (const row of state.table) {
    const tr = el("tr", "region-row");
    tr.dataset.region = row.region;
    tr.appendChild(el("td", undefined, row.region.replace(/_/g, " ")));
    for (const value of [
      row.single_removal, row.greedy_removal, row.single_aggregation,
      row.greedy_aggregation, row.average,
    ]) {
      tr.appendChild(el("td", undefined, String(value)));
    }
    tr.appendChild(el("td", undefined, row.mean.toFixed(1)));
    tr.appendChild(el("td", undefined, row.ratio_of_1s.toFixed(1)));
    table.appendChild(tr);
  }
  wrap.appendChild(table);
  return wrap;
}

export function renderHeatmaps(
  state: UiSessionState,
  client: ApiClient,
  onSelect: (method: string) => void,
): HTMLElement {
  const wrap = el("section", "heatmap-panel");
  if (state.heatmaps.length === 0) return wrap;
  const tabs = el("div", "heatmap-tabs");
  for (const tab of state.heatmaps) {
    const button = el("button", "heatmap-tab", METHOD_LABELS[tab.method] ?? tab.method);
    button.dataset.method = tab.method;
    if (tab.method === state.selectedMethod) button.classList.add("active");
    button.addEventListener("click", () => onSelect(tab.method));
    tabs.appendChild(button);
  }
  wrap.appendChild(tabs);
  const selected = state.heatmaps.find((t) => t.method === state.selectedMethod);
  if (selected) {
    const img = el("img", "heatmap-image");
    img.src = client.resolveUrl(selected.url);
    img.alt = `${selected.method} heatmap overlay`;
    wrap.appendChild(img);
  }
  return wrap;
}

export function renderChat(
  state: UiSessionState,
  onSend: (text: string) => void,
): HTMLElement {
  const wrap = el("section", "chat-panel");
  const log = el("div", "chat-log");
  for (const message of state.transcript) {
    const bubble = el("div", `bubble bubble-${message.role}`, message.text);
    if (message.role === "assistant") {
      if (message.confidence !== undefined) {
        bubble.appendChild(
          el("span", "bubble-confidence", ` (${message.confidence.toFixed(2)})`),
        );
      }
      if (message.lowConfidence) {
        const marker = el("span", "low-confidence-marker", " low confidence");
        marker.dataset.testid = "low-confidence";
        bubble.appendChild(marker);
      }
      if (message.usedSubcontext && message.subcontext && message.subcontext.length > 0) {
        const tip = el("details", "subcontext-tip");
        tip.appendChild(el("summary", undefined, "answered from focused context"));
        const list = el("ul", "subcontext-sentences");
        for (const sentence of message.subcontext) {
          list.appendChild(el("li", undefined, sentence));
        }
        tip.appendChild(list);
        bubble.appendChild(tip);
      }
    }
    log.appendChild(bubble);
  }
  wrap.appendChild(log);

  if (state.expired) {
    const note = el("p", "expired-note", "Session expired; verify a new pair to continue.");
    note.dataset.testid = "expired-note";
    wrap.appendChild(note);
    return wrap;
  }

  const form = el("form", "chat-form");
  const input = el("input", "chat-input");
  input.type = "text";
  input.placeholder = "Ask about the decision";
  const send = el("button", "chat-send", "Send");
  send.type = "submit";
  send.disabled = state.pending || state.sessionId === null;
  form.append(input, send);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const text = input.value.trim();
    if (text && !state.pending) onSend(text);
  });
  wrap.appendChild(form);
  return wrap;
}

export class App {
  state: UiSessionState = initialState();

  constructor(
    private readonly root: HTMLElement,
    private readonly client: ApiClient,
  ) {
    this.render();
  }

  private setState(next: UiSessionState): void {
    this.state = next;
    this.render();
  }

  async handleUpload(imageA: Blob, imageB: Blob): Promise<void> {
    try {
      const response = await this.client.verify(imageA, imageB);
      this.setState(applyVerify(this.state, response));
    } catch (error) {
      if (error instanceof ApiError) {
        this.setState(withBanner(this.state, verifyErrorMessage(error)));
        return;
      }
      throw error;
    }
  }

  async handleSend(text: string): Promise<void> {
    if (this.state.pending || this.state.sessionId === null) return;
    const sessionId = this.state.sessionId;
    this.setState(appendQuestion(this.state, text));
    try {
      const response = await this.client.ask(sessionId, text);
      this.setState(appendAnswer(this.state, response));
    } catch (error) {
      if (error instanceof ApiError && error.status === 404) {
        this.setState(markExpired(this.state));
        return;
      }
      if (error instanceof ApiError) {
        this.setState(appendFailure(this.state, `${error.code}: ${error.message}`));
        return;
      }
      throw error;
    }
  }

  render(): void {
    this.root.replaceChildren();
    if (this.state.errorBanner) {
      const banner = el("div", "error-banner", this.state.errorBanner);
      banner.dataset.testid = "error-banner";
      this.root.appendChild(banner);
    }
    this.root.appendChild(renderDecisionPanel(this.state));
    this.root.appendChild(renderTable(this.state));
    this.root.appendChild(
      renderHeatmaps(this.state, this.client, (method) =>
        this.setState(selectHeatmap(this.state, method)),
      ),
    );
    this.root.appendChild(renderChat(this.state, (text) => void this.handleSend(text)));
  }
}
