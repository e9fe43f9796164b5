/** UI session state and its pure update helpers.
 *
 * The chat transcript is append-only: every helper returns a new state
 * whose transcript extends the previous one, so rendered order always
 * equals request order.
 */

import type { AskResponse, Decision, TableRow, VerifyResponse } from "./types.js";
import { HEATMAP_METHODS } from "./types.js";

export const LOW_CONFIDENCE_THRESHOLD = 0.5;

export interface ChatMessage {
  role: "user" | "assistant";
  text: string;
  confidence?: number;
  usedSubcontext?: boolean;
  subcontext?: string[];
  lowConfidence?: boolean;
}

export interface HeatmapTab {
  method: string;
  url: string;
}

export interface UiSessionState {
  sessionId: string | null;
  decision: Decision | null;
  confidence: number | null;
  score: number | null;
  table: TableRow[];
  heatmaps: HeatmapTab[];
  selectedMethod: string | null;
  transcript: ChatMessage[];
  pending: boolean;
  expired: boolean;
  errorBanner: string | null;
}

export function initialState(): UiSessionState {
  return {
    sessionId: null,
    decision: null,
    confidence: null,
    score: null,
    table: [],
    heatmaps: [],
    selectedMethod: null,
    transcript: [],
    pending: false,
    expired: false,
    errorBanner: null,
  };
}

/** A successful /verify starts a fresh session; the confidence badge
 * always mirrors the latest verify response. */
export function applyVerify(state: UiSessionState, response: VerifyResponse): UiSessionState {
  const heatmaps: HeatmapTab[] = HEATMAP_METHODS.filter(
    (method) => method in response.heatmap_urls,
  ).map((method) => ({ method, url: response.heatmap_urls[method] as string }));
  return {
    ...initialState(),
    sessionId: response.session_id,
    decision: response.decision,
    confidence: response.confidence,
    score: response.score,
    table: response.table.rows,
    heatmaps,
    selectedMethod: heatmaps.length > 0 ? (heatmaps[0] as HeatmapTab).method : null,
  };
}

export function selectHeatmap(state: UiSessionState, method: string): UiSessionState {
  if (!state.heatmaps.some((tab) => tab.method === method)) return state;
  return { ...state, selectedMethod: method };
}

export function appendQuestion(state: UiSessionState, text: string): UiSessionState {
  return {
    ...state,
    pending: true,
    transcript: [...state.transcript, { role: "user", text }],
  };
}

export function appendAnswer(state: UiSessionState, response: AskResponse): UiSessionState {
  const lowConfidence =
    response.used_subcontext || response.confidence < LOW_CONFIDENCE_THRESHOLD;
  return {
    ...state,
    pending: false,
    transcript: [
      ...state.transcript,
      {
        role: "assistant",
        text: response.answer,
        confidence: response.confidence,
        usedSubcontext: response.used_subcontext,
        subcontext: response.subcontext_sentences,
        lowConfidence,
      },
    ],
  };
}

export function appendFailure(state: UiSessionState, message: string): UiSessionState {
  return {
    ...state,
    pending: false,
    transcript: [
      ...state.transcript,
      { role: "assistant", text: message, lowConfidence: true },
    ],
  };
}

export function markExpired(state: UiSessionState): UiSessionState {
  return { ...state, pending: false, expired: true };
}

export function withBanner(state: UiSessionState, message: string | null): UiSessionState {
  return { ...state, pending: false, errorBanner: message };
}
