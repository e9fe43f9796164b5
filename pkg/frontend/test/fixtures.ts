import type { AskResponse, TableRow, VerifyResponse } from "../src/types.js";

const REGIONS = [
  "left_eyebrow", "right_eyebrow", "left_eye", "right_eye",
  "left_cheek", "right_cheek", "chin", "lips", "nose",
];

export function makeTableRows(): TableRow[] {
  const scores: Record<string, [number, number, number, number, number]> = {
    left_eyebrow: [1, 5, 1, 5, 1],
    right_eyebrow: [3, 5, 1, 4, 1],
    left_eye: [1, 5, 2, 5, 1],
    right_eye: [3, 5, 2, 5, 3],
    left_cheek: [4, 5, 5, 5, 5],
    right_cheek: [2, 5, 3, 5, 4],
    chin: [4, 5, 1, 5, 4],
    lips: [5, 5, 2, 5, 5],
    nose: [5, 5, 5, 5, 5],
  };
  return REGIONS.map((region) => {
    const s = scores[region] as [number, number, number, number, number];
    const mean = (s[0] + s[1] + s[2] + s[3] + s[4]) / 5;
    const ones = s.filter((v) => v === 1).length / 5;
    return {
      region,
      single_removal: s[0],
      greedy_removal: s[1],
      single_aggregation: s[2],
      greedy_aggregation: s[3],
      average: s[4],
      mean,
      ratio_of_1s: ones,
    };
  });
}

export const SESSION_ID = "0123456789abcdef0123456789abcdef";

export function makeVerifyResponse(): VerifyResponse {
  const urls: Record<string, string> = {};
  for (const method of ["S0minus", "S1minus", "S0plus", "S1plus", "AVG"]) {
    urls[method] = `/v1/sessions/${SESSION_ID}/heatmaps/${method}.png`;
  }
  return {
    session_id: SESSION_ID,
    score: 0.812,
    decision: "match",
    confidence: 0.93,
    table: { pair_id: "a::b", rows: makeTableRows() },
    heatmap_urls: urls,
  };
}

export function makeAskResponse(overrides: Partial<AskResponse> = {}): AskResponse {
  return {
    answer: "The decision is match with a confidence of 93.0 percent.",
    confidence: 1.0,
    used_subcontext: false,
    subcontext_sentences: [],
    ...overrides,
  };
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}
