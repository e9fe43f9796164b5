/** Payload shapes of the verification service JSON API. */

export type Decision = "match" | "non-match";

export interface TableRow {
  region: string;
  single_removal: number;
  greedy_removal: number;
  single_aggregation: number;
  greedy_aggregation: number;
  average: number;
  mean: number;
  ratio_of_1s: number;
}

export interface TablePayload {
  pair_id: string;
  rows: TableRow[];
}

export interface VerifyResponse {
  session_id: string;
  score: number;
  decision: Decision;
  confidence: number;
  table: TablePayload;
  heatmap_urls: Record<string, string>;
}

export interface AskResponse {
  answer: string;
  confidence: number;
  used_subcontext: boolean;
  subcontext_sentences: string[];
}

export interface SessionTurn {
  question: string;
  answer: string;
  confidence: number;
  used_subcontext: boolean;
}

export interface SessionSummary {
  session_id: string;
  pair_id: string;
  score: number;
  decision: Decision;
  confidence: number;
  table: TablePayload;
  turns: SessionTurn[];
  created_at: number;
  template_version: string;
}

export interface ApiErrorBody {
  error: {
    code: string;
    message: string;
    image?: string;
  };
}

/** The five saliency methods, in display order. */
export const HEATMAP_METHODS = ["S0minus", "S1minus", "S0plus", "S1plus", "AVG"] as const;

export const METHOD_LABELS: Record<string, string> = {
  S0minus: "Single removal",
  S1minus: "Greedy removal",
  S0plus: "Single aggregation",
  S1plus: "Greedy aggregation",
  AVG: "Average",
};
