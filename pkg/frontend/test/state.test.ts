import { describe, expect, it } from "vitest";

import {
  appendAnswer,
  appendQuestion,
  applyVerify,
  initialState,
  markExpired,
  selectHeatmap,
} from "../src/state.js";
import { makeAskResponse, makeVerifyResponse } from "./fixtures.js";

describe("applyVerify", () => {
  it("mirrors the verify payload into the badge fields", () => {
    const state = applyVerify(initialState(), makeVerifyResponse());
    expect(state.decision).toBe("match");
    expect(state.confidence).toBe(0.93);
    expect(state.score).toBe(0.812);
    expect(state.table).toHaveLength(9);
    expect(state.heatmaps.map((t) => t.method)).toEqual([
      "S0minus", "S1minus", "S0plus", "S1plus", "AVG",
    ]);
    expect(state.selectedMethod).toBe("S0minus");
  });

  it("starts a fresh transcript per verification", () => {
    let state = applyVerify(initialState(), makeVerifyResponse());
    state = appendQuestion(state, "q1");
    state = appendAnswer(state, makeAskResponse());
    const next = applyVerify(state, makeVerifyResponse());
    expect(next.transcript).toHaveLength(0);
  });
});

describe("transcript", () => {
  it("is append-only and ordered by request", () => {
    let state = applyVerify(initialState(), makeVerifyResponse());
    const before = state.transcript;
    state = appendQuestion(state, "first");
    state = appendAnswer(state, makeAskResponse({ answer: "a1" }));
    state = appendQuestion(state, "second");
    state = appendAnswer(state, makeAskResponse({ answer: "a2" }));
    expect(before).toHaveLength(0); // older snapshots untouched
    expect(state.transcript.map((m) => m.text)).toEqual(["first", "a1", "second", "a2"]);
    expect(state.transcript.map((m) => m.role)).toEqual([
      "user", "assistant", "user", "assistant",
    ]);
  });

  it("marks low confidence below the threshold or when the sub-context was used", () => {
    let state = applyVerify(initialState(), makeVerifyResponse());
    state = appendAnswer(state, makeAskResponse({ confidence: 0.2 }));
    state = appendAnswer(state, makeAskResponse({
      confidence: 0.9,
      used_subcontext: true,
      subcontext_sentences: ["S one.", "S two."],
    }));
    state = appendAnswer(state, makeAskResponse({ confidence: 0.9 }));
    const markers = state.transcript.map((m) => m.lowConfidence);
    expect(markers).toEqual([true, true, false]);
  });

  it("pending toggles around a question/answer pair", () => {
    let state = applyVerify(initialState(), makeVerifyResponse());
    state = appendQuestion(state, "q");
    expect(state.pending).toBe(true);
    state = appendAnswer(state, makeAskResponse());
    expect(state.pending).toBe(false);
  });
});

describe("selectHeatmap", () => {
  it("switches only to known methods", () => {
    let state = applyVerify(initialState(), makeVerifyResponse());
    state = selectHeatmap(state, "AVG");
    expect(state.selectedMethod).toBe("AVG");
    state = selectHeatmap(state, "bogus");
    expect(state.selectedMethod).toBe("AVG");
  });
});

describe("markExpired", () => {
  it("clears pending and flags the session", () => {
    let state = applyVerify(initialState(), makeVerifyResponse());
    state = appendQuestion(state, "q");
    state = markExpired(state);
    expect(state.expired).toBe(true);
    expect(state.pending).toBe(false);
  });
});
