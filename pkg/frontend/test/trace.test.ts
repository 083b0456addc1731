import { describe, expect, it } from "vitest";

import { buildTraceTree, flattenTree } from "../src/trace.js";
import type { TurnResult } from "../src/types.js";
import recorded from "./fixtures/mango_turn.json";

const turn = recorded.turn as unknown as TurnResult;

describe("buildTraceTree", () => {
  it("roots the tree at the answer with a one-line explanation", () => {
    const root = buildTraceTree(turn);
    expect(root.label).toBe(turn.answer);
    expect(root.detail).toBe(turn.explanation);
  });

  it("mirrors each trace resolution one-to-one", () => {
    const root = buildTraceTree(turn);
    const pronouns = root.children[0];
    expect(pronouns.label).toContain("pronoun matches (1)");
    expect(pronouns.children).toHaveLength(turn.trace.resolutions!.length);
    const match = pronouns.children[0];
    expect(match.label).toContain('"this"');
    expect(match.label).toContain("scene_singular");
    const chosen = match.children.find((c) => c.label === "chosen referent");
    expect(chosen?.detail).toBe(
      'parent_hit: "bottle with text that says Naked Mighty Mango 290 Calories"',
    );
  });

  it("carries candidate evidence below the match", () => {
    const root = buildTraceTree(turn);
    const match = root.children[0].children[0];
    const evidence = match.children.find((c) => c.label === "candidates / evidence");
    expect(evidence).toBeDefined();
    const flat = flattenTree(evidence!).map((row) => row.node.label + (row.node.detail ?? ""));
    expect(flat.some((s) => s.includes("parent"))).toBe(true);
    expect(flat.some((s) => s.includes("channel"))).toBe(true);
  });

  it("includes the assembled payload and replacements", () => {
    const root = buildTraceTree(turn);
    const payload = root.children.find((c) => c.label === "assembled payload");
    expect(payload?.detail).toBe(turn.trace.payload);
    const reps = root.children.find((c) => c.label.startsWith("replacements"));
    expect(reps?.children[0].label).toContain("a bottle with text that says");
  });

  it("renders fallback turns without resolutions", () => {
    const fallbackTurn: TurnResult = {
      turn_id: "t",
      answer: "Sorry, I did not understand your question.",
      explanation: null,
      fallback: true,
      timings: [],
      trace: {
        turn_id: "t",
        query: "What is this?",
        mode: "v1",
        inputs: { gaze_px: [0, 0], point_px: null },
        pronouns: [{ lexeme: "this", span: [8, 12], strategy: "scene_singular" }],
        error: "NothingToReplace: no referent for 'this'",
      },
    };
    const root = buildTraceTree(fallbackTurn);
    expect(root.detail).toBe("fallback reply");
    const error = root.children.find((c) => c.label === "error");
    expect(error?.detail).toContain("NothingToReplace");
  });
});
