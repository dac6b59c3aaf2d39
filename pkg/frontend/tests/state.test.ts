import { describe, expect, it } from "vitest";

import type { MutationReply, SessionInfo, SessionState } from "../src/api.js";
import {
  applyPromptReply,
  applyResync,
  applyUndoReply,
  beginMutation,
  canMutate,
  failMutation,
  initialState,
  markFinalized,
} from "../src/state.js";

const INFO: SessionInfo = {
  session_id: "s1",
  image_id: "img-a",
  width: 4,
  height: 3,
  revision: 0,
};

function reply(revision: number, counts: number[]): MutationReply {
  return {
    revision,
    label: { width: 4, height: 3, counts },
    clusters: [{ label: 1, bbox: [1, 0, 2, 1], centroid: [1.5, 0.5], kept: true }],
  };
}

describe("initialState", () => {
  it("starts with an empty mirror and an all-background mask", () => {
    const s = initialState(INFO);
    expect(s.prompts).toEqual([]);
    expect(s.revision).toBe(0);
    expect(s.mask.length).toBe(12);
    expect(s.mask.every((v) => v === 0)).toBe(true);
    expect(canMutate(s)).toBe(true);
  });
});

describe("mutation lifecycle", () => {
  it("allows exactly one mutation in flight", () => {
    const s = beginMutation(initialState(INFO));
    expect(canMutate(s)).toBe(false);
    expect(() => beginMutation(s)).toThrow(/already in flight/);
    expect(canMutate(failMutation(s))).toBe(true);
  });

  it("a failed mutation changes nothing but the in-flight flag", () => {
    const base = initialState(INFO);
    const after = failMutation(beginMutation(base));
    expect(after.revision).toBe(base.revision);
    expect(after.prompts).toEqual(base.prompts);
    expect(Array.from(after.mask)).toEqual(Array.from(base.mask));
  });

  it("applyPromptReply appends the prompt and adopts the label atomically", () => {
    const s0 = beginMutation(initialState(INFO));
    const prompt = { x: 1, y: 0, kind: "centroid" };
    const s1 = applyPromptReply(s0, prompt, reply(1, [1, 2, 9]));
    expect(s1.revision).toBe(1);
    expect(s1.prompts).toEqual([prompt]);
    expect(Array.from(s1.mask)).toEqual([0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
    expect(s1.clusters).toHaveLength(1);
    expect(canMutate(s1)).toBe(true);
  });

  it("applyUndoReply pops the newest prompt", () => {
    let s = beginMutation(initialState(INFO));
    s = applyPromptReply(s, { x: 1, y: 0, kind: "centroid" }, reply(1, [1, 2, 9]));
    s = applyPromptReply(beginMutation(s), { x: 3, y: 2, kind: "centroid" }, reply(2, [1, 3, 8]));
    expect(s.prompts).toHaveLength(2);
    const undone = applyUndoReply(beginMutation(s), reply(3, [1, 2, 9]));
    expect(undone.revision).toBe(3);
    expect(undone.prompts).toEqual([{ x: 1, y: 0, kind: "centroid" }]);
    expect(Array.from(undone.mask)).toEqual([0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
  });

  it("refuses an undo reply when no prompts are mirrored", () => {
    const s = beginMutation(initialState(INFO));
    expect(() => applyUndoReply(s, reply(1, [12]))).toThrow(/no prompts/);
  });

  it("rejects a label whose dimensions do not match the session image", () => {
    const s = beginMutation(initialState(INFO));
    const bad: MutationReply = { revision: 1, label: { width: 5, height: 3, counts: [15] }, clusters: [] };
    expect(() => applyPromptReply(s, { x: 0, y: 0, kind: "centroid" }, bad)).toThrow(/5x3/);
  });

  it("rejects a label whose runs do not cover the mask", () => {
    const s = beginMutation(initialState(INFO));
    const bad: MutationReply = { revision: 1, label: { width: 4, height: 3, counts: [5] }, clusters: [] };
    expect(() => applyPromptReply(s, { x: 0, y: 0, kind: "centroid" }, bad)).toThrow(/cover/);
  });
});

describe("applyResync", () => {
  it("adopts the server prompt list and revision without replaying anything", () => {
    let s = beginMutation(initialState(INFO));
    s = applyPromptReply(s, { x: 1, y: 0, kind: "centroid" }, reply(1, [1, 2, 9]));
    const server: SessionState = {
      ...INFO,
      revision: 5,
      prompts: [
        { x: 0, y: 0, kind: "centroid" },
        { x: 2, y: 1, kind: "coarse" },
      ],
      finalized: false,
    };
    const mask = new Uint8Array(12).fill(1);
    const synced = applyResync(beginMutation(s), server, mask);
    expect(synced.revision).toBe(5);
    expect(synced.prompts).toEqual(server.prompts);
    expect(Array.from(synced.mask)).toEqual(Array.from(mask));
    expect(canMutate(synced)).toBe(true);
  });

  it("rejects a mask of the wrong size", () => {
    const s = initialState(INFO);
    const server: SessionState = { ...INFO, prompts: [], finalized: false };
    expect(() => applyResync(s, server, new Uint8Array(5))).toThrow(/5 pixels/);
  });
});

describe("markFinalized", () => {
  it("sets the flag without touching annotation data", () => {
    const s = markFinalized(initialState(INFO));
    expect(s.finalized).toBe(true);
    expect(s.revision).toBe(0);
  });
});
