/**
 * Client-side annotation session state and its transitions.
 *
 * Invariants maintained here, independent of any DOM:
 *  - the local prompt list mirrors the server's after every acknowledged
 *    mutation (append on prompt, pop on undo, wholesale replace on resync);
 *  - the mask always corresponds to `revision`;
 *  - at most one mutation is in flight, because prompt order matters.
 *
 * All transitions return fresh objects; a failed transition never leaves
 * the state half-updated.
 */

import type { ClusterSummary, MutationReply, PromptPoint, SessionInfo, SessionState } from "./api.js";
import { decodeRle } from "./rle.js";

export interface AnnotationState {
  sessionId: string;
  imageId: string;
  width: number;
  height: number;
  revision: number;
  prompts: PromptPoint[];
  mask: Uint8Array;
  clusters: ClusterSummary[];
  inFlight: boolean;
  finalized: boolean;
}

export function initialState(info: SessionInfo): AnnotationState {
  return {
    sessionId: info.session_id,
    imageId: info.image_id,
    width: info.width,
    height: info.height,
    revision: info.revision,
    prompts: [],
    mask: new Uint8Array(info.width * info.height),
    clusters: [],
    inFlight: false,
    finalized: false,
  };
}

export function canMutate(state: AnnotationState): boolean {
  return !state.inFlight;
}

/** Mark a mutation as started; callers must have checked canMutate. */
export function beginMutation(state: AnnotationState): AnnotationState {
  if (state.inFlight) {
    throw new Error("a mutation is already in flight");
  }
  return { ...state, inFlight: true };
}

/** Release the in-flight slot without touching annotation data (422, network error). */
export function failMutation(state: AnnotationState): AnnotationState {
  return { ...state, inFlight: false };
}

function decodeReply(state: AnnotationState, reply: MutationReply): Uint8Array {
  if (reply.label.width !== state.width || reply.label.height !== state.height) {
    throw new Error(
      `label is ${reply.label.width}x${reply.label.height}, ` +
        `session image is ${state.width}x${state.height}`,
    );
  }
  return decodeRle(reply.label);
}

/** Fold in a successful prompt mutation: append the prompt, adopt the new label. */
export function applyPromptReply(
  state: AnnotationState,
  prompt: PromptPoint,
  reply: MutationReply,
): AnnotationState {
  const mask = decodeReply(state, reply);
  return {
    ...state,
    revision: reply.revision,
    prompts: [...state.prompts, prompt],
    mask,
    clusters: reply.clusters,
    inFlight: false,
  };
}

/** Fold in a successful undo: drop the newest prompt, adopt the new label. */
export function applyUndoReply(state: AnnotationState, reply: MutationReply): AnnotationState {
  if (state.prompts.length === 0) {
    throw new Error("undo acknowledged but no prompts are mirrored locally");
  }
  const mask = decodeReply(state, reply);
  return {
    ...state,
    revision: reply.revision,
    prompts: state.prompts.slice(0, -1),
    mask,
    clusters: reply.clusters,
    inFlight: false,
  };
}

/**
 * Replace local state with the server's after a stale-revision conflict.
 * Nothing local is replayed: the server's prompt list and revision win,
 * and the caller supplies the freshly refetched label bitmap.
 */
export function applyResync(
  state: AnnotationState,
  server: SessionState,
  mask: Uint8Array,
): AnnotationState {
  if (mask.length !== state.width * state.height) {
    throw new Error(`resync mask has ${mask.length} pixels, expected ${state.width * state.height}`);
  }
  return {
    ...state,
    revision: server.revision,
    prompts: [...server.prompts],
    mask,
    clusters: [],
    inFlight: false,
    finalized: server.finalized,
  };
}

export function markFinalized(state: AnnotationState): AnnotationState {
  return { ...state, finalized: true };
}
