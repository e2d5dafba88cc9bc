// Session state and the event reducer.
//
// Every UI interaction and every completed request becomes a UIEvent, and
// `reduce` is a pure function of (state, event), so a recorded event log
// replayed through `replay` reconstructs the session exactly. Responses
// carry the sequence number of the request that produced them; a response
// whose seq no longer matches the pending one was superseded by a newer
// request and is dropped.

import type {
  FrameInfo,
  QAReceipt,
  QARequest,
  SearchRequest,
  SearchResponse,
  TemporalRequest,
  TemporalResponse,
} from "./types.js";

export interface UISessionState {
  sessionId: string;
  modelIds: string[];

  query: string;
  limit: number;
  rerankEnabled: boolean;
  rerankRadius: number;
  includeCenter: boolean;
  weights: Record<string, number>;
  modelEnabled: Record<string, boolean>;

  requestSeq: number;
  pendingSearch: number | null;
  pendingTemporal: number | null;
  pendingFrames: number | null;
  pendingQa: number | null;

  results: SearchResponse | null;
  anchorKey: number | null;

  queryStart: string;
  queryEnd: string;
  gapC: number;
  proposal: TemporalResponse | null;
  adjustedStart: number | null;
  adjustedEnd: number | null;
  confirmedPair: { startKey: number; endKey: number } | null;

  qaFrames: FrameInfo[] | null;
  question: string;
  answerDraft: string;
  receipt: QAReceipt | null;

  lastError: string | null;
}

export type UIEvent =
  | { kind: "models-loaded"; modelIds: string[] }
  | { kind: "query-set"; text: string }
  | { kind: "rerank-toggled"; enabled: boolean }
  | { kind: "radius-set"; radius: number }
  | { kind: "include-center-toggled"; includeCenter: boolean }
  | { kind: "weight-set"; modelId: string; weight: number }
  | { kind: "model-toggled"; modelId: string; enabled: boolean }
  | { kind: "search-sent" }
  | { kind: "results-received"; seq: number; response: SearchResponse }
  | { kind: "anchor-selected"; frameKey: number }
  | { kind: "start-query-set"; text: string }
  | { kind: "end-query-set"; text: string }
  | { kind: "gap-set"; gapC: number }
  | { kind: "temporal-sent" }
  | { kind: "proposal-received"; seq: number; response: TemporalResponse }
  | { kind: "boundary-adjusted"; side: "start" | "end"; frameKey: number }
  | { kind: "boundaries-confirmed" }
  | { kind: "frames-sent" }
  | { kind: "frames-received"; seq: number; frames: FrameInfo[] }
  | { kind: "question-set"; text: string }
  | { kind: "answer-set"; text: string }
  | { kind: "qa-sent" }
  | { kind: "receipt-received"; seq: number; receipt: QAReceipt }
  | { kind: "request-failed"; seq: number; message: string };

export const DEFAULT_LIMIT = 100;
export const DEFAULT_GAP = 50;
export const DEFAULT_RADIUS = 2;

export function initialState(sessionId: string): UISessionState {
  return {
    sessionId,
    modelIds: [],
    query: "",
    limit: DEFAULT_LIMIT,
    rerankEnabled: false,
    rerankRadius: DEFAULT_RADIUS,
    includeCenter: true,
    weights: {},
    modelEnabled: {},
    requestSeq: 0,
    pendingSearch: null,
    pendingTemporal: null,
    pendingFrames: null,
    pendingQa: null,
    results: null,
    anchorKey: null,
    queryStart: "",
    queryEnd: "",
    gapC: DEFAULT_GAP,
    proposal: null,
    adjustedStart: null,
    adjustedEnd: null,
    confirmedPair: null,
    qaFrames: null,
    question: "",
    answerDraft: "",
    receipt: null,
    lastError: null,
  };
}

/** All candidate frames of a proposal, deduplicated, in temporal order. */
export function candidateStrip(proposal: TemporalResponse): FrameInfo[] {
  const byKey = new Map<number, FrameInfo>();
  for (const frame of [...proposal.candidates.start, ...proposal.candidates.end]) {
    if (!byKey.has(frame.frame_key)) {
      byKey.set(frame.frame_key, frame);
    }
  }
  return [...byKey.values()].sort((a, b) => a.frame_key - b.frame_key);
}

function candidateScore(proposal: TemporalResponse, side: "start" | "end", key: number): number {
  const match = proposal.candidates[side].find((f) => f.frame_key === key);
  return match?.score ?? 0.0;
}

/**
 * Why the confirm button is disabled, or null when the adjusted pair is
 * submittable. The pair must bracket time (start <= end), stay inside one
 * video, and span at most the gap limit.
 */
export function confirmBlocker(state: UISessionState): string | null {
  const { proposal, adjustedStart, adjustedEnd } = state;
  if (proposal === null || adjustedStart === null || adjustedEnd === null) {
    return "no proposed moment yet";
  }
  if (adjustedEnd < adjustedStart) {
    return `end frame ${adjustedEnd} precedes start frame ${adjustedStart}`;
  }
  const strip = candidateStrip(proposal);
  const startVideo = strip.find((f) => f.frame_key === adjustedStart)?.video_id;
  const endVideo = strip.find((f) => f.frame_key === adjustedEnd)?.video_id;
  if (startVideo === undefined || endVideo === undefined || startVideo !== endVideo) {
    return "boundaries must stay within one video";
  }
  const span = adjustedEnd - adjustedStart;
  if (span > state.gapC) {
    return `span ${span} exceeds the gap limit ${state.gapC}`;
  }
  return null;
}

/** Why the QA submit button is disabled, or null when ready. */
export function qaBlocker(state: UISessionState): string | null {
  if (state.confirmedPair === null) {
    return "confirm a moment first";
  }
  if (state.question.trim() === "") {
    return "question required";
  }
  if (state.answerDraft.trim() === "") {
    return "answer required";
  }
  if (state.pendingQa !== null) {
    return "submission in flight";
  }
  return null;
}

export function reduce(state: UISessionState, event: UIEvent): UISessionState {
  switch (event.kind) {
    case "models-loaded": {
      const weights: Record<string, number> = {};
      const enabled: Record<string, boolean> = {};
      for (const id of event.modelIds) {
        weights[id] = state.weights[id] ?? 1.0;
        enabled[id] = state.modelEnabled[id] ?? true;
      }
      return { ...state, modelIds: [...event.modelIds], weights, modelEnabled: enabled };
    }

    case "query-set":
      return { ...state, query: event.text };
    case "rerank-toggled":
      return { ...state, rerankEnabled: event.enabled };
    case "radius-set":
      return { ...state, rerankRadius: event.radius };
    case "include-center-toggled":
      return { ...state, includeCenter: event.includeCenter };
    case "weight-set":
      if (!(event.modelId in state.weights)) {
        return state;
      }
      return { ...state, weights: { ...state.weights, [event.modelId]: event.weight } };
    case "model-toggled":
      if (!(event.modelId in state.modelEnabled)) {
        return state;
      }
      return {
        ...state,
        modelEnabled: { ...state.modelEnabled, [event.modelId]: event.enabled },
      };

    case "search-sent": {
      if (state.query.trim() === "") {
        return state;
      }
      const seq = state.requestSeq + 1;
      return { ...state, requestSeq: seq, pendingSearch: seq };
    }
    case "results-received":
      if (event.seq !== state.pendingSearch) {
        return state; // superseded by a newer search
      }
      return {
        ...state,
        pendingSearch: null,
        results: event.response,
        anchorKey: null,
        proposal: null,
        adjustedStart: null,
        adjustedEnd: null,
        confirmedPair: null,
        qaFrames: null,
        receipt: null,
        lastError: null,
      };

    case "anchor-selected": {
      const entries = state.results?.entries ?? [];
      if (!entries.some((e) => e.frame_key === event.frameKey)) {
        return state;
      }
      return {
        ...state,
        anchorKey: event.frameKey,
        proposal: null,
        adjustedStart: null,
        adjustedEnd: null,
        confirmedPair: null,
        qaFrames: null,
        receipt: null,
      };
    }

    case "start-query-set":
      return { ...state, queryStart: event.text };
    case "end-query-set":
      return { ...state, queryEnd: event.text };
    case "gap-set":
      if (!Number.isInteger(event.gapC) || event.gapC < 0) {
        return state;
      }
      return { ...state, gapC: event.gapC };

    case "temporal-sent": {
      if (
        state.anchorKey === null ||
        state.queryStart.trim() === "" ||
        state.queryEnd.trim() === ""
      ) {
        return state;
      }
      const seq = state.requestSeq + 1;
      return { ...state, requestSeq: seq, pendingTemporal: seq };
    }
    case "proposal-received":
      if (event.seq !== state.pendingTemporal) {
        return state;
      }
      return {
        ...state,
        pendingTemporal: null,
        proposal: event.response,
        adjustedStart: event.response.moment.start_key,
        adjustedEnd: event.response.moment.end_key,
        confirmedPair: null,
        qaFrames: null,
        receipt: null,
        lastError: null,
      };

    case "boundary-adjusted": {
      if (state.proposal === null) {
        return state;
      }
      const keys = candidateStrip(state.proposal).map((f) => f.frame_key);
      if (!keys.includes(event.frameKey)) {
        return state;
      }
      // Moving a boundary reopens the pair; adjustments are validated by
      // confirmBlocker, not here, so the UI can show why a pick is invalid.
      const moved =
        event.side === "start"
          ? { adjustedStart: event.frameKey }
          : { adjustedEnd: event.frameKey };
      return { ...state, ...moved, confirmedPair: null, qaFrames: null, receipt: null };
    }

    case "boundaries-confirmed":
      if (confirmBlocker(state) !== null) {
        return state;
      }
      return {
        ...state,
        confirmedPair: { startKey: state.adjustedStart!, endKey: state.adjustedEnd! },
      };

    case "frames-sent": {
      if (state.confirmedPair === null) {
        return state;
      }
      const seq = state.requestSeq + 1;
      return { ...state, requestSeq: seq, pendingFrames: seq };
    }
    case "frames-received":
      if (event.seq !== state.pendingFrames) {
        return state;
      }
      return { ...state, pendingFrames: null, qaFrames: event.frames, lastError: null };

    case "question-set":
      return { ...state, question: event.text };
    case "answer-set":
      return { ...state, answerDraft: event.text };

    case "qa-sent": {
      if (qaBlocker(state) !== null) {
        return state;
      }
      const seq = state.requestSeq + 1;
      return { ...state, requestSeq: seq, pendingQa: seq };
    }
    case "receipt-received":
      if (event.seq !== state.pendingQa) {
        return state;
      }
      return { ...state, pendingQa: null, receipt: event.receipt, lastError: null };

    case "request-failed": {
      // Clear whichever request this seq belonged to; drafts stay intact so
      // the user can retry without retyping anything.
      const next = { ...state, lastError: event.message };
      if (event.seq === state.pendingSearch) next.pendingSearch = null;
      if (event.seq === state.pendingTemporal) next.pendingTemporal = null;
      if (event.seq === state.pendingFrames) next.pendingFrames = null;
      if (event.seq === state.pendingQa) next.pendingQa = null;
      return next;
    }
  }
}

/** Rebuild a session from a recorded event log. */
export function replay(sessionId: string, events: UIEvent[]): UISessionState {
  return events.reduce(reduce, initialState(sessionId));
}

// Request builders. Strategy toggles map one to one onto request fields so
// any UI search is reproducible with curl.

export function searchBody(state: UISessionState): SearchRequest {
  const body: SearchRequest = {
    query: state.query,
    models: state.modelIds.map((id) => ({
      model_id: id,
      weight: state.weights[id],
      enabled: state.modelEnabled[id],
    })),
    limit: state.limit,
  };
  if (state.rerankEnabled) {
    body.rerank = {
      enabled: true,
      radius: state.rerankRadius,
      include_center: state.includeCenter,
    };
  }
  return body;
}

export function temporalBody(state: UISessionState): TemporalRequest {
  if (state.anchorKey === null) {
    throw new Error("no anchor selected");
  }
  return {
    anchor_key: state.anchorKey,
    query_start: state.queryStart,
    query_end: state.queryEnd,
    gap_c: state.gapC,
  };
}

export function qaBody(state: UISessionState): QARequest {
  const { proposal, confirmedPair } = state;
  if (proposal === null || confirmedPair === null) {
    throw new Error("no confirmed moment");
  }
  return {
    session_id: state.sessionId,
    question: state.question,
    answer: state.answerDraft,
    moment: {
      video_id: proposal.moment.video_id,
      anchor_key: proposal.moment.anchor_key,
      start_key: confirmedPair.startKey,
      end_key: confirmedPair.endKey,
      start_score: candidateScore(proposal, "start", confirmedPair.startKey),
      end_score: candidateScore(proposal, "end", confirmedPair.endKey),
    },
    viewed_frame_keys: (state.qaFrames ?? []).map((f) => f.frame_key),
  };
}
