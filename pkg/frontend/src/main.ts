// Page wiring: reads DOM events, dispatches UIEvents through the reducer,
// re-renders the containers whose state slice changed, and fires the HTTP
// requests implied by new pending sequence numbers. Inputs live in static
// HTML so typing never gets clobbered by a re-render.

import * as api from "./api.js";
import {
  renderConfirmControls,
  renderModelRows,
  renderQaControls,
  renderQaStrip,
  renderReceipt,
  renderResultsGrid,
  renderStatus,
  renderTemporalStrip,
} from "./render.js";
import {
  confirmBlocker,
  initialState,
  qaBlocker,
  qaBody,
  reduce,
  searchBody,
  temporalBody,
  type UIEvent,
  type UISessionState,
} from "./state.js";

function byElement<T extends HTMLElement>(name: string): T {
  const el = document.querySelector<T>(`[data-element=${name}]`);
  if (el === null) {
    throw new Error(`missing element: ${name}`);
  }
  return el;
}

const queryInput = byElement<HTMLInputElement>("query-input");
const searchButton = byElement<HTMLButtonElement>("search-button");
const rerankToggle = byElement<HTMLInputElement>("rerank-toggle");
const radiusInput = byElement<HTMLInputElement>("radius-input");
const includeCenterToggle = byElement<HTMLInputElement>("include-center-toggle");
const modelRows = byElement<HTMLDivElement>("model-rows");
const statusLine = byElement<HTMLSpanElement>("status-line");
const resultsGrid = byElement<HTMLDivElement>("results-grid");
const startQueryInput = byElement<HTMLInputElement>("start-query-input");
const endQueryInput = byElement<HTMLInputElement>("end-query-input");
const gapInput = byElement<HTMLInputElement>("gap-input");
const temporalButton = byElement<HTMLButtonElement>("temporal-button");
const temporalStrip = byElement<HTMLDivElement>("temporal-strip");
const confirmArea = byElement<HTMLDivElement>("confirm-area");
const qaStrip = byElement<HTMLDivElement>("qa-strip");
const questionInput = byElement<HTMLInputElement>("question-input");
const answerInput = byElement<HTMLTextAreaElement>("answer-input");
const qaControls = byElement<HTMLDivElement>("qa-controls");
const receiptArea = byElement<HTMLDivElement>("receipt-area");

let state: UISessionState = initialState(crypto.randomUUID());

const aborters: Record<"search" | "temporal" | "frames", AbortController | null> = {
  search: null,
  temporal: null,
  frames: null,
};

function isAbort(err: unknown): boolean {
  return err instanceof DOMException && err.name === "AbortError";
}

function failureMessage(err: unknown): string {
  if (err instanceof api.ApiError) {
    return err.message;
  }
  return err instanceof Error ? err.message : String(err);
}

function runEffects(prev: UISessionState, next: UISessionState): void {
  if (next.pendingSearch !== null && next.pendingSearch !== prev.pendingSearch) {
    const seq = next.pendingSearch;
    aborters.search?.abort();
    aborters.search = new AbortController();
    api
      .search(searchBody(next), aborters.search.signal)
      .then((response) => dispatch({ kind: "results-received", seq, response }))
      .catch((err) => {
        if (!isAbort(err)) {
          dispatch({ kind: "request-failed", seq, message: failureMessage(err) });
        }
      });
  }

  if (next.pendingTemporal !== null && next.pendingTemporal !== prev.pendingTemporal) {
    const seq = next.pendingTemporal;
    aborters.temporal?.abort();
    aborters.temporal = new AbortController();
    api
      .temporal(temporalBody(next), aborters.temporal.signal)
      .then((response) => dispatch({ kind: "proposal-received", seq, response }))
      .catch((err) => {
        if (!isAbort(err)) {
          dispatch({ kind: "request-failed", seq, message: failureMessage(err) });
        }
      });
  }

  if (next.pendingFrames !== null && next.pendingFrames !== prev.pendingFrames) {
    const seq = next.pendingFrames;
    const pair = next.confirmedPair;
    const strip =
      next.proposal === null
        ? []
        : [...next.proposal.candidates.start, ...next.proposal.candidates.end];
    // The reducer only accepts frames-sent with a confirmed pair drawn from
    // the candidate strip, so both lookups succeed.
    const start = strip.find((f) => f.frame_key === pair?.startKey);
    const end = strip.find((f) => f.frame_key === pair?.endKey);
    if (start !== undefined && end !== undefined) {
      aborters.frames?.abort();
      aborters.frames = new AbortController();
      api
        .framesWindow(start.video_id, start.frame_index, end.frame_index, aborters.frames.signal)
        .then((body) => dispatch({ kind: "frames-received", seq, frames: body.frames }))
        .catch((err) => {
          if (!isAbort(err)) {
            dispatch({ kind: "request-failed", seq, message: failureMessage(err) });
          }
        });
    }
  }

  if (next.pendingQa !== null && next.pendingQa !== prev.pendingQa) {
    const seq = next.pendingQa;
    api
      .submitQa(qaBody(next))
      .then((receipt) => dispatch({ kind: "receipt-received", seq, receipt }))
      .catch((err) => dispatch({ kind: "request-failed", seq, message: failureMessage(err) }));
  }
}

function sync(prev: UISessionState | null): void {
  const s = state;
  if (
    prev === null ||
    prev.modelIds !== s.modelIds ||
    prev.weights !== s.weights ||
    prev.modelEnabled !== s.modelEnabled
  ) {
    modelRows.innerHTML = renderModelRows(s.modelIds, s.weights, s.modelEnabled);
  }
  if (prev === null || prev.results !== s.results || prev.anchorKey !== s.anchorKey) {
    resultsGrid.innerHTML = renderResultsGrid(s.results, s.anchorKey);
  }
  if (
    prev === null ||
    prev.proposal !== s.proposal ||
    prev.adjustedStart !== s.adjustedStart ||
    prev.adjustedEnd !== s.adjustedEnd
  ) {
    temporalStrip.innerHTML = renderTemporalStrip(s.proposal, s.adjustedStart, s.adjustedEnd);
  }
  confirmArea.innerHTML = renderConfirmControls(confirmBlocker(s), s.proposal !== null);
  if (prev === null || prev.qaFrames !== s.qaFrames) {
    qaStrip.innerHTML = renderQaStrip(s.qaFrames);
  }
  qaControls.innerHTML = renderQaControls(qaBlocker(s));
  receiptArea.innerHTML = renderReceipt(s.receipt, s.lastError);

  const busy =
    s.pendingSearch !== null ||
    s.pendingTemporal !== null ||
    s.pendingFrames !== null ||
    s.pendingQa !== null;
  statusLine.innerHTML = renderStatus(s.lastError, busy);

  searchButton.disabled = s.query.trim() === "";
  const temporalReady =
    s.anchorKey !== null && s.queryStart.trim() !== "" && s.queryEnd.trim() !== "";
  startQueryInput.disabled = s.anchorKey === null;
  endQueryInput.disabled = s.anchorKey === null;
  gapInput.disabled = s.anchorKey === null;
  temporalButton.disabled = !temporalReady;
}

function dispatch(event: UIEvent): void {
  const prev = state;
  state = reduce(prev, event);
  if (state === prev) {
    return;
  }
  runEffects(prev, state);
  sync(prev);
}

queryInput.addEventListener("input", () => dispatch({ kind: "query-set", text: queryInput.value }));
queryInput.addEventListener("keydown", (e) => {
  if (e.key === "Enter") {
    dispatch({ kind: "search-sent" });
  }
});
searchButton.addEventListener("click", () => dispatch({ kind: "search-sent" }));

rerankToggle.addEventListener("change", () =>
  dispatch({ kind: "rerank-toggled", enabled: rerankToggle.checked }),
);
radiusInput.addEventListener("change", () =>
  dispatch({ kind: "radius-set", radius: radiusInput.valueAsNumber }),
);
includeCenterToggle.addEventListener("change", () =>
  dispatch({ kind: "include-center-toggled", includeCenter: includeCenterToggle.checked }),
);

modelRows.addEventListener("change", (e) => {
  const target = e.target as HTMLInputElement;
  const modelId = target.dataset.model;
  if (modelId === undefined) {
    return;
  }
  if (target.dataset.element === "model-enabled") {
    dispatch({ kind: "model-toggled", modelId, enabled: target.checked });
  } else if (target.dataset.element === "model-weight" && !Number.isNaN(target.valueAsNumber)) {
    dispatch({ kind: "weight-set", modelId, weight: target.valueAsNumber });
  }
});

resultsGrid.addEventListener("click", (e) => {
  const tile = (e.target as HTMLElement).closest<HTMLElement>(".tile[data-key]");
  if (tile?.dataset.key !== undefined) {
    dispatch({ kind: "anchor-selected", frameKey: Number(tile.dataset.key) });
  }
});

startQueryInput.addEventListener("input", () =>
  dispatch({ kind: "start-query-set", text: startQueryInput.value }),
);
endQueryInput.addEventListener("input", () =>
  dispatch({ kind: "end-query-set", text: endQueryInput.value }),
);
gapInput.addEventListener("change", () =>
  dispatch({ kind: "gap-set", gapC: gapInput.valueAsNumber }),
);
temporalButton.addEventListener("click", () => dispatch({ kind: "temporal-sent" }));

temporalStrip.addEventListener("click", (e) => {
  const button = (e.target as HTMLElement).closest<HTMLButtonElement>("button[data-side]");
  if (button === null) {
    return;
  }
  const side = button.dataset.side as "start" | "end";
  dispatch({ kind: "boundary-adjusted", side, frameKey: Number(button.dataset.key) });
});

confirmArea.addEventListener("click", (e) => {
  const button = (e.target as HTMLElement).closest("[data-element=confirm-pair]");
  if (button === null) {
    return;
  }
  dispatch({ kind: "boundaries-confirmed" });
  if (state.confirmedPair !== null) {
    dispatch({ kind: "frames-sent" });
  }
});

questionInput.addEventListener("input", () =>
  dispatch({ kind: "question-set", text: questionInput.value }),
);
answerInput.addEventListener("input", () =>
  dispatch({ kind: "answer-set", text: answerInput.value }),
);
qaControls.addEventListener("click", (e) => {
  const button = (e.target as HTMLElement).closest("[data-element=submit-answer]");
  if (button !== null) {
    dispatch({ kind: "qa-sent" });
  }
});

sync(null);

api
  .corpusSummary()
  .then((summary) => dispatch({ kind: "models-loaded", modelIds: summary.models }))
  .catch((err) => dispatch({ kind: "request-failed", seq: -1, message: failureMessage(err) }));
