// HTML renderers. Every function maps state slices to a markup string with
// no fetches and no reordering: tiles appear exactly in payload order and
// carry the payload timestamp verbatim in data-ts, so what the server ranked
// is what the user sees. Boundary annotation follows the green-start /
// red-end convention via the boundary-green and boundary-red classes.

import { candidateStrip } from "./state.js";
import type { FrameInfo, QAReceipt, SearchResponse, TemporalResponse } from "./types.js";
import { formatTime } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function scoreLabel(modelScores: Record<string, number>): string {
  return Object.entries(modelScores)
    .map(([id, s]) => `${id}: ${s.toFixed(3)}`)
    .join(", ");
}

export function renderResultsGrid(
  results: SearchResponse | null,
  anchorKey: number | null,
): string {
  if (results === null) {
    return `<p class="hint">Describe the moment you are looking for and press Search.</p>`;
  }
  if (results.entries.length === 0) {
    return `<p class="empty-state">No matching keyframes. Try a broader description or different models.</p>`;
  }
  const skipped =
    results.skipped_models.length > 0
      ? `<p class="note">Skipped models (no positive match): ${escapeHtml(
          results.skipped_models.join(", "),
        )}</p>`
      : "";
  const tiles = results.entries
    .map((entry) => {
      const anchor = entry.frame_key === anchorKey ? " anchor" : "";
      return (
        `<figure class="tile${anchor}" data-key="${entry.frame_key}" ` +
        `data-ts="${entry.timestamp_s}" title="${escapeHtml(scoreLabel(entry.per_model_scores))}">` +
        `<img src="${escapeHtml(entry.thumbnail_url)}" ` +
        `alt="${escapeHtml(entry.video_id)} frame ${entry.frame_index}" loading="lazy">` +
        `<figcaption>` +
        `<span class="video">${escapeHtml(entry.video_id)}</span>` +
        `<span class="time">${formatTime(entry.timestamp_s)}</span>` +
        `<span class="score">${entry.fused_score.toFixed(3)}</span>` +
        `</figcaption></figure>`
      );
    })
    .join("");
  return `${skipped}<div class="grid">${tiles}</div>`;
}

function sideScores(proposal: TemporalResponse, key: number): string {
  const parts: string[] = [];
  const start = proposal.candidates.start.find((f) => f.frame_key === key);
  const end = proposal.candidates.end.find((f) => f.frame_key === key);
  if (start?.score !== undefined) parts.push(`s ${start.score.toFixed(3)}`);
  if (end?.score !== undefined) parts.push(`e ${end.score.toFixed(3)}`);
  return parts.join(" / ");
}

export function renderTemporalStrip(
  proposal: TemporalResponse | null,
  adjustedStart: number | null,
  adjustedEnd: number | null,
): string {
  if (proposal === null) {
    return `<p class="hint">Pick an anchor tile above, then describe how the moment starts and ends.</p>`;
  }
  const tiles = candidateStrip(proposal)
    .map((frame) => {
      const classes = ["tile"];
      if (frame.frame_key === adjustedStart) classes.push("boundary-green");
      if (frame.frame_key === adjustedEnd) classes.push("boundary-red");
      if (frame.frame_key === proposal.moment.anchor_key) classes.push("anchor");
      return (
        `<figure class="${classes.join(" ")}" data-key="${frame.frame_key}" ` +
        `data-ts="${frame.timestamp_s}">` +
        `<img src="${escapeHtml(frame.thumbnail_url)}" ` +
        `alt="${escapeHtml(frame.video_id)} frame ${frame.frame_index}" loading="lazy">` +
        `<figcaption>` +
        `<span class="time">${formatTime(frame.timestamp_s)}</span>` +
        `<span class="score">${sideScores(proposal, frame.frame_key)}</span>` +
        `</figcaption>` +
        `<div class="pick">` +
        `<button type="button" data-side="start" data-key="${frame.frame_key}">start</button>` +
        `<button type="button" data-side="end" data-key="${frame.frame_key}">end</button>` +
        `</div></figure>`
      );
    })
    .join("");
  return `<div class="strip">${tiles}</div>`;
}

export function renderConfirmControls(blocker: string | null, hasProposal: boolean): string {
  if (!hasProposal) {
    return "";
  }
  const disabled = blocker !== null ? " disabled" : "";
  const reason = blocker !== null ? `<p class="blocker">${escapeHtml(blocker)}</p>` : "";
  return `<button type="button" data-element="confirm-pair"${disabled}>Confirm moment</button>${reason}`;
}

export function renderQaStrip(frames: FrameInfo[] | null): string {
  if (frames === null) {
    return `<p class="hint">Confirm a moment to see its frames here.</p>`;
  }
  if (frames.length === 0) {
    return `<p class="empty-state">No keyframes inside the confirmed range.</p>`;
  }
  const tiles = frames
    .map(
      (frame) =>
        `<figure class="tile" data-key="${frame.frame_key}" data-ts="${frame.timestamp_s}">` +
        `<img src="${escapeHtml(frame.thumbnail_url)}" ` +
        `alt="${escapeHtml(frame.video_id)} frame ${frame.frame_index}" loading="lazy">` +
        `<figcaption><span class="time">${formatTime(frame.timestamp_s)}</span></figcaption>` +
        `</figure>`,
    )
    .join("");
  return `<div class="strip">${tiles}</div>`;
}

export function renderQaControls(blocker: string | null): string {
  const disabled = blocker !== null ? " disabled" : "";
  const reason = blocker !== null ? `<p class="blocker">${escapeHtml(blocker)}</p>` : "";
  return `<button type="button" data-element="submit-answer"${disabled}>Submit answer</button>${reason}`;
}

export function renderReceipt(receipt: QAReceipt | null, lastError: string | null): string {
  if (receipt !== null) {
    return (
      `<div class="receipt"><p>Answer recorded.</p><dl>` +
      `<dt>submission</dt><dd>${escapeHtml(receipt.submission_id)}</dd>` +
      `<dt>seq</dt><dd>${receipt.seq}</dd>` +
      `<dt>at</dt><dd>${escapeHtml(receipt.submitted_at)}</dd>` +
      `<dt>content hash</dt><dd class="hash">${escapeHtml(receipt.content_hash)}</dd>` +
      `</dl></div>`
    );
  }
  if (lastError !== null) {
    return `<p class="error">Request failed: ${escapeHtml(lastError)}. Your draft is kept; submit again to retry.</p>`;
  }
  return "";
}

export function renderModelRows(
  modelIds: string[],
  weights: Record<string, number>,
  enabled: Record<string, boolean>,
): string {
  if (modelIds.length === 0) {
    return `<p class="hint">Loading models…</p>`;
  }
  return modelIds
    .map(
      (id) =>
        `<label class="model-row">` +
        `<input type="checkbox" data-element="model-enabled" data-model="${escapeHtml(id)}"` +
        `${enabled[id] ? " checked" : ""}> ${escapeHtml(id)} ` +
        `<input type="number" data-element="model-weight" data-model="${escapeHtml(id)}" ` +
        `min="0" step="0.1" value="${weights[id]}">` +
        `</label>`,
    )
    .join("");
}

export function renderStatus(lastError: string | null, busy: boolean): string {
  if (lastError !== null) {
    return `<span class="error">${escapeHtml(lastError)}</span>`;
  }
  return busy ? `<span class="busy">working…</span>` : "";
}
