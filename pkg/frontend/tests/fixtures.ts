// Canned payloads shaped exactly like the service responses.

import type {
  FrameInfo,
  QAReceipt,
  SearchEntry,
  SearchResponse,
  TemporalResponse,
} from "../src/types";

export function mockEntry(i: number, score: number): SearchEntry {
  return {
    frame_key: 200 + i,
    video_id: i % 2 === 0 ? "harbor" : "market",
    frame_index: 10 * i,
    timestamp_s: (10 * i) / 25,
    fused_score: score,
    per_model_scores: { m1: score, m2: score / 2 },
    thumbnail_url: `/thumbs/v/${10 * i}.jpg`,
  };
}

export function mockSearchResponse(n: number): SearchResponse {
  // Deliberately not score-sorted: the grid must keep payload order anyway.
  const entries = Array.from({ length: n }, (_, i) => mockEntry(i, ((i * 37) % 101) / 100));
  return { entries, skipped_models: [] };
}

function frame(key: number, videoId: string, score?: number): FrameInfo {
  const index = 7 * key;
  const info: FrameInfo = {
    frame_key: key,
    video_id: videoId,
    frame_index: index,
    timestamp_s: index / 25,
    thumbnail_url: `/thumbs/${videoId}/${index}.jpg`,
  };
  if (score !== undefined) {
    info.score = score;
  }
  return info;
}

/**
 * A proposal around anchor 204 in "harbor": start candidates walk left to
 * 201, end candidates walk right to 207, proposed pair (202, 206).
 * Candidate lists are in walk order, anchor first, like the real endpoint.
 */
export function mockTemporalResponse(): TemporalResponse {
  return {
    model_id: "m1",
    moment: {
      video_id: "harbor",
      anchor_key: 204,
      start_key: 202,
      end_key: 206,
      start_score: 0.61,
      end_score: 0.57,
      span: 4,
    },
    candidates: {
      start: [
        frame(204, "harbor", 0.31),
        frame(203, "harbor", 0.44),
        frame(202, "harbor", 0.61),
        frame(201, "harbor", 0.28),
      ],
      end: [
        frame(204, "harbor", 0.29),
        frame(205, "harbor", 0.4),
        frame(206, "harbor", 0.57),
        frame(207, "harbor", 0.33),
      ],
    },
  };
}

export function mockFrames(): FrameInfo[] {
  return [frame(202, "harbor"), frame(203, "harbor"), frame(204, "harbor"), frame(205, "harbor"), frame(206, "harbor")];
}

export function mockReceipt(): QAReceipt {
  return {
    submission_id: "a1b2c3d4e5f60718-0",
    content_hash: "a1b2c3d4e5f60718" + "0".repeat(48),
    seq: 0,
    submitted_at: "2026-08-19T10:00:00.000001+00:00",
  };
}
