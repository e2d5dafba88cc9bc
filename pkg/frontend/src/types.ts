// Payload shapes for the /api/v1 endpoints. Field names are the wire names;
// keep them snake_case so a payload can round-trip through JSON untouched.

export interface SearchEntry {
  frame_key: number;
  video_id: string;
  frame_index: number;
  timestamp_s: number;
  fused_score: number;
  per_model_scores: Record<string, number>;
  thumbnail_url: string;
}

export interface SearchResponse {
  entries: SearchEntry[];
  skipped_models: string[];
}

/** One keyframe as returned by temporal candidates and the frames endpoint. */
export interface FrameInfo {
  frame_key: number;
  video_id: string;
  frame_index: number;
  timestamp_s: number;
  thumbnail_url: string;
  score?: number;
}

export interface Moment {
  video_id: string;
  anchor_key: number;
  start_key: number;
  end_key: number;
  start_score: number;
  end_score: number;
  span: number;
}

export interface TemporalResponse {
  model_id: string;
  moment: Moment;
  candidates: {
    start: FrameInfo[];
    end: FrameInfo[];
  };
}

export interface QAReceipt {
  submission_id: string;
  content_hash: string;
  seq: number;
  submitted_at: string;
}

export interface VideoSummary {
  video_id: string;
  fps: number;
  frame_count: number;
  keyframes: number;
  first_key: number;
  last_key: number;
}

export interface CorpusSummary {
  version: number;
  corpus_hash: string;
  created_at: string;
  models: string[];
  video_count: number;
  frame_count: number;
  videos: VideoSummary[];
}

// Request bodies.

export interface ModelSpec {
  model_id: string;
  weight: number;
  enabled: boolean;
}

export interface RerankSpec {
  enabled: boolean;
  radius: number;
  include_center: boolean;
}

export interface SearchRequest {
  query: string;
  models: ModelSpec[];
  rerank?: RerankSpec;
  limit: number;
}

export interface TemporalRequest {
  anchor_key: number;
  query_start: string;
  query_end: string;
  gap_c: number;
}

export interface MomentPayload {
  video_id: string;
  anchor_key: number;
  start_key: number;
  end_key: number;
  start_score: number;
  end_score: number;
}

export interface QARequest {
  session_id: string;
  question: string;
  answer: string;
  moment: MomentPayload;
  viewed_frame_keys: number[];
}

/** Format seconds as M:SS (or H:MM:SS above an hour) for tile captions. */
export function formatTime(seconds: number): string {
  const whole = Math.floor(seconds);
  const h = Math.floor(whole / 3600);
  const m = Math.floor((whole % 3600) / 60);
  const s = whole % 60;
  const mm = String(m).padStart(2, "0");
  const ss = String(s).padStart(2, "0");
  return h > 0 ? `${h}:${mm}:${ss}` : `${mm}:${ss}`;
}
