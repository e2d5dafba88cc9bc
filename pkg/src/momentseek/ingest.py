"""Corpus ingestion: scene boundaries + raw per-frame vectors -> keyframe manifest.

Inputs (all produced upstream; no shot detection or embedding computation here):

  - boundary files   one per video, ``<dir>/<video_id>.scenes``; one scene per
                     line as ASCII decimal ``start end`` (inclusive), sorted
                     by start, non-overlapping
  - video table      header line ``video_id fps frame_count``, then one line
                     per video with those three whitespace-separated fields
  - raw vectors      ``<dir>/<model_id>/<video_id>.npz`` holding arrays
                     ``frame_indices`` (int) and ``vectors`` (float32, one row
                     per index); rows are L2-normalized on load

Per scene the pipeline samples up to ``frames_per_scene`` evenly spaced frame
indices (endpoints included, round half away from zero), then drops a sampled
frame when its cosine similarity to any frame already kept in the same scene
exceeds ``similarity_threshold`` (strictly greater; the earliest frame of a
too-similar group survives).  Frames are never compared across scenes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from .corpus import (
    CorpusManifest,
    SceneBoundary,
    VideoDescriptor,
    build_manifest,
)
from .errors import ParseError, ValidationError

UNIT_NORM_ATOL = 1e-6


@dataclass(frozen=True)
class DedupConfig:
    similarity_threshold: float = 0.9
    frames_per_scene: int = 4

    def __post_init__(self):
        if not 0 < self.similarity_threshold <= 1:
            raise ValidationError(f"similarity_threshold must be in (0, 1]: {self.similarity_threshold}")
        if self.frames_per_scene < 1:
            raise ValidationError(f"frames_per_scene must be >= 1: {self.frames_per_scene}")


@dataclass(frozen=True)
class SceneStat:
    video_id: str
    scene_id: int
    sampled: int
    kept: int


@dataclass
class DedupReport:
    scenes_processed: int
    frames_sampled: int
    frames_removed: int
    frames_kept: int
    per_scene: list[SceneStat]

    def validate(self) -> None:
        if self.frames_kept + self.frames_removed != self.frames_sampled:
            raise ValidationError("dedup report totals are inconsistent")
        for s in self.per_scene:
            if s.sampled >= 1 and s.kept < 1:
                raise ValidationError(f"scene {s.scene_id} of {s.video_id!r} was emptied")

    def to_dict(self) -> dict:
        return {
            "scenes_processed": self.scenes_processed,
            "frames_sampled": self.frames_sampled,
            "frames_removed": self.frames_removed,
            "frames_kept": self.frames_kept,
            "per_scene": [
                {"video_id": s.video_id, "scene_id": s.scene_id, "sampled": s.sampled, "kept": s.kept}
                for s in self.per_scene
            ],
        }

    @staticmethod
    def from_dict(obj: dict) -> "DedupReport":
        report = DedupReport(
            scenes_processed=int(obj["scenes_processed"]),
            frames_sampled=int(obj["frames_sampled"]),
            frames_removed=int(obj["frames_removed"]),
            frames_kept=int(obj["frames_kept"]),
            per_scene=[
                SceneStat(s["video_id"], int(s["scene_id"]), int(s["sampled"]), int(s["kept"]))
                for s in obj["per_scene"]
            ],
        )
        report.validate()
        return report


def parse_scene_boundaries(source: IO[bytes] | bytes, video_id: str, frame_count: int) -> list[SceneBoundary]:
    """Parse a boundary file; scene ids are assigned densely from 0 in file order."""
    data = source if isinstance(source, bytes) else source.read()
    text = data.decode("ascii", errors="strict") if isinstance(data, bytes) else data

    scenes: list[SceneBoundary] = []
    prev_end = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected 'start end', got {raw!r}", line=lineno)
        try:
            start, end = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"non-integer frame index in {raw!r}", line=lineno) from None
        if end < start:
            raise ParseError("end before start", line=lineno)
        if start < 0 or end >= frame_count:
            raise ParseError(f"frame index out of range [0, {frame_count})", line=lineno)
        if start <= prev_end:
            raise ParseError("overlap", line=lineno)
        scenes.append(SceneBoundary(video_id=video_id, scene_id=len(scenes), start_frame=start, end_frame=end))
        prev_end = end
    return scenes


def _round_half_away(x: float) -> int:
    # frame positions are non-negative; round() would go half-to-even
    return int(math.floor(x + 0.5))


def sample_keyframes(scene: SceneBoundary, n: int) -> list[int]:
    """Up to n evenly spaced frame indices in [start, end], endpoints included.

    Index i maps to round(start + i * (end - start) / (n - 1)); a single
    sample lands on the midpoint.  Collapsed duplicates are dropped, so short
    scenes yield fewer than n indices (exactly n whenever length >= n).
    """
    if n < 1:
        raise ValidationError(f"sample count must be >= 1: {n}")
    if n == 1:
        return [_round_half_away((scene.start_frame + scene.end_frame) / 2)]
    step = (scene.end_frame - scene.start_frame) / (n - 1)
    out: list[int] = []
    for i in range(n):
        idx = _round_half_away(scene.start_frame + i * step)
        if not out or idx != out[-1]:
            out.append(idx)
    return out


def dedup_scene(
    frame_indices: Sequence[int],
    embeddings_for_frames: Sequence[np.ndarray],
    config: DedupConfig,
) -> list[int]:
    """Greedy first-keeper scan over one scene's sampled frames.

    Scans in ascending index order and keeps a frame iff its cosine
    similarity to every already-kept frame is <= the threshold (removal
    requires strictly greater similarity).  The first frame is always kept.
    """
    if len(frame_indices) != len(embeddings_for_frames):
        raise ValidationError(
            f"{len(frame_indices)} frame indices but {len(embeddings_for_frames)} embeddings"
        )
    if list(frame_indices) != sorted(frame_indices):
        raise ValidationError("frame indices must be sorted ascending")
    if not frame_indices:
        return []

    vectors = [np.asarray(v, dtype=np.float64) for v in embeddings_for_frames]
    for pos, v in enumerate(vectors):
        # precondition is unit norm within 1e-6; allow 2x headroom for f32 round-trips
        if abs(float(np.linalg.norm(v)) - 1.0) > 2 * UNIT_NORM_ATOL:
            raise ValidationError(f"embedding for frame {frame_indices[pos]} is not unit-normalized")

    threshold = config.similarity_threshold
    kept: list[int] = []
    kept_vectors: list[np.ndarray] = []
    for idx, vec in zip(frame_indices, vectors):
        if all(float(np.dot(vec, kv)) <= threshold for kv in kept_vectors):
            kept.append(idx)
            kept_vectors.append(vec)
    return kept


def load_frame_vectors(path: Path) -> dict[int, np.ndarray]:
    """Load a raw per-video vector file and L2-normalize each row.

    Upstream encoders emit arbitrary-scale vectors; everything downstream
    assumes unit norm so cosine similarity is a plain dot product.
    """
    with np.load(path) as npz:
        if "frame_indices" not in npz or "vectors" not in npz:
            raise ValidationError(f"{path}: expected arrays 'frame_indices' and 'vectors'")
        indices = np.asarray(npz["frame_indices"]).astype(np.int64)
        vectors = np.asarray(npz["vectors"], dtype=np.float32)
    if vectors.ndim != 2 or indices.ndim != 1 or len(indices) != len(vectors):
        raise ValidationError(f"{path}: frame_indices and vectors shapes disagree")
    if not np.all(np.isfinite(vectors)):
        raise ValidationError(f"{path}: non-finite vector values")
    norms = np.linalg.norm(vectors.astype(np.float64), axis=1)
    if np.any(norms == 0):
        row = int(np.flatnonzero(norms == 0)[0])
        raise ValidationError(f"{path}: zero vector for frame {int(indices[row])}")
    normalized = (vectors.astype(np.float64) / norms[:, None]).astype(np.float32)
    out: dict[int, np.ndarray] = {}
    for i, idx in enumerate(indices):
        if int(idx) in out:
            raise ValidationError(f"{path}: duplicate frame index {int(idx)}")
        out[int(idx)] = normalized[i]
    return out


def parse_video_table(source: IO[bytes] | bytes | Path) -> list[VideoDescriptor]:
    """Parse the video table: a header line, then 'video_id fps frame_count' rows."""
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            return parse_video_table(fh)
    data = source if isinstance(source, bytes) else source.read()
    text = data.decode("utf-8")
    lines = [ln for ln in text.splitlines()]
    if not lines or lines[0].split() != ["video_id", "fps", "frame_count"]:
        raise ParseError("expected header 'video_id fps frame_count'", line=1)
    videos: list[VideoDescriptor] = []
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"expected 3 fields, got {len(parts)}", line=lineno)
        try:
            videos.append(VideoDescriptor(video_id=parts[0], fps=float(parts[1]), frame_count=int(parts[2])))
        except (ValueError, ValidationError) as exc:
            raise ParseError(str(exc), line=lineno) from None
    if len({v.video_id for v in videos}) != len(videos):
        raise ParseError("duplicate video_id in table")
    return videos


def run_ingest(
    boundaries_dir: Path,
    embeddings_dir: Path,
    videos_file: Path,
    config: DedupConfig | None = None,
    model_ids: list[str] | None = None,
    dedup_model_id: str | None = None,
    created_at: str | None = None,
) -> tuple[CorpusManifest, DedupReport]:
    """End-to-end ingest: parse, sample, dedup, and assemble the manifest.

    ``model_ids`` defaults to the sorted subdirectory names of
    ``embeddings_dir``; deduplication uses ``dedup_model_id`` (default: the
    first model id).  Identical inputs produce identical outputs when
    ``created_at`` is pinned.
    """
    config = config or DedupConfig()
    boundaries_dir = Path(boundaries_dir)
    embeddings_dir = Path(embeddings_dir)

    videos = parse_video_table(Path(videos_file))
    if model_ids is None:
        model_ids = sorted(p.name for p in embeddings_dir.iterdir() if p.is_dir())
    if not model_ids:
        raise ValidationError(f"no embedding models found under {embeddings_dir}")
    dedup_model = dedup_model_id if dedup_model_id is not None else model_ids[0]
    if dedup_model not in model_ids:
        raise ValidationError(f"dedup model {dedup_model!r} is not among models {model_ids}")

    missing: list[str] = []
    for v in videos:
        wants = [boundaries_dir / f"{v.video_id}.scenes"]
        wants += [embeddings_dir / m / f"{v.video_id}.npz" for m in model_ids]
        if any(not p.exists() for p in wants):
            missing.append(v.video_id)
    if missing:
        raise ValidationError(f"missing boundary or embedding inputs for videos: {', '.join(sorted(missing))}")

    kept_frames: list[tuple[str, int, int]] = []
    per_scene: list[SceneStat] = []
    sampled_total = 0
    kept_total = 0
    for v in sorted(videos, key=lambda d: d.video_id):
        with open(boundaries_dir / f"{v.video_id}.scenes", "rb") as fh:
            scenes = parse_scene_boundaries(fh, v.video_id, v.frame_count)
        vectors = load_frame_vectors(embeddings_dir / dedup_model / f"{v.video_id}.npz")
        for scene in scenes:
            sampled = sample_keyframes(scene, config.frames_per_scene)
            missing_vecs = [i for i in sampled if i not in vectors]
            if missing_vecs:
                raise ValidationError(
                    f"video {v.video_id!r}: no {dedup_model!r} vectors for sampled frames {missing_vecs}"
                )
            kept = dedup_scene(sampled, [vectors[i] for i in sampled], config)
            kept_frames.extend((v.video_id, idx, scene.scene_id) for idx in kept)
            per_scene.append(SceneStat(v.video_id, scene.scene_id, len(sampled), len(kept)))
            sampled_total += len(sampled)
            kept_total += len(kept)

    manifest = build_manifest(videos, kept_frames, model_ids, created_at=created_at)
    report = DedupReport(
        scenes_processed=len(per_scene),
        frames_sampled=sampled_total,
        frames_removed=sampled_total - kept_total,
        frames_kept=kept_total,
        per_scene=per_scene,
    )
    report.validate()
    if report.frames_kept != len(manifest.frames):
        raise ValidationError("dedup report disagrees with manifest frame count")
    return manifest, report


def collect_matrix_rows(
    manifest: CorpusManifest, embeddings_dir: Path, model_id: str
) -> np.ndarray:
    """Gather one model's vectors for every kept frame, in manifest order."""
    embeddings_dir = Path(embeddings_dir)
    rows: np.ndarray | None = None
    cache: dict[str, dict[int, np.ndarray]] = {}
    for f in manifest.frames:
        if f.video_id not in cache:
            path = embeddings_dir / model_id / f"{f.video_id}.npz"
            if not path.exists():
                raise ValidationError(f"missing {model_id!r} vectors for video {f.video_id!r}")
            cache[f.video_id] = load_frame_vectors(path)
        vectors = cache[f.video_id]
        if f.frame_index not in vectors:
            raise ValidationError(
                f"video {f.video_id!r}: no {model_id!r} vector for kept frame {f.frame_index}"
            )
        vec = vectors[f.frame_index]
        if rows is None:
            rows = np.empty((len(manifest.frames), vec.shape[0]), dtype=np.float32)
        rows[f.frame_key] = vec
    if rows is None:
        rows = np.empty((0, 0), dtype=np.float32)
    return rows
