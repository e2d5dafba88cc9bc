"""Corpus domain types and the line-delimited manifest format.

The manifest is the single source of truth for keyframe ordering: frames are
sorted lexicographically by (video_id, frame_index) and the dense integer
``frame_key`` equals both a frame's position in that order and its row in
every embedding matrix.  Neighbor and temporal walks are therefore plain key
arithmetic plus a same-video check.

Manifest file layout (UTF-8, one JSON object per line):

    line 1   header: {"version", "models", "corpus_hash", "created_at", "videos"}
    line 2+  frame:  {"frame_key", "video_id", "frame_index", "timestamp_s", "scene_id"}

Key order is fixed as written above so identical corpora serialize to
identical bytes.  ``corpus_hash`` is the SHA-256 hex digest over
``"{video_id}\\t{frame_index}\\t{scene_id}\\n"`` for every frame in manifest
order; index and embedding files embed the same digest and refuse to load
against a different manifest.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import IO, Iterable, Iterator

from .errors import HashMismatchError, ParseError, ValidationError

MANIFEST_VERSION = 1

_HEADER_KEYS = ("version", "models", "corpus_hash", "created_at", "videos")
_FRAME_KEYS = ("frame_key", "video_id", "frame_index", "timestamp_s", "scene_id")


@dataclass(frozen=True)
class VideoDescriptor:
    video_id: str
    fps: float
    frame_count: int

    def __post_init__(self):
        if not self.video_id or any(c.isspace() for c in self.video_id):
            raise ValidationError(f"video_id must be a non-empty whitespace-free token: {self.video_id!r}")
        if not self.fps > 0:
            raise ValidationError(f"fps must be positive for video {self.video_id!r}: {self.fps}")
        if self.frame_count < 1:
            raise ValidationError(f"frame_count must be >= 1 for video {self.video_id!r}: {self.frame_count}")


@dataclass(frozen=True)
class SceneBoundary:
    """Inclusive frame interval [start_frame, end_frame] within one video."""

    video_id: str
    scene_id: int
    start_frame: int
    end_frame: int

    def __post_init__(self):
        if self.scene_id < 0:
            raise ValidationError(f"scene_id must be non-negative: {self.scene_id}")
        if self.start_frame < 0 or self.end_frame < self.start_frame:
            raise ValidationError(
                f"scene [{self.start_frame}, {self.end_frame}] of {self.video_id!r} is not a valid interval"
            )

    @property
    def length(self) -> int:
        return self.end_frame - self.start_frame + 1


@dataclass(frozen=True)
class FrameRecord:
    frame_key: int
    video_id: str
    frame_index: int
    timestamp_s: float
    scene_id: int


@dataclass
class CorpusManifest:
    videos: list[VideoDescriptor]
    frames: list[FrameRecord]
    models: list[str]
    created_at: str
    corpus_hash: str

    _video_by_id: dict[str, VideoDescriptor] = field(init=False, repr=False, compare=False)
    _key_by_frame: dict[tuple[str, int], int] = field(init=False, repr=False, compare=False)
    _video_key_span: dict[str, tuple[int, int]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self._video_by_id = {v.video_id: v for v in self.videos}
        self._key_by_frame = {(f.video_id, f.frame_index): f.frame_key for f in self.frames}
        spans: dict[str, tuple[int, int]] = {}
        for f in self.frames:
            lo, _ = spans.get(f.video_id, (f.frame_key, f.frame_key))
            spans[f.video_id] = (lo, f.frame_key)
        self._video_key_span = spans
        _validate_manifest(self)

    @property
    def usable(self) -> bool:
        """False for a degenerate empty corpus (valid to persist, nothing to search)."""
        return len(self.frames) > 0

    def video(self, video_id: str) -> VideoDescriptor:
        try:
            return self._video_by_id[video_id]
        except KeyError:
            raise ValidationError(f"unknown video_id {video_id!r}") from None

    def has_video(self, video_id: str) -> bool:
        return video_id in self._video_by_id

    def frame(self, frame_key: int) -> FrameRecord:
        if not 0 <= frame_key < len(self.frames):
            raise ValidationError(f"frame_key {frame_key} out of range [0, {len(self.frames)})")
        return self.frames[frame_key]

    def key_of(self, video_id: str, frame_index: int) -> int:
        try:
            return self._key_by_frame[(video_id, frame_index)]
        except KeyError:
            raise ValidationError(f"no keyframe ({video_id!r}, {frame_index})") from None

    def video_key_span(self, video_id: str) -> tuple[int, int]:
        """(first frame_key, last frame_key) of a video's keyframes, both inclusive."""
        try:
            return self._video_key_span[video_id]
        except KeyError:
            raise ValidationError(f"video {video_id!r} has no keyframes") from None

    def same_content(self, other: "CorpusManifest") -> bool:
        """Structural equality ignoring the build timestamp."""
        return (
            self.videos == other.videos
            and self.frames == other.frames
            and self.models == other.models
            and self.corpus_hash == other.corpus_hash
        )


@dataclass(frozen=True)
class RankedList:
    """Descending-score (frame_key, score) entries with a total order.

    Ties are broken by ascending frame_key, so re-sorting is a no-op and any
    two pipelines producing the same scores produce the same byte output.
    """

    entries: tuple[tuple[int, float], ...]

    @staticmethod
    def from_scores(pairs: Iterable[tuple[int, float]]) -> "RankedList":
        entries = sorted(((int(k), float(s)) for k, s in pairs), key=lambda e: (-e[1], e[0]))
        rl = RankedList(tuple(entries))
        rl.validate()
        return rl

    def validate(self) -> None:
        seen: set[int] = set()
        prev: tuple[float, int] | None = None
        for key, score in self.entries:
            if key < 0:
                raise ValidationError(f"negative frame_key {key} in ranked list")
            if key in seen:
                raise ValidationError(f"duplicate frame_key {key} in ranked list")
            seen.add(key)
            cur = (-score, key)
            if prev is not None and cur < prev:
                raise ValidationError("ranked list order violated")
            prev = cur

    def keys(self) -> list[int]:
        return [k for k, _ in self.entries]

    def truncated(self, limit: int) -> "RankedList":
        return RankedList(self.entries[:limit])

    def __iter__(self) -> Iterator[tuple[int, float]]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i: int) -> tuple[int, float]:
        return self.entries[i]


def compute_corpus_hash(frames: Iterable[tuple[str, int, int]]) -> str:
    """SHA-256 hex digest over (video_id, frame_index, scene_id) triples in order."""
    h = hashlib.sha256()
    for video_id, frame_index, scene_id in frames:
        h.update(f"{video_id}\t{frame_index}\t{scene_id}\n".encode("utf-8"))
    return h.hexdigest()


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


def build_manifest(
    videos: list[VideoDescriptor],
    kept_frames: Iterable[tuple[str, int, int]],
    model_ids: list[str],
    created_at: str | None = None,
) -> CorpusManifest:
    """Assemble a manifest from kept (video_id, frame_index, scene_id) triples.

    Frames are sorted by (video_id, frame_index) and assigned dense keys from
    0.  Pass ``created_at`` explicitly for byte-reproducible builds; the
    default stamps the current UTC time.
    """
    by_id: dict[str, VideoDescriptor] = {}
    for v in videos:
        if v.video_id in by_id:
            raise ValidationError(f"duplicate video_id {v.video_id!r}")
        by_id[v.video_id] = v
    if len(set(model_ids)) != len(model_ids):
        raise ValidationError("duplicate model ids")

    seen: set[tuple[str, int]] = set()
    triples: list[tuple[str, int, int]] = []
    for video_id, frame_index, scene_id in kept_frames:
        video = by_id.get(video_id)
        if video is None:
            raise ValidationError(f"kept frame references unknown video_id {video_id!r}")
        if not 0 <= frame_index < video.frame_count:
            raise ValidationError(
                f"frame_index {frame_index} out of range [0, {video.frame_count}) for video {video_id!r}"
            )
        if (video_id, frame_index) in seen:
            raise ValidationError(f"duplicate kept frame ({video_id!r}, {frame_index})")
        seen.add((video_id, frame_index))
        triples.append((video_id, frame_index, scene_id))

    triples.sort(key=lambda t: (t[0], t[1]))
    frames = [
        FrameRecord(
            frame_key=key,
            video_id=video_id,
            frame_index=frame_index,
            timestamp_s=frame_index / by_id[video_id].fps,
            scene_id=scene_id,
        )
        for key, (video_id, frame_index, scene_id) in enumerate(triples)
    ]
    return CorpusManifest(
        videos=sorted(videos, key=lambda v: v.video_id),
        frames=frames,
        models=list(model_ids),
        created_at=created_at if created_at is not None else utc_now_iso(),
        corpus_hash=compute_corpus_hash(triples),
    )


def _validate_manifest(m: CorpusManifest) -> None:
    prev: tuple[str, int] | None = None
    for key, f in enumerate(m.frames):
        if f.frame_key != key:
            raise ValidationError(f"frame_key {f.frame_key} at position {key}: keys must be dense from 0")
        video = m._video_by_id.get(f.video_id)
        if video is None:
            raise ValidationError(f"frame {key} references unknown video_id {f.video_id!r}")
        if not 0 <= f.frame_index < video.frame_count:
            raise ValidationError(f"frame {key}: frame_index {f.frame_index} out of range for {f.video_id!r}")
        cur = (f.video_id, f.frame_index)
        if prev is not None and cur <= prev:
            raise ValidationError(f"frames out of (video_id, frame_index) order at key {key}")
        prev = cur
        expected = f.frame_index / video.fps
        if abs(f.timestamp_s - expected) > 1e-9 * max(1.0, abs(expected)):
            raise ValidationError(f"frame {key}: timestamp {f.timestamp_s} inconsistent with fps {video.fps}")


def write_manifest(manifest: CorpusManifest, dest: Path | IO[str]) -> None:
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            write_manifest(manifest, fh)
        return
    header = {
        "version": MANIFEST_VERSION,
        "models": manifest.models,
        "corpus_hash": manifest.corpus_hash,
        "created_at": manifest.created_at,
        "videos": [
            {"video_id": v.video_id, "fps": v.fps, "frame_count": v.frame_count} for v in manifest.videos
        ],
    }
    dest.write(json.dumps(header, separators=(",", ":")) + "\n")
    for f in manifest.frames:
        record = {
            "frame_key": f.frame_key,
            "video_id": f.video_id,
            "frame_index": f.frame_index,
            "timestamp_s": f.timestamp_s,
            "scene_id": f.scene_id,
        }
        dest.write(json.dumps(record, separators=(",", ":")) + "\n")


def read_manifest(source: Path | IO[str]) -> CorpusManifest:
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            return read_manifest(fh)

    lines = [ln for ln in (line.rstrip("\n") for line in source) if ln]
    if not lines:
        raise ParseError("empty manifest file", line=1)
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed manifest header: {exc.msg}", line=1) from exc
    if not isinstance(header, dict) or any(k not in header for k in _HEADER_KEYS):
        raise ParseError("manifest header missing required fields", line=1)
    if header["version"] != MANIFEST_VERSION:
        raise ParseError(f"unsupported manifest version {header['version']!r}", line=1)

    videos = [
        VideoDescriptor(video_id=v["video_id"], fps=float(v["fps"]), frame_count=int(v["frame_count"]))
        for v in header["videos"]
    ]
    frames: list[FrameRecord] = []
    for lineno, raw in enumerate(lines[1:], start=2):
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed frame record: {exc.msg}", line=lineno) from exc
        if not isinstance(obj, dict) or any(k not in obj for k in _FRAME_KEYS):
            raise ParseError("frame record missing required fields", line=lineno)
        frames.append(
            FrameRecord(
                frame_key=int(obj["frame_key"]),
                video_id=obj["video_id"],
                frame_index=int(obj["frame_index"]),
                timestamp_s=float(obj["timestamp_s"]),
                scene_id=int(obj["scene_id"]),
            )
        )

    manifest = CorpusManifest(
        videos=videos,
        frames=frames,
        models=list(header["models"]),
        created_at=header["created_at"],
        corpus_hash=header["corpus_hash"],
    )
    actual = compute_corpus_hash((f.video_id, f.frame_index, f.scene_id) for f in frames)
    if actual != manifest.corpus_hash:
        raise HashMismatchError(
            f"manifest corpus_hash {manifest.corpus_hash[:12]}... does not match frame content {actual[:12]}..."
        )
    return manifest
