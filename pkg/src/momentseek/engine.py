"""Retrieval engine binding corpus, indexes, encoders, and the QA log.

The CLI and the HTTP service both drive this module, which is what makes
their outputs interchangeable: one pipeline, two frontends.  A search request
runs ensemble fusion over a pool of max(50, limit) frames per model, then
optional neighborhood rescoring with the first enabled model, then truncates
to the requested limit.

Engine configuration lives in a JSON file (path given explicitly or through
the MOMENTSEEK_CONFIG environment variable):

    {
      "corpus_dir": "corpus",
      "models": [
        {"model_id": "m1", "dim": 32, "weight": 0.6, "enabled": true,
         "endpoint": "stub", "timeout_s": 10.0,
         "index_path": "corpus/indexes/m1.fidx"}
      ],
      "thumbnail_dir": "thumbs",
      "qa_log_path": "corpus/qa_log.jsonl",
      "host": "127.0.0.1",
      "port": 8000
    }

Relative paths are resolved against the config file's directory.  index_path
defaults to <corpus_dir>/indexes/<model_id>.fidx and qa_log_path to
<corpus_dir>/qa_log.jsonl.
"""
from __future__ import annotations

import hashlib
import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

from .corpus import MANIFEST_VERSION, CorpusManifest, FrameRecord, read_manifest, utc_now_iso
from .embeddings import EncoderEndpointConfig, QueryEmbedding, encode_text
from .ensemble import DEFAULT_POOL_SIZE, ModelConfig, ensemble_search
from .errors import ContractError, ValidationError
from .index import FlatIndex, load_index
from .rerank import RerankConfig, rerank
from .temporal import MomentSelection, TemporalConfig, select_moment

CONFIG_ENV = "MOMENTSEEK_CONFIG"
DEFAULT_LIMIT = 100
MAX_LIMIT = 500
PLACEHOLDER_THUMBNAIL = "/static/placeholder.svg"


@dataclass(frozen=True)
class ModelRuntime:
    """One model as configured for serving: encoder endpoint plus index file."""

    model_id: str
    dim: int
    index_path: Path
    weight: float = 1.0
    enabled: bool = True
    endpoint: str = "stub"
    timeout_s: float = 10.0

    def encoder(self) -> EncoderEndpointConfig:
        return EncoderEndpointConfig(
            model_id=self.model_id, dim=self.dim, endpoint=self.endpoint, timeout_s=self.timeout_s
        )

    def search_config(self) -> ModelConfig:
        return ModelConfig(model_id=self.model_id, weight=self.weight, enabled=self.enabled)


@dataclass(frozen=True)
class EngineConfig:
    corpus_dir: Path
    models: tuple[ModelRuntime, ...]
    thumbnail_dir: Path | None = None
    qa_log_path: Path | None = None
    host: str = "127.0.0.1"
    port: int = 8000

    def __post_init__(self):
        if not self.models:
            raise ValidationError("config must list at least one model")
        ids = [m.model_id for m in self.models]
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate model_id in config")

    @property
    def manifest_path(self) -> Path:
        return self.corpus_dir / "manifest.jsonl"

    @property
    def log_path(self) -> Path:
        return self.qa_log_path or self.corpus_dir / "qa_log.jsonl"


_CONFIG_KEYS = {"corpus_dir", "models", "thumbnail_dir", "qa_log_path", "host", "port"}
_MODEL_KEYS = {"model_id", "dim", "weight", "enabled", "endpoint", "timeout_s", "index_path"}


def load_config(path: Path | str) -> EngineConfig:
    """Parse an engine config file; relative paths resolve against its directory."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError("config must be a JSON object")
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    if "corpus_dir" not in data:
        raise ValidationError("config missing corpus_dir")
    if not isinstance(data.get("models"), list) or not data["models"]:
        raise ValidationError("config must list at least one model")

    base = path.parent

    def _resolve(raw: str) -> Path:
        p = Path(raw)
        return p if p.is_absolute() else base / p

    corpus_dir = _resolve(data["corpus_dir"])
    models = []
    for i, entry in enumerate(data["models"]):
        if not isinstance(entry, dict):
            raise ValidationError(f"models[{i}] must be an object")
        unknown = set(entry) - _MODEL_KEYS
        if unknown:
            raise ValidationError(f"models[{i}] has unknown keys: {sorted(unknown)}")
        for required in ("model_id", "dim"):
            if required not in entry:
                raise ValidationError(f"models[{i}] missing {required}")
        index_path = (
            _resolve(entry["index_path"])
            if "index_path" in entry
            else corpus_dir / "indexes" / f"{entry['model_id']}.fidx"
        )
        models.append(
            ModelRuntime(
                model_id=entry["model_id"],
                dim=int(entry["dim"]),
                index_path=index_path,
                weight=float(entry.get("weight", 1.0)),
                enabled=bool(entry.get("enabled", True)),
                endpoint=entry.get("endpoint", "stub"),
                timeout_s=float(entry.get("timeout_s", 10.0)),
            )
        )
    return EngineConfig(
        corpus_dir=corpus_dir,
        models=tuple(models),
        thumbnail_dir=_resolve(data["thumbnail_dir"]) if data.get("thumbnail_dir") else None,
        qa_log_path=_resolve(data["qa_log_path"]) if data.get("qa_log_path") else None,
        host=data.get("host", "127.0.0.1"),
        port=int(data.get("port", 8000)),
    )


def config_path_from_env() -> Path:
    raw = os.environ.get(CONFIG_ENV)
    if not raw:
        raise ValidationError(f"no config path given and {CONFIG_ENV} is not set")
    return Path(raw)


@dataclass(frozen=True)
class SearchOptions:
    query: str
    models: tuple[ModelConfig, ...] | None = None
    rerank: RerankConfig | None = None
    limit: int = DEFAULT_LIMIT

    def __post_init__(self):
        if not self.query.strip():
            raise ValidationError("query must be non-empty")
        if not 1 <= self.limit <= MAX_LIMIT:
            raise ValidationError(f"limit must be in [1, {MAX_LIMIT}]: {self.limit}")


@dataclass(frozen=True)
class SearchEntry:
    frame_key: int
    video_id: str
    frame_index: int
    timestamp_s: float
    fused_score: float
    per_model_scores: dict[str, float]
    thumbnail_url: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "frame_key": self.frame_key,
            "video_id": self.video_id,
            "frame_index": self.frame_index,
            "timestamp_s": self.timestamp_s,
            "fused_score": self.fused_score,
            "per_model_scores": dict(self.per_model_scores),
            "thumbnail_url": self.thumbnail_url,
        }


@dataclass(frozen=True)
class SearchOutcome:
    entries: tuple[SearchEntry, ...]
    skipped_models: tuple[str, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "entries": [e.to_dict() for e in self.entries],
            "skipped_models": list(self.skipped_models),
        }


@dataclass(frozen=True)
class TemporalOptions:
    anchor_key: int
    query_start: str
    query_end: str
    model_id: str | None = None
    max_span: int | None = None
    similarity_floor: float | None = None
    max_steps: int | None = None

    def config(self) -> TemporalConfig:
        overrides = {
            "max_span": self.max_span,
            "similarity_floor": self.similarity_floor,
            "max_steps": self.max_steps,
        }
        return TemporalConfig(**{k: v for k, v in overrides.items() if v is not None})


@dataclass(frozen=True)
class TemporalOutcome:
    model_id: str
    moment: MomentSelection
    start_candidates: tuple[dict[str, Any], ...]
    end_candidates: tuple[dict[str, Any], ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "model_id": self.model_id,
            "moment": {
                "video_id": self.moment.video_id,
                "anchor_key": self.moment.anchor_key,
                "start_key": self.moment.start_key,
                "end_key": self.moment.end_key,
                "start_score": self.moment.start_score,
                "end_score": self.moment.end_score,
                "span": self.moment.span,
            },
            "candidates": {
                "start": list(self.start_candidates),
                "end": list(self.end_candidates),
            },
        }


@dataclass(frozen=True)
class QASubmission:
    session_id: str
    question: str
    answer: str
    moment: MomentSelection
    viewed_frame_keys: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.session_id.strip():
            raise ValidationError("session_id must be non-empty")
        if not self.answer.strip():
            raise ValidationError("answer required")
        if any(k < 0 for k in self.viewed_frame_keys):
            raise ValidationError("viewed_frame_keys must be non-negative")

    def to_dict(self) -> dict[str, Any]:
        return {
            "session_id": self.session_id,
            "question": self.question,
            "answer": self.answer,
            "moment": {
                "video_id": self.moment.video_id,
                "anchor_key": self.moment.anchor_key,
                "start_key": self.moment.start_key,
                "end_key": self.moment.end_key,
                "start_score": self.moment.start_score,
                "end_score": self.moment.end_score,
            },
            "viewed_frame_keys": list(self.viewed_frame_keys),
        }


class QALog:
    """Append-only line-delimited submission log with a single serialized writer.

    Each line is one JSON record: the submission content plus a sequence
    number, a server-side submitted_at stamp, a content hash over the
    submission alone, and a submission id of the form
    ``<content_hash[:16]>-<seq>``.  Identical submissions therefore share an
    id prefix while remaining distinct records.
    """

    def __init__(self, path: Path | str):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._seq = self._count_lines()
        self._last_stamp = ""

    def _count_lines(self) -> int:
        if not self.path.exists():
            return 0
        with open(self.path, "rb") as fh:
            return sum(1 for _ in fh)

    def submit(self, submission: QASubmission) -> dict[str, Any]:
        body = submission.to_dict()
        content_hash = hashlib.sha256(
            json.dumps(body, sort_keys=True, separators=(",", ":")).encode("utf-8")
        ).hexdigest()
        with self._lock:
            seq = self._seq
            submitted_at = utc_now_iso()
            while submitted_at == self._last_stamp:  # stamps must distinguish identical submissions
                submitted_at = utc_now_iso()
            self._last_stamp = submitted_at
            record = dict(body)
            record["seq"] = seq
            record["submitted_at"] = submitted_at
            record["content_hash"] = content_hash
            record["submission_id"] = f"{content_hash[:16]}-{seq}"
            line = json.dumps(record, ensure_ascii=False, separators=(",", ":")) + "\n"
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line)
            self._seq = seq + 1
        return {
            "submission_id": record["submission_id"],
            "content_hash": content_hash,
            "seq": seq,
            "submitted_at": submitted_at,
        }

    def read_all(self) -> list[dict[str, Any]]:
        if not self.path.exists():
            return []
        with open(self.path, "r", encoding="utf-8") as fh:
            return [json.loads(line) for line in fh if line.strip()]


class Engine:
    """Loaded corpus state plus every operation the frontends expose."""

    def __init__(self, config: EngineConfig, manifest: CorpusManifest | None = None):
        self.config = config
        self.manifest = manifest if manifest is not None else read_manifest(config.manifest_path)
        self.encoders: dict[str, EncoderEndpointConfig] = {
            m.model_id: m.encoder() for m in config.models
        }
        self.indexes: dict[str, FlatIndex] = {}
        for m in config.models:
            if not m.enabled:
                continue
            index = load_index(m.index_path, self.manifest)
            if index.dim != m.dim:
                raise ContractError(
                    f"model {m.model_id}: config says dim {m.dim}, index holds {index.dim}"
                )
            self.indexes[m.model_id] = index
        self.qa_log = QALog(config.log_path)

    # -- helpers ---------------------------------------------------------

    def default_models(self) -> tuple[ModelConfig, ...]:
        return tuple(m.search_config() for m in self.config.models)

    def encode(self, model_id: str, text: str) -> QueryEmbedding:
        if model_id not in self.encoders:
            raise ValidationError(f"unknown model {model_id!r}")
        return encode_text(self.encoders[model_id], text)

    def thumbnail_url(self, record: FrameRecord) -> str:
        root = self.config.thumbnail_dir
        if root is not None:
            rel = f"{record.video_id}/{record.frame_index}.jpg"
            if (root / rel).exists():
                return f"/thumbs/{rel}"
        return PLACEHOLDER_THUMBNAIL

    def _frame_payload(self, frame_key: int, score: float | None = None) -> dict[str, Any]:
        record = self.manifest.frame(frame_key)
        payload: dict[str, Any] = {
            "frame_key": record.frame_key,
            "video_id": record.video_id,
            "frame_index": record.frame_index,
            "timestamp_s": record.timestamp_s,
            "thumbnail_url": self.thumbnail_url(record),
        }
        if score is not None:
            payload["score"] = score
        return payload

    def _check_models(self, models: Sequence[ModelConfig]) -> None:
        for cfg in models:
            if cfg.model_id not in self.encoders:
                raise ValidationError(f"unknown model {cfg.model_id!r}")
            if cfg.enabled and cfg.model_id not in self.indexes:
                raise ValidationError(f"model {cfg.model_id!r} has no loaded index")

    def _lead_model(self, models: Sequence[ModelConfig]) -> str:
        for cfg in models:
            if cfg.enabled:
                return cfg.model_id
        raise ValidationError("no enabled models")

    # -- operations ------------------------------------------------------

    def search(self, options: SearchOptions) -> SearchOutcome:
        models = options.models if options.models is not None else self.default_models()
        self._check_models(models)
        enabled = [c for c in models if c.enabled]
        if not enabled:
            raise ValidationError("no enabled models")
        queries = {c.model_id: self.encode(c.model_id, options.query) for c in enabled}

        pool = max(DEFAULT_POOL_SIZE, options.limit)
        fusion = ensemble_search(self.indexes, queries, models, top_k=pool)
        ranked = fusion.ranked
        if options.rerank is not None:
            lead = self._lead_model(models)
            ranked = rerank(self.manifest, self.indexes[lead], queries[lead], ranked, options.rerank)

        entries = []
        for key, score in ranked.truncated(options.limit):
            record = self.manifest.frame(key)
            entries.append(
                SearchEntry(
                    frame_key=key,
                    video_id=record.video_id,
                    frame_index=record.frame_index,
                    timestamp_s=record.timestamp_s,
                    fused_score=score,
                    per_model_scores=dict(fusion.per_model_scores.get(key, {})),
                    thumbnail_url=self.thumbnail_url(record),
                )
            )
        return SearchOutcome(entries=tuple(entries), skipped_models=fusion.skipped_models)

    def temporal(self, options: TemporalOptions) -> TemporalOutcome:
        model_id = options.model_id or self._lead_model(self.default_models())
        if model_id not in self.indexes:
            raise ValidationError(f"model {model_id!r} has no loaded index")
        config = options.config()
        self.manifest.frame(options.anchor_key)  # rejects an invalid anchor early
        q_start = self.encode(model_id, options.query_start)
        q_end = self.encode(model_id, options.query_end)
        result = select_moment(
            self.indexes[model_id], self.manifest, q_start, q_end, options.anchor_key, config
        )
        return TemporalOutcome(
            model_id=model_id,
            moment=result.selection,
            start_candidates=tuple(
                self._frame_payload(k, score) for k, score in result.start_candidates
            ),
            end_candidates=tuple(
                self._frame_payload(k, score) for k, score in result.end_candidates
            ),
        )

    def frames_window(
        self, video_id: str, from_index: int | None = None, to_index: int | None = None
    ) -> list[dict[str, Any]]:
        """Manifest keyframes of one video with frame_index in [from, to], ascending."""
        video = self.manifest.video(video_id)
        lo = 0 if from_index is None else from_index
        hi = video.frame_count - 1 if to_index is None else to_index
        if lo > hi:
            raise ValidationError(f"reversed range: from {lo} > to {hi}")
        try:
            first, last = self.manifest.video_key_span(video_id)
        except ValidationError:  # video listed in the manifest but no frames kept
            return []
        out = []
        for key in range(first, last + 1):
            record = self.manifest.frame(key)
            if lo <= record.frame_index <= hi:
                out.append(self._frame_payload(key))
        return out

    def validate_moment(self, moment: MomentSelection) -> None:
        """Checks a client-supplied moment against the loaded manifest."""
        first, last = self.manifest.video_key_span(moment.video_id)
        for label, key in (
            ("start_key", moment.start_key),
            ("anchor_key", moment.anchor_key),
            ("end_key", moment.end_key),
        ):
            if not first <= key <= last:
                raise ValidationError(
                    f"{label} {key} is not a keyframe of video {moment.video_id!r}"
                )

    def submit_qa(self, submission: QASubmission) -> dict[str, Any]:
        self.validate_moment(submission.moment)
        return self.qa_log.submit(submission)

    def corpus_summary(self) -> dict[str, Any]:
        m = self.manifest
        videos = []
        for v in m.videos:
            first, last = m.video_key_span(v.video_id)
            videos.append(
                {
                    "video_id": v.video_id,
                    "fps": v.fps,
                    "frame_count": v.frame_count,
                    "keyframes": last - first + 1,
                    "first_key": first,
                    "last_key": last,
                }
            )
        return {
            "version": MANIFEST_VERSION,
            "corpus_hash": m.corpus_hash,
            "created_at": m.created_at,
            "models": list(m.models),
            "video_count": len(m.videos),
            "frame_count": len(m.frames),
            "videos": videos,
        }
