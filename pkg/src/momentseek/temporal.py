"""Moment boundary selection around an anchor frame.

Given an anchor frame and two text queries describing how the moment starts
and how it ends, candidate boundaries are gathered by walking outward from
the anchor one keyframe at a time: backward for the start, forward for the
end.  A walk stops at the video edge, after a fixed number of accepted
frames, or when frame similarity to the walk's query drops below an absolute
floor.  The best (start, end) pair maximizes the sum of the two boundary
scores subject to a span cap, with ties broken toward the smaller span and
then the earlier start.  Both candidate sets include the anchor itself, so a
feasible pair always exists.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .corpus import CorpusManifest
from .embeddings import QueryEmbedding
from .errors import ValidationError
from .index import FlatIndex, score_one

LEFT = -1
RIGHT = 1


@dataclass(frozen=True)
class TemporalConfig:
    max_steps: int = 20
    similarity_floor: float = 0.2
    max_span: int = 50

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValidationError(f"max_steps must be >= 1: {self.max_steps}")
        if not math.isfinite(self.similarity_floor):
            raise ValidationError(f"similarity_floor must be finite: {self.similarity_floor}")
        if self.max_span < 0:
            raise ValidationError(f"max_span must be >= 0: {self.max_span}")


@dataclass(frozen=True)
class MomentSelection:
    video_id: str
    anchor_key: int
    start_key: int
    end_key: int
    start_score: float
    end_score: float

    def __post_init__(self):
        if not self.start_key <= self.anchor_key <= self.end_key:
            raise ValidationError(
                f"boundaries must bracket the anchor: "
                f"{self.start_key} <= {self.anchor_key} <= {self.end_key} fails"
            )

    @property
    def span(self) -> int:
        return self.end_key - self.start_key

    @property
    def total_score(self) -> float:
        return self.start_score + self.end_score


@dataclass(frozen=True)
class MomentSearchResult:
    """Selection plus the scored boundary candidates it was chosen from.

    Candidate lists are (frame_key, score) in walk order starting at the
    anchor; start candidates walk backward, end candidates forward.
    """

    selection: MomentSelection
    start_candidates: tuple[tuple[int, float], ...]
    end_candidates: tuple[tuple[int, float], ...]


def expand(
    index: FlatIndex,
    manifest: CorpusManifest,
    q: QueryEmbedding,
    anchor_key: int,
    direction: int,
    config: TemporalConfig | None = None,
) -> list[tuple[int, float]]:
    """(frame_key, score) pairs reached walking from the anchor, in walk order.

    ``direction`` is LEFT (-1, toward the video start) or RIGHT (+1).  The
    walk stays inside the anchor's video, accepts a frame only while its
    score is at least the similarity floor, and stops after ``max_steps``
    accepted frames.  The anchor itself is not included.
    """
    if direction not in (LEFT, RIGHT):
        raise ValidationError(f"direction must be -1 or +1: {direction}")
    config = config or TemporalConfig()
    record = manifest.frame(anchor_key)
    first, last = manifest.video_key_span(record.video_id)

    out: list[tuple[int, float]] = []
    key = anchor_key
    while len(out) < config.max_steps:
        key += direction
        if key < first or key > last:
            break
        score = score_one(index, q, key)
        assert score is not None  # key is inside the video span
        if score < config.similarity_floor:
            break
        out.append((key, score))
    return out


def select_moment(
    index: FlatIndex,
    manifest: CorpusManifest,
    q_start: QueryEmbedding,
    q_end: QueryEmbedding,
    anchor_key: int,
    config: TemporalConfig | None = None,
) -> MomentSearchResult:
    """Pick moment boundaries around ``anchor_key`` and report the candidates.

    Maximizes start score plus end score over all candidate pairs whose span
    stays within ``config.max_span``; ties prefer the smaller span, then the
    smaller start key.
    """
    config = config or TemporalConfig()
    record = manifest.frame(anchor_key)

    anchor_start = (anchor_key, score_one(index, q_start, anchor_key))
    anchor_end = (anchor_key, score_one(index, q_end, anchor_key))
    start_candidates = [anchor_start] + expand(index, manifest, q_start, anchor_key, LEFT, config)
    end_candidates = [anchor_end] + expand(index, manifest, q_end, anchor_key, RIGHT, config)

    best: tuple[float, int, int] | None = None
    best_pair: tuple[tuple[int, float], tuple[int, float]] | None = None
    for s_key, s_score in start_candidates:
        for e_key, e_score in end_candidates:
            if e_key - s_key > config.max_span:
                continue
            rank = (s_score + e_score, -(e_key - s_key), -s_key)
            if best is None or rank > best:
                best = rank
                best_pair = ((s_key, s_score), (e_key, e_score))

    assert best_pair is not None  # (anchor, anchor) has span 0 <= max_span
    (s_key, s_score), (e_key, e_score) = best_pair
    selection = MomentSelection(
        video_id=record.video_id,
        anchor_key=anchor_key,
        start_key=s_key,
        end_key=e_key,
        start_score=s_score,
        end_score=e_score,
    )
    return MomentSearchResult(
        selection=selection,
        start_candidates=tuple(start_candidates),
        end_candidates=tuple(end_candidates),
    )


def find_best_frame_pair(
    index: FlatIndex,
    manifest: CorpusManifest,
    q_start: QueryEmbedding,
    q_end: QueryEmbedding,
    anchor_key: int,
    config: TemporalConfig | None = None,
) -> MomentSelection:
    """Boundary pair only; see :func:`select_moment` for the full result."""
    return select_moment(index, manifest, q_start, q_end, anchor_key, config).selection
