"""Neighborhood rescoring of a candidate list.

A frame that matches a query is more trustworthy when its temporal neighbors
match too.  Rescoring replaces each candidate's score with the sum of query
dot products over a window of adjacent frames from the same video (manifest
order, clipped at video edges).  Only the given candidates are rescored; the
candidate set never grows or shrinks here.
"""
from __future__ import annotations

from dataclasses import dataclass

from .corpus import CorpusManifest, RankedList
from .embeddings import QueryEmbedding
from .errors import ValidationError
from .index import FlatIndex, score_one

MAX_RADIUS = 64  # sanity bound; windows wider than this stop meaning "neighborhood"


@dataclass(frozen=True)
class RerankConfig:
    radius: int = 2
    include_center: bool = True

    def __post_init__(self):
        if not 0 <= self.radius <= MAX_RADIUS:
            raise ValidationError(f"radius must be in [0, {MAX_RADIUS}]: {self.radius}")


def get_neighbors(manifest: CorpusManifest, frame_key: int, config: RerankConfig) -> list[int]:
    """Window of frame keys around ``frame_key``, clipped to its video."""
    record = manifest.frame(frame_key)
    first, last = manifest.video_key_span(record.video_id)
    lo = max(first, frame_key - config.radius)
    hi = min(last, frame_key + config.radius)
    keys = range(lo, hi + 1)
    if config.include_center:
        return list(keys)
    return [k for k in keys if k != frame_key]


def rerank(
    manifest: CorpusManifest,
    index: FlatIndex,
    q: QueryEmbedding,
    candidates: RankedList,
    config: RerankConfig | None = None,
) -> RankedList:
    """Reorder ``candidates`` by windowed score; the key set is preserved."""
    config = config or RerankConfig()
    rescored = []
    for key, _ in candidates:
        total = 0.0
        for neighbor in get_neighbors(manifest, key, config):
            score = score_one(index, q, neighbor)
            if score is not None:  # absent rows contribute nothing
                total += score
        rescored.append((key, total))
    return RankedList.from_scores(rescored)
