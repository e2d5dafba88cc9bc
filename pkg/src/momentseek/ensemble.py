"""Late fusion of ranked lists from several embedding models.

Each enabled model retrieves its own top-M frames; scores are scaled into a
comparable range by dividing by that model's best retrieved score, weighted,
and summed per frame.  Frames missing from a model's list simply contribute
nothing for that model, which keeps fusion O(M * models) regardless of corpus
size.  A model whose best retrieved score is not positive is skipped with a
warning rather than letting the scale factor blow up or flip signs.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

from .corpus import RankedList
from .embeddings import QueryEmbedding
from .errors import ValidationError
from .index import FlatIndex, search

log = logging.getLogger(__name__)

DEFAULT_POOL_SIZE = 50
_WEIGHT_SUM_TOL = 1e-9


@dataclass(frozen=True)
class ModelConfig:
    model_id: str
    weight: float
    enabled: bool = True

    def __post_init__(self):
        if not self.model_id:
            raise ValidationError("model_id must be non-empty")
        if not self.weight >= 0:
            raise ValidationError(f"weight must be non-negative: {self.weight}")


@dataclass(frozen=True)
class FusionResult:
    """Fused ranking plus the raw per-model scores behind it.

    per_model_scores maps frame_key -> {model_id: raw score}; a model appears
    only for frames it actually retrieved.
    """

    ranked: RankedList
    per_model_scores: dict[int, dict[str, float]]
    skipped_models: tuple[str, ...] = ()


def normalize_weights(configs: Sequence[ModelConfig]) -> list[ModelConfig]:
    """Rescale enabled weights to sum to 1; disabled entries pass through."""
    enabled = [c for c in configs if c.enabled]
    if not enabled:
        raise ValidationError("no enabled models")
    total = sum(c.weight for c in enabled)
    if total <= 0:
        raise ValidationError(f"enabled weights must sum to a positive value: {total}")
    out = [replace(c, weight=c.weight / total) if c.enabled else c for c in configs]
    check = sum(c.weight for c in out if c.enabled)
    assert abs(check - 1.0) <= _WEIGHT_SUM_TOL
    return out


def ensemble_search(
    indexes: Mapping[str, FlatIndex],
    queries: Mapping[str, QueryEmbedding],
    configs: Sequence[ModelConfig],
    top_k: int = DEFAULT_POOL_SIZE,
) -> FusionResult:
    """Fuse per-model top-``top_k`` lists into one ranking.

    ``indexes`` and ``queries`` are keyed by model_id and must cover every
    enabled config.  Models are processed in config order.
    """
    seen: set[str] = set()
    for cfg in configs:
        if cfg.model_id in seen:
            raise ValidationError(f"duplicate model config: {cfg.model_id!r}")
        seen.add(cfg.model_id)

    weighted = normalize_weights(configs)
    fused: dict[int, float] = {}
    raw: dict[int, dict[str, float]] = {}
    skipped: list[str] = []

    for cfg in weighted:
        if not cfg.enabled:
            continue
        if cfg.model_id not in indexes:
            raise ValidationError(f"no index for enabled model {cfg.model_id!r}")
        if cfg.model_id not in queries:
            raise ValidationError(f"no query embedding for enabled model {cfg.model_id!r}")
        ranked = search(indexes[cfg.model_id], queries[cfg.model_id], top_k)
        if len(ranked) == 0:
            continue
        best = ranked[0][1]
        if best <= 0:
            log.warning(
                "model %s: best retrieved score %.6f is not positive, skipping", cfg.model_id, best
            )
            skipped.append(cfg.model_id)
            continue
        for key, score in ranked:
            raw.setdefault(key, {})[cfg.model_id] = score
            fused[key] = fused.get(key, 0.0) + cfg.weight * (score / best)

    ranked = RankedList.from_scores(fused.items())
    return FusionResult(ranked=ranked, per_model_scores=raw, skipped_models=tuple(skipped))


def parse_model_spec(spec: str) -> ModelConfig:
    """Parse the ``model_id:weight`` form used on the command line."""
    model_id, sep, weight_text = spec.partition(":")
    if not sep or not model_id:
        raise ValidationError(f"expected 'model_id:weight', got {spec!r}")
    try:
        weight = float(weight_text)
    except ValueError:
        raise ValidationError(f"non-numeric weight in {spec!r}") from None
    return ModelConfig(model_id=model_id, weight=weight)
