"""Shared construction helpers for planted-similarity test corpora."""
from __future__ import annotations

import numpy as np

from momentseek.corpus import CorpusManifest, VideoDescriptor, build_manifest
from momentseek.embeddings import EmbeddingMatrix, QueryEmbedding
from momentseek.index import FlatIndex, build_index

CREATED_AT = "2026-08-19T00:00:00+00:00"


def unit_rows(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    rows = rng.standard_normal((n, dim))
    rows /= np.linalg.norm(rows, axis=1, keepdims=True)
    return rows.astype(np.float32)


def basis_query(dim: int, axis: int = 0, model_id: str = "m1") -> QueryEmbedding:
    v = np.zeros(dim, dtype=np.float32)
    v[axis] = 1.0
    return QueryEmbedding(model_id=model_id, vector=v)


def planted_rows(dots: list[float], dim: int | None = None) -> np.ndarray:
    """Unit rows whose dot with the axis-0 basis query equals ``dots[i]``.

    Each row gets its own orthogonal remainder direction, so rows are
    pairwise independent apart from the planted first component.
    """
    n = len(dots)
    dim = dim if dim is not None else n + 1
    assert dim >= n + 1, "need one remainder axis per row"
    rows = np.zeros((n, dim), dtype=np.float64)
    for i, s in enumerate(dots):
        assert abs(s) <= 1
        rows[i, 0] = s
        rows[i, 1 + i] = np.sqrt(1.0 - s * s)
    return rows.astype(np.float32)


def planted_rows_2q(starts: list[float], ends: list[float], dim: int | None = None) -> np.ndarray:
    """Unit rows with dots ``starts[i]`` against axis 0 and ``ends[i]`` against axis 1."""
    n = len(starts)
    assert len(ends) == n
    dim = dim if dim is not None else n + 2
    assert dim >= n + 2
    rows = np.zeros((n, dim), dtype=np.float64)
    for i, (a, b) in enumerate(zip(starts, ends)):
        assert a * a + b * b <= 1.0 + 1e-12
        rows[i, 0] = a
        rows[i, 1] = b
        rows[i, 2 + i] = np.sqrt(max(0.0, 1.0 - a * a - b * b))
    return rows.astype(np.float32)


def toy_manifest(videos: list[tuple[str, int]], fps: float = 10.0) -> CorpusManifest:
    """One scene per video, every frame index kept, deterministic timestamp base."""
    descriptors = [VideoDescriptor(video_id=v, fps=fps, frame_count=n) for v, n in videos]
    kept = [(v, i, 0) for v, n in videos for i in range(n)]
    return build_manifest(descriptors, kept, ["m1"], created_at=CREATED_AT)


def index_for(manifest: CorpusManifest, rows: np.ndarray, model_id: str = "m1") -> FlatIndex:
    assert rows.shape[0] == len(manifest.frames)
    matrix = EmbeddingMatrix(model_id=model_id, rows=rows, corpus_hash=manifest.corpus_hash)
    return build_index(matrix)


def brute_force_top(scores: np.ndarray, k: int) -> list[tuple[int, float]]:
    """Full-sort reference: order by score descending, then key ascending."""
    order = np.lexsort((np.arange(scores.shape[0]), -scores))
    return [(int(i), float(scores[i])) for i in order[:k]]
