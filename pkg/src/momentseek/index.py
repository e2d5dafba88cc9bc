"""Exact top-k cosine search over one model's embedding matrix.

All vectors are unit-normalized, so the score is a float32 dot product with
a fixed per-row accumulation order.  Results carry a total order (score
descending, then frame_key ascending) which makes top-k selection exact even
at score ties: the selection below partitions on the k-th score, then fills
boundary ties by ascending key.  Approximate search is deliberately out of
scope; the module boundary admits an ANN backend later.

Index file layout: a small header (magic ``FIDX``, u32 version, 64-byte
model_id, 32-byte corpus digest) followed by the complete embedding-matrix
blob documented in :mod:`momentseek.embeddings`.
"""
from __future__ import annotations

import io
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import IO

import numpy as np

from .corpus import CorpusManifest, RankedList
from .embeddings import EmbeddingMatrix, QueryEmbedding, load_matrix, write_matrix
from .errors import ContractError, FormatError, HashMismatchError, ValidationError

INDEX_MAGIC = b"FIDX"
INDEX_VERSION = 1
_IDX_HEADER = struct.Struct("<4sI64s32s")


@dataclass
class FlatIndex:
    model_id: str
    matrix: EmbeddingMatrix

    def __post_init__(self):
        if self.model_id != self.matrix.model_id:
            raise ContractError(
                f"index model {self.model_id!r} does not match matrix model {self.matrix.model_id!r}"
            )

    @property
    def corpus_hash(self) -> str:
        return self.matrix.corpus_hash

    @property
    def count(self) -> int:
        return self.matrix.count

    @property
    def dim(self) -> int:
        return self.matrix.dim


def build_index(matrix: EmbeddingMatrix) -> FlatIndex:
    return FlatIndex(model_id=matrix.model_id, matrix=matrix)


def _check_query(index: FlatIndex, q: QueryEmbedding) -> None:
    if q.model_id != index.model_id:
        raise ContractError(f"query encoded for {q.model_id!r}, index holds {index.model_id!r}")
    if q.vector.shape[0] != index.dim:
        raise ContractError(f"query dim {q.vector.shape[0]} does not match index dim {index.dim}")


def _top_k_by_score(scores: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k best scores, descending, ties by ascending index."""
    n = scores.shape[0]
    if k >= n:
        # stable sort on -scores keeps ascending index order within ties
        return np.argsort(-scores, kind="stable")
    neg = -scores
    kth = np.partition(neg, k - 1)[k - 1]
    above = np.flatnonzero(neg < kth)
    need = k - above.size
    if need > 0:
        tied = np.flatnonzero(neg == kth)
        chosen = np.concatenate([above, tied[:need]])  # flatnonzero is ascending
    else:
        chosen = above
    order = np.argsort(-scores[chosen], kind="stable")
    return chosen[order]


def search(index: FlatIndex, q: QueryEmbedding, top_k: int) -> RankedList:
    """Exact top-``top_k`` entries by dot product (all rows when fewer exist)."""
    if top_k < 1:
        raise ValidationError(f"top_k must be >= 1: {top_k}")
    _check_query(index, q)
    if index.count == 0:
        return RankedList(())
    scores = index.matrix.rows @ q.vector
    picked = _top_k_by_score(scores, top_k)
    return RankedList(tuple((int(i), float(scores[i])) for i in picked))


def score_one(index: FlatIndex, q: QueryEmbedding, frame_key: int) -> float | None:
    """Dot product of the query with one row; None when the key is out of range."""
    _check_query(index, q)
    if not 0 <= frame_key < index.count:
        return None
    return float(index.matrix.rows[frame_key] @ q.vector)


def save_index(index: FlatIndex, dest: Path | IO[bytes]) -> None:
    if isinstance(dest, (str, Path)):
        with open(dest, "wb") as fh:
            save_index(index, fh)
        return
    model_bytes = index.model_id.encode("utf-8")
    if len(model_bytes) > 64:
        raise ValidationError(f"model_id longer than 64 bytes: {index.model_id!r}")
    dest.write(
        _IDX_HEADER.pack(
            INDEX_MAGIC,
            INDEX_VERSION,
            model_bytes.ljust(64, b"\x00"),
            bytes.fromhex(index.corpus_hash),
        )
    )
    write_matrix(index.matrix, dest)


def load_index(source: Path | IO[bytes], manifest: CorpusManifest) -> FlatIndex:
    """Load an index file; refuses a corpus digest that differs from the manifest."""
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            return load_index(fh, manifest)

    head = source.read(_IDX_HEADER.size)
    if len(head) < _IDX_HEADER.size:
        raise FormatError(f"file too short for index header ({len(head)} bytes)")
    magic, version, model_bytes, digest = _IDX_HEADER.unpack(head)
    if magic != INDEX_MAGIC:
        raise FormatError(f"magic mismatch: expected {INDEX_MAGIC!r}, got {magic!r}")
    if version != INDEX_VERSION:
        raise FormatError(f"unsupported index version {version}")
    model_id = model_bytes.rstrip(b"\x00").decode("utf-8")
    corpus_hash = digest.hex()
    if corpus_hash != manifest.corpus_hash:
        raise HashMismatchError(
            f"index digest {corpus_hash[:12]}... does not match manifest {manifest.corpus_hash[:12]}..."
        )
    matrix = load_matrix(io.BytesIO(source.read()), manifest=manifest)
    if matrix.model_id != model_id:
        raise FormatError(f"index header names {model_id!r} but payload holds {matrix.model_id!r}")
    if matrix.corpus_hash != corpus_hash:
        raise FormatError("index header digest disagrees with payload digest")
    return FlatIndex(model_id=model_id, matrix=matrix)
