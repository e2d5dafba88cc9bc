"""Embedding matrix persistence and the pluggable text-encoder client.

Matrix file layout (little-endian, magic ``EMB1``):

    offset  size  field
    0       4     magic b"EMB1"
    4       4     u32 dim
    8       8     u64 row count
    16      32    raw SHA-256 corpus digest (matches the manifest)
    48      64    model_id, UTF-8, zero padded
    112     -     row-major float32 payload, count * dim values

Rows are unit vectors at rest so every downstream cosine similarity is a
plain dot product.  On load, rows whose norm deviates from 1 by more than
1e-6 but at most 1e-3 are renormalized; larger deviations (including zero
rows) are rejected.  Exactly-normalized inputs therefore round-trip
bit-for-bit.

Text encoders are external services (the models themselves are out of scope
here).  ``endpoint="stub"`` selects a deterministic offline encoder: the
vector is a standard-normal draw seeded with SHA-256(model_id || 0x00 ||
text), L2-normalized — same text and model always give the same unit vector,
different models give different vectors.  Real endpoints speak JSON: request
``{"model_id", "text"}``, response ``{"vector": [...]}`` of the configured
dimension.
"""
from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import IO

import httpx
import numpy as np

from .corpus import CorpusManifest
from .errors import ContractError, FormatError, HashMismatchError, TransportError, ValidationError

MATRIX_MAGIC = b"EMB1"
_HEADER = struct.Struct("<4sIQ32s64s")

UNIT_ATOL = 1e-6
RENORM_ATOL = 1e-3


@dataclass
class EmbeddingMatrix:
    model_id: str
    rows: np.ndarray  # (count, dim) float32, unit rows
    corpus_hash: str  # hex digest matching the manifest

    def __post_init__(self):
        self.rows = np.ascontiguousarray(self.rows, dtype=np.float32)
        if self.rows.ndim != 2:
            raise ValidationError(f"matrix rows must be 2-D, got shape {self.rows.shape}")

    @property
    def dim(self) -> int:
        return int(self.rows.shape[1])

    @property
    def count(self) -> int:
        return int(self.rows.shape[0])


@dataclass(frozen=True)
class QueryEmbedding:
    model_id: str
    vector: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.vector, dtype=np.float32)
        object.__setattr__(self, "vector", v)
        norm = float(np.linalg.norm(v.astype(np.float64)))
        if abs(norm - 1.0) > 2 * UNIT_ATOL:
            raise ValidationError(f"query vector for {self.model_id!r} has norm {norm}, expected 1")


@dataclass(frozen=True)
class EncoderEndpointConfig:
    model_id: str
    dim: int
    endpoint: str = "stub"
    timeout_s: float = 10.0

    def __post_init__(self):
        if self.dim < 1:
            raise ValidationError(f"encoder dim must be >= 1: {self.dim}")


def _check_rows(rows: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(rows)):
        bad = int(np.argwhere(~np.isfinite(rows))[0][0])
        raise FormatError(f"{what}: non-finite value in row {bad}")
    if rows.shape[0] == 0:
        return rows
    norms = np.linalg.norm(rows.astype(np.float64), axis=1)
    deviation = np.abs(norms - 1.0)
    if np.any(deviation > RENORM_ATOL):
        bad = int(np.flatnonzero(deviation > RENORM_ATOL)[0])
        raise FormatError(f"{what}: unnormalizable row {bad} (norm {norms[bad]:.6g})")
    fix = np.flatnonzero(deviation > UNIT_ATOL)
    if fix.size:
        rows = rows.copy()
        rows[fix] = (rows[fix].astype(np.float64) / norms[fix, None]).astype(np.float32)
    return rows


def write_matrix(matrix: EmbeddingMatrix, dest: Path | IO[bytes]) -> None:
    if isinstance(dest, (str, Path)):
        with open(dest, "wb") as fh:
            write_matrix(matrix, fh)
        return
    model_bytes = matrix.model_id.encode("utf-8")
    if len(model_bytes) > 64:
        raise ValidationError(f"model_id longer than 64 bytes: {matrix.model_id!r}")
    header = _HEADER.pack(
        MATRIX_MAGIC,
        matrix.dim,
        matrix.count,
        bytes.fromhex(matrix.corpus_hash),
        model_bytes.ljust(64, b"\x00"),
    )
    dest.write(header)
    dest.write(np.ascontiguousarray(matrix.rows, dtype="<f4").tobytes())


def load_matrix(source: Path | IO[bytes], manifest: CorpusManifest | None = None) -> EmbeddingMatrix:
    """Load a matrix file, verifying structure and (optionally) the manifest digest."""
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            return load_matrix(fh, manifest=manifest)

    raw = source.read()
    if len(raw) < _HEADER.size:
        raise FormatError(f"file too short for header ({len(raw)} bytes)")
    magic, dim, count, digest, model_bytes = _HEADER.unpack_from(raw, 0)
    if magic != MATRIX_MAGIC:
        raise FormatError(f"magic mismatch: expected {MATRIX_MAGIC!r}, got {magic!r}")
    if dim < 1:
        raise FormatError(f"invalid dimension {dim}")
    payload = raw[_HEADER.size:]
    expected = count * dim * 4
    if len(payload) != expected:
        raise FormatError(f"truncated or oversized payload: expected {expected} bytes, got {len(payload)}")

    rows = np.frombuffer(payload, dtype="<f4").reshape(count, dim).copy()
    model_id = model_bytes.rstrip(b"\x00").decode("utf-8")
    rows = _check_rows(rows, f"matrix {model_id!r}")
    matrix = EmbeddingMatrix(model_id=model_id, rows=rows, corpus_hash=digest.hex())
    if manifest is not None:
        if matrix.corpus_hash != manifest.corpus_hash:
            raise HashMismatchError(
                f"matrix digest {matrix.corpus_hash[:12]}... does not match manifest {manifest.corpus_hash[:12]}..."
            )
        if matrix.count != len(manifest.frames):
            raise FormatError(f"matrix has {matrix.count} rows but manifest has {len(manifest.frames)} frames")
    return matrix


def stub_vector(model_id: str, text: str, dim: int) -> np.ndarray:
    digest = hashlib.sha256(model_id.encode("utf-8") + b"\x00" + text.encode("utf-8")).digest()
    seed = np.frombuffer(digest, dtype=np.uint32)
    rng = np.random.default_rng(np.random.SeedSequence(seed.tolist()))
    v = rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    return v.astype(np.float32)


def encode_text(config: EncoderEndpointConfig, text: str) -> QueryEmbedding:
    """Encode a query string through the configured endpoint (or the stub)."""
    if not text:
        raise ValidationError("query text must be non-empty")
    if config.endpoint == "stub":
        return QueryEmbedding(model_id=config.model_id, vector=stub_vector(config.model_id, text, config.dim))

    try:
        response = httpx.post(
            config.endpoint,
            json={"model_id": config.model_id, "text": text},
            timeout=config.timeout_s,
        )
        response.raise_for_status()
        payload = response.json()
    except httpx.HTTPError as exc:
        raise TransportError(f"encoder for {config.model_id!r} unreachable: {exc}") from exc

    vector = np.asarray(payload.get("vector"), dtype=np.float64)
    if vector.ndim != 1 or vector.shape[0] != config.dim:
        raise ContractError(
            f"encoder for {config.model_id!r} returned shape {vector.shape}, expected ({config.dim},)"
        )
    norm = float(np.linalg.norm(vector))
    if norm == 0 or not np.isfinite(norm):
        raise ContractError(f"encoder for {config.model_id!r} returned an unnormalizable vector")
    return QueryEmbedding(model_id=config.model_id, vector=(vector / norm).astype(np.float32))
