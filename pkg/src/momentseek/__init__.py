"""Interactive moment retrieval over video keyframe embeddings.

The pipeline in one sentence: scenes are sampled into keyframes and
near-duplicates dropped (ingest), each model's vectors become an exact
cosine index (embeddings, index), queries fan out across models and fuse
(ensemble), optional neighbor rescoring sharpens the list (rerank), and a
dual-query walk around a chosen anchor yields a (start, end) moment
(temporal).  The engine ties these together for both the CLI and the HTTP
service.
"""
from .corpus import (
    CorpusManifest,
    FrameRecord,
    RankedList,
    SceneBoundary,
    VideoDescriptor,
    build_manifest,
    read_manifest,
    write_manifest,
)
from .embeddings import (
    EmbeddingMatrix,
    EncoderEndpointConfig,
    QueryEmbedding,
    encode_text,
    load_matrix,
    stub_vector,
    write_matrix,
)
from .engine import Engine, EngineConfig, QASubmission, SearchOptions, TemporalOptions, load_config
from .ensemble import FusionResult, ModelConfig, ensemble_search, normalize_weights
from .errors import (
    ContractError,
    EngineError,
    FormatError,
    HashMismatchError,
    ParseError,
    TransportError,
    ValidationError,
)
from .index import FlatIndex, build_index, load_index, save_index, score_one, search
from .ingest import DedupConfig, DedupReport, dedup_scene, run_ingest, sample_keyframes
from .rerank import RerankConfig, get_neighbors, rerank
from .temporal import (
    MomentSelection,
    TemporalConfig,
    expand,
    find_best_frame_pair,
    select_moment,
)

__version__ = "0.1.0"

__all__ = [
    "CorpusManifest",
    "FrameRecord",
    "RankedList",
    "SceneBoundary",
    "VideoDescriptor",
    "build_manifest",
    "read_manifest",
    "write_manifest",
    "EmbeddingMatrix",
    "EncoderEndpointConfig",
    "QueryEmbedding",
    "encode_text",
    "load_matrix",
    "stub_vector",
    "write_matrix",
    "Engine",
    "EngineConfig",
    "QASubmission",
    "SearchOptions",
    "TemporalOptions",
    "load_config",
    "FusionResult",
    "ModelConfig",
    "ensemble_search",
    "normalize_weights",
    "ContractError",
    "EngineError",
    "FormatError",
    "HashMismatchError",
    "ParseError",
    "TransportError",
    "ValidationError",
    "FlatIndex",
    "build_index",
    "load_index",
    "save_index",
    "score_one",
    "search",
    "DedupConfig",
    "DedupReport",
    "dedup_scene",
    "run_ingest",
    "sample_keyframes",
    "RerankConfig",
    "get_neighbors",
    "rerank",
    "MomentSelection",
    "TemporalConfig",
    "expand",
    "find_best_frame_pair",
    "select_moment",
    "__version__",
]
