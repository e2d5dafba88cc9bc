"""Session fixture: a small deterministic corpus exercised by most suites.

Three videos, two stub embedding models, fixed scene boundaries.  Two scenes
("kitchen" scene 1 and "street" scene 0) hold near-identical frames so the
dedup pass actually removes samples; everything else is independent random
unit vectors, far from any cosine threshold.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

from momentseek.corpus import CorpusManifest, read_manifest, write_manifest
from momentseek.embeddings import EmbeddingMatrix
from momentseek.engine import Engine, EngineConfig, load_config
from momentseek.index import build_index, save_index
from momentseek.ingest import DedupReport, collect_matrix_rows, run_ingest

from helpers import CREATED_AT

SEED = 20260819

VIDEOS = {"beach": (25.0, 400), "kitchen": (30.0, 240), "street": (24.0, 180)}
SCENES = {
    "beach": [(0, 79), (80, 199), (200, 319), (320, 399)],
    "kitchen": [(0, 59), (60, 149), (150, 239)],
    "street": [(0, 89), (90, 179)],
}
STATIC_SCENES = {("kitchen", 1), ("street", 0)}
DIMS = {"m1": 32, "m2": 48}


@dataclass
class CorpusFixture:
    root: Path
    boundaries_dir: Path
    raw_dir: Path
    videos_file: Path
    corpus_dir: Path
    thumbs_dir: Path
    config_path: Path
    manifest: CorpusManifest
    report: DedupReport


def write_raw_inputs(root: Path, seed: int = SEED) -> tuple[Path, Path, Path]:
    """Boundary files, video table, and per-model npz vectors under ``root``."""
    boundaries = root / "boundaries"
    raw = root / "raw"
    boundaries.mkdir(parents=True, exist_ok=True)

    videos_file = root / "videos.tsv"
    with open(videos_file, "w", encoding="utf-8") as fh:
        fh.write("video_id fps frame_count\n")
        for vid, (fps, n) in sorted(VIDEOS.items()):
            fh.write(f"{vid} {fps} {n}\n")

    for vid in VIDEOS:
        lines = [f"{a} {b}" for a, b in SCENES[vid]]
        (boundaries / f"{vid}.scenes").write_text("\n".join(lines) + "\n", encoding="utf-8")

    rng = np.random.default_rng(seed)
    for model, dim in sorted(DIMS.items()):
        model_dir = raw / model
        model_dir.mkdir(parents=True, exist_ok=True)
        for vid, (_, n) in sorted(VIDEOS.items()):
            vecs = rng.standard_normal((n, dim))
            for scene_idx, (a, b) in enumerate(SCENES[vid]):
                if (vid, scene_idx) in STATIC_SCENES:
                    base = rng.standard_normal(dim)
                    vecs[a : b + 1] = base + 0.02 * rng.standard_normal((b - a + 1, dim))
            vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
            np.savez(
                model_dir / f"{vid}.npz",
                frame_indices=np.arange(n),
                vectors=vecs.astype(np.float32),
            )
    return boundaries, raw, videos_file


@pytest.fixture(scope="session")
def corpus(tmp_path_factory: pytest.TempPathFactory) -> CorpusFixture:
    root = tmp_path_factory.mktemp("fixture_corpus")
    boundaries, raw, videos_file = write_raw_inputs(root)

    manifest, report = run_ingest(boundaries, raw, videos_file, created_at=CREATED_AT)

    corpus_dir = root / "corpus"
    corpus_dir.mkdir()
    write_manifest(manifest, corpus_dir / "manifest.jsonl")
    (corpus_dir / "dedup_report.json").write_text(
        json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8"
    )
    index_dir = corpus_dir / "indexes"
    index_dir.mkdir()
    for model in manifest.models:
        rows = collect_matrix_rows(manifest, raw, model)
        matrix = EmbeddingMatrix(model_id=model, rows=rows, corpus_hash=manifest.corpus_hash)
        save_index(build_index(matrix), index_dir / f"{model}.fidx")

    thumbs = root / "thumbs"
    first_beach = next(f for f in manifest.frames if f.video_id == "beach")
    thumb_path = thumbs / "beach" / f"{first_beach.frame_index}.jpg"
    thumb_path.parent.mkdir(parents=True)
    thumb_path.write_bytes(b"\xff\xd8\xff\xdb fixture thumbnail \xff\xd9")

    config_path = root / "engine.json"
    config_path.write_text(
        json.dumps(
            {
                "corpus_dir": "corpus",
                "models": [
                    {"model_id": "m1", "dim": DIMS["m1"], "weight": 0.6},
                    {"model_id": "m2", "dim": DIMS["m2"], "weight": 0.4},
                ],
                "thumbnail_dir": "thumbs",
                "qa_log_path": "corpus/qa_log.jsonl",
            },
            indent=2,
        ),
        encoding="utf-8",
    )
    return CorpusFixture(
        root=root,
        boundaries_dir=boundaries,
        raw_dir=raw,
        videos_file=videos_file,
        corpus_dir=corpus_dir,
        thumbs_dir=thumbs,
        config_path=config_path,
        manifest=manifest,
        report=report,
    )


@pytest.fixture(scope="session")
def engine(corpus: CorpusFixture) -> Engine:
    """Shared read-only engine; QA-writing tests use ``fresh_engine``."""
    return Engine(load_config(corpus.config_path))


@pytest.fixture()
def fresh_engine(corpus: CorpusFixture, tmp_path: Path) -> Engine:
    config = dataclasses.replace(load_config(corpus.config_path), qa_log_path=tmp_path / "qa.jsonl")
    return Engine(config)


@pytest.fixture()
def client(fresh_engine: Engine):
    from fastapi.testclient import TestClient

    from momentseek.service import create_app

    return TestClient(create_app(fresh_engine.config, engine=fresh_engine))
