#!/usr/bin/env python3
"""Generate a self-contained demo corpus and engine config.

Synthesizes scene boundaries, per-frame embeddings, and a video table for a
handful of fake videos, then runs the full ingest + indexing pipeline.  The
result is a directory you can serve immediately:

    python3 scripts/make_demo_corpus.py --out demo
    momentseek serve --config demo/engine.json

Frames inside a scene drift slowly around a scene anchor vector, so
near-duplicate removal and neighborhood rescoring both have something real
to do; a few scenes are nearly static to exercise the dedup path.
"""
from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np

from momentseek.corpus import write_manifest
from momentseek.embeddings import EmbeddingMatrix
from momentseek.index import build_index, save_index
from momentseek.ingest import collect_matrix_rows, run_ingest

VIDEOS = {
    "harbor": (25.0, 620),
    "market": (30.0, 450),
    "rooftop": (24.0, 380),
    "subway": (30.0, 500),
}
MODELS = {"vision-a": 64, "vision-b": 96}
STATIC_SCENE_EVERY = 5  # every fifth scene is nearly frozen


def synth_scenes(rng: np.random.Generator, frame_count: int) -> list[tuple[int, int]]:
    scenes = []
    start = 0
    while start < frame_count:
        length = int(rng.integers(40, 140))
        end = min(start + length - 1, frame_count - 1)
        scenes.append((start, end))
        start = end + 1
    return scenes


def synth_vectors(
    rng: np.random.Generator, scenes: list[tuple[int, int]], frame_count: int, dim: int
) -> np.ndarray:
    vecs = np.empty((frame_count, dim))
    for scene_idx, (a, b) in enumerate(scenes):
        anchor = rng.standard_normal(dim)
        drift = 0.01 if scene_idx % STATIC_SCENE_EVERY == 0 else 0.6
        for i in range(a, b + 1):
            vecs[i] = anchor + drift * rng.standard_normal(dim)
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    return vecs.astype(np.float32)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="demo", help="output directory")
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    out = Path(args.out)
    boundaries = out / "boundaries"
    raw = out / "raw"
    boundaries.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(args.seed)
    all_scenes: dict[str, list[tuple[int, int]]] = {}

    videos_file = out / "videos.tsv"
    with open(videos_file, "w", encoding="utf-8") as fh:
        fh.write("video_id fps frame_count\n")
        for vid, (fps, n) in sorted(VIDEOS.items()):
            fh.write(f"{vid} {fps} {n}\n")
            all_scenes[vid] = synth_scenes(rng, n)
            lines = [f"{a} {b}" for a, b in all_scenes[vid]]
            (boundaries / f"{vid}.scenes").write_text("\n".join(lines) + "\n", encoding="utf-8")

    for model, dim in sorted(MODELS.items()):
        model_dir = raw / model
        model_dir.mkdir(parents=True, exist_ok=True)
        for vid, (_, n) in sorted(VIDEOS.items()):
            np.savez(
                model_dir / f"{vid}.npz",
                frame_indices=np.arange(n),
                vectors=synth_vectors(rng, all_scenes[vid], n, dim),
            )

    manifest, report = run_ingest(boundaries, raw, videos_file)
    corpus_dir = out / "corpus"
    corpus_dir.mkdir(exist_ok=True)
    write_manifest(manifest, corpus_dir / "manifest.jsonl")
    (corpus_dir / "dedup_report.json").write_text(
        json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8"
    )

    index_dir = corpus_dir / "indexes"
    index_dir.mkdir(exist_ok=True)
    for model in manifest.models:
        rows = collect_matrix_rows(manifest, raw, model)
        matrix = EmbeddingMatrix(model_id=model, rows=rows, corpus_hash=manifest.corpus_hash)
        save_index(build_index(matrix), index_dir / f"{model}.fidx")

    config = {
        "corpus_dir": "corpus",
        "models": [
            {"model_id": "vision-a", "dim": MODELS["vision-a"], "weight": 0.6},
            {"model_id": "vision-b", "dim": MODELS["vision-b"], "weight": 0.4},
        ],
        "qa_log_path": "corpus/qa_log.jsonl",
    }
    (out / "engine.json").write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")

    print(
        f"{len(manifest.videos)} videos, {report.scenes_processed} scenes, "
        f"{report.frames_sampled} sampled -> {report.frames_kept} kept "
        f"({report.frames_removed} near-duplicates removed)"
    )
    print(f"corpus hash {manifest.corpus_hash[:16]}...")
    print(f"wrote {out / 'engine.json'}; try: momentseek serve --config {out / 'engine.json'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
