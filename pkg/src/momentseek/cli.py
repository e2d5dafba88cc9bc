"""Command line entry points.

Subcommands cover the corpus lifecycle end to end: ``ingest`` builds the
manifest and dedup report from scene boundaries plus per-frame embeddings,
``build-index`` turns raw vectors into index files, ``search`` and
``temporal`` run queries offline through exactly the pipeline the service
uses, ``stats`` summarizes a manifest/report pair, and ``serve`` starts the
HTTP service.  Input and configuration errors exit with status 2 and a
message on stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .corpus import read_manifest, write_manifest
from .embeddings import EmbeddingMatrix
from .engine import (
    Engine,
    SearchOptions,
    TemporalOptions,
    config_path_from_env,
    load_config,
)
from .ensemble import parse_model_spec
from .errors import EngineError, ValidationError
from .index import build_index, save_index
from .ingest import DedupConfig, DedupReport, collect_matrix_rows, run_ingest
from .rerank import RerankConfig


def _engine_from_args(args: argparse.Namespace) -> Engine:
    path = Path(args.config) if args.config else config_path_from_env()
    return Engine(load_config(path))


def _print_table(rows: list[list[str]], header: list[str]) -> None:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(header)]
    line = "  ".join(h.ljust(w) for h, w in zip(header, widths))
    print(line)
    print("  ".join("-" * w for w in widths))
    for r in rows:
        print("  ".join(c.ljust(w) for c, w in zip(r, widths)))


def cmd_ingest(args: argparse.Namespace) -> int:
    config = DedupConfig(similarity_threshold=args.threshold, frames_per_scene=args.per_scene)
    manifest, report = run_ingest(
        boundaries_dir=Path(args.boundaries),
        embeddings_dir=Path(args.embeddings),
        videos_file=Path(args.videos),
        config=config,
        model_ids=args.models.split(",") if args.models else None,
        dedup_model_id=args.dedup_model,
        created_at=args.created_at,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_manifest(manifest, out / "manifest.jsonl")
    (out / "dedup_report.json").write_text(
        json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8"
    )

    per_video: dict[str, list[int]] = {}
    for s in report.per_scene:
        acc = per_video.setdefault(s.video_id, [0, 0, 0])
        acc[0] += 1
        acc[1] += s.sampled
        acc[2] += s.kept
    rows = [[vid, str(a[0]), str(a[1]), str(a[2])] for vid, a in sorted(per_video.items())]
    _print_table(rows, ["video", "scenes", "sampled", "kept"])
    print(
        f"total: {report.scenes_processed} scenes, {report.frames_sampled} sampled, "
        f"{report.frames_removed} removed, {report.frames_kept} kept"
    )
    print(f"wrote {out / 'manifest.jsonl'} and {out / 'dedup_report.json'}")
    return 0


def cmd_build_index(args: argparse.Namespace) -> int:
    manifest = read_manifest(Path(args.manifest))
    models = args.model if args.model else list(manifest.models)
    for model_id in models:
        if model_id not in manifest.models:
            raise ValidationError(f"model {model_id!r} is not in the manifest (has {manifest.models})")
    out_dir = Path(args.out_dir) if args.out_dir else Path(args.manifest).parent / "indexes"
    out_dir.mkdir(parents=True, exist_ok=True)
    for model_id in models:
        rows = collect_matrix_rows(manifest, Path(args.embeddings), model_id)
        matrix = EmbeddingMatrix(model_id=model_id, rows=rows, corpus_hash=manifest.corpus_hash)
        index = build_index(matrix)
        path = out_dir / f"{model_id}.fidx"
        save_index(index, path)
        print(f"wrote {path} ({index.count} x {index.dim})")
    return 0


def _search_options_from_args(args: argparse.Namespace) -> SearchOptions:
    models = tuple(parse_model_spec(s) for s in args.model) if args.model else None
    rerank = None
    if args.rerank:
        rerank = RerankConfig(radius=args.radius, include_center=not args.exclude_center)
    return SearchOptions(query=args.query, models=models, rerank=rerank, limit=args.limit)


def cmd_search(args: argparse.Namespace) -> int:
    engine = _engine_from_args(args)
    outcome = engine.search(_search_options_from_args(args))
    if args.format == "jsonl":
        for entry in outcome.entries:
            print(json.dumps(entry.to_dict(), ensure_ascii=False, separators=(",", ":")))
        return 0
    rows = []
    for rank, e in enumerate(outcome.entries, start=1):
        per_model = " ".join(f"{m}={s:.4f}" for m, s in sorted(e.per_model_scores.items()))
        rows.append(
            [str(rank), str(e.frame_key), e.video_id, str(e.frame_index),
             f"{e.timestamp_s:.2f}", f"{e.fused_score:.4f}", per_model]
        )
    _print_table(rows, ["rank", "key", "video", "frame", "time_s", "fused", "per_model"])
    if outcome.skipped_models:
        print(f"skipped models: {', '.join(outcome.skipped_models)}")
    return 0


def cmd_temporal(args: argparse.Namespace) -> int:
    engine = _engine_from_args(args)
    outcome = engine.temporal(
        TemporalOptions(
            anchor_key=args.anchor,
            query_start=args.query_start,
            query_end=args.query_end,
            model_id=args.model,
            max_span=args.gap,
            similarity_floor=args.floor,
            max_steps=args.max_steps,
        )
    )
    if args.format == "json":
        print(json.dumps(outcome.to_dict(), ensure_ascii=False, separators=(",", ":")))
        return 0
    m = outcome.moment
    print(f"video {m.video_id}: keys [{m.start_key}, {m.end_key}] around anchor {m.anchor_key}")
    print(f"scores: start {m.start_score:.4f} + end {m.end_score:.4f} = {m.total_score:.4f}; span {m.span}")
    for label, candidates in (("start", outcome.start_candidates), ("end", outcome.end_candidates)):
        strip = ", ".join(f"{c['frame_key']}:{c['score']:.3f}" for c in candidates)
        print(f"{label} candidates: {strip}")
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    manifest = read_manifest(Path(args.manifest))
    try:
        report = DedupReport.from_dict(json.loads(Path(args.report).read_text(encoding="utf-8")))
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ValidationError(f"cannot read dedup report {args.report}: {exc}") from exc
    if report.frames_kept != len(manifest.frames):
        raise ValidationError(
            f"report says {report.frames_kept} kept frames, manifest holds {len(manifest.frames)}"
        )

    if report.frames_sampled == 0:
        reduction = 0.0
    else:
        reduction = 100.0 * report.frames_removed / report.frames_sampled
    print(f"videos: {len(manifest.videos)}")
    print(f"scenes: {report.scenes_processed}")
    print(f"frames: {report.frames_sampled} sampled -> {report.frames_kept} kept "
          f"({report.frames_removed} removed, reduction {reduction:.1f}%)")

    per_video: dict[str, list[int]] = {}
    for s in report.per_scene:
        acc = per_video.setdefault(s.video_id, [0, 0])
        acc[0] += s.sampled
        acc[1] += s.kept
    rows = []
    for vid in sorted(per_video):
        sampled, kept = per_video[vid]
        vid_reduction = 0.0 if sampled == 0 else 100.0 * (sampled - kept) / sampled
        rows.append([vid, str(sampled), str(kept), f"{vid_reduction:.1f}%"])
    _print_table(rows, ["video", "sampled", "kept", "reduction"])
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    path = Path(args.config) if args.config else config_path_from_env()
    config = load_config(path)
    app = create_app(config, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host or config.host, port=args.port or config.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="momentseek", description="Interactive video moment retrieval engine.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="build a corpus manifest from boundaries and embeddings")
    p.add_argument("--boundaries", required=True, help="directory of <video_id>.scenes files")
    p.add_argument("--embeddings", required=True, help="directory of <model_id>/<video_id>.npz vectors")
    p.add_argument("--videos", required=True, help="video table file (video_id fps frame_count)")
    p.add_argument("--threshold", type=float, default=0.9, help="near-duplicate cosine threshold")
    p.add_argument("--per-scene", type=int, default=4, help="frames sampled per scene")
    p.add_argument("--out", required=True, help="output directory for manifest and report")
    p.add_argument("--models", help="comma-separated model ids (default: all subdirectories)")
    p.add_argument("--dedup-model", help="model whose vectors drive deduplication (default: first)")
    p.add_argument("--created-at", help="pin the manifest timestamp for reproducible builds")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("build-index", help="build search index files from raw vectors")
    p.add_argument("--manifest", required=True, help="manifest.jsonl path")
    p.add_argument("--embeddings", required=True, help="directory of <model_id>/<video_id>.npz vectors")
    p.add_argument("--model", action="append", help="model id to index (repeatable; default: all)")
    p.add_argument("--out-dir", help="index output directory (default: <manifest dir>/indexes)")
    p.set_defaults(func=cmd_build_index)

    p = sub.add_parser("search", help="run a text query against the corpus")
    p.add_argument("--config", help="engine config path (or MOMENTSEEK_CONFIG)")
    p.add_argument("--query", required=True)
    p.add_argument("--model", action="append", metavar="ID:WEIGHT",
                   help="model and weight, e.g. m1:0.6 (repeatable; default: config models)")
    p.add_argument("--rerank", action="store_true", help="rescore candidates over neighbor windows")
    p.add_argument("--radius", type=int, default=2, help="neighbor window radius")
    p.add_argument("--exclude-center", action="store_true", help="drop the candidate itself from its window")
    p.add_argument("--limit", type=int, default=100)
    p.add_argument("--format", choices=["table", "jsonl"], default="table")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("temporal", help="select moment boundaries around an anchor frame")
    p.add_argument("--config", help="engine config path (or MOMENTSEEK_CONFIG)")
    p.add_argument("--anchor", type=int, required=True, help="anchor frame_key")
    p.add_argument("--query-start", required=True, help="how the moment starts")
    p.add_argument("--query-end", required=True, help="how the moment ends")
    p.add_argument("--gap", type=int, help="max end-start distance in keyframe steps")
    p.add_argument("--floor", type=float, help="similarity floor for expansion")
    p.add_argument("--max-steps", type=int, help="max accepted frames per direction")
    p.add_argument("--model", help="model id (default: first enabled)")
    p.add_argument("--format", choices=["table", "json"], default="table")
    p.set_defaults(func=cmd_temporal)

    p = sub.add_parser("stats", help="summarize a manifest and dedup report")
    p.add_argument("--manifest", required=True)
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--config", help="engine config path (or MOMENTSEEK_CONFIG)")
    p.add_argument("--host", help="override config host")
    p.add_argument("--port", type=int, help="override config port")
    p.add_argument("--ui-dir", help="serve a built frontend from this directory")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
