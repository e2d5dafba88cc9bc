#!/usr/bin/env python3
"""Compare retrieval strategies side by side on one corpus.

Runs each query through four configurations — single model, single model
with neighborhood rescoring, the weighted ensemble, and ensemble plus
rescoring — and reports how much the rankings move: overlap with the plain
top-k and the mean absolute rank shift of shared frames.

    python3 scripts/compare_strategies.py --config demo/engine.json \
        --query "vendor arranging produce" --query "train doors closing"
"""
from __future__ import annotations

import argparse

from momentseek.engine import Engine, SearchOptions, load_config
from momentseek.ensemble import ModelConfig
from momentseek.rerank import RerankConfig


def strategy_options(engine: Engine, query: str, limit: int) -> dict[str, SearchOptions]:
    lead = engine.config.models[0]
    single = (ModelConfig(model_id=lead.model_id, weight=1.0),)
    return {
        "plain": SearchOptions(query=query, models=single, limit=limit),
        "rerank": SearchOptions(query=query, models=single, rerank=RerankConfig(), limit=limit),
        "ensemble": SearchOptions(query=query, limit=limit),
        "both": SearchOptions(query=query, rerank=RerankConfig(), limit=limit),
    }


def rank_shift(baseline: list[int], other: list[int]) -> tuple[float, float]:
    """(overlap fraction, mean |rank delta| over shared keys)."""
    base_pos = {k: i for i, k in enumerate(baseline)}
    shared = [k for k in other if k in base_pos]
    if not baseline:
        return 0.0, 0.0
    overlap = len(shared) / len(baseline)
    if not shared:
        return overlap, 0.0
    shift = sum(abs(base_pos[k] - other.index(k)) for k in shared) / len(shared)
    return overlap, shift


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--config", required=True, help="engine config path")
    parser.add_argument("--query", action="append", required=True, help="repeatable")
    parser.add_argument("--limit", type=int, default=20)
    args = parser.parse_args()

    engine = Engine(load_config(args.config))
    for query in args.query:
        print(f"\nquery: {query!r}")
        results = {
            name: [e.frame_key for e in engine.search(options).entries]
            for name, options in strategy_options(engine, query, args.limit).items()
        }
        baseline = results["plain"]
        top = {name: keys[0] if keys else None for name, keys in results.items()}
        print(f"  {'strategy':<10} {'overlap':>8} {'mean shift':>11}  top frame")
        for name, keys in results.items():
            overlap, shift = rank_shift(baseline, keys)
            print(f"  {name:<10} {overlap:>7.0%} {shift:>11.2f}  {top[name]}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
