"""Command line entry points: serve, resolve, replay, corpus stats."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .backends import build_backend_set
from .capture import InputSnapshot
from .corpus import (
    compute_stats,
    load_bundled_corpus,
    load_corpus,
    replay_corpus,
    report_to_json,
    report_to_table,
)
from .resolver import ResolverConfig
from .session import Session, SessionConfig


def _parse_px(raw: str) -> tuple[float, float]:
    try:
        u, v = raw.split(",")
        return (float(u), float(v))
    except ValueError:
        raise SystemExit(f"expected 'u,v' pixel pair, got {raw!r}")


def _load_backends_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    host, _, port = args.bind.partition(":")
    config = ServiceConfig(mode=args.mode, backends_config=_load_backends_config(args.backends))
    if args.fixtures:
        config.fixture_dir = Path(args.fixtures)
    app = create_app(config)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000))
    return 0


def cmd_resolve(args) -> int:
    backends = build_backend_set(_load_backends_config(args.backends))
    session = Session(backends=backends, config=SessionConfig(resolver=ResolverConfig(), mode=args.mode))
    session.wake("hey glass")
    snap = InputSnapshot(
        gaze_px=_parse_px(args.gaze),
        point_px=_parse_px(args.point) if args.point else None,
    )
    result = session.run_turn(args.query, args.scene, snap)
    print(f"answer: {result.answer}")
    if result.explanation:
        print(f"explanation: {result.explanation}")
    print(f"fallback: {result.fallback}")
    if args.trace:
        print(json.dumps(result.trace, indent=2))
    return 0


def cmd_replay(args) -> int:
    """Replay a recorded session file: sequential turns in one session."""
    with open(args.session, "r", encoding="utf-8") as fh:
        spec = json.load(fh)
    backends = build_backend_set(spec.get("backends", {}))
    config = SessionConfig(resolver=ResolverConfig(), mode=spec.get("mode", "v1"))
    session = Session(backends=backends, config=config)
    for i, turn in enumerate(spec.get("turns", [])):
        session.wake("hey glass")
        snap = InputSnapshot(
            gaze_px=tuple(turn["gaze_px"]),
            point_px=tuple(turn["point_px"]) if turn.get("point_px") else None,
        )
        result = session.run_turn(turn["query"], turn.get("scene"), snap)
        print(f"[{i}] {turn['query']!r} -> {result.answer!r} (fallback={result.fallback})")
    return 0


def cmd_corpus_stats(args) -> int:
    if args.file:
        entries = load_corpus(args.file)
    else:
        entries = load_bundled_corpus(args.bundled)
    stats = compute_stats(entries, legacy_substring=args.legacy_substring)
    print(json.dumps(stats.to_dict(), indent=2))
    return 0


def cmd_corpus_replay(args) -> int:
    entries = load_corpus(args.file) if args.file else load_bundled_corpus(args.bundled)
    with open(args.fixture_map, "r", encoding="utf-8") as fh:
        fixture_map = json.load(fh)
    report = replay_corpus(entries, fixture_map)
    print(report_to_json(report) if args.json else report_to_table(report))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deictic", description="Pronoun disambiguation pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--bind", default="127.0.0.1:8000", help="host:port")
    serve.add_argument("--backends", help="backends config JSON file")
    serve.add_argument("--mode", choices=("v1", "v2"), default="v1")
    serve.add_argument("--fixtures", help="directory for scene_ref lookups")
    serve.set_defaults(func=cmd_serve)

    resolve = sub.add_parser("resolve", help="resolve one query against a scene fixture")
    resolve.add_argument("--scene", required=True, help="scene fixture JSON file")
    resolve.add_argument("--gaze", required=True, help="gaze pixel as u,v")
    resolve.add_argument("--point", help="pointing pixel as u,v")
    resolve.add_argument("--query", required=True)
    resolve.add_argument("--mode", choices=("v1", "v2"), default="v1")
    resolve.add_argument("--backends", help="backends config JSON file")
    resolve.add_argument("--trace", action="store_true", help="print the full trace JSON")
    resolve.set_defaults(func=cmd_resolve)

    replay = sub.add_parser("replay", help="replay a recorded session file")
    replay.add_argument("--session", required=True, help="session replay JSON file")
    replay.set_defaults(func=cmd_replay)

    corpus = sub.add_parser("corpus", help="corpus statistics and replay")
    corpus_sub = corpus.add_subparsers(dest="corpus_command", required=True)

    stats = corpus_sub.add_parser("stats", help="pronoun statistics for a corpus")
    stats.add_argument("--file", help="corpus JSONL file")
    stats.add_argument("--bundled", choices=("part1", "part2", "part3", "diary"), default="diary")
    stats.add_argument("--legacy-substring", action="store_true")
    stats.set_defaults(func=cmd_corpus_stats)

    creplay = corpus_sub.add_parser("replay", help="replay corpus entries through full turns")
    creplay.add_argument("--file", help="corpus JSONL file")
    creplay.add_argument("--bundled", choices=("part1", "part2", "part3", "diary"), default="part3")
    creplay.add_argument("--fixture-map", required=True, help="entry-id to scene/gaze mapping JSON")
    creplay.add_argument("--json", action="store_true")
    creplay.set_defaults(func=cmd_corpus_replay)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
