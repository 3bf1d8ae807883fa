"""Command-line entry points.

Subcommands: ``generate`` (run the pipeline), ``edit`` / ``rank`` (single
stages on existing puzzle files), ``score`` (per-group similarity + color
stats), ``analyze`` (study report), ``serve`` (study HTTP server).

The LLM provider is the remote endpoint from ``LLM_ENDPOINT``/``LLM_API_KEY``
by default; ``--script file.json`` swaps in the deterministic scripted
provider (a JSON array of canned responses), which is also what the test
suite uses.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .analysis import (
    load_surveys,
    write_report,
)
from .difficulty import corpus_color_stats, group_similarity
from .embeddings import EmbeddingStore
from .engine import load_sessions
from .gateway import Gateway, RemoteProvider, ScriptedProvider, save_transcript
from .pipeline import GenerationConfig, PuzzleGenerator
from .puzzle import (
    dump_puzzle_file,
    load_puzzle_dir,
    load_puzzle_file,
    serialize_puzzle,
)


def _make_gateway(args) -> Gateway:
    if args.script:
        responses = json.loads(Path(args.script).read_text(encoding="utf-8"))
        return Gateway(ScriptedProvider(responses))
    return Gateway(RemoteProvider.from_env())


def _load_store(path: str) -> EmbeddingStore:
    return EmbeddingStore.from_fixture(path)


def cmd_generate(args) -> int:
    store = _load_store(args.embeddings)
    gateway = _make_gateway(args)
    generator = PuzzleGenerator(gateway, store)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    seeded = None
    if args.seeded_false_group:
        seeded_puzzles = load_puzzle_file(args.seeded_false_group)
        seeded = seeded_puzzles[0].groups[0]
    for i in range(args.count):
        seed = args.seed + i
        cfg = GenerationConfig(
            subtype=args.subtype,
            rng_seed=seed,
            seeded_false_group=seeded if args.subtype == "false_group_seeded" else None,
        )
        result = generator.generate(cfg)
        puzzle_path = out / f"{result.puzzle.id}.json"
        puzzle_path.write_text(serialize_puzzle(result.puzzle), encoding="utf-8")
        save_transcript(gateway.transcript, out / f"{result.transcript_id}.transcript.jsonl")
        print(f"wrote {puzzle_path}")
    return 0


def cmd_edit(args) -> int:
    store = _load_store(args.embeddings)
    generator = PuzzleGenerator(_make_gateway(args), store)
    puzzles = load_puzzle_file(args.puzzle)
    edited = [generator.edit_puzzle(p) for p in puzzles]
    dump_puzzle_file(edited if len(edited) > 1 else edited[0], args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_rank(args) -> int:
    store = _load_store(args.embeddings)
    generator = PuzzleGenerator(_make_gateway(args), store)
    puzzles = load_puzzle_file(args.puzzle)
    ranked = [generator.rank_difficulty(p) for p in puzzles]
    dump_puzzle_file(ranked if len(ranked) > 1 else ranked[0], args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_score(args) -> int:
    store = _load_store(args.embeddings)
    path = Path(args.puzzles)
    puzzles = load_puzzle_dir(path) if path.is_dir() else load_puzzle_file(path)
    print("category\twords\tsimilarity\tcolor")
    for p in puzzles:
        for g in p.groups:
            sim = group_similarity(g.words, store)
            color = g.color.value if g.color is not None else ""
            print(f"{g.category}\t{' '.join(g.words)}\t{sim:.4f}\t{color}")
    colored = [p for p in puzzles if all(g.color is not None for g in p.groups)]
    if colored:
        print()
        print("color\tmean\tvariance")
        for color, (mean, var) in corpus_color_stats(colored, store).items():
            print(f"{color.value}\t{mean:.4f}\t{var:.4f}")
    return 0


def cmd_analyze(args) -> int:
    sessions = load_sessions(args.sessions)
    puzzles = load_puzzle_dir(args.puzzles)
    responses = []
    pairings = []
    if args.surveys and Path(args.surveys).exists():
        responses = load_surveys(args.surveys)
        for line in Path(args.surveys).read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            if {"pair_id", "slot_order", "ai_puzzle_id"} <= rec.keys():
                pairings.append(
                    {
                        "pair_id": rec["pair_id"],
                        "slot_order": rec["slot_order"],
                        "ai_puzzle_id": rec["ai_puzzle_id"],
                    }
                )
    write_report(sessions, puzzles, responses, pairings, args.report)
    print(f"wrote {args.report}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app
    from .study import StudyService, StudyStore

    puzzles = load_puzzle_dir(args.puzzles)
    ai = [p for p in puzzles if p.source == "ai"]
    nyt = [p for p in puzzles if p.source == "nyt"]
    service = StudyService(ai, nyt, StudyStore(args.data), rng_seed=args.seed)
    app = create_app(service, static_dir=args.static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="connectgen")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="run the staged generation pipeline")
    gen.add_argument("--subtype", required=True,
                     choices=["one_step", "overlap", "false_group_llm", "false_group_seeded"])
    gen.add_argument("--count", type=int, default=1)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--seeded-false-group", default=None,
                     help="puzzle JSON whose first group seeds the false group")
    gen.add_argument("--out", required=True)
    gen.add_argument("--embeddings", required=True, help="embedding fixture JSON")
    gen.add_argument("--script", default=None, help="JSON array of scripted responses")
    gen.set_defaults(func=cmd_generate)

    edit = sub.add_parser("edit", help="run the editor stage on puzzle files")
    edit.add_argument("--puzzle", required=True)
    edit.add_argument("--out", required=True)
    edit.add_argument("--embeddings", required=True)
    edit.add_argument("--script", default=None)
    edit.set_defaults(func=cmd_edit)

    rank = sub.add_parser("rank", help="run the difficulty-ranking stage on puzzle files")
    rank.add_argument("--puzzle", required=True)
    rank.add_argument("--out", required=True)
    rank.add_argument("--embeddings", required=True)
    rank.add_argument("--script", default=None)
    rank.set_defaults(func=cmd_rank)

    score = sub.add_parser("score", help="print per-group similarity and color stats as TSV")
    score.add_argument("--puzzles", required=True, help="puzzle JSON file or directory")
    score.add_argument("--embeddings", required=True)
    score.set_defaults(func=cmd_score)

    analyze = sub.add_parser("analyze", help="write the study report")
    analyze.add_argument("--sessions", required=True)
    analyze.add_argument("--surveys", default=None)
    analyze.add_argument("--puzzles", required=True)
    analyze.add_argument("--report", required=True)
    analyze.set_defaults(func=cmd_analyze)

    serve = sub.add_parser("serve", help="run the study HTTP server")
    serve.add_argument("--puzzles", required=True)
    serve.add_argument("--data", required=True)
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--seed", type=int, default=0)
    serve.add_argument("--static", default=None, help="directory with the built web UI")
    serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
