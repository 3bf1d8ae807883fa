"""Run a miniature study end to end, in process: issue puzzle pairs, play
both boards, file surveys, then compute the report statistics from the
persisted logs.

Run: python demos/05_study_and_analysis.py
"""

import tempfile
from pathlib import Path

from connectgen import Puzzle, WordGroup, Color
from connectgen.analysis import (
    chi_squared,
    load_surveys,
    mistake_distribution,
    p_value_band,
    preference_tally,
    format_pct,
    solve_contingency,
    solve_rates,
)
from connectgen.engine import load_sessions
from connectgen.study import StudyService, StudyStore
import json


def make_puzzle(pid, source, subtype, names, rows):
    groups = tuple(
        WordGroup(name, tuple(rows[i]), color)
        for i, (name, color) in enumerate(zip(names, Color))
    )
    return Puzzle(id=pid, source=source, subtype=subtype, groups=groups)


ai_puzzle = make_puzzle(
    "ai-demo", "ai", "overlap",
    ("BASEBALL HITS", "HOTEL ROOM TYPES", "CHESS PIECES", "CARD GAMES"),
    [
        ("single", "double", "triple", "homer"),
        ("suite", "twin", "queen", "king"),
        ("bishop", "knight", "rook", "pawn"),
        ("bridge", "hearts", "rummy", "spades"),
    ],
)
nyt_puzzle = make_puzzle(
    "nyt-demo", "nyt", "published",
    ("NBA TEAMS", "SUNDAE TOPPINGS", "___ ROAD", "SLANG FOR TOILET"),
    [
        ("bucks", "heat", "jazz", "nets"),
        ("fudge", "sprinkles", "cherry", "nuts"),
        ("abbey", "high", "rocky", "silk"),
        ("can", "head", "john", "throne"),
    ],
)

data_dir = Path(tempfile.mkdtemp(prefix="connectgen-demo-"))
service = StudyService([ai_puzzle], [nyt_puzzle], StudyStore(data_dir), rng_seed=42)

for participant in range(6):
    issued = service.issue_pair()
    token = issued["token"]
    order = service._pairs[token].slot_order
    for slot in ("1", "2"):
        puzzle = ai_puzzle if (slot == "1") == (order == "ai_first") else nyt_puzzle
        if participant % 3 == 0 and puzzle is ai_puzzle:
            wrong_host = puzzle.groups[0].words[:3]
            for k in range(4):  # this participant fails the AI board
                service.post_guess(token, slot, wrong_host + (puzzle.groups[1].words[k],))
        else:
            for g in puzzle.groups:
                service.post_guess(token, slot, g.words)
    service.post_survey(token, {
        "english_proficiency": "native",
        "play_frequency": "weekly",
        "seen_before": False,
        "q_creative": "puzzle_1" if participant % 2 == 0 else "tie_neither",
        "q_harder": "puzzle_2",
        "q_liked": "puzzle_1" if participant % 2 == 0 else "puzzle_2",
        "username": f"player{participant}",
    })

sessions = load_sessions(data_dir / "sessions.jsonl")
puzzles = [ai_puzzle, nyt_puzzle]
print(f"{len(sessions)} play sessions persisted under {data_dir}")

print("\nsolve rates:")
for key, rate in sorted(solve_rates(sessions, puzzles).items()):
    print(f"  {key:<12} {format_pct(rate)}")

print("\nmistake distribution (0..4):")
for key, row in sorted(mistake_distribution(sessions, puzzles).items()):
    print(f"  {key:<12} " + " ".join(format_pct(v) for v in row))

stat, df, p = chi_squared(solve_contingency(sessions, puzzles))
print(f"\nsubtype vs outcome: X^2({df}) = {stat:.2f}, {p_value_band(p)}")

responses = load_surveys(data_dir / "surveys.jsonl")
pairings = [json.loads(line) for line in (data_dir / "surveys.jsonl").read_text().splitlines()]
tally = preference_tally(responses, pairings, puzzles)
print("\npreferences (overall):")
for axis in ("creative", "harder", "liked"):
    print(f"  {axis:<9} {dict(tally.get(axis))}")
