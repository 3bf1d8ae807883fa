"""Constructed play logs whose statistics land on the reference percentages.

Sessions are produced by driving the real rules engine (so they are
replay-consistent), with outcome counts chosen to hit the target solve rates
and mistake shares exactly:

    one_step              18/31 solved  -> 58.06%
    overlap                5/16 solved  -> 31.25%, 11/16 four-mistake -> 68.75%
    false_group_llm        5/9  solved  -> 55.56%
    false_group_seeded    26/28 solved  -> 92.86%, 15/28 perfect     -> 53.57%
    nyt                   67/97 solved  -> 69.07%
"""

from __future__ import annotations

from connectgen.engine import Status, new_board, session_from_board, submit_guess
from connectgen.puzzle import Color, Puzzle, WordGroup

T = "2026-02-01T00:00:00+00:00"


_GROUP_NAMES = ("ALPHA", "BRAVO", "CHARLIE", "DELTA")


def subtype_puzzle(subtype, tag, source="ai", with_false_group=False):
    words = [f"{tag}{i:02d}" for i in range(16)]
    groups = tuple(
        WordGroup(
            f"{tag.upper()} {_GROUP_NAMES[g]}",
            tuple(words[4 * g : 4 * g + 4]),
            color,
        )
        for g, color in enumerate(Color)
    )
    false_group = None
    if with_false_group:
        false_group = WordGroup("DECOY", (words[0], words[4], words[8], words[12]))
    return Puzzle(
        id=f"{tag}-puzzle",
        source=source,
        subtype=subtype,
        groups=groups,
        false_group=false_group,
    )


def play_session(puzzle, session_id, mistakes=0, solved=True, extra_guesses=()):
    """Drive the engine to a terminal state with the requested mistake count."""
    board = new_board(puzzle, rng_seed=0)
    for guess in extra_guesses:
        board, _ = submit_guess(board, guess, t=T)
    wrong_budget = 4 if not solved else mistakes
    g0, g1 = puzzle.groups[0], puzzle.groups[1]
    for k in range(wrong_budget):
        wrong = g0.words[:3] + (g1.words[k],)  # one-away, always distinct sets
        board, result = submit_guess(board, wrong, t=T)
        assert result.verdict.value in ("one_away", "incorrect")
    if solved:
        for g in puzzle.groups:
            board, result = submit_guess(board, g.words, t=T)
            assert result.verdict.value == "correct"
        assert board.status is Status.SOLVED
    else:
        assert board.status is Status.FAILED
    return session_from_board(board, session_id)


def _batch(puzzle, prefix, outcomes):
    """outcomes: list of (count, solved, mistakes)."""
    sessions = []
    n = 0
    for count, solved, mistakes in outcomes:
        for _ in range(count):
            sessions.append(play_session(puzzle, f"{prefix}-{n:03d}", mistakes, solved))
            n += 1
    return sessions


def target_corpus():
    """The full fixture corpus: five puzzles and their play logs."""
    puzzles = {
        "one_step": subtype_puzzle("one_step", "os"),
        "overlap": subtype_puzzle("overlap", "ov"),
        "false_group_llm": subtype_puzzle("false_group_llm", "fl", with_false_group=True),
        "false_group_seeded": subtype_puzzle("false_group_seeded", "fs", with_false_group=True),
        "nyt": subtype_puzzle("published", "ny", source="nyt"),
    }
    sessions = []
    # 18/31 solved; spread leftover mistakes across 1..3
    sessions += _batch(puzzles["one_step"], "os", [
        (10, True, 0), (5, True, 1), (3, True, 2), (13, False, 4),
    ])
    # 5/16 solved; every failure carries four mistakes (68.75% of plays)
    sessions += _batch(puzzles["overlap"], "ov", [
        (2, True, 0), (2, True, 1), (1, True, 3), (11, False, 4),
    ])
    # 5/9 solved
    sessions += _batch(puzzles["false_group_llm"], "fl", [
        (3, True, 0), (2, True, 2), (4, False, 4),
    ])
    # 26/28 solved, 15 perfect
    sessions += _batch(puzzles["false_group_seeded"], "fs", [
        (15, True, 0), (7, True, 1), (4, True, 2), (2, False, 4),
    ])
    # 67/97 solved
    sessions += _batch(puzzles["nyt"], "ny", [
        (40, True, 0), (17, True, 1), (10, True, 3), (30, False, 4),
    ])
    return list(puzzles.values()), sessions
