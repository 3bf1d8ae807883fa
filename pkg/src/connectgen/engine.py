"""Rules engine for Connections-style boards.

Board states are immutable; transitions return fresh states. A guess of four
words is correct when it exactly matches an unsolved group, reports "one away"
when exactly three words share a group, and otherwise counts as incorrect.
One-away guesses are incorrect guesses: both increment the mistake counter,
and the fourth mistake fails the board and reveals the remaining groups.
Duplicate guesses and guesses using off-board words are rejected without
penalty. Shuffles draw from a per-session seeded stream, so a session is
fully deterministic given its seed and call sequence.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .puzzle import EmptyWordError, Puzzle, WordGroup, normalize_word, validate_puzzle

__all__ = [
    "InvalidPuzzleError",
    "SessionClosedError",
    "InconsistentSessionError",
    "Verdict",
    "Status",
    "GuessRecord",
    "GuessResult",
    "BoardState",
    "PlaySession",
    "new_board",
    "submit_guess",
    "shuffle",
    "session_from_board",
    "replay",
    "session_to_dict",
    "session_from_dict",
    "append_session",
    "load_sessions",
]


class InvalidPuzzleError(ValueError):
    """The puzzle fails hard validation and cannot be played."""


class SessionClosedError(RuntimeError):
    """A move was submitted after the board reached a terminal status."""


class InconsistentSessionError(ValueError):
    """A recorded session does not replay to its recorded outcome."""


class Verdict(Enum):
    CORRECT = "correct"
    ONE_AWAY = "one_away"
    INCORRECT = "incorrect"
    REJECTED_DUPLICATE = "rejected_duplicate"
    REJECTED_INVALID = "rejected_invalid"


EVALUATED_VERDICTS = (Verdict.CORRECT, Verdict.ONE_AWAY, Verdict.INCORRECT)


class Status(Enum):
    IN_PROGRESS = "in_progress"
    SOLVED = "solved"
    FAILED = "failed"


MAX_MISTAKES = 4


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class GuessRecord:
    words: tuple[str, str, str, str]  # sorted
    verdict: Verdict
    t: str

    def __post_init__(self):
        object.__setattr__(self, "words", tuple(sorted(self.words)))

    @property
    def word_set(self) -> frozenset[str]:
        return frozenset(self.words)


@dataclass(frozen=True)
class GuessResult:
    verdict: Verdict
    revealed: WordGroup | None
    mistakes_after: int

    def __post_init__(self):
        if (self.revealed is not None) != (self.verdict is Verdict.CORRECT):
            raise ValueError("revealed group is present exactly for correct guesses")


@dataclass(frozen=True)
class BoardState:
    puzzle: Puzzle
    remaining: tuple[str, ...]
    solved_groups: tuple[WordGroup, ...]
    revealed_groups: tuple[WordGroup, ...]  # revealed by failure, not solved
    mistakes: int
    status: Status
    rng_seed: int
    rng_calls: int
    history: tuple[GuessRecord, ...]

    @property
    def mistakes_remaining(self) -> int:
        return MAX_MISTAKES - self.mistakes

    def unsolved_groups(self) -> tuple[WordGroup, ...]:
        solved = {g.word_set for g in self.solved_groups}
        return tuple(g for g in self.puzzle.groups if g.word_set not in solved)


def _stream_rng(seed: int, call: int) -> random.Random:
    return random.Random(f"{seed}:{call}")


def new_board(p: Puzzle, rng_seed: int) -> BoardState:
    """Start a session: validated puzzle, seeded 16-word shuffle, zero mistakes."""
    report = validate_puzzle(p)
    if not report.is_valid:
        raise InvalidPuzzleError(
            f"puzzle {p.id!r} fails validation: {[v.message for v in report.hard_violations]}"
        )
    words = list(p.all_words())
    _stream_rng(rng_seed, 0).shuffle(words)
    return BoardState(
        puzzle=p,
        remaining=tuple(words),
        solved_groups=(),
        revealed_groups=(),
        mistakes=0,
        status=Status.IN_PROGRESS,
        rng_seed=rng_seed,
        rng_calls=1,
        history=(),
    )


def submit_guess(
    b: BoardState, guess: Iterable[str], t: str | None = None
) -> tuple[BoardState, GuessResult]:
    """Evaluate a four-word guess and advance the board."""
    if b.status is not Status.IN_PROGRESS:
        raise SessionClosedError(f"board is {b.status.value}")
    t = t if t is not None else _now_iso()
    try:
        words = tuple(sorted(normalize_word(w) for w in guess))
    except EmptyWordError:
        words = ()

    def record(verdict: Verdict, state: BoardState) -> BoardState:
        return replace(state, history=state.history + (GuessRecord(words, verdict, t),))

    remaining = set(b.remaining)
    if len(set(words)) != 4 or not set(words) <= remaining:
        result = GuessResult(Verdict.REJECTED_INVALID, None, b.mistakes)
        return record(Verdict.REJECTED_INVALID, b), result

    guess_set = frozenset(words)
    prior = {g.word_set for g in b.history if g.verdict in EVALUATED_VERDICTS}
    if guess_set in prior:
        result = GuessResult(Verdict.REJECTED_DUPLICATE, None, b.mistakes)
        return record(Verdict.REJECTED_DUPLICATE, b), result

    best_group = None
    best_overlap = 0
    for g in b.unsolved_groups():
        overlap = len(guess_set & g.word_set)
        if overlap > best_overlap:
            best_group, best_overlap = g, overlap

    if best_overlap == 4:
        solved = b.solved_groups + (best_group,)
        state = replace(
            b,
            remaining=tuple(w for w in b.remaining if w not in guess_set),
            solved_groups=solved,
            status=Status.SOLVED if len(solved) == 4 else Status.IN_PROGRESS,
        )
        return record(Verdict.CORRECT, state), GuessResult(Verdict.CORRECT, best_group, b.mistakes)

    verdict = Verdict.ONE_AWAY if best_overlap == 3 else Verdict.INCORRECT
    mistakes = b.mistakes + 1
    state = replace(b, mistakes=mistakes)
    if mistakes >= MAX_MISTAKES:
        state = replace(
            state,
            status=Status.FAILED,
            revealed_groups=state.unsolved_groups(),
            remaining=(),
        )
    return record(verdict, state), GuessResult(verdict, None, mistakes)


def shuffle(b: BoardState) -> BoardState:
    """Re-deal the remaining words using the session RNG stream."""
    if b.status is not Status.IN_PROGRESS:
        raise SessionClosedError(f"board is {b.status.value}")
    words = list(b.remaining)
    _stream_rng(b.rng_seed, b.rng_calls).shuffle(words)
    return replace(b, remaining=tuple(words), rng_calls=b.rng_calls + 1)


# ---------------------------------------------------------------------------
# Sessions


@dataclass(frozen=True)
class PlaySession:
    session_id: str
    puzzle_id: str
    guesses: tuple[GuessRecord, ...]
    solved: bool

    @property
    def completed_at(self) -> str | None:
        return self.guesses[-1].t if self.guesses else None

    @property
    def mistakes(self) -> int:
        return sum(1 for g in self.guesses if g.verdict in (Verdict.ONE_AWAY, Verdict.INCORRECT))


def session_from_board(b: BoardState, session_id: str) -> PlaySession:
    return PlaySession(
        session_id=session_id,
        puzzle_id=b.puzzle.id,
        guesses=b.history,
        solved=b.status is Status.SOLVED,
    )


def replay(session: PlaySession, p: Puzzle) -> BoardState:
    """Re-run a session's guesses and confirm each recorded verdict."""
    if session.puzzle_id != p.id:
        raise InconsistentSessionError(
            f"session {session.session_id!r} references puzzle {session.puzzle_id!r}, not {p.id!r}"
        )
    board = new_board(p, rng_seed=0)
    for i, rec in enumerate(session.guesses):
        try:
            board, result = submit_guess(board, rec.words, t=rec.t)
        except SessionClosedError:
            raise InconsistentSessionError(
                f"guess {i} of session {session.session_id!r} arrives after a terminal state"
            ) from None
        if result.verdict is not rec.verdict:
            raise InconsistentSessionError(
                f"guess {i} of session {session.session_id!r} replays as "
                f"{result.verdict.value}, recorded as {rec.verdict.value}"
            )
    if session.solved != (board.status is Status.SOLVED):
        raise InconsistentSessionError(
            f"session {session.session_id!r} records solved={session.solved} "
            f"but replays to {board.status.value}"
        )
    return board


def session_to_dict(s: PlaySession) -> dict:
    return {
        "session_id": s.session_id,
        "puzzle_id": s.puzzle_id,
        "guesses": [
            {"words": list(g.words), "verdict": g.verdict.value, "t": g.t} for g in s.guesses
        ],
        "solved": s.solved,
    }


def session_from_dict(obj: dict) -> PlaySession:
    return PlaySession(
        session_id=obj["session_id"],
        puzzle_id=obj["puzzle_id"],
        guesses=tuple(
            GuessRecord(tuple(g["words"]), Verdict(g["verdict"]), g["t"])
            for g in obj["guesses"]
        ),
        solved=obj["solved"],
    )


def append_session(s: PlaySession, path: str | Path):
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(session_to_dict(s), ensure_ascii=False) + "\n")


def load_sessions(path: str | Path) -> list[PlaySession]:
    sessions = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            sessions.append(session_from_dict(json.loads(line)))
    return sessions
