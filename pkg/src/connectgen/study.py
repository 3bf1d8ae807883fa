"""Study orchestration: puzzle pairing, authoritative play state, persistence.

Each participant token gets a randomly ordered pair of puzzles (one AI, one
human-made) and plays both through the server-side rules engine; clients only
ever see board words, verdicts, and groups that have already been revealed.
Which slot held which source is never exposed before the survey is stored.

Persistence is write-ahead, append-only JSON Lines in a data directory:
``pairs.jsonl`` and ``moves.jsonl`` are the logs of record (every issuance,
guess, and shuffle is appended before it is applied), while ``sessions.jsonl``
and ``surveys.jsonl`` hold the derived, analysis-ready views. On restart the
service replays the logs, reconstructing every board exactly, and backfills
any derived record that a crash interrupted.
"""

from __future__ import annotations

import json
import os
import random
import secrets
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, Sequence

from .analysis import SurveyResponse, survey_to_dict
from .engine import (
    BoardState,
    SessionClosedError,
    Status,
    new_board,
    session_from_board,
    session_to_dict,
    shuffle as shuffle_board,
    submit_guess,
)
from .puzzle import Puzzle, WordGroup

__all__ = [
    "StudyError",
    "UnknownTokenError",
    "UnknownSlotError",
    "EmptyPoolError",
    "PairIncompleteError",
    "DuplicateSurveyError",
    "PuzzlePair",
    "StudyStore",
    "StudyService",
    "SLOTS",
]

SLOTS = ("1", "2")


class StudyError(Exception):
    pass


class UnknownTokenError(StudyError):
    pass


class UnknownSlotError(StudyError):
    pass


class EmptyPoolError(StudyError):
    pass


class PairIncompleteError(StudyError):
    pass


class DuplicateSurveyError(StudyError):
    pass


@dataclass(frozen=True)
class PuzzlePair:
    pair_id: str
    ai_puzzle_id: str
    nyt_puzzle_id: str
    slot_order: str  # ai_first | nyt_first
    issued_to: str
    board_seeds: tuple[int, int]

    def puzzle_id_for_slot(self, slot: str) -> str:
        first_is_ai = self.slot_order == "ai_first"
        if slot == "1":
            return self.ai_puzzle_id if first_is_ai else self.nyt_puzzle_id
        return self.nyt_puzzle_id if first_is_ai else self.ai_puzzle_id


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


class StudyStore:
    """Append-only JSONL files with a single serialized appender."""

    KINDS = ("pairs", "moves", "sessions", "surveys")

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _path(self, kind: str) -> Path:
        if kind not in self.KINDS:
            raise ValueError(f"unknown record kind {kind!r}")
        return self.data_dir / f"{kind}.jsonl"

    def append(self, kind: str, record: Mapping):
        line = json.dumps(dict(record), ensure_ascii=False)
        with self._lock:
            with open(self._path(kind), "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
                os.fsync(fh.fileno())

    def read_all(self, kind: str) -> list[dict]:
        path = self._path(kind)
        if not path.exists():
            return []
        records = []
        for line in path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                records.append(json.loads(line))
        return records


def _group_view(g: WordGroup) -> dict:
    return {
        "category": g.category,
        "words": list(g.words),
        "color": g.color.value if g.color is not None else None,
    }


class StudyService:
    """Authoritative study state over two puzzle pools and a store."""

    def __init__(
        self,
        ai_puzzles: Sequence[Puzzle],
        nyt_puzzles: Sequence[Puzzle],
        store: StudyStore,
        rng_seed: int = 0,
    ):
        self.ai_puzzles = list(ai_puzzles)
        self.nyt_puzzles = list(nyt_puzzles)
        self.store = store
        self._rng = random.Random(rng_seed)
        self._puzzles = {p.id: p for p in [*ai_puzzles, *nyt_puzzles]}
        self._pairs: dict[str, PuzzlePair] = {}
        self._boards: dict[tuple[str, str], BoardState] = {}
        self._surveyed: set[str] = set()
        self._pair_count = 0
        self._lock = threading.RLock()
        self._recover()

    # -- recovery

    def _recover(self):
        for rec in self.store.read_all("pairs"):
            pair = PuzzlePair(
                pair_id=rec["pair_id"],
                ai_puzzle_id=rec["ai_puzzle_id"],
                nyt_puzzle_id=rec["nyt_puzzle_id"],
                slot_order=rec["slot_order"],
                issued_to=rec["issued_to"],
                board_seeds=tuple(rec["board_seeds"]),
            )
            self._pairs[pair.issued_to] = pair
            self._pair_count += 1
            for slot in SLOTS:
                self._boards[(pair.issued_to, slot)] = new_board(
                    self._puzzles[pair.puzzle_id_for_slot(slot)],
                    rng_seed=pair.board_seeds[int(slot) - 1],
                )
        for rec in self.store.read_all("moves"):
            key = (rec["token"], rec["slot"])
            board = self._boards.get(key)
            if board is None:
                continue
            if board.status is not Status.IN_PROGRESS:
                continue
            if rec["kind"] == "guess":
                board, _ = submit_guess(board, rec["words"], t=rec["t"])
            elif rec["kind"] == "shuffle":
                board = shuffle_board(board)
            self._boards[key] = board
        recorded_sessions = {rec["session_id"] for rec in self.store.read_all("sessions")}
        for (token, slot), board in sorted(self._boards.items()):
            if board.status is not Status.IN_PROGRESS:
                session_id = f"{token}:{slot}"
                if session_id not in recorded_sessions:
                    self.store.append(
                        "sessions", session_to_dict(session_from_board(board, session_id))
                    )
        for rec in self.store.read_all("surveys"):
            self._surveyed.add(rec["issued_to"])

    # -- helpers

    def _pair_for(self, token: str) -> PuzzlePair:
        pair = self._pairs.get(token)
        if pair is None:
            raise UnknownTokenError(f"unknown session token {token!r}")
        return pair

    def _board_for(self, token: str, slot: str) -> BoardState:
        if slot not in SLOTS:
            raise UnknownSlotError(f"slot must be one of {SLOTS}, got {slot!r}")
        self._pair_for(token)
        return self._boards[(token, slot)]

    def board_view(self, token: str, slot: str) -> dict:
        """Client-safe board snapshot: never leaks unrevealed group membership."""
        with self._lock:
            board = self._board_for(token, slot)
            view = {
                "slot": slot,
                "words": list(board.remaining),
                "mistakes_remaining": board.mistakes_remaining,
                "status": board.status.value,
                "solved_groups": [_group_view(g) for g in board.solved_groups],
                "solution": None,
            }
            if board.status is not Status.IN_PROGRESS:
                ordered = board.solved_groups + board.revealed_groups
                view["solution"] = [_group_view(g) for g in ordered]
            return view

    # -- operations

    def issue_pair(self, token: str | None = None) -> dict:
        """Sample one AI and one NYT puzzle, order them randomly, start both boards."""
        with self._lock:
            if not self.ai_puzzles or not self.nyt_puzzles:
                raise EmptyPoolError("both an AI and an NYT puzzle pool must be loaded")
            token = token or secrets.token_hex(16)
            ai = self._rng.choice(self.ai_puzzles)
            nyt = self._rng.choice(self.nyt_puzzles)
            slot_order = "ai_first" if self._rng.random() < 0.5 else "nyt_first"
            seeds = (self._rng.getrandbits(32), self._rng.getrandbits(32))
            self._pair_count += 1
            pair = PuzzlePair(
                pair_id=f"pair-{self._pair_count:05d}",
                ai_puzzle_id=ai.id,
                nyt_puzzle_id=nyt.id,
                slot_order=slot_order,
                issued_to=token,
                board_seeds=seeds,
            )
            self.store.append(
                "pairs",
                {
                    "pair_id": pair.pair_id,
                    "ai_puzzle_id": pair.ai_puzzle_id,
                    "nyt_puzzle_id": pair.nyt_puzzle_id,
                    "slot_order": pair.slot_order,
                    "issued_to": pair.issued_to,
                    "board_seeds": list(pair.board_seeds),
                    "t": _now_iso(),
                },
            )
            self._pairs[token] = pair
            for slot in SLOTS:
                self._boards[(token, slot)] = new_board(
                    self._puzzles[pair.puzzle_id_for_slot(slot)],
                    rng_seed=seeds[int(slot) - 1],
                )
            return {
                "token": token,
                "pair_id": pair.pair_id,
                "boards": {slot: self.board_view(token, slot) for slot in SLOTS},
            }

    def post_guess(self, token: str, slot: str, words: Sequence[str]) -> dict:
        """Evaluate a guess server-side and persist it before acknowledging."""
        with self._lock:
            board = self._board_for(token, slot)
            if board.status is not Status.IN_PROGRESS:
                raise SessionClosedError(f"board {slot} is {board.status.value}")
            t = _now_iso()
            self.store.append(
                "moves",
                {"kind": "guess", "token": token, "slot": slot, "words": list(words), "t": t},
            )
            board, result = submit_guess(board, words, t=t)
            self._boards[(token, slot)] = board
            if board.status is not Status.IN_PROGRESS:
                session_id = f"{token}:{slot}"
                self.store.append(
                    "sessions", session_to_dict(session_from_board(board, session_id))
                )
            return {
                "verdict": result.verdict.value,
                "revealed": _group_view(result.revealed) if result.revealed else None,
                "mistakes_remaining": board.mistakes_remaining,
                "status": board.status.value,
                "board": self.board_view(token, slot),
            }

    def post_shuffle(self, token: str, slot: str) -> dict:
        with self._lock:
            board = self._board_for(token, slot)
            if board.status is not Status.IN_PROGRESS:
                raise SessionClosedError(f"board {slot} is {board.status.value}")
            self.store.append(
                "moves",
                {"kind": "shuffle", "token": token, "slot": slot, "t": _now_iso()},
            )
            board = shuffle_board(board)
            self._boards[(token, slot)] = board
            return self.board_view(token, slot)

    def post_survey(self, token: str, answers: Mapping) -> dict:
        """Store the six-question survey once both boards are finished."""
        with self._lock:
            pair = self._pair_for(token)
            if token in self._surveyed:
                raise DuplicateSurveyError(f"pair {pair.pair_id!r} already has a survey")
            for slot in SLOTS:
                if self._boards[(token, slot)].status is Status.IN_PROGRESS:
                    raise PairIncompleteError(f"puzzle {slot} is still in progress")
            response = SurveyResponse(
                session_pair_id=pair.pair_id,
                english_proficiency=str(answers.get("english_proficiency", "")),
                play_frequency=str(answers.get("play_frequency", "")),
                seen_before=bool(answers.get("seen_before", False)),
                q_creative=answers["q_creative"],
                q_harder=answers["q_harder"],
                q_liked=answers["q_liked"],
                free_text=dict(answers.get("free_text", {})),
                username=str(answers.get("username", "")),
            )
            record = survey_to_dict(response)
            record.update(
                {
                    "issued_to": token,
                    "pair_id": pair.pair_id,
                    "slot_order": pair.slot_order,
                    "ai_puzzle_id": pair.ai_puzzle_id,
                    "nyt_puzzle_id": pair.nyt_puzzle_id,
                }
            )
            self.store.append("surveys", record)
            self._surveyed.add(token)
            return {"pair_id": pair.pair_id, "stored": True}
