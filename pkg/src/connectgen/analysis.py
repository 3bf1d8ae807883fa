"""Study analytics over play sessions and survey responses.

Solve rates and mistake distributions are tallied per puzzle subtype with
aggregate rows for all AI puzzles and all human ones. False-group pressure is
measured per puzzle as the share of sessions containing at least one guess
that picks two or more false-group words. Association between subtype and
outcome is tested with Pearson's chi-squared; the p-value comes from the
regularized upper incomplete gamma function.

All fractions are computed in full precision; ``format_pct`` renders them as
percentages with two decimals for report output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import gammaincc

from .difficulty import MissingFalseGroupError
from .engine import PlaySession
from .puzzle import Puzzle

__all__ = [
    "UnknownPuzzleError",
    "DegenerateTableError",
    "UnpairedResponseError",
    "SurveyResponse",
    "ContingencyTable",
    "PreferenceTally",
    "ALL_AI",
    "NYT",
    "PREFERENCE_AXES",
    "solve_rates",
    "mistake_distribution",
    "false_group_guess_rate",
    "solve_contingency",
    "chi_squared",
    "p_value_band",
    "preference_tally",
    "format_pct",
    "survey_from_dict",
    "survey_to_dict",
    "load_surveys",
    "write_report",
]

ALL_AI = "all_ai"
NYT = "nyt"
PREFERENCE_AXES = ("creative", "harder", "liked")
_ANSWERS = ("puzzle_1", "puzzle_2", "tie_neither")
MISTAKE_RANGE = range(0, 5)


class UnknownPuzzleError(KeyError):
    """A session references a puzzle id that is not in the corpus."""


class DegenerateTableError(ValueError):
    """A contingency table has a zero row or column marginal."""


class UnpairedResponseError(KeyError):
    """A survey response references an unknown puzzle pair."""


@dataclass(frozen=True)
class SurveyResponse:
    """Answers to the six study questions for one puzzle pair."""

    session_pair_id: str
    english_proficiency: str
    play_frequency: str
    seen_before: bool
    q_creative: str
    q_harder: str
    q_liked: str
    free_text: Mapping[str, str] = field(default_factory=dict)
    username: str = ""

    def __post_init__(self):
        for name in ("q_creative", "q_harder", "q_liked"):
            value = getattr(self, name)
            if value not in _ANSWERS:
                raise ValueError(f"{name} must be one of {_ANSWERS}, got {value!r}")
        object.__setattr__(self, "free_text", dict(self.free_text))

    def answer(self, axis: str) -> str:
        return {"creative": self.q_creative, "harder": self.q_harder, "liked": self.q_liked}[axis]


def survey_to_dict(r: SurveyResponse) -> dict:
    return {
        "session_pair_id": r.session_pair_id,
        "english_proficiency": r.english_proficiency,
        "play_frequency": r.play_frequency,
        "seen_before": r.seen_before,
        "q_creative": r.q_creative,
        "q_harder": r.q_harder,
        "q_liked": r.q_liked,
        "free_text": dict(r.free_text),
        "username": r.username,
    }


def survey_from_dict(obj: dict) -> SurveyResponse:
    return SurveyResponse(
        session_pair_id=obj["session_pair_id"],
        english_proficiency=obj.get("english_proficiency", ""),
        play_frequency=obj.get("play_frequency", ""),
        seen_before=bool(obj.get("seen_before", False)),
        q_creative=obj["q_creative"],
        q_harder=obj["q_harder"],
        q_liked=obj["q_liked"],
        free_text=obj.get("free_text", {}),
        username=obj.get("username", ""),
    )


def load_surveys(path: str | Path) -> list[SurveyResponse]:
    responses = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            responses.append(survey_from_dict(json.loads(line)))
    return responses


# ---------------------------------------------------------------------------
# Play statistics


def _puzzle_index(puzzles: Iterable[Puzzle]) -> dict[str, Puzzle]:
    return {p.id: p for p in puzzles}


def _subtype_of(session: PlaySession, index: Mapping[str, Puzzle]) -> str:
    try:
        return index[session.puzzle_id].subtype
    except KeyError:
        raise UnknownPuzzleError(f"session references unknown puzzle {session.puzzle_id!r}") from None


def _slices_for(puzzle: Puzzle) -> tuple[str, ...]:
    if puzzle.source == "ai":
        return (puzzle.subtype, ALL_AI)
    return (NYT,)


def solve_rates(
    sessions: Iterable[PlaySession], puzzles: Iterable[Puzzle]
) -> dict[str, float]:
    """Fraction of solved sessions per subtype, with all-AI and NYT aggregates."""
    index = _puzzle_index(puzzles)
    totals: dict[str, int] = {}
    solved: dict[str, int] = {}
    for s in sessions:
        _subtype_of(s, index)
        for key in _slices_for(index[s.puzzle_id]):
            totals[key] = totals.get(key, 0) + 1
            solved[key] = solved.get(key, 0) + (1 if s.solved else 0)
    return {key: solved[key] / totals[key] for key in totals}


def mistake_distribution(
    sessions: Iterable[PlaySession], puzzles: Iterable[Puzzle]
) -> dict[str, list[float]]:
    """Per subtype: fraction of plays ending with 0..4 mistakes (rows sum to 1)."""
    index = _puzzle_index(puzzles)
    counts: dict[str, list[int]] = {}
    for s in sessions:
        _subtype_of(s, index)
        k = min(s.mistakes, MISTAKE_RANGE[-1])
        for key in _slices_for(index[s.puzzle_id]):
            counts.setdefault(key, [0] * len(MISTAKE_RANGE))[k] += 1
    return {key: [c / sum(row) for c in row] for key, row in counts.items()}


def false_group_guess_rate(
    sessions: Iterable[PlaySession], puzzles: Iterable[Puzzle]
) -> dict[str, float]:
    """Per puzzle: share of sessions with a guess taking >= 2 false-group words."""
    index = _puzzle_index(puzzles)
    totals: dict[str, int] = {}
    tripped: dict[str, int] = {}
    for s in sessions:
        puzzle = index.get(s.puzzle_id)
        if puzzle is None:
            raise UnknownPuzzleError(f"session references unknown puzzle {s.puzzle_id!r}")
        if puzzle.false_group is None:
            continue
        decoy = puzzle.false_group.word_set
        totals[puzzle.id] = totals.get(puzzle.id, 0) + 1
        hit = any(len(g.word_set & decoy) >= 2 for g in s.guesses)
        tripped[puzzle.id] = tripped.get(puzzle.id, 0) + (1 if hit else 0)
    if not totals:
        raise MissingFalseGroupError("no sessions reference a puzzle with a false group")
    return {pid: tripped[pid] / totals[pid] for pid in totals}


# ---------------------------------------------------------------------------
# Chi-squared


@dataclass(frozen=True)
class ContingencyTable:
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    counts: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        counts = tuple(tuple(float(c) for c in row) for row in self.counts)
        if len(counts) != len(self.row_labels):
            raise ValueError("one row of counts per row label")
        if any(len(row) != len(self.col_labels) for row in counts):
            raise ValueError("one count per column label in every row")
        if any(c < 0 for row in counts for c in row):
            raise ValueError("counts must be non-negative")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "row_labels", tuple(self.row_labels))
        object.__setattr__(self, "col_labels", tuple(self.col_labels))

    @property
    def n(self) -> float:
        return float(sum(sum(row) for row in self.counts))


def chi_squared(table: ContingencyTable) -> tuple[float, int, float]:
    """Pearson statistic, degrees of freedom, and p-value for independence."""
    observed = np.asarray(table.counts, dtype=np.float64)
    row_sums = observed.sum(axis=1)
    col_sums = observed.sum(axis=0)
    if (row_sums == 0).any() or (col_sums == 0).any():
        raise DegenerateTableError("table has an empty row or column")
    expected = np.outer(row_sums, col_sums) / observed.sum()
    statistic = float(((observed - expected) ** 2 / expected).sum())
    df = (observed.shape[0] - 1) * (observed.shape[1] - 1)
    p = float(gammaincc(df / 2.0, statistic / 2.0))
    return statistic, df, p


def p_value_band(p: float) -> str:
    for cutoff in (0.001, 0.01, 0.05):
        if p < cutoff:
            return f"p<{str(cutoff)[1:]}"
    return f"p={p:.3f}"


def solve_contingency(
    sessions: Iterable[PlaySession], puzzles: Iterable[Puzzle]
) -> ContingencyTable:
    """Subtype-by-outcome table (solved/failed), one row per played subtype."""
    index = _puzzle_index(puzzles)
    rows: dict[str, list[int]] = {}
    for s in sessions:
        subtype = _subtype_of(s, index)
        key = subtype if index[s.puzzle_id].source == "ai" else NYT
        row = rows.setdefault(key, [0, 0])
        row[0 if s.solved else 1] += 1
    labels = sorted(rows)
    return ContingencyTable(
        row_labels=tuple(labels),
        col_labels=("solved", "failed"),
        counts=tuple(tuple(rows[label]) for label in labels),
    )


# ---------------------------------------------------------------------------
# Preferences


@dataclass(frozen=True)
class PreferenceTally:
    """Per axis and slice: counts of AI-preferred / NYT-preferred / tie answers."""

    counts: Mapping[str, Mapping[str, Mapping[str, int]]]

    def __post_init__(self):
        object.__setattr__(
            self,
            "counts",
            {
                axis: {slc: dict(c) for slc, c in slices.items()}
                for axis, slices in self.counts.items()
            },
        )

    def get(self, axis: str, slice_key: str = "overall") -> Mapping[str, int]:
        return self.counts[axis][slice_key]


def preference_tally(
    responses: Iterable[SurveyResponse],
    pairings: Iterable,
    puzzles: Iterable[Puzzle] | None = None,
) -> PreferenceTally:
    """Map puzzle_1/puzzle_2 answers onto AI/NYT preference counts.

    ``pairings`` supplies, per pair id, which slot held the AI puzzle (objects
    with ``pair_id``/``slot_order``/``ai_puzzle_id`` attributes, or dicts with
    those keys). Responses flagged seen_before are excluded. When the puzzle
    corpus is given, counts are additionally sliced per AI subtype.
    """
    pair_index: dict[str, tuple[str, str]] = {}
    for pair in pairings:
        get = pair.get if isinstance(pair, dict) else lambda k, _p=pair: getattr(_p, k)
        pair_index[get("pair_id")] = (get("slot_order"), get("ai_puzzle_id"))
    puzzle_index = _puzzle_index(puzzles) if puzzles is not None else {}

    def empty() -> dict[str, int]:
        return {"ai_preferred": 0, "nyt_preferred": 0, "tie": 0}

    counts: dict[str, dict[str, dict[str, int]]] = {
        axis: {"overall": empty()} for axis in PREFERENCE_AXES
    }
    for r in responses:
        if r.seen_before:
            continue
        if r.session_pair_id not in pair_index:
            raise UnpairedResponseError(f"no pairing for response {r.session_pair_id!r}")
        slot_order, ai_puzzle_id = pair_index[r.session_pair_id]
        ai_slot = "puzzle_1" if slot_order == "ai_first" else "puzzle_2"
        slices = ["overall"]
        ai_puzzle = puzzle_index.get(ai_puzzle_id)
        if ai_puzzle is not None:
            slices.append(ai_puzzle.subtype)
        for axis in PREFERENCE_AXES:
            answer = r.answer(axis)
            if answer == "tie_neither":
                bucket = "tie"
            elif answer == ai_slot:
                bucket = "ai_preferred"
            else:
                bucket = "nyt_preferred"
            for slc in slices:
                counts[axis].setdefault(slc, empty())[bucket] += 1
    return PreferenceTally(counts)


# ---------------------------------------------------------------------------
# Reporting


def format_pct(fraction: float) -> str:
    """Render a fraction as a percentage with two decimals, e.g. 0.5806 -> 58.06%."""
    return f"{fraction * 100:.2f}%"


def _tsv(rows: Iterable[Sequence]) -> str:
    return "\n".join("\t".join(str(c) for c in row) for row in rows)


def write_report(
    sessions: Sequence[PlaySession],
    puzzles: Sequence[Puzzle],
    responses: Sequence[SurveyResponse],
    pairings: Sequence,
    path: str | Path,
):
    """Emit the study report: solve rates, mistake histograms, false-group rates,
    preference tallies, and the subtype-association chi-squared test."""
    lines: list[str] = ["# Study report", ""]

    rates = solve_rates(sessions, puzzles)
    lines += ["## Solve rates by type", "", "```"]
    lines.append(_tsv([("type", "solve_rate")] + [(k, format_pct(rates[k])) for k in sorted(rates)]))
    lines += ["```", ""]

    dist = mistake_distribution(sessions, puzzles)
    lines += ["## Mistake distribution (share of plays by mistakes made)", "", "```"]
    header = ("type",) + tuple(str(k) for k in MISTAKE_RANGE)
    rows = [header] + [
        (k,) + tuple(format_pct(v) for v in dist[k]) for k in sorted(dist)
    ]
    lines.append(_tsv(rows))
    lines += ["```", ""]

    try:
        fg_rates = false_group_guess_rate(sessions, puzzles)
        lines += ["## False-group guess rate by puzzle", "", "```"]
        lines.append(
            _tsv([("puzzle", "rate")] + [(k, format_pct(fg_rates[k])) for k in sorted(fg_rates)])
        )
        lines += ["```", ""]
    except MissingFalseGroupError:
        lines += ["## False-group guess rate by puzzle", "", "(no false-group puzzles played)", ""]

    table = solve_contingency(sessions, puzzles)
    stat, df, p = chi_squared(table)
    lines += [
        "## Subtype vs outcome",
        "",
        f"X^2({df}, N={int(table.n)}) = {stat:.2f}, {p_value_band(p)} (exact p = {p:.6g})",
        "",
    ]

    if responses:
        tally = preference_tally(responses, pairings, puzzles)
        lines += ["## Preferences (excluding recognized puzzles)", "", "```"]
        rows = [("axis", "slice", "ai_preferred", "nyt_preferred", "tie")]
        for axis in PREFERENCE_AXES:
            for slc in sorted(tally.counts[axis]):
                c = tally.counts[axis][slc]
                rows.append((axis, slc, c["ai_preferred"], c["nyt_preferred"], c["tie"]))
        lines.append(_tsv(rows))
        lines += ["```", ""]

    Path(path).write_text("\n".join(lines), encoding="utf-8")
