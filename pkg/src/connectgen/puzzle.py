"""Core puzzle data model: words, groups, puzzles, validation, and JSON (de)serialization.

A puzzle is 16 words arranged in four groups of four, each group carrying a
category name and (optionally) a difficulty color. Board identity is
case-insensitive: words are normalized on construction and original casing is
kept in a side ``display`` tuple used only for rendering.

The validator checks the mechanical board constraints (16 unique words, four
distinct groups, single use of each word, no over-generic category names) and
the style principles (unique names, varied categories). Whether the words of a
group genuinely share a connection, or whether the board admits a second
solution, is not machine-decidable; callers may plug a similarity probe into
``validate_puzzle`` to surface advisory notes for the latter.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Sequence

__all__ = [
    "EmptyWordError",
    "SchemaError",
    "Color",
    "WordGroup",
    "Puzzle",
    "Violation",
    "PrincipleWarning",
    "ValidationReport",
    "normalize_word",
    "validate_puzzle",
    "serialize_puzzle",
    "deserialize_puzzle",
    "puzzle_to_dict",
    "puzzle_from_dict",
    "load_puzzle_file",
    "load_puzzle_dir",
    "dump_puzzle_file",
    "SOURCES",
    "SUBTYPES",
    "FALSE_GROUP_SUBTYPES",
]

SOURCES = ("nyt", "ai")
SUBTYPES = ("one_step", "overlap", "false_group_llm", "false_group_seeded", "published")
FALSE_GROUP_SUBTYPES = ("false_group_llm", "false_group_seeded")

# Category names at least this generic are rejected outright (constraint 6).
_GENERIC_CATEGORY_PATTERNS = (
    re.compile(r"^\d+[\s-]?letter words$"),
    re.compile(r"^names$"),
    re.compile(r"^verbs$"),
    re.compile(r"^nouns$"),
    re.compile(r"^words$"),
)

# Two category names whose token sets overlap at least this much are flagged
# as insufficiently varied.
VARIED_CATEGORY_JACCARD_THRESHOLD = 0.5


class EmptyWordError(ValueError):
    """Raised when a word is empty after normalization."""


class SchemaError(ValueError):
    """Raised on malformed puzzle JSON; carries the JSON path of the first violation."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def normalize_word(raw: str) -> str:
    """Lowercase, trim, and collapse interior whitespace runs to single spaces.

    Idempotent; raises :class:`EmptyWordError` if nothing remains.
    """
    collapsed = " ".join(str(raw).split())
    if not collapsed:
        raise EmptyWordError(f"word is empty after normalization: {raw!r}")
    return collapsed.lower()


class Color(Enum):
    """Difficulty tier of a group, ascending yellow < green < blue < purple."""

    YELLOW = "yellow"
    GREEN = "green"
    BLUE = "blue"
    PURPLE = "purple"

    @property
    def rank(self) -> int:
        return _COLOR_RANK[self]

    def __lt__(self, other: "Color") -> bool:
        if not isinstance(other, Color):
            return NotImplemented
        return self.rank < other.rank

    def __le__(self, other: "Color") -> bool:
        if not isinstance(other, Color):
            return NotImplemented
        return self.rank <= other.rank

    def __gt__(self, other: "Color") -> bool:
        if not isinstance(other, Color):
            return NotImplemented
        return self.rank > other.rank

    def __ge__(self, other: "Color") -> bool:
        if not isinstance(other, Color):
            return NotImplemented
        return self.rank >= other.rank


COLORS = (Color.YELLOW, Color.GREEN, Color.BLUE, Color.PURPLE)
_COLOR_RANK = {c: i for i, c in enumerate(COLORS)}


@dataclass(frozen=True)
class WordGroup:
    """A category name plus exactly four words.

    Words are normalized in place; when the caller passed non-normalized
    surface forms and no explicit ``display``, the original casing is captured
    in ``display`` for rendering. ``display`` never takes part in equality of
    the underlying board (it is compared as part of dataclass equality so that
    serialization round-trips are exact).
    """

    category: str
    words: tuple[str, str, str, str]
    color: Color | None = None
    display: tuple[str, ...] | None = None

    def __post_init__(self):
        raw = tuple(self.words)
        if len(raw) != 4:
            raise ValueError(f"group {self.category!r} must have exactly 4 words, got {len(raw)}")
        normalized = tuple(normalize_word(w) for w in raw)
        display = self.display
        if display is None and tuple(str(w) for w in raw) != normalized:
            display = tuple(str(w) for w in raw)
        if display is not None:
            display = tuple(str(w) for w in display)
            if len(display) != 4:
                raise ValueError("display must carry one form per word")
        object.__setattr__(self, "words", normalized)
        object.__setattr__(self, "display", display)
        if self.color is not None and not isinstance(self.color, Color):
            object.__setattr__(self, "color", Color(self.color))

    @property
    def word_set(self) -> frozenset[str]:
        return frozenset(self.words)


@dataclass(frozen=True)
class Puzzle:
    """A full board: four groups, optional false group, and provenance metadata."""

    id: str
    source: str
    subtype: str
    groups: tuple[WordGroup, WordGroup, WordGroup, WordGroup]
    false_group: WordGroup | None = None
    seed_words: tuple[str, str, str, str] | None = None
    provenance: str | None = None

    def __post_init__(self):
        if not self.id:
            raise ValueError("puzzle id must be non-empty")
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")
        if self.subtype not in SUBTYPES:
            raise ValueError(f"unknown subtype {self.subtype!r}")
        groups = tuple(self.groups)
        if len(groups) != 4:
            raise ValueError(f"puzzle must have exactly 4 groups, got {len(groups)}")
        object.__setattr__(self, "groups", groups)
        if self.false_group is not None and self.subtype not in FALSE_GROUP_SUBTYPES:
            raise ValueError(f"false_group is only allowed for subtypes {FALSE_GROUP_SUBTYPES}")
        if self.seed_words is not None:
            seeds = tuple(normalize_word(w) for w in self.seed_words)
            if len(seeds) != 4:
                raise ValueError("seed_words must hold exactly 4 words")
            object.__setattr__(self, "seed_words", seeds)

    def all_words(self) -> tuple[str, ...]:
        """The 16 board words in group order (duplicates preserved if present)."""
        return tuple(w for g in self.groups for w in g.words)

    def group_of(self, word: str) -> WordGroup | None:
        for g in self.groups:
            if word in g.words:
                return g
        return None


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Violation:
    constraint_id: int
    message: str
    offenders: tuple[str, ...] = ()


@dataclass(frozen=True)
class PrincipleWarning:
    principle_id: str  # varied_categories | unique_names | spelling_matters
    message: str


@dataclass(frozen=True)
class ValidationReport:
    hard_violations: tuple[Violation, ...]
    principle_warnings: tuple[PrincipleWarning, ...]
    advisories: tuple[str, ...] = ()

    @property
    def is_valid(self) -> bool:
        return not self.hard_violations


def _category_tokens(category: str) -> frozenset[str]:
    lowered = " ".join(category.split()).lower()
    return frozenset(re.findall(r"[a-z0-9]+", lowered))


def _is_generic_category(category: str) -> bool:
    lowered = " ".join(category.split()).lower()
    return any(p.match(lowered) for p in _GENERIC_CATEGORY_PATTERNS)


def validate_puzzle(
    p: Puzzle,
    uniqueness_probe: Callable[[Puzzle], Iterable[str]] | None = None,
) -> ValidationReport:
    """Check the mechanical constraints and style principles of a board.

    Constraints on word counts, word reuse, duplicate groups, generic category
    names, and the false group not being a solution are hard violations.
    ``uniqueness_probe``, when given, may contribute advisory notes about
    suspected alternative solutions (constraint 5 is otherwise not decidable);
    advisories never affect validity.
    """
    violations: list[Violation] = []
    warnings: list[PrincipleWarning] = []
    advisories: list[str] = []

    words = p.all_words()
    unique = set(words)

    # Constraint 1: 16 unique words on the board.
    if len(unique) != 16:
        dupes = sorted({w for w in unique if words.count(w) > 1})
        violations.append(
            Violation(1, f"board has {len(unique)} unique words, expected 16", tuple(dupes))
        )

    # Constraint 2: four distinct groups of four distinct words.
    seen_sets: dict[frozenset[str], str] = {}
    for g in p.groups:
        if len(g.word_set) != 4:
            violations.append(
                Violation(2, f"group {g.category!r} repeats a word", tuple(sorted(g.words)))
            )
        elif g.word_set in seen_sets:
            violations.append(
                Violation(
                    2,
                    f"groups {seen_sets[g.word_set]!r} and {g.category!r} contain the same words",
                    tuple(sorted(g.word_set)),
                )
            )
        else:
            seen_sets[g.word_set] = g.category

    # Constraint 4: each word used exactly once across groups.
    placements: dict[str, list[str]] = {}
    for g in p.groups:
        for w in set(g.words):
            placements.setdefault(w, []).append(g.category)
    for w, cats in sorted(placements.items()):
        if len(cats) > 1:
            violations.append(
                Violation(4, f"word {w!r} appears in groups {cats}", (w,))
            )

    # Constraint 6: category names must be more specific than a generic
    # part-of-speech or letter-count label.
    for g in p.groups:
        if _is_generic_category(g.category):
            violations.append(
                Violation(6, f"category {g.category!r} is too generic", (g.category,))
            )

    # Constraint 5 has one mechanical case: a false group that coincides with
    # a solution group makes the board ambiguous.
    if p.false_group is not None:
        for g in p.groups:
            if p.false_group.word_set == g.word_set:
                violations.append(
                    Violation(
                        5,
                        f"false group duplicates solution group {g.category!r}",
                        tuple(sorted(g.word_set)),
                    )
                )
        board = set(words)
        off_board = sorted(p.false_group.word_set - board)
        if off_board:
            advisories.append(
                f"false group words {off_board} are not on the board and cannot mislead"
            )

    # Principle: unique names. A group word may not appear as a whole token of
    # its own category name.
    for g in p.groups:
        tokens = _category_tokens(g.category)
        for w in g.words:
            if w in tokens:
                warnings.append(
                    PrincipleWarning(
                        "unique_names",
                        f"word {w!r} appears in its category name {g.category!r}",
                    )
                )

    # Principle: varied categories, via token-set overlap of category names.
    for i in range(4):
        for j in range(i + 1, 4):
            a = _category_tokens(p.groups[i].category)
            b = _category_tokens(p.groups[j].category)
            if not a or not b:
                continue
            jaccard = len(a & b) / len(a | b)
            if jaccard >= VARIED_CATEGORY_JACCARD_THRESHOLD:
                warnings.append(
                    PrincipleWarning(
                        "varied_categories",
                        f"categories {p.groups[i].category!r} and {p.groups[j].category!r} "
                        f"overlap heavily (jaccard {jaccard:.2f})",
                    )
                )

    if uniqueness_probe is not None:
        advisories.extend(uniqueness_probe(p))

    # Constraint 3 (words of a group genuinely share a connection) is left to
    # the editing stage; there is no mechanical test.
    return ValidationReport(tuple(violations), tuple(warnings), tuple(advisories))


# ---------------------------------------------------------------------------
# Serialization

_PUZZLE_KEYS = {"id", "source", "subtype", "groups", "false_group", "seed_words", "provenance"}


def _group_to_dict(g: WordGroup, with_color: bool = True) -> dict:
    words = list(g.display) if g.display is not None else list(g.words)
    out: dict = {"category": g.category, "words": words}
    if with_color:
        out["color"] = g.color.value if g.color is not None else None
    return out


def puzzle_to_dict(p: Puzzle) -> dict:
    return {
        "id": p.id,
        "source": p.source,
        "subtype": p.subtype,
        "groups": [_group_to_dict(g) for g in p.groups],
        "false_group": (
            _group_to_dict(p.false_group, with_color=False) if p.false_group is not None else None
        ),
        "seed_words": list(p.seed_words) if p.seed_words is not None else None,
        "provenance": p.provenance,
    }


def serialize_puzzle(p: Puzzle) -> str:
    """Render a puzzle as canonical JSON (stable key order, 2-space indent)."""
    return json.dumps(puzzle_to_dict(p), indent=2, ensure_ascii=False) + "\n"


def _expect(cond: bool, path: str, message: str):
    if not cond:
        raise SchemaError(path, message)


def _parse_word(raw, path: str) -> str:
    _expect(isinstance(raw, str), path, f"expected string, got {type(raw).__name__}")
    try:
        normalize_word(raw)
    except EmptyWordError:
        raise SchemaError(path, "word is empty after normalization") from None
    return raw


def _parse_group(obj, path: str, with_color: bool) -> WordGroup:
    _expect(isinstance(obj, dict), path, f"expected object, got {type(obj).__name__}")
    _expect("category" in obj, f"{path}/category", "missing required key")
    _expect(isinstance(obj["category"], str) and obj["category"].strip() != "",
            f"{path}/category", "category must be a non-empty string")
    _expect("words" in obj, f"{path}/words", "missing required key")
    words = obj["words"]
    _expect(isinstance(words, list), f"{path}/words", "expected array")
    _expect(len(words) == 4, f"{path}/words", f"expected 4 words, got {len(words)}")
    parsed = [_parse_word(w, f"{path}/words/{i}") for i, w in enumerate(words)]
    color = None
    if with_color:
        raw_color = obj.get("color")
        if raw_color is not None:
            _expect(
                isinstance(raw_color, str) and raw_color in {c.value for c in COLORS},
                f"{path}/color",
                f"expected one of {sorted(c.value for c in COLORS)} or null",
            )
            color = Color(raw_color)
    else:
        _expect(obj.get("color") is None, f"{path}/color", "false group carries no color")
    return WordGroup(category=obj["category"], words=tuple(parsed), color=color)


def puzzle_from_dict(obj: dict) -> Puzzle:
    _expect(isinstance(obj, dict), "", f"expected object, got {type(obj).__name__}")
    for key in ("id", "source", "subtype", "groups"):
        _expect(key in obj, f"/{key}", "missing required key")
    unknown = set(obj) - _PUZZLE_KEYS
    if unknown:
        raise SchemaError(f"/{sorted(unknown)[0]}", "unknown key")
    _expect(isinstance(obj["id"], str) and obj["id"] != "", "/id", "id must be a non-empty string")
    _expect(obj["source"] in SOURCES, "/source", f"expected one of {list(SOURCES)}")
    _expect(obj["subtype"] in SUBTYPES, "/subtype", f"expected one of {list(SUBTYPES)}")
    groups = obj["groups"]
    _expect(isinstance(groups, list), "/groups", "expected array")
    _expect(len(groups) == 4, "/groups", f"expected 4 groups, got {len(groups)}")
    parsed_groups = tuple(
        _parse_group(g, f"/groups/{i}", with_color=True) for i, g in enumerate(groups)
    )
    false_group = None
    if obj.get("false_group") is not None:
        false_group = _parse_group(obj["false_group"], "/false_group", with_color=False)
        _expect(
            obj["subtype"] in FALSE_GROUP_SUBTYPES,
            "/false_group",
            f"false_group requires subtype in {list(FALSE_GROUP_SUBTYPES)}",
        )
    seed_words = None
    if obj.get("seed_words") is not None:
        raw_seeds = obj["seed_words"]
        _expect(isinstance(raw_seeds, list), "/seed_words", "expected array or null")
        _expect(len(raw_seeds) == 4, "/seed_words", f"expected 4 words, got {len(raw_seeds)}")
        seed_words = tuple(_parse_word(w, f"/seed_words/{i}") for i, w in enumerate(raw_seeds))
    provenance = obj.get("provenance")
    if provenance is not None:
        _expect(isinstance(provenance, str), "/provenance", "expected string or null")
    return Puzzle(
        id=obj["id"],
        source=obj["source"],
        subtype=obj["subtype"],
        groups=parsed_groups,
        false_group=false_group,
        seed_words=seed_words,
        provenance=provenance,
    )


def deserialize_puzzle(text: str) -> Puzzle:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError("", f"invalid JSON: {e}") from None
    return puzzle_from_dict(obj)


def load_puzzle_file(path: str | Path) -> list[Puzzle]:
    """Read one puzzle, or a top-level array of puzzles, from a UTF-8 JSON file."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError("", f"invalid JSON in {path}: {e}") from None
    if isinstance(obj, list):
        return [puzzle_from_dict(item) for item in obj]
    return [puzzle_from_dict(obj)]


def load_puzzle_dir(path: str | Path) -> list[Puzzle]:
    puzzles: list[Puzzle] = []
    for file in sorted(Path(path).glob("*.json")):
        puzzles.extend(load_puzzle_file(file))
    return puzzles


def dump_puzzle_file(puzzles: Sequence[Puzzle] | Puzzle, path: str | Path):
    path = Path(path)
    if isinstance(puzzles, Puzzle):
        path.write_text(serialize_puzzle(puzzles), encoding="utf-8")
    else:
        payload = [puzzle_to_dict(p) for p in puzzles]
        path.write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
