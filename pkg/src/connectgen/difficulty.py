"""Embedding-based difficulty engine.

The difficulty of a group of four words is proxied by the average of the six
pairwise cosine similarities between their embeddings: tighter groups are
easier. From an eight-word candidate pool this module scores all C(8,4) = 70
quartets and picks one per difficulty color — the most similar quartet is
yellow, the least similar purple, and green/blue are the quartets nearest to
one-third and two-thirds of the way up from the minimum similarity.

Ties (equal similarity, or equal distance to a target) are broken toward the
lexicographically smallest sorted word tuple, which makes selection
deterministic and replayable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .embeddings import EmbeddingStore
from .puzzle import COLORS, Color, Puzzle, WordGroup, normalize_word, validate_puzzle

__all__ = [
    "EmptyColorClassError",
    "MissingFalseGroupError",
    "WordPool",
    "QuartetScore",
    "ColorQuartets",
    "group_similarity",
    "quartet_scores",
    "select_color_quartets",
    "corpus_color_stats",
    "enumerate_variants",
    "false_group_salience",
]


class EmptyColorClassError(ValueError):
    """No group of the requested color exists in the corpus."""


class MissingFalseGroupError(ValueError):
    """The puzzle has no false group to score."""


@dataclass(frozen=True)
class WordPool:
    """An eight-word candidate pool for one category."""

    category: str
    words: tuple[str, ...]

    def __post_init__(self):
        normalized = tuple(normalize_word(w) for w in self.words)
        if len(normalized) != 8 or len(set(normalized)) != 8:
            raise ValueError(
                f"pool {self.category!r} must contain exactly 8 distinct words, got {normalized}"
            )
        object.__setattr__(self, "words", normalized)


@dataclass(frozen=True)
class QuartetScore:
    """Four words and their mean pairwise cosine similarity."""

    words: tuple[str, str, str, str]  # sorted
    similarity: float

    def __post_init__(self):
        object.__setattr__(self, "words", tuple(sorted(self.words)))
        if not -1.0 - 1e-12 <= self.similarity <= 1.0 + 1e-12:
            raise ValueError(f"similarity {self.similarity} outside [-1, 1]")

    @property
    def word_set(self) -> frozenset[str]:
        return frozenset(self.words)


@dataclass(frozen=True)
class ColorQuartets:
    """One selected quartet per difficulty color, all drawn from one pool."""

    quartets: Mapping[Color, QuartetScore]

    def __post_init__(self):
        if set(self.quartets) != set(COLORS):
            raise ValueError("quartets must cover exactly the four colors")
        object.__setattr__(self, "quartets", dict(self.quartets))

    def __getitem__(self, color: Color) -> QuartetScore:
        return self.quartets[color]


def group_similarity(words: Iterable[str], store: EmbeddingStore) -> float:
    """Mean of the six pairwise cosine similarities among four words."""
    word_list = [normalize_word(w) for w in words]
    if len(word_list) != 4 or len(set(word_list)) != 4:
        raise ValueError(f"expected 4 distinct words, got {word_list}")
    mat = store.matrix(sorted(word_list))  # sorted: stable summation order
    sims = mat @ mat.T
    upper = sims[np.triu_indices(4, k=1)]
    return float(upper.mean())


def quartet_scores(
    pool: WordPool,
    store: EmbeddingStore,
    require: Iterable[str] = (),
) -> list[QuartetScore]:
    """Score every four-word subset of the pool, in lexicographic word order.

    ``require`` restricts enumeration to quartets containing all the given
    anchor words (used when a word must stay visible on the final board).
    """
    anchors = frozenset(normalize_word(w) for w in require)
    missing = anchors - set(pool.words)
    if missing:
        raise ValueError(f"anchors {sorted(missing)} are not in pool {pool.category!r}")
    scores = []
    for combo in itertools.combinations(sorted(pool.words), 4):
        if anchors and not anchors.issubset(combo):
            continue
        scores.append(QuartetScore(words=combo, similarity=group_similarity(combo, store)))
    return scores


def select_color_quartets(
    pool: WordPool,
    store: EmbeddingStore,
    require: Iterable[str] = (),
) -> ColorQuartets:
    """Pick one quartet per color from the pool.

    Yellow is the quartet with maximal similarity and purple the minimal one;
    green and blue are the quartets whose similarity is nearest to
    ``min + (max - min)/3`` and ``min + 2*(max - min)/3``. First quartet in
    lexicographic order wins ties.
    """
    scores = quartet_scores(pool, store, require=require)
    yellow = scores[0]
    purple = scores[0]
    for s in scores[1:]:
        if s.similarity > yellow.similarity:
            yellow = s
        if s.similarity < purple.similarity:
            purple = s
    lo, hi = purple.similarity, yellow.similarity
    green_target = lo + (hi - lo) / 3.0
    blue_target = lo + 2.0 * (hi - lo) / 3.0

    def nearest(target: float) -> QuartetScore:
        best = scores[0]
        best_gap = abs(best.similarity - target)
        for s in scores[1:]:
            gap = abs(s.similarity - target)
            if gap < best_gap:
                best, best_gap = s, gap
        return best

    return ColorQuartets(
        {
            Color.YELLOW: yellow,
            Color.GREEN: nearest(green_target),
            Color.BLUE: nearest(blue_target),
            Color.PURPLE: purple,
        }
    )


def corpus_color_stats(
    puzzles: Iterable[Puzzle],
    store: EmbeddingStore,
) -> dict[Color, tuple[float, float]]:
    """Per color: mean and population variance of group similarity across a corpus."""
    by_color: dict[Color, list[float]] = {c: [] for c in COLORS}
    for p in puzzles:
        for g in p.groups:
            if g.color is None:
                raise ValueError(f"group {g.category!r} in puzzle {p.id!r} has no color")
            by_color[g.color].append(group_similarity(g.words, store))
    stats: dict[Color, tuple[float, float]] = {}
    for color, sims in by_color.items():
        if not sims:
            raise EmptyColorClassError(f"no groups of color {color.value!r} in corpus")
        arr = np.asarray(sims)
        stats[color] = (float(arr.mean()), float(arr.var()))
    return stats


def enumerate_variants(
    pools: Sequence[tuple[WordPool, ColorQuartets]],
    *,
    id_prefix: str,
    source: str = "ai",
    subtype: str = "overlap",
    false_group: WordGroup | None = None,
    seed_words: Sequence[str] | None = None,
    provenance: str | None = None,
) -> list[Puzzle]:
    """Assemble puzzles for every color-to-pool assignment.

    Each of the 4! bijections between colors and pools yields one candidate
    puzzle built from the pools' selected quartets. Candidates that fail the
    hard board constraints (typically word collisions between quartets of
    different pools) are dropped, so fewer than 24 variants may come back.
    Variant indices in puzzle ids stay aligned with the assignment order.
    """
    if len(pools) != 4:
        raise ValueError(f"expected 4 pools, got {len(pools)}")
    variants: list[Puzzle] = []
    for index, assignment in enumerate(itertools.permutations(COLORS)):
        groups = []
        for (pool, quartets), color in zip(pools, assignment):
            q = quartets[color]
            groups.append(WordGroup(category=pool.category, words=q.words, color=color))
        candidate = Puzzle(
            id=f"{id_prefix}-v{index:02d}",
            source=source,
            subtype=subtype,
            groups=tuple(groups),
            false_group=false_group,
            seed_words=tuple(seed_words) if seed_words is not None else None,
            provenance=provenance,
        )
        if validate_puzzle(candidate).is_valid:
            variants.append(candidate)
    return variants


def false_group_salience(p: Puzzle, store: EmbeddingStore) -> float:
    """Similarity score of the false group: a proxy for how strongly it jumps out."""
    if p.false_group is None:
        raise MissingFalseGroupError(f"puzzle {p.id!r} has no false group")
    return group_similarity(p.false_group.words, store)
