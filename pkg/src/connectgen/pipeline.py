"""Staged puzzle creation.

A puzzle is grown as a small tree of word groups. A root group is proposed
from a short story written around four seed words (story injection keeps the
output varied), with the category constrained to a registered style. Follow-up
groups are then grown one of two ways: overlap expansion pivots on a word
already placed on the board and re-reads it under an alternate meaning, while
false-group expansion turns the root into a decoy that is scattered across the
board instead of being a solution group. Quartets of four words per group are
not chosen by the language model: the difficulty engine scores each pool's
subsets by embedding similarity and the color assignment enumerates up to 24
board variants. A one-prompt baseline, an editor stage that repairs category
names, and a difficulty-ranking stage complete the pipeline.

All chat traffic flows through a :class:`~connectgen.gateway.Gateway`, so runs
against the scripted provider are deterministic and fully replayable from the
transcript plus the run's RNG seed.
"""

from __future__ import annotations

import json
import logging
import random
import re
from dataclasses import dataclass, replace
from importlib import resources
from string import Template
from typing import Callable, Iterable, Sequence

from .difficulty import WordPool, group_similarity, select_color_quartets, enumerate_variants
from .embeddings import EmbeddingStore
from .gateway import (
    ChatMessage,
    ChatRequest,
    Gateway,
    LabelMissing,
    extract_labeled_block,
)
from .puzzle import (
    COLORS,
    Color,
    Puzzle,
    WordGroup,
    normalize_word,
    puzzle_from_dict,
    validate_puzzle,
)

__all__ = [
    "PipelineError",
    "StageResponseError",
    "ParseFailure",
    "StyleViolation",
    "OverlapViolation",
    "MissingAnchor",
    "NoValidVariant",
    "ValidationFailure",
    "FewShotLeak",
    "CategoryStyle",
    "ProposedGroup",
    "GenerationConfig",
    "GenerationResult",
    "PuzzleGenerator",
    "load_styles",
    "load_seed_lexicon",
    "load_fewshot_puzzles",
    "sample_seed_words",
]

log = logging.getLogger(__name__)

FORMAT_REMINDER = "Follow the requested format exactly."


class PipelineError(Exception):
    pass


class StageResponseError(PipelineError):
    """A completion broke a stage contract; carries a corrective hint for the retry."""

    retry_hint = FORMAT_REMINDER


class ParseFailure(StageResponseError):
    pass


class StyleViolation(StageResponseError):
    retry_hint = "STYLE must name one of the styles you were given. " + FORMAT_REMINDER


class OverlapViolation(StageResponseError):
    retry_hint = (
        "The word pool must not reuse any word already placed in a previous group. "
        + FORMAT_REMINDER
    )


class MissingAnchor(StageResponseError):
    retry_hint = "The anchor word must be one of the eight pool words. " + FORMAT_REMINDER


class NoValidVariant(PipelineError):
    """Every color-assignment variant collided; the branch is unusable."""


class ValidationFailure(PipelineError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class FewShotLeak(ValidationFailure):
    """The completion copied a group verbatim from the few-shot examples."""


@dataclass(frozen=True)
class CategoryStyle:
    name: str
    description: str
    examples: tuple[str, str, str]
    canonical: bool = True

    def __post_init__(self):
        examples = tuple(self.examples)
        if len(examples) != 3:
            raise ValueError(f"style {self.name!r} must carry exactly 3 examples")
        object.__setattr__(self, "examples", examples)


@dataclass(frozen=True)
class ProposedGroup:
    """A category with its eight-word candidate pool, as proposed by the model."""

    category: str
    pool: WordPool
    style: str
    source_word: str | None = None


@dataclass(frozen=True)
class GenerationConfig:
    subtype: str  # one_step | overlap | false_group_llm | false_group_seeded
    seed_words: tuple[str, str, str, str] | None = None
    seeded_false_group: WordGroup | None = None
    rng_seed: int = 0
    max_stage_retries: int = 2
    model: str = "gpt-4-1106-preview"
    temperature: float = 1.0

    def __post_init__(self):
        if self.subtype not in ("one_step", "overlap", "false_group_llm", "false_group_seeded"):
            raise ValueError(f"unknown subtype {self.subtype!r}")
        if (self.seeded_false_group is not None) != (self.subtype == "false_group_seeded"):
            raise ValueError("seeded_false_group is required exactly for false_group_seeded runs")
        if self.seed_words is not None:
            seeds = tuple(normalize_word(w) for w in self.seed_words)
            if len(seeds) != 4:
                raise ValueError("seed_words must hold exactly 4 words")
            object.__setattr__(self, "seed_words", seeds)


@dataclass(frozen=True)
class GenerationResult:
    puzzle: Puzzle
    candidates: tuple[Puzzle, ...]
    proposed_groups: tuple[ProposedGroup, ...]
    false_group: WordGroup | None
    transcript_id: str


# ---------------------------------------------------------------------------
# Bundled data


def _data_text(name: str) -> str:
    return resources.files("connectgen").joinpath("data", name).read_text(encoding="utf-8")


def _prompt(name: str) -> Template:
    return Template(
        resources.files("connectgen").joinpath("prompts", f"{name}.txt").read_text(encoding="utf-8")
    )


def load_styles() -> tuple[CategoryStyle, ...]:
    raw = json.loads(_data_text("category_styles.json"))
    return tuple(
        CategoryStyle(
            name=s["name"],
            description=s["description"],
            examples=tuple(s["examples"]),
            canonical=s.get("canonical", True),
        )
        for s in raw["styles"]
    )


def load_seed_lexicon() -> tuple[str, ...]:
    return tuple(_data_text("seed_words.txt").split())


def load_fewshot_puzzles() -> tuple[Puzzle, ...]:
    raw = json.loads(_data_text("fewshot_puzzles.json"))
    return tuple(puzzle_from_dict(obj) for obj in raw)


def sample_seed_words(rng: random.Random, lexicon: Sequence[str] | None = None) -> tuple[str, ...]:
    lexicon = lexicon if lexicon is not None else load_seed_lexicon()
    return tuple(rng.sample(list(lexicon), 4))


# ---------------------------------------------------------------------------
# Prompt rendering


def _styles_text(styles: Iterable[CategoryStyle]) -> str:
    lines = []
    for s in styles:
        lines.append(f"- {s.name}: {s.description} (examples: {'; '.join(s.examples)})")
    return "\n".join(lines)


def _groups_text(groups: Iterable[WordGroup]) -> str:
    return "\n".join(
        f"{i + 1}. {g.category}: {', '.join(g.words)}" for i, g in enumerate(groups)
    )


def _fewshot_text(puzzles: Iterable[Puzzle]) -> str:
    chunks = []
    for n, p in enumerate(puzzles, start=1):
        lines = [f"EXAMPLE PUZZLE {n}"]
        for i, g in enumerate(p.groups, start=1):
            color = g.color.value if g.color is not None else "yellow"
            lines.append(f"GROUP {i} CATEGORY: {g.category}")
            lines.append(f"GROUP {i} COLOR: {color}")
            lines.append(f"GROUP {i} WORDS: {', '.join(g.words)}")
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks)


# ---------------------------------------------------------------------------
# Completion parsing


def _parse_word_list(block: str, expected: int) -> tuple[str, ...]:
    parts = [p.strip() for p in block.replace("\n", ",").split(",")]
    words = []
    for part in parts:
        if not part:
            continue
        cleaned = part.strip(" .;\"'")
        if cleaned:
            words.append(normalize_word(cleaned))
    if len(words) != expected or len(set(words)) != expected:
        raise ParseFailure(
            f"expected {expected} distinct words, got {len(words)}: {words}"
        )
    return tuple(words)


def _block(text: str, label: str) -> str:
    try:
        content = extract_labeled_block(text, label)
    except LabelMissing as e:
        raise ParseFailure(str(e)) from None
    if not content.strip():
        raise ParseFailure(f"label {label!r} has empty content")
    return content.strip()


def _parse_color(token: str) -> Color:
    try:
        return Color(token.strip().lower())
    except ValueError:
        raise ParseFailure(f"unknown color {token!r}") from None


# ---------------------------------------------------------------------------
# The generator


class PuzzleGenerator:
    """Drives the staged pipeline against a gateway and an embedding store."""

    def __init__(
        self,
        gateway: Gateway,
        store: EmbeddingStore,
        styles: Sequence[CategoryStyle] | None = None,
        seed_lexicon: Sequence[str] | None = None,
        fewshot: Sequence[Puzzle] | None = None,
    ):
        self.gateway = gateway
        self.store = store
        self.styles = tuple(styles) if styles is not None else load_styles()
        self.seed_lexicon = (
            tuple(seed_lexicon) if seed_lexicon is not None else load_seed_lexicon()
        )
        self.fewshot = tuple(fewshot) if fewshot is not None else load_fewshot_puzzles()

    # -- infrastructure

    def _ask(
        self,
        system: str,
        user: str,
        cfg: GenerationConfig,
        parse: Callable[[str], object],
    ):
        """One stage call: complete, parse, and retry with a corrective hint.

        The stage budget covers ``max_stage_retries`` extra attempts on top of
        the first; each retry replays the conversation with the offending
        completion and a corrective user message appended.
        """
        messages = [ChatMessage("system", system), ChatMessage("user", user)]
        last_error: StageResponseError | None = None
        for attempt in range(1 + cfg.max_stage_retries):
            req = ChatRequest(
                messages=tuple(messages),
                temperature=cfg.temperature,
                seed=cfg.rng_seed,
                model=cfg.model,
            )
            exchange = self.gateway.complete(req)
            try:
                return parse(exchange.response_text)
            except StageResponseError as e:
                last_error = e
                log.info("stage attempt %d rejected: %s", attempt + 1, e)
                messages.append(ChatMessage("assistant", exchange.response_text))
                messages.append(ChatMessage("user", e.retry_hint))
        raise last_error

    def _match_style(self, declared: str) -> str:
        wanted = declared.strip().lower()
        for s in self.styles:
            if s.name.lower() == wanted:
                return s.name
        raise StyleViolation(f"declared style {declared!r} is not registered")

    # -- proposal stages

    def propose_root_group(self, cfg: GenerationConfig) -> ProposedGroup:
        """Story-seeded proposal of the first category and its eight-word pool."""
        seeds = cfg.seed_words or sample_seed_words(random.Random(cfg.rng_seed), self.seed_lexicon)
        system = _prompt("root_group_system").substitute(styles=_styles_text(self.styles))
        user = _prompt("root_group_user").substitute(seed_words=", ".join(seeds))

        def parse(text: str) -> ProposedGroup:
            _block(text, "STORY")  # present and non-empty; content is scaffolding only
            style = self._match_style(_block(text, "STYLE"))
            category = _block(text, "CATEGORY")
            try:
                pool = WordPool(category=category, words=_parse_word_list(_block(text, "WORDS"), 8))
            except ValueError as e:
                raise ParseFailure(str(e)) from None
            return ProposedGroup(category=category, pool=pool, style=style)

        return self._ask(system, user, cfg, parse)

    def expand_overlap(
        self, previous: Sequence[WordGroup], cfg: GenerationConfig
    ) -> ProposedGroup:
        """Grow one group by re-reading an already-used word under another meaning."""
        if not previous:
            raise ValueError("overlap expansion needs at least one previous group")
        used = {w for g in previous for w in g.words}
        system = _prompt("overlap_system").substitute(styles=_styles_text(self.styles))
        user = _prompt("overlap_user").substitute(previous_groups=_groups_text(previous))

        def parse(text: str) -> ProposedGroup:
            source = normalize_word(_block(text, "SOURCE_WORD"))
            if source not in used:
                raise ParseFailure(f"source word {source!r} was not used in a previous group")
            style = self._match_style(_block(text, "STYLE"))
            category = _block(text, "CATEGORY")
            try:
                pool = WordPool(category=category, words=_parse_word_list(_block(text, "WORDS"), 8))
            except ValueError as e:
                raise ParseFailure(str(e)) from None
            reused = sorted(set(pool.words) & used)
            if reused:
                raise OverlapViolation(f"pool reuses previously placed words {reused}")
            return ProposedGroup(category=category, pool=pool, style=style, source_word=source)

        return self._ask(system, user, cfg, parse)

    def expand_false_group(
        self, root: WordGroup, cfg: GenerationConfig
    ) -> list[ProposedGroup]:
        """One anchored follow-up group per decoy word of the root group."""
        followups: list[ProposedGroup] = []
        system = _prompt("false_group_system").substitute(styles=_styles_text(self.styles))
        for anchor in root.words:
            other_decoys = set(root.words) - {anchor}
            if followups:
                pools = "\n".join(
                    f"{i + 1}. {f.category}: {', '.join(f.pool.words)}"
                    for i, f in enumerate(followups)
                )
                context = "Groups already created (do not reuse their words):\n" + pools
            else:
                context = ""
            user = _prompt("false_group_user").substitute(
                false_category=root.category,
                false_words=", ".join(root.words),
                anchor=anchor,
                other_groups=context,
            )

            def parse(text: str, anchor=anchor, other_decoys=other_decoys) -> ProposedGroup:
                source = normalize_word(_block(text, "SOURCE_WORD"))
                if source != anchor:
                    raise ParseFailure(f"expected anchor {anchor!r}, completion pivoted on {source!r}")
                style = self._match_style(_block(text, "STYLE"))
                category = _block(text, "CATEGORY")
                try:
                    pool = WordPool(
                        category=category, words=_parse_word_list(_block(text, "WORDS"), 8)
                    )
                except ValueError as e:
                    raise ParseFailure(str(e)) from None
                if anchor not in pool.words:
                    raise MissingAnchor(f"pool for {category!r} lacks its anchor {anchor!r}")
                leaked = sorted(set(pool.words) & other_decoys)
                if leaked:
                    raise ParseFailure(f"pool reuses decoy words {leaked}")
                return ProposedGroup(
                    category=category, pool=pool, style=style, source_word=anchor
                )

            followups.append(self._ask(system, user, cfg, parse))
        return followups

    # -- assembly

    def assemble_puzzle(
        self,
        groups: Sequence[ProposedGroup],
        cfg: GenerationConfig,
        false_group: WordGroup | None = None,
        run_id: str | None = None,
    ) -> list[Puzzle]:
        """Select color quartets per pool and enumerate valid board variants.

        For false-group subtypes each pool is restricted to quartets containing
        its anchor, which keeps every decoy word visible on the final board.
        For overlap puzzles the pool that contributed a pivot word is likewise
        pinned to quartets containing it.
        """
        if len(groups) != 4:
            raise ValueError(f"expected 4 proposed groups, got {len(groups)}")
        run_id = run_id or f"{cfg.subtype}-s{cfg.rng_seed}"
        required: list[set[str]] = [set() for _ in groups]
        if cfg.subtype in ("false_group_llm", "false_group_seeded"):
            for i, g in enumerate(groups):
                if g.source_word is None:
                    raise ValueError(f"group {g.category!r} lacks its anchor word")
                required[i].add(g.source_word)
        else:
            for g in groups:
                if g.source_word is None:
                    continue
                for j, owner in enumerate(groups):
                    if owner is g:
                        continue
                    if g.source_word in owner.pool.words:
                        required[j].add(g.source_word)
                        break
        selected = [
            (g.pool, select_color_quartets(g.pool, self.store, require=req))
            for g, req in zip(groups, required)
        ]
        transcript = self.gateway.transcript
        variants = enumerate_variants(
            selected,
            id_prefix=run_id,
            source="ai",
            subtype=cfg.subtype,
            false_group=false_group,
            seed_words=cfg.seed_words,
            provenance=transcript.id if transcript is not None else None,
        )
        if not variants:
            raise NoValidVariant(f"all 24 color assignments for run {run_id!r} collided")
        return variants

    # -- refinement stages

    def edit_puzzle(self, p: Puzzle, cfg: GenerationConfig | None = None) -> Puzzle:
        """Let the editor confirm or rewrite category names; words never change."""
        cfg = cfg or _stage_defaults()
        system = _prompt("editor_system").template
        user = _prompt("editor_user").substitute(groups=_groups_text(p.groups))

        def parse(text: str) -> list[str]:
            names = []
            for i in range(1, 5):
                _block(text, f"GROUP {i} THEME")
                verdict = _block(text, f"GROUP {i} VERDICT").strip().lower()
                if verdict not in ("keep", "rename"):
                    raise ParseFailure(f"group {i} verdict {verdict!r} is neither keep nor rename")
                if verdict == "keep":
                    names.append(p.groups[i - 1].category)
                else:
                    names.append(_block(text, f"GROUP {i} NAME"))
            return names

        try:
            names = self._ask(system, user, cfg, parse)
        except StageResponseError as e:
            log.warning("editor response unusable (%s); puzzle %s left unedited", e, p.id)
            return p
        groups = tuple(
            replace(g, category=name) for g, name in zip(p.groups, names)
        )
        return replace(p, groups=groups)

    def rank_difficulty(self, p: Puzzle, cfg: GenerationConfig | None = None) -> Puzzle:
        """Assign the four colors by perceived difficulty.

        A completion that is not a color permutation gets one retry; if the
        retry also fails the colors fall back to the embedding ordering, the
        most similar group taking yellow.
        """
        cfg = cfg or _stage_defaults()
        system = _prompt("ranker_system").template
        user = _prompt("ranker_user").substitute(groups=_groups_text(p.groups))

        def parse(text: str) -> tuple[Color, ...]:
            tokens = [t for t in _block(text, "COLORS").split(",") if t.strip()]
            if len(tokens) != 4:
                raise ParseFailure(f"expected 4 colors, got {len(tokens)}")
            return tuple(_parse_color(t) for t in tokens)

        messages = [ChatMessage("system", system), ChatMessage("user", user)]
        colors: tuple[Color, ...] | None = None
        for attempt in range(2):  # one retry on a non-permutation
            req = ChatRequest(
                messages=tuple(messages),
                temperature=cfg.temperature,
                seed=cfg.rng_seed,
                model=cfg.model,
            )
            exchange = self.gateway.complete(req)
            candidate = parse(exchange.response_text)
            if set(candidate) == set(COLORS):
                colors = candidate
                break
            log.info("ranker assigned duplicate colors (%s), attempt %d", candidate, attempt + 1)
            messages.append(ChatMessage("assistant", exchange.response_text))
            messages.append(
                ChatMessage("user", "Use each of yellow, green, blue, purple exactly once.")
            )
        if colors is None:
            colors = self._embedding_color_order(p)
        groups = tuple(replace(g, color=c) for g, c in zip(p.groups, colors))
        return replace(p, groups=groups)

    def _embedding_color_order(self, p: Puzzle) -> tuple[Color, ...]:
        sims = [group_similarity(g.words, self.store) for g in p.groups]
        order = sorted(range(4), key=lambda i: (-sims[i], i))
        colors: list[Color | None] = [None] * 4
        for color, group_index in zip(COLORS, order):
            colors[group_index] = color
        return tuple(colors)

    # -- baseline

    def generate_one_step(self, cfg: GenerationConfig) -> Puzzle:
        """Whole-puzzle baseline: one condensed prompt, no editor or ranker."""
        system = _prompt("one_step_system").substitute(
            styles=_styles_text(self.styles), examples=_fewshot_text(self.fewshot)
        )
        user = _prompt("one_step_user").template

        def parse(text: str) -> tuple[WordGroup, ...]:
            groups = []
            for i in range(1, 5):
                category = _block(text, f"GROUP {i} CATEGORY")
                color = _parse_color(_block(text, f"GROUP {i} COLOR"))
                words = _parse_word_list(_block(text, f"GROUP {i} WORDS"), 4)
                groups.append(WordGroup(category=category, words=words, color=color))
            if {g.color for g in groups} != set(COLORS):
                raise ParseFailure("colors must be a permutation of yellow/green/blue/purple")
            return tuple(groups)

        groups = self._ask(system, user, cfg, parse)
        transcript = self.gateway.transcript
        puzzle = Puzzle(
            id=f"one_step-s{cfg.rng_seed}",
            source="ai",
            subtype="one_step",
            groups=groups,
            provenance=transcript.id if transcript is not None else None,
        )
        example_sets = {g.word_set for ex in self.fewshot for g in ex.groups}
        for g in puzzle.groups:
            if g.word_set in example_sets:
                raise FewShotLeak(f"group {g.category!r} copies a few-shot example group")
        report = validate_puzzle(puzzle)
        if not report.is_valid:
            raise ValidationFailure(
                f"one-step puzzle fails constraints "
                f"{sorted(v.constraint_id for v in report.hard_violations)}",
                report=report,
            )
        return puzzle

    # -- full runs

    def generate(self, cfg: GenerationConfig) -> GenerationResult:
        """Run the whole pipeline for one puzzle of the configured subtype."""
        run_id = f"{cfg.subtype}-s{cfg.rng_seed}"
        self.gateway.begin_transcript(run_id)
        if cfg.subtype == "one_step":
            puzzle = self.generate_one_step(cfg)
            return GenerationResult(
                puzzle=puzzle,
                candidates=(puzzle,),
                proposed_groups=(),
                false_group=None,
                transcript_id=run_id,
            )

        if cfg.subtype == "overlap":
            root = self.propose_root_group(cfg)
            proposed = [root]
            displayed = [self._displayed_group(root)]
            for _ in range(3):
                nxt = self.expand_overlap(displayed, cfg)
                proposed.append(nxt)
                displayed.append(self._displayed_group(nxt))
            false_group = None
        else:
            if cfg.subtype == "false_group_llm":
                root = self.propose_root_group(cfg)
                yellow = select_color_quartets(root.pool, self.store)[Color.YELLOW]
                false_group = WordGroup(category=root.category, words=yellow.words)
            else:
                false_group = cfg.seeded_false_group
            proposed = self.expand_false_group(false_group, cfg)

        candidates = self.assemble_puzzle(proposed, cfg, false_group=false_group, run_id=run_id)
        puzzle = candidates[0]
        puzzle = self.edit_puzzle(puzzle, cfg)
        puzzle = self.rank_difficulty(puzzle, cfg)
        return GenerationResult(
            puzzle=puzzle,
            candidates=tuple(candidates),
            proposed_groups=tuple(proposed),
            false_group=false_group,
            transcript_id=run_id,
        )

    def _displayed_group(self, g: ProposedGroup) -> WordGroup:
        """The four words shown for a group in follow-up prompts (its tightest quartet)."""
        quartet = select_color_quartets(g.pool, self.store)[Color.YELLOW]
        return WordGroup(category=g.category, words=quartet.words)


def _stage_defaults() -> GenerationConfig:
    # standalone editor/ranker runs only read model/temperature/retry settings
    return GenerationConfig(subtype="one_step")
