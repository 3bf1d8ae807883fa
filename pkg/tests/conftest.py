from __future__ import annotations

import random
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from connectgen.embeddings import EmbeddingStore
from connectgen.puzzle import Color, Puzzle, WordGroup


def store_from(vectors: dict[str, list[float]]) -> EmbeddingStore:
    dims = {len(v) for v in vectors.values()}
    assert len(dims) == 1
    return EmbeddingStore(dimension=dims.pop(), vectors=vectors)


def random_unit_vectors(words, dim, seed):
    """Seeded raw (unnormalized) vectors, one per word."""
    rng = np.random.default_rng(seed)
    return {w: list(rng.normal(size=dim)) for w in words}


@pytest.fixture
def sample_puzzle() -> Puzzle:
    return Puzzle(
        id="sample-1",
        source="nyt",
        subtype="published",
        groups=(
            WordGroup("NBA TEAMS", ("bucks", "heat", "jazz", "nets"), Color.YELLOW),
            WordGroup("SUNDAE TOPPINGS", ("fudge", "sprinkles", "cherry", "nuts"), Color.GREEN),
            WordGroup("___ ROAD", ("abbey", "high", "rocky", "silk"), Color.BLUE),
            WordGroup("SLANG FOR TOILET", ("can", "head", "john", "throne"), Color.PURPLE),
        ),
    )


@pytest.fixture
def false_group_puzzle() -> Puzzle:
    """Board built around the decoy group {bucks, heat, jazz, nets}."""
    return Puzzle(
        id="decoy-1",
        source="ai",
        subtype="false_group_seeded",
        groups=(
            WordGroup("SLANG FOR MONEY", ("bucks", "dough", "loot", "clams"), Color.YELLOW),
            WordGroup("KITCHEN INTENSITY", ("heat", "simmer", "boil", "sear"), Color.GREEN),
            WordGroup("MUSIC GENRES", ("jazz", "blues", "soul", "funk"), Color.BLUE),
            WordGroup("SPORTS EQUIPMENT", ("nets", "rackets", "bats", "gloves"), Color.PURPLE),
        ),
        false_group=WordGroup("NBA TEAMS", ("bucks", "heat", "jazz", "nets")),
    )


@pytest.fixture
def embedded_sample(sample_puzzle) -> EmbeddingStore:
    words = [w for g in sample_puzzle.groups for w in g.words]
    return store_from(random_unit_vectors(words, dim=16, seed=7))
