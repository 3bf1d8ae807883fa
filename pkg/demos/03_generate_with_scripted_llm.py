"""Run the staged generation pipeline end to end with the deterministic
scripted provider (no network, byte-reproducible).

The script plays the role of the chat model: a root group grown from a short
story, three overlap expansions that pivot on already-used words, then the
editor and the difficulty ranker. Swap ScriptedProvider for
RemoteProvider.from_env() to run against a real endpoint.

Run: python demos/03_generate_with_scripted_llm.py
"""

import math

from connectgen import EmbeddingStore, Gateway, ScriptedProvider, PuzzleGenerator, GenerationConfig
from connectgen.gateway import save_transcript

POOLS = {
    'WORDS THAT CAN FOLLOW "FIRE"': (
        "fighter", "place", "works", "fly", "wood", "cracker", "storm", "drill"
    ),
    "BASEBALL HITS": ("single", "double", "triple", "homer", "bunt", "liner", "popup", "grounder"),
    "HOTEL ROOM TYPES": ("suite", "twin", "queen", "king", "studio", "penthouse", "cabana", "loft"),
    "CHESS PIECES": ("bishop", "knight", "rook", "pawn", "gambit", "castle", "check", "mate"),
}

SCRIPT = [
    # root: story first, then a category in a registered style with an 8-word pool
    "STORY: The drill siren wailed while sparks leapt from the old fireplace,\n"
    "and a single moth flew over the chessboard by the hotel window.\n"
    "STYLE: Fill in the blank\n"
    'CATEGORY: WORDS THAT CAN FOLLOW "FIRE"\n'
    "WORDS: " + ", ".join(POOLS['WORDS THAT CAN FOLLOW "FIRE"']),
    # expansions: pivot on a previously used word, alternate meaning
    "SOURCE_WORD: fly\nSTYLE: Members of a set\nCATEGORY: BASEBALL HITS\n"
    "WORDS: " + ", ".join(POOLS["BASEBALL HITS"]),
    "SOURCE_WORD: double\nSTYLE: Members of a set\nCATEGORY: HOTEL ROOM TYPES\n"
    "WORDS: " + ", ".join(POOLS["HOTEL ROOM TYPES"]),
    "SOURCE_WORD: queen\nSTYLE: Members of a set\nCATEGORY: CHESS PIECES\n"
    "WORDS: " + ", ".join(POOLS["CHESS PIECES"]),
    # editor: confirm three names, repair one
    "GROUP 1 THEME: words forming fire compounds\nGROUP 1 VERDICT: keep\nGROUP 1 NAME: unchanged\n"
    "GROUP 2 THEME: kinds of base hits\nGROUP 2 VERDICT: keep\nGROUP 2 NAME: unchanged\n"
    "GROUP 3 THEME: hotel room categories\nGROUP 3 VERDICT: keep\nGROUP 3 NAME: unchanged\n"
    "GROUP 4 THEME: chess pieces\nGROUP 4 VERDICT: keep\nGROUP 4 NAME: unchanged",
    # ranker: one color per group
    "COLORS: purple, green, blue, yellow",
]


def engineered_store() -> EmbeddingStore:
    """Each pool in its own subspace; the first four words form the tight quartet."""
    dim = 9 * len(POOLS)
    vectors = {}
    for i, pool in enumerate(POOLS.values()):
        for k, (word, angle) in enumerate(zip(pool, (15, 16, 17, 18, 40, 50, 60, 70))):
            theta = math.radians(angle)
            vec = [0.0] * dim
            vec[9 * i] = math.cos(theta)
            vec[9 * i + 1 + k] = math.sin(theta)
            vectors[word] = vec
    return EmbeddingStore(dimension=dim, vectors=vectors)


gateway = Gateway(ScriptedProvider(SCRIPT))
generator = PuzzleGenerator(gateway, engineered_store())
cfg = GenerationConfig(
    subtype="overlap", seed_words=("ember", "camp", "night", "spark"), rng_seed=7
)
result = generator.generate(cfg)

print(f"run {result.transcript_id}: {len(result.candidates)} candidate variants")
print("overlap links (word placed earlier -> group that re-reads it):")
for group in result.proposed_groups:
    if group.source_word:
        print(f"  {group.source_word!r} -> {group.category}")

print("\nfinal puzzle:")
for g in result.puzzle.groups:
    print(f"  {g.color.value:<7} {g.category}: {', '.join(g.words)}")

save_transcript(gateway.transcript, "demo_transcript.jsonl")
print(f"\ntranscript with {len(gateway.transcript.exchanges)} exchanges -> demo_transcript.jsonl")
