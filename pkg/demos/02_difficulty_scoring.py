"""Score quartets of an eight-word pool by embedding similarity, pick the
four color quartets, and enumerate board variants.

Embeddings here are a small synthetic store (seeded random unit vectors) so
the demo runs offline; swap in EmbeddingStore.from_fixture(...) or
connectgen.embeddings.embed_words(...) for real vectors.

Run: python demos/02_difficulty_scoring.py
"""

import numpy as np

from connectgen import EmbeddingStore, WordPool, select_color_quartets, enumerate_variants
from connectgen.difficulty import quartet_scores
from connectgen.puzzle import COLORS

rng = np.random.default_rng(11)
pools = {
    "BODIES OF WATER": ("bay", "gulf", "lagoon", "strait", "sound", "inlet", "fjord", "cove"),
    "POKER ACTIONS": ("call", "raise", "fold", "check", "bluff", "ante", "shove", "limp"),
    "BREAD VARIETIES": ("rye", "sourdough", "brioche", "pita", "naan", "ciabatta", "focaccia", "bagel"),
    "THINGS IN A TOOLBOX": ("hammer", "wrench", "pliers", "level", "tape", "chisel", "file", "clamp"),
}
words = [w for pool in pools.values() for w in pool]
store = EmbeddingStore(dimension=32, vectors={w: rng.normal(size=32) for w in words})

first = WordPool("BODIES OF WATER", pools["BODIES OF WATER"])
print("all 70 quartets of the first pool, five most similar:")
for score in sorted(quartet_scores(first, store), key=lambda s: -s.similarity)[:5]:
    print(f"  {score.similarity:+.4f}  {', '.join(score.words)}")

selected = [
    (WordPool(name, pool_words), select_color_quartets(WordPool(name, pool_words), store))
    for name, pool_words in pools.items()
]
print("\nselected color quartets per pool:")
for pool, quartets in selected:
    print(f"  {pool.category}")
    for color in COLORS:
        q = quartets[color]
        print(f"    {color.value:<7} {q.similarity:+.4f}  {', '.join(q.words)}")

variants = enumerate_variants(selected, id_prefix="demo", subtype="overlap")
print(f"\n{len(variants)} valid board variants (color-to-pool assignments)")
print("first variant:")
for g in variants[0].groups:
    print(f"  {g.color.value:<7} {g.category}: {', '.join(g.words)}")
