"""Independent reference implementations used to cross-check the library.

Everything here is deliberately written from scratch against the documented
behavior (pure-Python arithmetic, exhaustive enumeration, scipy reference
statistics) and must not call into the code paths it checks.
"""

from __future__ import annotations

import itertools
import math

COLOR_NAMES = ("yellow", "green", "blue", "purple")


def cosine(u, v) -> float:
    dot = math.fsum(a * b for a, b in zip(u, v))
    nu = math.sqrt(math.fsum(a * a for a in u))
    nv = math.sqrt(math.fsum(b * b for b in v))
    return dot / (nu * nv)


def mean_pairwise_cosine(vectors) -> float:
    pairs = list(itertools.combinations(range(len(vectors)), 2))
    return math.fsum(cosine(vectors[i], vectors[j]) for i, j in pairs) / len(pairs)


def quartet_table(words, vectors_by_word, require=()):
    """Similarity of every 4-subset (sorted tuples, lexicographic order)."""
    table = {}
    for combo in itertools.combinations(sorted(words), 4):
        if not set(require) <= set(combo):
            continue
        table[combo] = mean_pairwise_cosine([vectors_by_word[w] for w in combo])
    return table


def select_quartets_bruteforce(words, vectors_by_word, require=()):
    """Reference color selection: argmax/argmin plus nearest-to-target picks.

    Ties break toward the lexicographically smallest sorted word tuple, per
    the documented rule.
    """
    table = quartet_table(words, vectors_by_word, require=require)
    quartets = list(table)
    yellow = min(quartets, key=lambda q: (-table[q], q))
    purple = min(quartets, key=lambda q: (table[q], q))
    lo, hi = table[purple], table[yellow]
    green_target = lo + (hi - lo) / 3.0
    blue_target = lo + 2.0 * (hi - lo) / 3.0
    green = min(quartets, key=lambda q: (abs(table[q] - green_target), q))
    blue = min(quartets, key=lambda q: (abs(table[q] - blue_target), q))
    return {"yellow": yellow, "green": green, "blue": blue, "purple": purple}


def valid_color_assignments(pool_quartets):
    """All color permutations whose union of quartets has 16 distinct words.

    ``pool_quartets``: per pool, a mapping color name -> word tuple.
    Returns the list of (permutation index, assignment) that survive.
    """
    survivors = []
    for index, perm in enumerate(itertools.permutations(COLOR_NAMES)):
        words = []
        for pool_index, color in enumerate(perm):
            words.extend(pool_quartets[pool_index][color])
        if len(set(words)) == 16:
            survivors.append((index, perm))
    return survivors


def chi_squared_reference(counts):
    """Pearson chi-squared via scipy's contingency test (no Yates correction)."""
    from scipy.stats import chi2_contingency

    result = chi2_contingency(counts, correction=False)
    return float(result[0]), int(result[2]), float(result[1])
