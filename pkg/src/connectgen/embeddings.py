"""Word embedding storage.

Vectors are L2-normalized on ingest so that dot products are cosine
similarities; zero vectors are rejected because cosine similarity is undefined
for them. Stores are immutable after construction and safe to share across
threads.

Two sources are supported: a JSON fixture file of precomputed vectors
(``{"dimension": int, "vectors": {word: [float, ...]}}``), and — when the
optional ``sentence-transformers`` dependency is installed — a sentence
embedding model queried on the fly.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .puzzle import normalize_word

__all__ = ["MissingEmbeddingError", "EmbeddingStore", "embed_words"]

DEFAULT_EMBEDDING_MODEL = "sentence-transformers/all-mpnet-base-v2"


class MissingEmbeddingError(KeyError):
    """A word has no vector in the store."""

    def __init__(self, word: str):
        self.word = word
        super().__init__(f"no embedding for word {word!r}")


class EmbeddingStore:
    """Immutable map from normalized word to L2-normalized vector."""

    def __init__(self, dimension: int, vectors: Mapping[str, Iterable[float]]):
        if dimension <= 0:
            raise ValueError(f"dimension must be positive, got {dimension}")
        self.dimension = int(dimension)
        store: dict[str, np.ndarray] = {}
        for raw_word, raw_vec in vectors.items():
            word = normalize_word(raw_word)
            vec = np.asarray(list(raw_vec), dtype=np.float64)
            if vec.shape != (self.dimension,):
                raise ValueError(
                    f"vector for {word!r} has shape {vec.shape}, expected ({self.dimension},)"
                )
            norm = float(np.linalg.norm(vec))
            if norm == 0.0:
                raise ValueError(f"zero vector for {word!r} is not admitted")
            arr = vec / norm
            arr.flags.writeable = False
            store[word] = arr
        self._vectors = store

    def __contains__(self, word: str) -> bool:
        return normalize_word(word) in self._vectors

    def __len__(self) -> int:
        return len(self._vectors)

    @property
    def words(self) -> tuple[str, ...]:
        return tuple(sorted(self._vectors))

    def vector(self, word: str) -> np.ndarray:
        key = normalize_word(word)
        try:
            return self._vectors[key]
        except KeyError:
            raise MissingEmbeddingError(key) from None

    def matrix(self, words: Iterable[str]) -> np.ndarray:
        """Stack vectors for ``words`` row-wise, in the given order."""
        return np.stack([self.vector(w) for w in words])

    @classmethod
    def from_fixture(cls, path: str | Path) -> "EmbeddingStore":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(dimension=data["dimension"], vectors=data["vectors"])

    def to_fixture(self, path: str | Path):
        payload = {
            "dimension": self.dimension,
            "vectors": {w: [float(x) for x in v] for w, v in sorted(self._vectors.items())},
        }
        Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def embed_words(words: Iterable[str], model_name: str = DEFAULT_EMBEDDING_MODEL) -> EmbeddingStore:
    """Embed words with a sentence-transformers model (optional dependency)."""
    try:
        from sentence_transformers import SentenceTransformer
    except ImportError as e:  # pragma: no cover - exercised only with the extra installed
        raise RuntimeError(
            "sentence-transformers is not installed; load vectors from a fixture instead"
        ) from e
    unique = sorted({normalize_word(w) for w in words})
    model = SentenceTransformer(model_name)
    matrix = model.encode(unique, convert_to_numpy=True)
    return EmbeddingStore(
        dimension=int(matrix.shape[1]),
        vectors={w: matrix[i] for i, w in enumerate(unique)},
    )
