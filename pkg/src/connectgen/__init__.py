"""connectgen: generate, play, and study Connections-style word puzzles."""

from .puzzle import (
    Color,
    Puzzle,
    ValidationReport,
    WordGroup,
    deserialize_puzzle,
    normalize_word,
    serialize_puzzle,
    validate_puzzle,
)
from .embeddings import EmbeddingStore, MissingEmbeddingError
from .difficulty import (
    ColorQuartets,
    QuartetScore,
    WordPool,
    corpus_color_stats,
    enumerate_variants,
    false_group_salience,
    group_similarity,
    select_color_quartets,
)
from .gateway import (
    ChatMessage,
    ChatRequest,
    Gateway,
    PipelineTranscript,
    RemoteProvider,
    ScriptedProvider,
    extract_labeled_block,
)
from .pipeline import GenerationConfig, GenerationResult, PuzzleGenerator
from .engine import (
    BoardState,
    GuessResult,
    PlaySession,
    Status,
    Verdict,
    new_board,
    replay,
    shuffle,
    submit_guess,
)
from .analysis import (
    ContingencyTable,
    SurveyResponse,
    chi_squared,
    false_group_guess_rate,
    mistake_distribution,
    preference_tally,
    solve_rates,
)

__version__ = "0.1.0"
