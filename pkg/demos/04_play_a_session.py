"""Play one board through the rules engine: shuffle, near misses, the
"one away" signal, failure reveal, and session replay.

Run: python demos/04_play_a_session.py
"""

from connectgen import Puzzle, WordGroup, Color, new_board, submit_guess, shuffle, replay
from connectgen.engine import session_from_board

puzzle = Puzzle(
    id="demo-play",
    source="nyt",
    subtype="published",
    groups=(
        WordGroup("NBA TEAMS", ("bucks", "heat", "jazz", "nets"), Color.YELLOW),
        WordGroup("SUNDAE TOPPINGS", ("fudge", "sprinkles", "cherry", "nuts"), Color.GREEN),
        WordGroup("___ ROAD", ("abbey", "high", "rocky", "silk"), Color.BLUE),
        WordGroup("SLANG FOR TOILET", ("can", "head", "john", "throne"), Color.PURPLE),
    ),
)

board = new_board(puzzle, rng_seed=2026)
print("board:", " ".join(board.remaining[:8]))
print("      ", " ".join(board.remaining[8:]))

board = shuffle(board)
print("after shuffle:", " ".join(board.remaining[:8]), "...")

moves = [
    ("rocky road is a flavor, right?", ("rocky", "fudge", "cherry", "nuts")),
    ("three toppings and a team", ("fudge", "sprinkles", "cherry", "heat")),
    ("the actual toppings", ("fudge", "sprinkles", "cherry", "nuts")),
    ("team up", ("bucks", "heat", "jazz", "nets")),
    ("roads", ("abbey", "high", "rocky", "silk")),
    ("what's left", ("can", "head", "john", "throne")),
]
for note, guess in moves:
    board, result = submit_guess(board, guess)
    reveal = f" -> {result.revealed.category}" if result.revealed else ""
    print(f"{note:<32} {result.verdict.value}{reveal} (mistakes: {board.mistakes})")

print(f"status: {board.status.value}")

session = session_from_board(board, session_id="demo-session")
replayed = replay(session, puzzle)
print(f"replay agrees: {replayed.status is board.status and replayed.mistakes == board.mistakes}")
