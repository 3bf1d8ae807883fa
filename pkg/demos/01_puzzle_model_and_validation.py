"""Build a puzzle by hand, check it against the board constraints, and
round-trip it through the JSON schema.

Run: python demos/01_puzzle_model_and_validation.py
"""

from connectgen import Puzzle, WordGroup, Color, validate_puzzle, serialize_puzzle, deserialize_puzzle

puzzle = Puzzle(
    id="demo-board",
    source="nyt",
    subtype="published",
    groups=(
        WordGroup("NBA TEAMS", ("bucks", "heat", "jazz", "nets"), Color.YELLOW),
        WordGroup("SUNDAE TOPPINGS", ("fudge", "sprinkles", "cherry", "nuts"), Color.GREEN),
        WordGroup("___ ROAD", ("abbey", "high", "rocky", "silk"), Color.BLUE),
        WordGroup("SLANG FOR TOILET", ("can", "head", "john", "throne"), Color.PURPLE),
    ),
)

report = validate_puzzle(puzzle)
print(f"valid: {report.is_valid}")

# Now break it three different ways and watch the validator complain.
broken = Puzzle(
    id="demo-broken",
    source="ai",
    subtype="one_step",
    groups=(
        WordGroup("NBA TEAMS", ("bucks", "heat", "jazz", "nets")),
        WordGroup("HOT THINGS", ("heat", "lava", "ember", "flame")),  # reuses "heat"
        WordGroup("VERBS", ("run", "jump", "swim", "fly")),           # too generic
        WordGroup("SHADES OF GREEN", ("green", "olive", "sage", "mint")),  # name leak
    ),
)
report = validate_puzzle(broken)
for violation in report.hard_violations:
    print(f"constraint {violation.constraint_id}: {violation.message}")
for warning in report.principle_warnings:
    print(f"principle {warning.principle_id}: {warning.message}")

# Round-trip: the canonical JSON form is byte-stable.
text = serialize_puzzle(puzzle)
assert deserialize_puzzle(text) == puzzle
assert serialize_puzzle(deserialize_puzzle(text)) == text
print("\ncanonical JSON round-trip holds; serialized form:\n")
print(text)
