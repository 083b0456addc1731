"""Detecting and classifying pronouns.

Thirteen pronouns drive the pipeline, in three groups: nominal
demonstratives point at things, adverbial demonstratives point at places,
and third-person pronouns refer to entities. Everything downstream hinges
on finding them reliably in a spoken query.
"""

from deictic import classify, count_taxonomy_pronouns, detect_pronouns

queries = [
    "How much is this?",
    "What's happening over there?",
    "Tell me the price difference between this and that.",
    "Play some music",
    "Who is s/he?",
]

print("== detection ==")
for query in queries:
    matches = detect_pronouns(query)
    found = ", ".join(f"{m.lexeme}@{m.span}" for m in matches) or "(none)"
    print(f"{query!r:>55}  ->  {found}")

# Token matching matters: a naive substring search would "find" pronouns
# inside longer words. The legacy flag reproduces that misbehavior on
# purpose, for fidelity experiments.
print("\n== token safety vs. legacy substring mode ==")
for query in ("Did I take this vitamin today?", "My mother is here"):
    token_mode = [m.lexeme for m in detect_pronouns(query)]
    legacy = [m.lexeme for m in detect_pronouns(query, legacy_substring=True)]
    print(f"{query!r}: tokens={token_mode} legacy_substring={legacy}")

print("\n== classification ==")
for lexeme in ("this", "these", "here", "it", "she", "them"):
    cls, plurality, strategy = classify(lexeme)
    print(f"{lexeme:>6}: {cls.value:<24} {plurality.value:<8} -> {strategy.value}")

print("\n== corpus-style counting ==")
counts = count_taxonomy_pronouns(queries)
print(counts)
