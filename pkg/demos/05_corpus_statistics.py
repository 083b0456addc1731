"""Reproducing the study's pronoun statistics from the bundled corpora.

The four query tables ship as JSONL with pinned checksums. Counting is
mechanical and documented; where the published numbers used a different
rule (per-query counting, a relativizer judgment), the divergence is
recorded beside the data and printed here.
"""

import json

from deictic import compute_stats, load_bundled_corpus
from deictic.corpus import load_expected_stats, verify_corpus_checksums

print("checksums:", verify_corpus_checksums())

for source in ("part3", "diary"):
    entries = load_bundled_corpus(source)
    stats = compute_stats(entries)
    print(f"\n== {source}: {stats.entries} queries, {stats.satisfactory} answered satisfactorily ==")
    top = sorted(
        ((lex, n) for lex, n in stats.taxonomy.items() if n), key=lambda kv: -kv[1]
    )
    print("  taxonomy occurrences:", dict(top))
    if stats.combined_slash:
        print("  slash forms:", dict(stats.combined_slash), "combined:", stats.combined_third_person)
    print("  first/second person:", dict(sorted(stats.non_referential.items())))

expected = load_expected_stats()["diary"]
print("\n== documented divergences from the published diary counts ==")
print(json.dumps(expected["divergences"], indent=2))
