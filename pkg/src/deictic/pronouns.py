"""Pronoun taxonomy: detection, classification, and corpus counting.

Thirteen pronouns in three groups drive scene resolution: nominal
demonstratives (this/that/these/those), adverbial demonstratives
(here/there), and third-person pronouns (it/he/him/she/her/they/them).
First- and second-person pronouns can additionally be tagged as
non-referential for corpus statistics; they never reach the resolver.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator

from .errors import UnknownPronoun


class PronounClass(Enum):
    NOMINAL_DEMONSTRATIVE = "nominal_demonstrative"
    ADVERBIAL_DEMONSTRATIVE = "adverbial_demonstrative"
    THIRD_PERSON = "third_person"
    # Stats-only tag for I/me/my/you and friends; never routed to the scene.
    FIRST_SECOND_PERSON = "first_second_person"


class Plurality(Enum):
    SINGULAR = "singular"
    PLURAL = "plural"


class ResolutionStrategy(Enum):
    SCENE_SINGULAR = "scene_singular"
    SCENE_PLURAL = "scene_plural"
    SCENE_OR_HISTORY = "scene_or_history"
    PERSON_ENTITY = "person_entity"
    NON_REFERENTIAL = "non_referential"


NOMINAL_DEMONSTRATIVES = ("this", "that", "these", "those")
ADVERBIAL_DEMONSTRATIVES = ("here", "there")
THIRD_PERSON_PRONOUNS = ("it", "he", "him", "she", "her", "they", "them")
TAXONOMY_LEXEMES = NOMINAL_DEMONSTRATIVES + ADVERBIAL_DEMONSTRATIVES + THIRD_PERSON_PRONOUNS

PLURAL_LEXEMES = frozenset({"these", "those", "they", "them"})

# Transcription conventions for a person of unstated gender. Each matches as
# a single token and counts once toward a combined third-person bucket.
COMBINED_THIRD_PERSON = frozenset(
    {"s/he", "he/she", "she/he", "him/her", "her/him", "his/hers", "hers/his"}
)

NON_REFERENTIAL_LEXEMES = frozenset(
    {"i", "me", "my", "mine", "you", "your", "yours", "we", "us", "our", "ours"}
)

_CLASS_BY_LEXEME = {
    **{lex: PronounClass.NOMINAL_DEMONSTRATIVE for lex in NOMINAL_DEMONSTRATIVES},
    **{lex: PronounClass.ADVERBIAL_DEMONSTRATIVE for lex in ADVERBIAL_DEMONSTRATIVES},
    **{lex: PronounClass.THIRD_PERSON for lex in THIRD_PERSON_PRONOUNS},
}

_STRATEGY_BY_LEXEME = {
    "this": ResolutionStrategy.SCENE_SINGULAR,
    "that": ResolutionStrategy.SCENE_SINGULAR,
    "these": ResolutionStrategy.SCENE_PLURAL,
    "those": ResolutionStrategy.SCENE_PLURAL,
    "here": ResolutionStrategy.SCENE_SINGULAR,
    "there": ResolutionStrategy.SCENE_SINGULAR,
    "it": ResolutionStrategy.SCENE_OR_HISTORY,
    "he": ResolutionStrategy.PERSON_ENTITY,
    "him": ResolutionStrategy.PERSON_ENTITY,
    "she": ResolutionStrategy.PERSON_ENTITY,
    "her": ResolutionStrategy.PERSON_ENTITY,
    "they": ResolutionStrategy.PERSON_ENTITY,
    "them": ResolutionStrategy.PERSON_ENTITY,
}

# Alphabetic runs, optionally slash-joined ("s/he", "him/her").
_TOKEN_RE = re.compile(r"[A-Za-z]+(?:/[A-Za-z]+)*")


@dataclass(frozen=True)
class PronounMatch:
    """One detected pronoun occurrence.

    ``span`` is the [start, end) character range in the original query;
    ``lexeme`` is the lowercased normal form ("s/he" for slash conventions).
    """

    lexeme: str
    pronoun_class: PronounClass
    plurality: Plurality
    span: tuple[int, int]
    strategy: ResolutionStrategy

    @property
    def referential(self) -> bool:
        return self.strategy is not ResolutionStrategy.NON_REFERENTIAL


def classify(lexeme: str) -> tuple[PronounClass, Plurality, ResolutionStrategy]:
    """Classify a taxonomy lexeme (or a recognized slash form).

    Raises:
        UnknownPronoun: for any token outside the taxonomy.
    """
    lex = lexeme.lower()
    if lex in _CLASS_BY_LEXEME:
        plurality = Plurality.PLURAL if lex in PLURAL_LEXEMES else Plurality.SINGULAR
        return _CLASS_BY_LEXEME[lex], plurality, _STRATEGY_BY_LEXEME[lex]
    if lex in COMBINED_THIRD_PERSON:
        return PronounClass.THIRD_PERSON, Plurality.SINGULAR, ResolutionStrategy.PERSON_ENTITY
    if lex in NON_REFERENTIAL_LEXEMES:
        return (
            PronounClass.FIRST_SECOND_PERSON,
            Plurality.SINGULAR,
            ResolutionStrategy.NON_REFERENTIAL,
        )
    raise UnknownPronoun(f"not a taxonomy pronoun: {lexeme!r}")


def _match_at(lexeme: str, start: int, end: int) -> PronounMatch:
    cls, plurality, strategy = classify(lexeme)
    return PronounMatch(lexeme, cls, plurality, (start, end), strategy)


def _iter_token_matches(query: str, include_non_referential: bool) -> Iterator[PronounMatch]:
    for tok in _TOKEN_RE.finditer(query):
        text = tok.group().lower()
        if "/" in text and text not in COMBINED_THIRD_PERSON:
            # Unrecognized compound like "this/that": match each side.
            offset = tok.start()
            for part in tok.group().split("/"):
                lowered = part.lower()
                if lowered in _CLASS_BY_LEXEME or (
                    include_non_referential and lowered in NON_REFERENTIAL_LEXEMES
                ):
                    yield _match_at(lowered, offset, offset + len(part))
                offset += len(part) + 1
            continue
        if text in _CLASS_BY_LEXEME or text in COMBINED_THIRD_PERSON:
            yield _match_at(text, tok.start(), tok.end())
        elif include_non_referential and text in NON_REFERENTIAL_LEXEMES:
            yield _match_at(text, tok.start(), tok.end())


def _iter_substring_matches(query: str) -> Iterator[PronounMatch]:
    # Verbatim-fidelity mode: naive substring scan, longest lexeme first,
    # non-overlapping left to right. Misfires like "her" in "there" are the
    # point of this mode.
    lexemes = sorted(TAXONOMY_LEXEMES, key=len, reverse=True)
    lowered = query.lower()
    i = 0
    while i < len(lowered):
        for lex in lexemes:
            if lowered.startswith(lex, i):
                yield _match_at(lex, i, i + len(lex))
                i += len(lex)
                break
        else:
            i += 1


def detect_pronouns(
    query: str,
    *,
    include_non_referential: bool = False,
    legacy_substring: bool = False,
) -> list[PronounMatch]:
    """Find every supported pronoun in ``query``, in order of appearance.

    Matching is case-insensitive on whole word tokens (alphabetic runs), so
    "her" is never reported inside "there". ``legacy_substring=True`` restores
    naive substring behavior for fidelity experiments.

    Args:
        query: the raw query text.
        include_non_referential: also tag first/second-person pronouns
            (corpus statistics only; such matches never resolve).
        legacy_substring: use the naive substring scan over the 13 taxonomy
            lexemes instead of token matching.

    Returns:
        Matches sorted by start offset, non-overlapping. Empty list when the
        query contains no supported pronoun.
    """
    if legacy_substring:
        matches = list(_iter_substring_matches(query))
    else:
        matches = list(_iter_token_matches(query, include_non_referential))
    matches.sort(key=lambda m: m.span)
    return matches


def count_taxonomy_pronouns(corpus: Iterable[str], **detect_kwargs) -> dict[str, int]:
    """Aggregate pronoun occurrence counts over a list of query texts.

    Slash forms count under their own normalized lexeme (e.g. "s/he");
    combine them with :data:`COMBINED_THIRD_PERSON` membership when a single
    third-person bucket is wanted.
    """
    counts: Counter[str] = Counter()
    for query in corpus:
        for match in detect_pronouns(query, **detect_kwargs):
            counts[match.lexeme] += 1
    return dict(counts)
