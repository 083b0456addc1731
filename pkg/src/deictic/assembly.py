"""Backend payload assembly.

v1 splices each resolved referent phrase over its pronoun span and prepends
serialized conversation history. v2 renders a fixed prompt template that
embeds the raw query verbatim together with the input coordinates, the
gaze-proximate scene context, and the answer-format instruction; the
language model does the fusing. The template is data
(``templates/prompt_v2.txt``), not code, so builds stay bit-identical.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from typing import Optional, Sequence

from .capture import InputSnapshot
from .errors import NothingToReplace
from .resolver import (
    MatchResolution,
    ReferentSource,
    ResolverConfig,
    _input_channels,
    _nearest_union,
    phrase_for_parent,
)
from .scene import SceneGraph

HISTORY_CAPACITY = 5
EMPTY_SECTION_TOKEN = "none"

_VOWELS = "aeiou"


@dataclass(frozen=True)
class ConversationHistory:
    """Ring of the five most recent query/answer pairs, oldest first."""

    pairs: tuple[tuple[str, str], ...] = ()
    capacity: int = HISTORY_CAPACITY

    def __post_init__(self):
        if len(self.pairs) > self.capacity:
            raise ValueError("history exceeds capacity")

    def push(self, query: str, answer: str) -> "ConversationHistory":
        pairs = self.pairs + ((query, answer),)
        if len(pairs) > self.capacity:
            pairs = pairs[len(pairs) - self.capacity :]
        return ConversationHistory(pairs=pairs, capacity=self.capacity)

    def __len__(self) -> int:
        return len(self.pairs)

    def serialize(self) -> str:
        """"Q: .../A: ..." lines, oldest first; empty string when empty."""
        lines = []
        for query, answer in self.pairs:
            lines.append(f"Q: {query}")
            lines.append(f"A: {answer}")
        return "\n".join(lines)


def push_history(history: ConversationHistory, query: str, answer: str) -> ConversationHistory:
    """Functional append; evicts the oldest pair beyond capacity."""
    return history.push(query, answer)


class AssemblyMode(Enum):
    V1_REPLACED = "v1"
    V2_PROMPT = "v2"


@dataclass(frozen=True)
class Replacement:
    span: tuple[int, int]
    phrase: str  # the text actually spliced in, article included


@dataclass(frozen=True)
class AssembledQuery:
    """The final backend payload.

    ``query_text`` is the pronoun-replaced query in v1 (identical to the
    original outside replaced spans) and the original query verbatim in v2.
    ``payload`` is the full text handed to the chat backend.
    """

    mode: AssemblyMode
    payload: str
    query_text: str
    replacements: tuple[Replacement, ...] = ()
    history_included: int = 0


def _article_for(phrase: str) -> str:
    return "an" if phrase[:1].lower() in _VOWELS else "a"


def _splice_text(referent_source: ReferentSource, evidence: dict, phrase: str) -> str:
    # Object-parent referents read as noun phrases and want an indefinite
    # article ("How much is a bottle with ..."); faces, raw text joins, and
    # history answers do not. Plural parent phrases splice bare.
    if referent_source is ReferentSource.PARENT_HIT:
        parent = evidence.get("parent")
        if parent is not None and parent.get("kind") == "object":
            return f"{_article_for(phrase)} {phrase}"
    return phrase


def assemble_v1(
    query: str,
    resolutions: Sequence[MatchResolution],
    history: ConversationHistory,
) -> AssembledQuery:
    """Splice resolved referent phrases over their pronoun spans.

    Unsupported and unresolved matches leave their spans untouched. History
    pairs are serialized ahead of the modified query in the payload.

    Raises:
        NothingToReplace: when the sole resolved referent carried no phrase
            (the session layer turns this into the fallback reply).
    """
    resolved = [r for r in resolutions if r.status == "resolved" and r.referent is not None]
    if len(resolved) == 1 and resolved[0].referent.source is ReferentSource.NONE:
        raise NothingToReplace(f"no referent for {resolved[0].match.lexeme!r}")

    replacements: list[Replacement] = []
    for res in resolved:
        if res.referent.source is ReferentSource.NONE:
            continue
        spliced = _splice_text(res.referent.source, res.referent.evidence, res.referent.phrase)
        replacements.append(Replacement(span=res.match.span, phrase=spliced))
    replacements.sort(key=lambda r: r.span)

    query_text = query
    for rep in reversed(replacements):
        start, end = rep.span
        query_text = query_text[:start] + rep.phrase + query_text[end:]

    history_block = history.serialize()
    payload = f"{history_block}\n{query_text}" if history_block else query_text
    return AssembledQuery(
        mode=AssemblyMode.V1_REPLACED,
        payload=payload,
        query_text=query_text,
        replacements=tuple(replacements),
        history_included=len(history),
    )


def prompt_template_text() -> str:
    """The exact bytes of the v2 prompt template resource."""
    return resources.files("deictic.templates").joinpath("prompt_v2.txt").read_text(encoding="utf-8")


def prompt_template_sha256() -> str:
    return hashlib.sha256(prompt_template_text().encode("utf-8")).hexdigest()


def _format_px(point: Optional[tuple[float, float]]) -> str:
    if point is None:
        return EMPTY_SECTION_TOKEN
    return f"({point[0]:g}, {point[1]:g})"


def _context_items(snap: InputSnapshot, scene: SceneGraph, cfg: ResolverConfig) -> list[str]:
    items: list[str] = []
    for _, coord in _input_channels(snap, cfg):
        hits = scene.parents_at(coord)
        if hits:
            items.append(phrase_for_parent(hits[0], cfg))
            break
    for entry in _nearest_union(scene, _input_channels(snap, cfg), cfg.nearest_k):
        items.append(entry[2].text)
    return items


def assemble_v2(
    query: str,
    snap: InputSnapshot,
    scene: SceneGraph,
    history: ConversationHistory,
    cfg: Optional[ResolverConfig] = None,
) -> AssembledQuery:
    """Render the engineered prompt around the unmodified query.

    Section order: raw query, gaze and pointing pixels, gaze-proximate scene
    context (parent-hit entity first, then the nearest texts), the one
    sentence + short explanation instruction, then serialized history.
    Empty sections render the literal token "none".
    """
    cfg = cfg or ResolverConfig()
    items = _context_items(snap, scene, cfg)
    context = "; ".join(items) if items else EMPTY_SECTION_TOKEN
    history_block = history.serialize() or EMPTY_SECTION_TOKEN
    payload = prompt_template_text().format(
        query=query,
        gaze=_format_px(snap.gaze_px),
        pointing=_format_px(snap.point_px),
        context=context,
        history=history_block,
    )
    return AssembledQuery(
        mode=AssemblyMode.V2_PROMPT,
        payload=payload,
        query_text=query,
        replacements=(),
        history_included=len(history),
    )
