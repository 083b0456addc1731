"""Heuristic referent resolution from pronouns, scene, and input coordinates.

The singular path checks whether an input coordinate falls inside a parent
box and phrases that parent with its children; otherwise it falls back to
the five nearest texts around each input coordinate. The plural path expands
each coordinate into a half-frame region and phrases every parent that is
at least 70% inside it. Every decision records enough evidence to be
replayed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .pronouns import Plurality, PronounMatch, ResolutionStrategy
from .scene import (
    DEFAULT_MAX_CHILDREN,
    DEFAULT_OVERLAP_THRESHOLD,
    PLURAL_REGION_FRACTION,
    EntityKind,
    SceneGraph,
    SceneParent,
    expand_plural_region,
    nearest_texts,
    overlap_ratio,
)
from .capture import InputSnapshot

PHRASE_CONNECTOR = "with text that says"


class ReferentSource(Enum):
    PARENT_HIT = "parent_hit"
    NEAREST_TEXTS = "nearest_texts"
    HISTORY = "history"
    PERSON_ENTITY = "person_entity"
    NONE = "none"


@dataclass
class ResolverConfig:
    """Every numeric constant and behavior switch in one place.

    ``input_precedence`` decides which channel wins when gaze and pointing
    land in different parents; a deliberate gesture outranks ambient gaze by
    default.
    """

    overlap_threshold: float = DEFAULT_OVERLAP_THRESHOLD
    max_children: int = DEFAULT_MAX_CHILDREN
    nearest_k: int = 5
    plural_region_fraction: tuple[float, float] = PLURAL_REGION_FRACTION
    input_precedence: str = "pointing"  # "pointing" | "gaze"
    overlap_mode: str = "child"  # "child" | "iou"
    exclusive_children: bool = False
    preserve_case: bool = False
    legacy_substring: bool = False
    min_confidence: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.overlap_threshold <= 1.0:
            raise ValueError("overlap_threshold must be in (0, 1]")
        if self.max_children < 1 or self.nearest_k < 1:
            raise ValueError("counts must be >= 1")
        if self.input_precedence not in ("pointing", "gaze"):
            raise ValueError(f"unknown input_precedence: {self.input_precedence!r}")


@dataclass(frozen=True)
class ResolvedReferent:
    """A referent phrase plus the evidence trail that produced it.

    ``evidence`` is JSON-serializable and sufficient to replay the decision;
    see :func:`render_phrase_from_evidence`.
    """

    phrase: str
    source: ReferentSource
    evidence: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.source is ReferentSource.NONE) != (self.phrase == ""):
            raise ValueError("phrase must be empty exactly when source is NONE")


@dataclass(frozen=True)
class MatchResolution:
    """Per-pronoun outcome within one query."""

    match: PronounMatch
    referent: Optional[ResolvedReferent]
    status: str  # "resolved" | "unsupported" | "deferred"


def _render_label(parent: SceneParent, cfg: ResolverConfig) -> str:
    label = parent.entity.label
    if parent.entity.kind is EntityKind.FACE or cfg.preserve_case:
        return label
    return label.lower()


def phrase_for_parent(parent: SceneParent, cfg: ResolverConfig) -> str:
    """Render "<label> with text that says <t1> ... <tN>" (label alone if no children)."""
    label = _render_label(parent, cfg)
    if not parent.children:
        return label
    return f"{label} {PHRASE_CONNECTOR} " + " ".join(t.text for t in parent.children)


def _input_channels(snap: InputSnapshot, cfg: ResolverConfig) -> list[tuple[str, tuple[float, float]]]:
    channels = [("gaze", snap.gaze_px)]
    if snap.point_px is not None:
        if cfg.input_precedence == "pointing":
            channels.insert(0, ("pointing", snap.point_px))
        else:
            channels.append(("pointing", snap.point_px))
    return channels


def _parent_evidence(parent: SceneParent, cfg: ResolverConfig) -> dict:
    return {
        "label": _render_label(parent, cfg),
        "kind": parent.entity.kind.value,
        "bbox": parent.entity.bbox.as_list(),
        "children": [t.text for t in parent.children],
    }


def _nearest_union(
    scene: SceneGraph, channels: Sequence[tuple[str, tuple[float, float]]], k: int
) -> list[tuple[float, str, object]]:
    """Union of per-channel nearest texts keyed by min distance to its channel."""
    texts = scene.all_texts()
    best: dict[int, tuple[float, str, object]] = {}
    for name, coord in channels:
        for text in nearest_texts(coord, texts, k):
            cu, cv = text.bbox.center
            dist = math.hypot(cu - coord[0], cv - coord[1])
            entry = best.get(id(text))
            if entry is None or dist < entry[0]:
                best[id(text)] = (dist, name, text)
    ranked = sorted(
        best.values(), key=lambda e: (e[0], e[2].bbox.y_min, e[2].bbox.x_min, e[2].text)
    )
    return ranked[:k]


def _nearest_texts_referent(
    scene: SceneGraph,
    channels: Sequence[tuple[str, tuple[float, float]]],
    cfg: ResolverConfig,
    extra_evidence: dict,
) -> ResolvedReferent:
    ranked = _nearest_union(scene, channels, cfg.nearest_k)
    if not ranked:
        return ResolvedReferent("", ReferentSource.NONE, {**extra_evidence, "reason": "empty scene"})
    evidence = {
        **extra_evidence,
        "texts": [e[2].text for e in ranked],
        "candidates": [
            {"text": e[2].text, "distance": round(e[0], 3), "channel": e[1]} for e in ranked
        ],
    }
    phrase = " ".join(e[2].text for e in ranked)
    return ResolvedReferent(phrase, ReferentSource.NEAREST_TEXTS, evidence)


def resolve_singular(
    match: PronounMatch,
    scene: SceneGraph,
    snap: InputSnapshot,
    cfg: ResolverConfig,
    history: Sequence[tuple[str, str]] = (),
) -> ResolvedReferent:
    """Resolve a singular pronoun to a referent phrase.

    Order of attempts: parent hit under an input coordinate (faces only for
    person pronouns; smallest containing parent wins), then conversation
    history for "it", then the nearest-text union, then nothing.
    """
    if match.plurality is not Plurality.SINGULAR:
        raise ValueError(f"resolve_singular got plural match {match.lexeme!r}")

    channels = _input_channels(snap, cfg)
    kind = EntityKind.FACE if match.strategy is ResolutionStrategy.PERSON_ENTITY else None
    base = {"pronoun": match.lexeme, "inputs": dict(channels), "precedence": cfg.input_precedence}

    for name, coord in channels:
        hits = scene.parents_at(coord, kind=kind)
        if hits:
            parent = hits[0]
            source = (
                ReferentSource.PERSON_ENTITY
                if match.strategy is ResolutionStrategy.PERSON_ENTITY
                else ReferentSource.PARENT_HIT
            )
            evidence = {
                **base,
                "channel": name,
                "coordinate": list(coord),
                "parent": _parent_evidence(parent, cfg),
                "contained_parents": [p.entity.label for p in hits],
            }
            return ResolvedReferent(phrase_for_parent(parent, cfg), source, evidence)

    if match.strategy is ResolutionStrategy.SCENE_OR_HISTORY and history:
        previous_answer = history[-1][1]
        evidence = {**base, "history_answer": previous_answer}
        return ResolvedReferent(previous_answer, ReferentSource.HISTORY, evidence)

    return _nearest_texts_referent(scene, channels, cfg, base)


def resolve_plural(
    match: PronounMatch,
    scene: SceneGraph,
    snap: InputSnapshot,
    cfg: ResolverConfig,
    history: Sequence[tuple[str, str]] = (),
) -> ResolvedReferent:
    """Resolve a plural pronoun by expanding each input coordinate.

    Each coordinate grows into a half-frame region; parents overlapping a
    region by at least the configured threshold (of the parent's own area in
    the default mode) are phrased left to right. Falls back to the
    nearest-text path when no parent qualifies.
    """
    if match.plurality is not Plurality.PLURAL:
        raise ValueError(f"resolve_plural got singular match {match.lexeme!r}")

    channels = _input_channels(snap, cfg)
    kind = EntityKind.FACE if match.strategy is ResolutionStrategy.PERSON_ENTITY else None
    base = {"pronoun": match.lexeme, "inputs": dict(channels), "precedence": cfg.input_precedence}

    selected: dict[int, SceneParent] = {}
    regions = []
    ratios = []
    for name, coord in channels:
        region = expand_plural_region(coord, scene.frame, fraction=cfg.plural_region_fraction)
        regions.append({"channel": name, "bbox": region.as_list()})
        for parent in scene.parents:
            if kind is not None and parent.entity.kind is not kind:
                continue
            ratio = overlap_ratio(parent.entity.bbox, region, cfg.overlap_mode)
            ratios.append({"label": parent.entity.label, "channel": name, "ratio": round(ratio, 4)})
            if ratio >= cfg.overlap_threshold:
                selected.setdefault(id(parent), parent)

    if selected:
        ordered = sorted(
            selected.values(),
            key=lambda p: (p.entity.bbox.x_min, p.entity.bbox.y_min, p.entity.label),
        )
        parents_evidence = [_parent_evidence(p, cfg) for p in ordered]
        evidence = {**base, "regions": regions, "ratios": ratios, "parents": parents_evidence}
        phrase = "; ".join(phrase_for_parent(p, cfg) for p in ordered)
        return ResolvedReferent(phrase, ReferentSource.PARENT_HIT, evidence)

    return _nearest_texts_referent(scene, channels, cfg, {**base, "regions": regions, "ratios": ratios})


def resolve(
    matches: Sequence[PronounMatch],
    scene: SceneGraph,
    snap: InputSnapshot,
    cfg: ResolverConfig,
    history: Sequence[tuple[str, str]] = (),
    mode: str = "v1",
) -> list[MatchResolution]:
    """Resolve the pronoun matches of one query.

    v1 resolves only the first taxonomy pronoun and flags the rest
    unsupported; v2 defers every match to the prompt generator untouched.
    Non-referential matches are dropped either way.
    """
    referential = [m for m in matches if m.referential]
    if mode == "v2":
        return [MatchResolution(m, None, "deferred") for m in referential]
    if mode != "v1":
        raise ValueError(f"unknown mode: {mode!r}")

    resolutions: list[MatchResolution] = []
    for i, match in enumerate(referential):
        if i > 0:
            resolutions.append(MatchResolution(match, None, "unsupported"))
            continue
        if match.plurality is Plurality.PLURAL:
            referent = resolve_plural(match, scene, snap, cfg, history)
        else:
            referent = resolve_singular(match, scene, snap, cfg, history)
        resolutions.append(MatchResolution(match, referent, "resolved"))
    return resolutions


def render_phrase_from_evidence(source: ReferentSource, evidence: dict) -> str:
    """Rebuild a referent phrase from its recorded evidence.

    Used to verify that traces are sufficient to replay a decision.
    """
    if source is ReferentSource.NONE:
        return ""
    if source is ReferentSource.HISTORY:
        return evidence["history_answer"]
    if source is ReferentSource.NEAREST_TEXTS:
        return " ".join(evidence["texts"])
    if "parents" in evidence:  # plural parent hit
        return "; ".join(_phrase_from_parent_evidence(p) for p in evidence["parents"])
    return _phrase_from_parent_evidence(evidence["parent"])


def _phrase_from_parent_evidence(parent: dict) -> str:
    if not parent["children"]:
        return parent["label"]
    return f"{parent['label']} {PHRASE_CONNECTOR} " + " ".join(parent["children"])


def resolution_trace(query: str, resolutions: Sequence[MatchResolution]) -> list[dict]:
    """JSON-serializable trace records, one per pronoun match."""
    records = []
    for res in resolutions:
        record: dict = {
            "lexeme": res.match.lexeme,
            "span": list(res.match.span),
            "strategy": res.match.strategy.value,
            "status": res.status,
        }
        if res.referent is not None:
            record["source"] = res.referent.source.value
            record["phrase"] = res.referent.phrase
            record["evidence"] = res.referent.evidence
        records.append(record)
    return records
