"""Bundled study-query corpora and reproducible pronoun statistics.

The four corpora (lab study parts 1-3 and the five-day diary) ship as JSONL
with verbatim query transcriptions. Bracketed context annotations like
"[trash bins]" are metadata, split away from the spoken text before any
counting. A hand-audited oracle file pins every count; divergences from the
source report's numbers are documented in docs/corpus-notes.md and carried
machine-readably next to the data.
"""

from __future__ import annotations

import hashlib
import json
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

from .backends import BackendSet, FixtureFaceRecognizer, FixtureObjectDetector, FixtureOcrEngine, ScriptedChat
from .capture import InputSnapshot
from .errors import SchemaViolation
from .pronouns import (
    COMBINED_THIRD_PERSON,
    NON_REFERENTIAL_LEXEMES,
    TAXONOMY_LEXEMES,
    detect_pronouns,
)
from .resolver import ResolverConfig
from .scene import SceneFixture, load_scene_fixture
from .session import Session, SessionConfig

CORPUS_SOURCES = ("part1", "part2", "part3", "diary")
NO_SCENE = "no-scene"

_BRACKET_RE = re.compile(r"\s*\[([^\]]*)\]")


def _data_dir():
    return resources.files("deictic.data.corpus")


@dataclass(frozen=True)
class CorpusEntry:
    """One study query, verbatim, with annotations split from spoken text."""

    id: str
    source: str
    speaker: str
    context: str
    query_verbatim: str
    spoken_text: str
    annotations: tuple[tuple[int, str], ...] = ()  # (offset into spoken_text, note)
    satisfactory: Optional[bool] = None
    notes: str = ""


def split_annotations(verbatim: str) -> tuple[str, tuple[tuple[int, str], ...]]:
    """Strip bracketed annotations, recording their offsets in the spoken text."""
    annotations: list[tuple[int, str]] = []
    out: list[str] = []
    last = 0
    for match in _BRACKET_RE.finditer(verbatim):
        out.append(verbatim[last : match.start()])
        annotations.append((sum(len(part) for part in out), match.group(1)))
        last = match.end()
    out.append(verbatim[last:])
    return "".join(out), tuple(annotations)


def parse_corpus_row(data: dict, row: int) -> CorpusEntry:
    for key in ("id", "source", "speaker", "query"):
        if key not in data:
            raise SchemaViolation(f"missing key {key!r}", row=row)
    if data["source"] not in CORPUS_SOURCES:
        raise SchemaViolation(f"unknown source {data['source']!r}", row=row)
    satisfactory = data.get("satisfactory")
    if satisfactory is not None and not isinstance(satisfactory, bool):
        raise SchemaViolation("satisfactory must be true, false, or null", row=row)
    verbatim = data["query"]
    if not isinstance(verbatim, str) or not verbatim.strip():
        raise SchemaViolation("query must be non-empty text", row=row)
    spoken, annotations = split_annotations(verbatim)
    return CorpusEntry(
        id=str(data["id"]),
        source=data["source"],
        speaker=str(data["speaker"]),
        context=str(data.get("context", "")),
        query_verbatim=verbatim,
        spoken_text=spoken,
        annotations=annotations,
        satisfactory=satisfactory,
        notes=str(data.get("notes", "")),
    )


def load_corpus(path: Union[str, Path]) -> list[CorpusEntry]:
    """Load a JSONL corpus file; raises SchemaViolation with the row number."""
    entries: list[CorpusEntry] = []
    with open(path, "r", encoding="utf-8") as fh:
        for row, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaViolation(f"invalid JSON ({exc})", row=row) from exc
            entries.append(parse_corpus_row(data, row))
    return entries


def load_bundled_corpus(source: str) -> list[CorpusEntry]:
    """Load one of the bundled corpora: part1, part2, part3, or diary."""
    if source not in CORPUS_SOURCES:
        raise ValueError(f"unknown corpus {source!r}; expected one of {CORPUS_SOURCES}")
    payload = _data_dir().joinpath(f"{source}.jsonl").read_text(encoding="utf-8")
    entries = []
    for row, line in enumerate(payload.splitlines(), start=1):
        if line.strip():
            entries.append(parse_corpus_row(json.loads(line), row))
    return entries


def corpus_checksums() -> dict[str, str]:
    return json.loads(_data_dir().joinpath("checksums.json").read_text(encoding="utf-8"))


def verify_corpus_checksums() -> dict[str, bool]:
    """Compare bundled corpus bytes against their pinned sha256 digests."""
    results = {}
    for name, expected in corpus_checksums().items():
        payload = _data_dir().joinpath(name).read_bytes()
        results[name] = hashlib.sha256(payload).hexdigest() == expected
    return results


def load_expected_stats() -> dict:
    """The hand-audited oracle counts stored beside the corpora."""
    return json.loads(_data_dir().joinpath("expected_stats.json").read_text(encoding="utf-8"))


@dataclass
class CorpusStats:
    """Deterministic pronoun statistics for one corpus."""

    entries: int = 0
    satisfactory: int = 0
    unsatisfactory: int = 0
    unrated: int = 0
    taxonomy: dict[str, int] = field(default_factory=dict)
    combined_slash: dict[str, int] = field(default_factory=dict)
    non_referential: dict[str, int] = field(default_factory=dict)
    queries_containing: dict[str, int] = field(default_factory=dict)
    strategies: dict[str, int] = field(default_factory=dict)
    multi_pronoun_queries: int = 0
    queries_without_taxonomy_pronouns: int = 0

    @property
    def combined_third_person(self) -> int:
        return sum(self.combined_slash.values())

    def to_dict(self) -> dict:
        return {
            "entries": self.entries,
            "satisfactory": self.satisfactory,
            "unsatisfactory": self.unsatisfactory,
            "unrated": self.unrated,
            "taxonomy": dict(sorted(self.taxonomy.items())),
            "combined_slash": dict(sorted(self.combined_slash.items())),
            "combined_third_person": self.combined_third_person,
            "non_referential": dict(sorted(self.non_referential.items())),
            "queries_containing": dict(sorted(self.queries_containing.items())),
            "strategies": dict(sorted(self.strategies.items())),
            "multi_pronoun_queries": self.multi_pronoun_queries,
            "queries_without_taxonomy_pronouns": self.queries_without_taxonomy_pronouns,
        }


def compute_stats(entries: Sequence[CorpusEntry], *, legacy_substring: bool = False) -> CorpusStats:
    """Run pronoun detection over spoken text only and aggregate counts.

    Occurrence counts are mechanical: every whole-token match counts, so a
    query containing a pronoun twice contributes two. ``queries_containing``
    carries the per-query view alongside for cross-checks.
    """
    stats = CorpusStats(entries=len(entries))
    taxonomy: Counter[str] = Counter()
    slash: Counter[str] = Counter()
    non_ref: Counter[str] = Counter()
    containing: Counter[str] = Counter()
    strategies: Counter[str] = Counter()

    for entry in entries:
        if entry.satisfactory is True:
            stats.satisfactory += 1
        elif entry.satisfactory is False:
            stats.unsatisfactory += 1
        else:
            stats.unrated += 1

        matches = detect_pronouns(
            entry.spoken_text,
            include_non_referential=True,
            legacy_substring=legacy_substring,
        )
        lexemes_here = set()
        referential_here = 0
        for match in matches:
            lexemes_here.add(match.lexeme)
            if match.lexeme in COMBINED_THIRD_PERSON:
                slash[match.lexeme] += 1
                strategies[match.strategy.value] += 1
                referential_here += 1
            elif match.referential:
                taxonomy[match.lexeme] += 1
                strategies[match.strategy.value] += 1
                referential_here += 1
            else:
                non_ref[match.lexeme] += 1
        for lexeme in lexemes_here:
            containing[lexeme] += 1
        if len(matches) > 1:
            stats.multi_pronoun_queries += 1
        if referential_here == 0:
            stats.queries_without_taxonomy_pronouns += 1

    stats.taxonomy = {lex: taxonomy.get(lex, 0) for lex in TAXONOMY_LEXEMES}
    stats.combined_slash = dict(slash)
    stats.non_referential = dict(non_ref)
    stats.queries_containing = dict(containing)
    stats.strategies = dict(strategies)
    return stats


@dataclass
class ReplayRow:
    entry_id: str
    query: str
    status: str  # "ok" | "skipped"
    scene: str = ""
    sources: tuple[str, ...] = ()
    unsupported: int = 0
    fallback_v1: Optional[bool] = None
    fallback_v2: Optional[bool] = None
    v1_payload: str = ""
    v2_payload: str = ""

    def payload_diff(self) -> str:
        if self.status != "ok":
            return ""
        replaced = "replaced" if self.v1_payload != self.query else "unchanged"
        embedded = "embedded verbatim" if self.query in self.v2_payload else "MISSING"
        return f"v1 {replaced}; v2 query {embedded}"


def _mock_backends() -> BackendSet:
    return BackendSet(
        detector=FixtureObjectDetector(),
        ocr=FixtureOcrEngine(),
        face=FixtureFaceRecognizer(),
        chat=ScriptedChat(default_reply="Scripted reply.\nExplanation: replay default."),
    )


def replay_corpus(
    entries: Sequence[CorpusEntry],
    fixture_map: Mapping[str, Mapping],
    resolver: Optional[ResolverConfig] = None,
    backends_factory=_mock_backends,
) -> dict:
    """Replay corpus entries through full turns in both v1 and v2.

    ``fixture_map`` maps entry ids to ``{"scene": path-or-fixture-or-"no-scene",
    "gaze_px": [u, v], "point_px": [u, v] | null}``. Entries without a mapping
    are skipped and the run continues.
    """
    resolver = resolver or ResolverConfig()
    rows: list[ReplayRow] = []
    for entry in entries:
        mapping = fixture_map.get(entry.id)
        if mapping is None:
            rows.append(ReplayRow(entry_id=entry.id, query=entry.spoken_text, status="skipped"))
            continue
        scene_spec = mapping.get("scene", NO_SCENE)
        scene: Union[SceneFixture, str, None]
        if scene_spec == NO_SCENE:
            scene = None
            gaze = tuple(mapping.get("gaze_px", (0.0, 0.0)))
        else:
            scene = scene_spec if isinstance(scene_spec, SceneFixture) else load_scene_fixture(scene_spec)
            frame = scene.frame
            gaze = tuple(mapping.get("gaze_px", (frame.width / 2.0, frame.height / 2.0)))
        point = mapping.get("point_px")
        snap = InputSnapshot(gaze_px=gaze, point_px=tuple(point) if point else None)

        row = ReplayRow(
            entry_id=entry.id,
            query=entry.spoken_text,
            status="ok",
            scene=str(scene_spec) if scene_spec != NO_SCENE else NO_SCENE,
        )
        for mode in ("v1", "v2"):
            session = Session(
                backends=backends_factory(),
                config=SessionConfig(resolver=resolver, mode=mode),
            )
            session.wake("hey glass")
            result = session.run_turn(entry.spoken_text, scene, snap)
            if mode == "v1":
                row.fallback_v1 = result.fallback
                row.v1_payload = result.trace.get("payload", "")
                row.sources = tuple(
                    r.get("source", r["status"]) for r in result.trace.get("resolutions", [])
                )
                row.unsupported = sum(
                    1 for r in result.trace.get("resolutions", []) if r["status"] == "unsupported"
                )
            else:
                row.fallback_v2 = result.fallback
                row.v2_payload = result.trace.get("payload", "")
        rows.append(row)

    replayed = [r for r in rows if r.status == "ok"]
    fallbacks = sum(1 for r in replayed if r.fallback_v1)
    return {
        "rows": rows,
        "replayed": len(replayed),
        "skipped": len(rows) - len(replayed),
        "fallback_rate_v1": (fallbacks / len(replayed)) if replayed else 0.0,
    }


def report_to_json(report: dict) -> str:
    payload = {
        "replayed": report["replayed"],
        "skipped": report["skipped"],
        "fallback_rate_v1": report["fallback_rate_v1"],
        "rows": [
            {
                "entry_id": r.entry_id,
                "status": r.status,
                "scene": r.scene,
                "sources": list(r.sources),
                "unsupported": r.unsupported,
                "fallback_v1": r.fallback_v1,
                "fallback_v2": r.fallback_v2,
                "payload_diff": r.payload_diff(),
            }
            for r in report["rows"]
        ],
    }
    return json.dumps(payload, indent=2)


def report_to_table(report: dict) -> str:
    lines = [f"{'entry':<12} {'status':<8} {'sources':<28} {'fallback':<9} payload"]
    for r in report["rows"]:
        sources = ",".join(r.sources) or "-"
        fallback = "-" if r.fallback_v1 is None else str(r.fallback_v1).lower()
        lines.append(f"{r.entry_id:<12} {r.status:<8} {sources:<28} {fallback:<9} {r.payload_diff()}")
    lines.append(
        f"replayed={report['replayed']} skipped={report['skipped']} "
        f"fallback_rate_v1={report['fallback_rate_v1']:.2f}"
    )
    return "\n".join(lines)
