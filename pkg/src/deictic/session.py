"""Turn orchestration: wake word, pipeline stages, timings, and fallback.

One turn runs wake-gated: a query without a taxonomy pronoun skips frame
capture and analysis entirely and goes straight to completion with history;
a pronoun-bearing query runs capture, the concurrent ML fan-out, phrase
generation, and completion. A missing referent in v1 or a completion
failure yields the fixed fallback sentence, which never enters history.
"""

from __future__ import annotations

import logging
import time
import uuid
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Union

from .assembly import (
    AssembledQuery,
    ConversationHistory,
    assemble_v1,
    assemble_v2,
)
from .backends import (
    AnalysisResult,
    BackendSet,
    CapturedFrame,
    Stage,
    StageTiming,
    analyze_frame,
    complete,
)
from .capture import InputSnapshot
from .errors import (
    AllBackendsFailed,
    CompletionFailed,
    NothingToReplace,
    SessionPhaseError,
)
from .pronouns import detect_pronouns
from .resolver import ResolverConfig, resolution_trace, resolve
from .scene import FrameMeta, SceneFixture, associate, load_scene_fixture

logger = logging.getLogger(__name__)

WAKE_PHRASE = "hey glass"
WAKE_REPLY = "Hi, I'm listening."
FALLBACK_SENTENCE = "Sorry, I did not understand your question."


class Phase(Enum):
    IDLE = "idle"
    LISTENING = "listening"
    PROCESSING = "processing"
    RESPONDING = "responding"


_LEGAL_TRANSITIONS = {
    Phase.IDLE: {Phase.LISTENING},
    Phase.LISTENING: {Phase.PROCESSING},
    Phase.PROCESSING: {Phase.RESPONDING},
    Phase.RESPONDING: {Phase.IDLE},
}


@dataclass
class SessionConfig:
    resolver: ResolverConfig = field(default_factory=ResolverConfig)
    mode: str = "v1"  # "v1" | "v2"
    capture_delay_ms: float = 0.0
    ml_timeout_ms: float = 10_000.0
    completion_timeout_ms: float = 10_000.0

    def __post_init__(self):
        if self.mode not in ("v1", "v2"):
            raise ValueError(f"mode must be v1 or v2, got {self.mode!r}")


@dataclass
class TurnResult:
    """Everything one turn produced, errors included (never raised past here)."""

    turn_id: str
    answer: str
    explanation: Optional[str]
    trace: dict
    timings: list[StageTiming]
    fallback: bool

    @property
    def total_ms(self) -> float:
        return sum(t.elapsed_ms for t in self.timings)

    def to_dict(self) -> dict:
        return {
            "turn_id": self.turn_id,
            "answer": self.answer,
            "explanation": self.explanation,
            "fallback": self.fallback,
            "timings": [t.to_dict() for t in self.timings],
            "trace": self.trace,
        }


SceneSource = Union[SceneFixture, dict, str, Path, None]


def _load_scene_source(source: SceneSource, captured_at: float) -> Optional[SceneFixture]:
    if source is None:
        return None
    if isinstance(source, SceneFixture):
        return source
    if isinstance(source, dict):
        from .scene import parse_scene_fixture

        return parse_scene_fixture(source, captured_at=captured_at)
    return load_scene_fixture(source, captured_at=captured_at)


class Session:
    """One conversation: wake state machine, history ring, per-turn timings."""

    def __init__(
        self,
        backends: BackendSet,
        config: Optional[SessionConfig] = None,
        session_id: Optional[str] = None,
    ):
        self.id = session_id or uuid.uuid4().hex
        self.config = config or SessionConfig()
        self.backends = backends
        self.phase = Phase.IDLE
        self.history = ConversationHistory()
        self.turns: list[TurnResult] = []

    def _transition(self, target: Phase) -> None:
        if target not in _LEGAL_TRANSITIONS[self.phase]:
            raise SessionPhaseError(f"illegal transition {self.phase.value} -> {target.value}")
        self.phase = target

    def wake(self, utterance: str) -> Optional[str]:
        """Transition Idle -> Listening when the trigger phrase is spoken.

        Matching is whole-token and case-insensitive on the two-word phrase,
        so "Hey Glasses" does not trigger. Returns the spoken reply on a
        transition, None otherwise (including wake while already awake).
        """
        if self.phase is not Phase.IDLE:
            return None
        tokens = [t.lower() for t in _words(utterance)]
        trigger = WAKE_PHRASE.split()
        for i in range(len(tokens) - len(trigger) + 1):
            if tokens[i : i + len(trigger)] == trigger:
                self._transition(Phase.LISTENING)
                return WAKE_REPLY
        return None

    def run_turn(
        self,
        query: str,
        scene: SceneSource,
        snap: InputSnapshot,
    ) -> TurnResult:
        """Run one full query turn; requires the session to be Listening.

        Errors surface inside the TurnResult (fallback answer plus trace
        entries), never as exceptions past this boundary.
        """
        if self.phase is not Phase.LISTENING:
            raise SessionPhaseError(f"run_turn requires Listening, session is {self.phase.value}")
        self._transition(Phase.PROCESSING)
        try:
            result = self._run_pipeline(query, scene, snap)
        finally:
            self.phase = Phase.RESPONDING
            self._transition(Phase.IDLE)
        self.turns.append(result)
        return result

    # Pipeline internals ---------------------------------------------------

    def _run_pipeline(self, query: str, scene_source: SceneSource, snap: InputSnapshot) -> TurnResult:
        cfg = self.config.resolver
        turn_id = uuid.uuid4().hex
        timings: list[StageTiming] = []
        trace: dict = {
            "turn_id": turn_id,
            "query": query,
            "mode": self.config.mode,
            "session_id": self.id,
            "inputs": snap.to_dict(),
        }

        matches = detect_pronouns(query, legacy_substring=cfg.legacy_substring)
        trace["pronouns"] = [
            {"lexeme": m.lexeme, "span": list(m.span), "strategy": m.strategy.value} for m in matches
        ]

        if not matches:
            # Pronoun gate: no capture, no ML calls, raw query plus history.
            started = time.monotonic()
            assembled = assemble_v1(query, [], self.history)
            timings.append(StageTiming(Stage.PHRASE_GEN, (time.monotonic() - started) * 1000.0))
            trace["ml_calls"] = 0
            trace["payload"] = assembled.payload
            return self._complete_turn(turn_id, query, assembled, trace, timings)

        # Capture the frame (fixture annotations stand in for pixels).
        started = time.monotonic()
        if self.config.capture_delay_ms:
            time.sleep(self.config.capture_delay_ms / 1000.0)
        fixture = _load_scene_source(scene_source, captured_at=snap.captured_at)
        if fixture is None:
            fixture = SceneFixture(frame=_DEFAULT_FRAME)
        frame = CapturedFrame(meta=fixture.frame, annotations=fixture, pixels=None)
        timings.append(StageTiming(Stage.CAPTURE, (time.monotonic() - started) * 1000.0))

        # Concurrent three-way analysis.
        try:
            analysis = analyze_frame(
                frame,
                self.backends.detector,
                self.backends.ocr,
                self.backends.face,
                timeout_ms=self.config.ml_timeout_ms,
            )
        except AllBackendsFailed as exc:
            trace["error"] = f"AllBackendsFailed: {exc}"
            return self._fallback_turn(turn_id, trace, timings, frame)
        timings.append(analysis.timing)
        trace["ml_calls"] = 3
        trace["ml_warnings"] = analysis.warnings

        # Phrase generation: associate, resolve, assemble.
        started = time.monotonic()
        graph = associate(
            analysis.entities + analysis.faces,
            analysis.texts,
            frame.meta,
            overlap_threshold=cfg.overlap_threshold,
            max_children=cfg.max_children,
            overlap_mode=cfg.overlap_mode,
            exclusive_children=cfg.exclusive_children,
            min_confidence=cfg.min_confidence,
        )
        resolutions = resolve(
            matches, graph, snap, cfg, history=self.history.pairs, mode=self.config.mode
        )
        trace["resolutions"] = resolution_trace(query, resolutions)
        try:
            if self.config.mode == "v2":
                assembled = assemble_v2(query, snap, graph, self.history, cfg)
            else:
                assembled = assemble_v1(query, resolutions, self.history)
        except NothingToReplace as exc:
            timings.append(StageTiming(Stage.PHRASE_GEN, (time.monotonic() - started) * 1000.0))
            trace["error"] = f"NothingToReplace: {exc}"
            return self._fallback_turn(turn_id, trace, timings, frame)
        timings.append(StageTiming(Stage.PHRASE_GEN, (time.monotonic() - started) * 1000.0))
        trace["payload"] = assembled.payload
        trace["query_text"] = assembled.query_text
        trace["replacements"] = [
            {"span": list(r.span), "phrase": r.phrase} for r in assembled.replacements
        ]
        return self._complete_turn(turn_id, query, assembled, trace, timings, frame)

    def _complete_turn(
        self,
        turn_id: str,
        query: str,
        assembled: AssembledQuery,
        trace: dict,
        timings: list[StageTiming],
        frame: Optional[CapturedFrame] = None,
    ) -> TurnResult:
        try:
            answer, explanation, timing = complete(
                assembled, self.backends.chat, timeout_ms=self.config.completion_timeout_ms
            )
        except CompletionFailed as exc:
            trace["error"] = f"CompletionFailed: {exc}"
            return self._fallback_turn(turn_id, trace, timings, frame)
        timings.append(timing)
        self.history = self.history.push(query, answer)
        self._purge(frame)
        return TurnResult(
            turn_id=turn_id,
            answer=answer,
            explanation=explanation,
            trace=trace,
            timings=timings,
            fallback=False,
        )

    def _fallback_turn(
        self,
        turn_id: str,
        trace: dict,
        timings: list[StageTiming],
        frame: Optional[CapturedFrame],
    ) -> TurnResult:
        # Fallback turns add no anaphoric value; history stays untouched.
        self._purge(frame)
        return TurnResult(
            turn_id=turn_id,
            answer=FALLBACK_SENTENCE,
            explanation=None,
            trace=trace,
            timings=timings,
            fallback=True,
        )

    @staticmethod
    def _purge(frame: Optional[CapturedFrame]) -> None:
        if frame is not None and frame.meta.ephemeral:
            frame.purge()


def _words(text: str) -> list[str]:
    out, current = [], []
    for ch in text:
        if ch.isalpha():
            current.append(ch)
        elif current:
            out.append("".join(current))
            current = []
    if current:
        out.append("".join(current))
    return out


_DEFAULT_FRAME = FrameMeta(width=1920, height=1080)
