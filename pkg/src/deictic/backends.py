"""Pluggable ML and chat backends, plus deterministic fixture-driven mocks.

The three analysis channels (object detection, OCR, face recognition) are
issued concurrently and joined, so the fan-out cost is the slowest call
rather than the sum. A failed channel degrades to empty results with a
recorded warning; only all three failing raises. Adapters normalize every
wire format into the scene fixture schema so the core never sees vendor
shapes, and no adapter retains frame pixel data after a turn completes.
"""

from __future__ import annotations

import base64
import hashlib
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeoutError
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional

from .assembly import AssembledQuery
from .errors import AllBackendsFailed, CompletionFailed, SchemaViolation, TimeoutExceeded
from .scene import (
    DetectedEntity,
    FrameMeta,
    OcrText,
    SceneFixture,
    parse_scene_fixture,
)

logger = logging.getLogger(__name__)

# Aligned with the end-to-end reply budget of ten seconds.
DEFAULT_TIMEOUT_MS = 10_000

EXPLANATION_MARKER = "Explanation:"


class Stage(Enum):
    CAPTURE = "capture"
    ML_FANOUT = "ml_fanout"
    PHRASE_GEN = "phrase_gen"
    COMPLETION = "completion"


@dataclass(frozen=True)
class StageTiming:
    stage: Stage
    elapsed_ms: float

    def __post_init__(self):
        if self.elapsed_ms < 0:
            raise ValueError("elapsed_ms must be >= 0")

    def to_dict(self) -> dict:
        return {"stage": self.stage.value, "elapsed_ms": round(self.elapsed_ms, 3)}


@dataclass
class CapturedFrame:
    """One captured field-of-view: metadata, annotations, optional pixels.

    At desk scale the fixture annotations stand in for live pixels. ``purge``
    drops the pixel payload once a query answer is produced (ephemeral
    frames are never retained).
    """

    meta: FrameMeta
    annotations: Optional[SceneFixture] = None
    pixels: Optional[bytes] = None

    def purge(self) -> None:
        self.pixels = None


class BackendKind(Enum):
    OBJECT_DETECTOR = "object_detector"
    OCR_ENGINE = "ocr_engine"
    FACE_RECOGNIZER = "face_recognizer"
    CHAT_COMPLETER = "chat_completer"


@dataclass(frozen=True)
class BackendSpec:
    """Declarative backend selection: a mock fixture or an HTTP endpoint."""

    kind: BackendKind
    transport: Mapping
    model_id: str = ""

    def __post_init__(self):
        timeout = self.transport.get("timeout_ms")
        if timeout is not None and timeout <= 0:
            raise ValueError("timeout_ms must be positive")


def _sleep_ms(delay_ms: float) -> None:
    if delay_ms > 0:
        time.sleep(delay_ms / 1000.0)


class FixtureChannel:
    """Shared behavior for fixture-backed mock channels.

    Reads its result list from the frame's attached annotations (or from a
    fixture file bound at construction), with injectable latency and failure
    for timing and degradation tests.
    """

    def __init__(self, fixture: Optional[SceneFixture] = None, *, delay_ms: float = 0.0, fail: bool = False):
        self.fixture = fixture
        self.delay_ms = delay_ms
        self.fail = fail
        self.call_count = 0

    def _source(self, frame: CapturedFrame) -> SceneFixture:
        fixture = frame.annotations if frame.annotations is not None else self.fixture
        if fixture is None:
            raise ValueError("no fixture bound to frame or channel")
        return fixture

    def _enter(self) -> None:
        self.call_count += 1
        _sleep_ms(self.delay_ms)
        if self.fail:
            raise RuntimeError(f"{type(self).__name__} injected failure")


class FixtureObjectDetector(FixtureChannel):
    def detect(self, frame: CapturedFrame) -> list[DetectedEntity]:
        self._enter()
        return self._source(frame).objects()


class FixtureOcrEngine(FixtureChannel):
    def recognize(self, frame: CapturedFrame) -> list[OcrText]:
        self._enter()
        return list(self._source(frame).texts)


class FixtureFaceRecognizer(FixtureChannel):
    def identify(self, frame: CapturedFrame) -> list[DetectedEntity]:
        self._enter()
        return self._source(frame).faces()


class ScriptedChat:
    """Hermetic chat backend mapping payload checksums to canned replies.

    Scripts are keyed by payload text (hashed internally) or directly by
    sha256 hex digest. Unscripted payloads get ``default_reply`` when set,
    otherwise the call fails like a backend error would.
    """

    def __init__(
        self,
        scripts: Optional[Mapping[str, str]] = None,
        *,
        checksum_scripts: Optional[Mapping[str, str]] = None,
        default_reply: Optional[str] = None,
        delay_ms: float = 0.0,
        fail: bool = False,
    ):
        self._by_checksum = dict(checksum_scripts or {})
        for payload, reply in (scripts or {}).items():
            self._by_checksum[payload_checksum(payload)] = reply
        self.default_reply = default_reply
        self.delay_ms = delay_ms
        self.fail = fail
        self.call_count = 0

    def complete(self, payload: str) -> str:
        self.call_count += 1
        _sleep_ms(self.delay_ms)
        if self.fail:
            raise RuntimeError("ScriptedChat injected failure")
        reply = self._by_checksum.get(payload_checksum(payload))
        if reply is not None:
            return reply
        if self.default_reply is not None:
            return self.default_reply
        raise CompletionFailed("no scripted reply for payload")


def payload_checksum(payload: str) -> str:
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# HTTP adapters. Request/response mapping is documented in docs/backends.md;
# every response is normalized to the scene fixture schema.
# ---------------------------------------------------------------------------


class _HttpChannel:
    def __init__(self, url: str, *, auth_token: Optional[str] = None, timeout_ms: float = DEFAULT_TIMEOUT_MS):
        self.url = url
        self.auth_token = auth_token
        self.timeout_ms = timeout_ms
        self.call_count = 0

    def _post(self, payload: dict) -> dict:
        import httpx

        self.call_count += 1
        headers = {}
        if self.auth_token:
            headers["Authorization"] = f"Bearer {self.auth_token}"
        response = httpx.post(self.url, json=payload, headers=headers, timeout=self.timeout_ms / 1000.0)
        response.raise_for_status()
        return response.json()

    @staticmethod
    def _frame_payload(frame: CapturedFrame) -> dict:
        return {
            "frame": {"width": frame.meta.width, "height": frame.meta.height},
            "image_b64": base64.b64encode(frame.pixels).decode("ascii") if frame.pixels else None,
        }


class HttpObjectDetector(_HttpChannel):
    def detect(self, frame: CapturedFrame) -> list[DetectedEntity]:
        data = self._post(self._frame_payload(frame))
        fixture = parse_scene_fixture(
            {"frame": {"width": frame.meta.width, "height": frame.meta.height}, "objects": data.get("objects", [])}
        )
        return fixture.objects()


class HttpOcrEngine(_HttpChannel):
    def recognize(self, frame: CapturedFrame) -> list[OcrText]:
        data = self._post(self._frame_payload(frame))
        fixture = parse_scene_fixture(
            {"frame": {"width": frame.meta.width, "height": frame.meta.height}, "texts": data.get("texts", [])}
        )
        return list(fixture.texts)


class HttpFaceRecognizer(_HttpChannel):
    def identify(self, frame: CapturedFrame) -> list[DetectedEntity]:
        data = self._post(self._frame_payload(frame))
        fixture = parse_scene_fixture(
            {"frame": {"width": frame.meta.width, "height": frame.meta.height}, "faces": data.get("faces", [])}
        )
        return fixture.faces()


class HttpChatCompleter(_HttpChannel):
    def __init__(self, url: str, *, model_id: str = "", **kwargs):
        super().__init__(url, **kwargs)
        self.model_id = model_id

    def complete(self, payload: str) -> str:
        data = self._post({"prompt": payload, "model": self.model_id})
        if "text" not in data:
            raise CompletionFailed("chat endpoint returned no 'text' field")
        return str(data["text"])


@dataclass
class AnalysisResult:
    entities: list[DetectedEntity]
    texts: list[OcrText]
    faces: list[DetectedEntity]
    timing: StageTiming
    warnings: list[str] = field(default_factory=list)


def analyze_frame(
    frame: CapturedFrame,
    detector,
    ocr,
    face,
    *,
    timeout_ms: float = DEFAULT_TIMEOUT_MS,
) -> AnalysisResult:
    """Issue the three analysis requests concurrently and join them.

    The fan-out timing is the wall clock around the join, i.e. roughly the
    slowest channel. A channel that raises or exceeds ``timeout_ms``
    contributes empty results and a warning.

    Raises:
        AllBackendsFailed: when every channel errors.
    """
    started = time.monotonic()
    warnings: list[str] = []
    results: dict[str, list] = {"objects": [], "texts": [], "faces": []}
    calls = {
        "objects": lambda: detector.detect(frame),
        "texts": lambda: ocr.recognize(frame),
        "faces": lambda: face.identify(frame),
    }
    failures = 0
    with ThreadPoolExecutor(max_workers=3) as executor:
        futures = {name: executor.submit(call) for name, call in calls.items()}
        deadline = started + timeout_ms / 1000.0
        for name, future in futures.items():
            try:
                remaining = max(0.0, deadline - time.monotonic())
                results[name] = future.result(timeout=remaining)
            except FutureTimeoutError:
                failures += 1
                future.cancel()
                warnings.append(f"{name}: {TimeoutExceeded.__name__} after {timeout_ms:g} ms")
                logger.warning("analysis channel %s timed out", name)
            except Exception as exc:
                failures += 1
                warnings.append(f"{name}: {type(exc).__name__}: {exc}")
                logger.warning("analysis channel %s failed: %s", name, exc)
    if failures == len(calls):
        raise AllBackendsFailed("; ".join(warnings))
    elapsed_ms = (time.monotonic() - started) * 1000.0
    return AnalysisResult(
        entities=list(results["objects"]),
        texts=list(results["texts"]),
        faces=list(results["faces"]),
        timing=StageTiming(Stage.ML_FANOUT, elapsed_ms),
        warnings=warnings,
    )


def complete(
    assembled: AssembledQuery,
    chat,
    *,
    timeout_ms: float = DEFAULT_TIMEOUT_MS,
) -> tuple[str, Optional[str], StageTiming]:
    """Run the chat backend and split its reply into answer and explanation.

    The explanation is whatever follows the first ``Explanation:`` marker,
    when present.

    Raises:
        CompletionFailed: backend error, timeout, or missing script.
    """
    if not assembled.payload:
        raise CompletionFailed("empty payload")
    started = time.monotonic()
    with ThreadPoolExecutor(max_workers=1) as executor:
        future = executor.submit(chat.complete, assembled.payload)
        try:
            raw = future.result(timeout=timeout_ms / 1000.0)
        except FutureTimeoutError as exc:
            future.cancel()
            raise CompletionFailed(f"completion timed out after {timeout_ms:g} ms") from exc
        except CompletionFailed:
            raise
        except Exception as exc:
            raise CompletionFailed(f"{type(exc).__name__}: {exc}") from exc
    elapsed_ms = (time.monotonic() - started) * 1000.0
    answer, explanation = split_explanation(raw)
    return answer, explanation, StageTiming(Stage.COMPLETION, elapsed_ms)


def split_explanation(raw: str) -> tuple[str, Optional[str]]:
    if EXPLANATION_MARKER in raw:
        answer, _, explanation = raw.partition(EXPLANATION_MARKER)
        return answer.strip(), explanation.strip() or None
    return raw.strip(), None


@dataclass
class BackendSet:
    """The four adapters one session needs."""

    detector: object
    ocr: object
    face: object
    chat: object


_ENV_URLS = {
    BackendKind.OBJECT_DETECTOR: "DEICTIC_DETECTOR_URL",
    BackendKind.OCR_ENGINE: "DEICTIC_OCR_URL",
    BackendKind.FACE_RECOGNIZER: "DEICTIC_FACE_URL",
    BackendKind.CHAT_COMPLETER: "DEICTIC_CHAT_URL",
}

_HTTP_CLASSES = {
    BackendKind.OBJECT_DETECTOR: HttpObjectDetector,
    BackendKind.OCR_ENGINE: HttpOcrEngine,
    BackendKind.FACE_RECOGNIZER: HttpFaceRecognizer,
}

_FIXTURE_CLASSES = {
    BackendKind.OBJECT_DETECTOR: FixtureObjectDetector,
    BackendKind.OCR_ENGINE: FixtureOcrEngine,
    BackendKind.FACE_RECOGNIZER: FixtureFaceRecognizer,
}


def build_backend(spec: BackendSpec, *, env: Optional[Mapping[str, str]] = None):
    """Instantiate one adapter from its spec, honoring env URL overrides."""
    env = os.environ if env is None else env
    transport = dict(spec.transport)
    kind = transport.get("kind", "mock")

    url_override = env.get(_ENV_URLS[spec.kind])
    if url_override:
        kind = "http"
        transport.setdefault("url", url_override)
        transport["url"] = url_override

    if kind == "mock":
        fixture = None
        path = transport.get("path")
        if path:
            from .scene import load_scene_fixture

            fixture = load_scene_fixture(path)
        delay_ms = float(transport.get("delay_ms", 0.0))
        if spec.kind is BackendKind.CHAT_COMPLETER:
            return ScriptedChat(
                scripts=transport.get("scripts"),
                checksum_scripts=transport.get("checksum_scripts"),
                default_reply=transport.get("default_reply"),
                delay_ms=delay_ms,
            )
        return _FIXTURE_CLASSES[spec.kind](fixture, delay_ms=delay_ms)

    if kind == "http":
        url = transport.get("url")
        if not url:
            raise SchemaViolation(f"http transport for {spec.kind.value} needs a url")
        token = transport.get("auth") or env.get("DEICTIC_API_KEY")
        timeout_ms = float(transport.get("timeout_ms", DEFAULT_TIMEOUT_MS))
        if spec.kind is BackendKind.CHAT_COMPLETER:
            return HttpChatCompleter(url, model_id=spec.model_id, auth_token=token, timeout_ms=timeout_ms)
        return _HTTP_CLASSES[spec.kind](url, auth_token=token, timeout_ms=timeout_ms)

    raise SchemaViolation(f"unknown transport kind: {kind!r}")


def build_backend_set(config: Mapping, *, env: Optional[Mapping[str, str]] = None) -> BackendSet:
    """Build all four adapters from a backends config mapping.

    Shape: ``{"detector": {...}, "ocr": {...}, "face": {...}, "chat": {...}}``
    where each value is a transport mapping (see docs/backends.md). Missing
    sections default to frame-bound mocks / a scripted chat with a generic
    reply.
    """
    def spec_for(key: str, kind: BackendKind) -> BackendSpec:
        section = dict(config.get(key, {}))
        model_id = section.pop("model_id", "")
        return BackendSpec(kind=kind, transport=section or {"kind": "mock"}, model_id=model_id)

    chat_spec = spec_for("chat", BackendKind.CHAT_COMPLETER)
    if chat_spec.transport.get("kind", "mock") == "mock" and not any(
        k in chat_spec.transport for k in ("scripts", "checksum_scripts", "default_reply")
    ):
        chat_spec = BackendSpec(
            kind=BackendKind.CHAT_COMPLETER,
            transport={**chat_spec.transport, "default_reply": "Scripted reply.\nExplanation: scripted backend default."},
            model_id=chat_spec.model_id,
        )

    return BackendSet(
        detector=build_backend(spec_for("detector", BackendKind.OBJECT_DETECTOR), env=env),
        ocr=build_backend(spec_for("ocr", BackendKind.OCR_ENGINE), env=env),
        face=build_backend(spec_for("face", BackendKind.FACE_RECOGNIZER), env=env),
        chat=build_backend(chat_spec, env=env),
    )
