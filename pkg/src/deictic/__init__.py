"""Multimodal pronoun disambiguation for voice queries.

Fuses a text query, an annotated visual scene, gaze/pointing coordinates,
and conversation history into either a pronoun-replaced query (v1) or an
engineered prompt (v2) for a pluggable chat-completion backend.
"""

from .assembly import (
    AssembledQuery,
    AssemblyMode,
    ConversationHistory,
    assemble_v1,
    assemble_v2,
    push_history,
)
from .backends import (
    AnalysisResult,
    BackendKind,
    BackendSet,
    BackendSpec,
    CapturedFrame,
    FixtureFaceRecognizer,
    FixtureObjectDetector,
    FixtureOcrEngine,
    ScriptedChat,
    Stage,
    StageTiming,
    analyze_frame,
    build_backend_set,
    complete,
)
from .capture import (
    GAZE_SPHERE_DEPTH_M,
    CameraModel,
    GazeSample,
    InputSnapshot,
    PointingSample,
    backproject,
    project,
    snapshot,
)
from .corpus import (
    CorpusEntry,
    CorpusStats,
    compute_stats,
    load_bundled_corpus,
    load_corpus,
    replay_corpus,
)
from .errors import (
    AllBackendsFailed,
    BehindCamera,
    CompletionFailed,
    DegenerateBox,
    DeicticError,
    NothingToReplace,
    SchemaViolation,
    SessionPhaseError,
    TimeoutExceeded,
    UnknownPronoun,
)
from .pronouns import (
    PronounClass,
    PronounMatch,
    Plurality,
    ResolutionStrategy,
    classify,
    count_taxonomy_pronouns,
    detect_pronouns,
)
from .resolver import (
    MatchResolution,
    ReferentSource,
    ResolvedReferent,
    ResolverConfig,
    resolve,
    resolve_plural,
    resolve_singular,
)
from .scene import (
    BBox,
    DetectedEntity,
    EntityKind,
    FrameMeta,
    OcrText,
    SceneFixture,
    SceneGraph,
    SceneParent,
    associate,
    bundled_fixture_path,
    expand_plural_region,
    load_scene_fixture,
    nearest_texts,
    overlap_ratio,
    parse_scene_fixture,
)
from .session import (
    FALLBACK_SENTENCE,
    WAKE_PHRASE,
    WAKE_REPLY,
    Phase,
    Session,
    SessionConfig,
    TurnResult,
)

__version__ = "0.1.0"
