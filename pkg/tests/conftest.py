import pytest

from deictic import (
    BackendSet,
    FixtureFaceRecognizer,
    FixtureObjectDetector,
    FixtureOcrEngine,
    ScriptedChat,
    bundled_fixture_path,
    load_scene_fixture,
)

GOLDEN_A_QUERY = "How much is this?"
GOLDEN_A_PAYLOAD = "How much is a bottle with text that says Naked Mighty Mango 290 Calories?"
GOLDEN_A_ANSWER = "A Naked Mighty Mango juice is $3.50."
GOLDEN_B_QUERY = "What is this?"
GOLDEN_B_PHRASE = "packaged item with text that says orion pocachip original"


def fixture_path(name: str) -> str:
    return str(bundled_fixture_path(name))


def make_backends(chat=None, *, delays=(0.0, 0.0, 0.0), fail=()) -> BackendSet:
    """Fixture-bound mock backends with optional per-channel delay/failure."""
    return BackendSet(
        detector=FixtureObjectDetector(delay_ms=delays[0], fail="detector" in fail),
        ocr=FixtureOcrEngine(delay_ms=delays[1], fail="ocr" in fail),
        face=FixtureFaceRecognizer(delay_ms=delays[2], fail="face" in fail),
        chat=chat
        or ScriptedChat(default_reply="Scripted answer.\nExplanation: scripted test default."),
    )


@pytest.fixture
def mango_scene():
    return load_scene_fixture(fixture_path("mango"))


@pytest.fixture
def pocachip_scene():
    return load_scene_fixture(fixture_path("pocachip"))


@pytest.fixture
def salt_scene():
    return load_scene_fixture(fixture_path("salt_boxes"))


@pytest.fixture
def magazine_scene():
    return load_scene_fixture(fixture_path("magazine"))


@pytest.fixture
def whiteboard_scene():
    return load_scene_fixture(fixture_path("whiteboard"))


@pytest.fixture
def empty_scene():
    return load_scene_fixture(fixture_path("empty"))
