"""Plural pronouns, person pronouns, and the v2 engineered prompt.

"these" expands the gaze point into a half-frame region and phrases every
parent at least 70% inside it. "she" consults only face parents. In v2 the
pronoun is never replaced: the raw query, the input pixels, and the scene
context all go into one engineered prompt and the language model fuses
them.
"""

from deictic import (
    BackendSet,
    FixtureFaceRecognizer,
    FixtureObjectDetector,
    FixtureOcrEngine,
    InputSnapshot,
    ScriptedChat,
    Session,
    SessionConfig,
    bundled_fixture_path,
    load_scene_fixture,
)


def fresh_session(mode="v1"):
    return Session(
        backends=BackendSet(
            FixtureObjectDetector(),
            FixtureOcrEngine(),
            FixtureFaceRecognizer(),
            ScriptedChat(default_reply="Scripted answer.\nExplanation: demo backend."),
        ),
        config=SessionConfig(mode=mode),
    )


salt = load_scene_fixture(bundled_fixture_path("salt_boxes"))
magazine = load_scene_fixture(bundled_fixture_path("magazine"))

print("== plural: gaze between two boxes ==")
session = fresh_session()
session.wake("hey glass")
result = session.run_turn(
    "What's the price difference between these?", salt, InputSnapshot(gaze_px=(960, 540))
)
print("referent:", result.trace["resolutions"][0]["phrase"])
print("payload: ", result.trace["payload"])

print("\n== person pronoun: only faces count ==")
session = fresh_session()
session.wake("hey glass")
result = session.run_turn("Who is she?", magazine, InputSnapshot(gaze_px=(975, 375)))
print("referent:", result.trace["resolutions"][0]["phrase"])
print("payload: ", result.trace["payload"])

print("\n== v2: multiple pronouns survive because nothing is replaced ==")
session = fresh_session(mode="v2")
session.wake("hey glass")
result = session.run_turn(
    "Tell me the price difference between this and that.", salt, InputSnapshot(gaze_px=(700, 550))
)
print(result.trace["payload"])
