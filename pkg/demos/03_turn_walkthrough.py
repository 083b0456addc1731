"""One full v1 turn, stage by stage.

The session wakes on the trigger phrase, gates frame analysis on pronoun
presence, runs the three ML channels concurrently, resolves the pronoun
against the scene, splices the referent phrase into the query, and sends
the result to the chat backend. The trace records every decision.
"""

import json

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

# Hermetic chat: the exact assembled payload maps to a canned answer.
PAYLOAD = "How much is a bottle with text that says Naked Mighty Mango 290 Calories?"
chat = ScriptedChat(
    {PAYLOAD: "A Naked Mighty Mango juice is $3.50.\nExplanation: the user looked at a bottle when asking this question."},
    default_reply="I could not find that.\nExplanation: no scripted reply.",
)

session = Session(
    backends=BackendSet(FixtureObjectDetector(), FixtureOcrEngine(), FixtureFaceRecognizer(), chat),
    config=SessionConfig(mode="v1"),
)

print("user:  Hey Glass")
print("reply:", session.wake("Hey Glass"))

scene = load_scene_fixture(bundled_fixture_path("mango"))
snap = InputSnapshot(gaze_px=(975, 575))
result = session.run_turn("How much is this?", scene, snap)

print("\nanswer:     ", result.answer)
print("explanation:", result.explanation)
print("fallback:   ", result.fallback)
print("stage times:", {t.stage.value: round(t.elapsed_ms, 1) for t in result.timings})

print("\nresolution trace:")
print(json.dumps(result.trace["resolutions"], indent=2))

print("\npayload sent to the chat backend:")
print(" ", result.trace["payload"])

# A follow-up turn sees the first pair in its history block. The gaze now
# rests on empty background, so the anaphoric "it" routes through history:
# the previous answer is spliced in verbatim and the chat model does the link.
session.wake("hey glass")
follow_up = session.run_turn("Set a reminder to buy it", scene, InputSnapshot(gaze_px=(1700, 1000)))
print("\nfollow-up payload (note the Q:/A: history lines and the history-routed 'it'):")
print(follow_up.trace["payload"])
