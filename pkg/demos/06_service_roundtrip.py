"""Driving the HTTP API in-process.

The service exposes sessions, turns, history, and traces. A real deployment
runs `deictic serve --bind 0.0.0.0:8000`; here the ASGI app is driven
directly so the demo needs no open port.
"""

import json

from fastapi.testclient import TestClient

from deictic import ScriptedChat
from deictic.resolver import ResolverConfig
from deictic.service import ServiceConfig, create_app
from deictic.backends import BackendSet, FixtureFaceRecognizer, FixtureObjectDetector, FixtureOcrEngine

PAYLOAD = "How much is a bottle with text that says Naked Mighty Mango 290 Calories?"
backends = BackendSet(
    FixtureObjectDetector(),
    FixtureOcrEngine(),
    FixtureFaceRecognizer(),
    ScriptedChat(
        {PAYLOAD: "A Naked Mighty Mango juice is $3.50.\nExplanation: the user looked at a bottle when asking this question."},
        default_reply="Generic answer.\nExplanation: demo.",
    ),
)
client = TestClient(create_app(ServiceConfig(mode="v1", resolver=ResolverConfig()), backends=backends))

print("healthz:", client.get("/healthz").json())

session_id = client.post("/v1/sessions", json={}).json()["session_id"]
print("session:", session_id)

print("wake:   ", client.post(f"/v1/sessions/{session_id}/wake", json={"utterance": "hey glass"}).json())

turn = client.post(
    f"/v1/sessions/{session_id}/query",
    json={"text": "How much is this?", "scene_ref": "mango", "gaze_px": [975, 575]},
).json()
print("\nanswer:", turn["answer"])
print("timings:", turn["timings"])

trace = client.get(f"/v1/turns/{turn['turn_id']}/trace").json()
print("\ntrace payload:", trace["payload"])
print("trace resolution source:", trace["resolutions"][0]["source"])

history = client.get(f"/v1/sessions/{session_id}/history").json()
print("\nhistory:", json.dumps(history, indent=2))
