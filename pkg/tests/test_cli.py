import json

import pytest

from deictic.cli import build_parser, main
from conftest import GOLDEN_A_QUERY, fixture_path


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


class TestResolve:
    def test_one_shot_resolve(self, capsys):
        code, out = run_cli(
            capsys,
            "resolve",
            "--scene", fixture_path("mango"),
            "--gaze", "975,575",
            "--query", GOLDEN_A_QUERY,
        )
        assert code == 0
        assert "answer:" in out
        assert "fallback: False" in out

    def test_trace_flag_prints_json(self, capsys):
        code, out = run_cli(
            capsys,
            "resolve",
            "--scene", fixture_path("mango"),
            "--gaze", "975,575",
            "--query", GOLDEN_A_QUERY,
            "--trace",
        )
        trace = json.loads(out[out.index("{"):])
        assert trace["payload"].startswith("How much is a bottle")

    def test_v2_mode(self, capsys):
        code, out = run_cli(
            capsys,
            "resolve",
            "--scene", fixture_path("salt_boxes"),
            "--gaze", "960,540",
            "--query", "What's the price difference between these?",
            "--mode", "v2",
            "--trace",
        )
        trace = json.loads(out[out.index("{"):])
        assert "What's the price difference between these?" in trace["payload"]

    def test_bad_pixel_pair_exits(self, capsys):
        with pytest.raises(SystemExit):
            main(["resolve", "--scene", fixture_path("mango"), "--gaze", "oops", "--query", "x"])


class TestCorpusStats:
    def test_bundled_part3(self, capsys):
        code, out = run_cli(capsys, "corpus", "stats", "--bundled", "part3")
        stats = json.loads(out)
        assert stats["entries"] == 32
        assert stats["taxonomy"]["this"] == 16

    def test_file_argument(self, capsys, tmp_path):
        path = tmp_path / "mini.jsonl"
        path.write_text(
            json.dumps({"id": "diary-99", "source": "diary", "speaker": "R1", "query": "Is this it?"}) + "\n"
        )
        code, out = run_cli(capsys, "corpus", "stats", "--file", str(path))
        stats = json.loads(out)
        assert stats["taxonomy"] == {k: (1 if k in ("this", "it") else 0) for k in stats["taxonomy"]}


class TestReplay:
    def test_session_replay_file(self, capsys, tmp_path):
        spec = {
            "mode": "v1",
            "turns": [
                {"query": GOLDEN_A_QUERY, "scene": fixture_path("mango"), "gaze_px": [975, 575]},
                {"query": "Set a timer", "scene": None, "gaze_px": [0, 0]},
            ],
        }
        path = tmp_path / "session.json"
        path.write_text(json.dumps(spec))
        code, out = run_cli(capsys, "replay", "--session", str(path))
        assert code == 0
        assert out.count("fallback=False") == 2

    def test_corpus_replay_with_fixture_map(self, capsys, tmp_path):
        fixture_map = {
            "part3-01": {"scene": fixture_path("salt_boxes"), "gaze_px": [700, 550]},
        }
        map_path = tmp_path / "map.json"
        map_path.write_text(json.dumps(fixture_map))
        code, out = run_cli(
            capsys, "corpus", "replay", "--bundled", "part3", "--fixture-map", str(map_path), "--json"
        )
        report = json.loads(out)
        assert report["replayed"] == 1
        assert report["skipped"] == 31


def test_parser_has_all_subcommands():
    parser = build_parser()
    text = parser.format_help()
    for name in ("serve", "resolve", "replay", "corpus"):
        assert name in text
