"""Tests for report serialization."""
import json
from datetime import datetime, timezone

import pytest

from app.core.config import settings
from app.schemas.evidence import Hypotheses
from app.services import reports


class TestManifest:
    def test_source_date_epoch_fixes_the_timestamp(self, monkeypatch):
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
        manifest = reports.build_manifest(["evidence", "tables", "1"], seed=7)
        assert manifest.timestamp.isoformat() == "2023-11-14T22:13:20+00:00"
        assert manifest.command == "evidence tables 1"
        assert manifest.version == settings.VERSION

    def test_without_source_date_epoch_uses_the_configured_epoch(self, monkeypatch):
        monkeypatch.delenv("SOURCE_DATE_EPOCH", raising=False)
        first = reports.build_manifest(["simulate", "walk"], seed=1)
        second = reports.build_manifest(["simulate", "walk"], seed=1)
        assert first == second
        assert first.timestamp == datetime.fromtimestamp(settings.MANIFEST_EPOCH, tz=timezone.utc)

    def test_input_digests(self, monkeypatch):
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
        manifest = reports.build_manifest(["monitor"], inputs={"events.csv": b"abc"})
        assert manifest.input_digests == {
            "events.csv": "sha256:ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        }

    def test_manifest_line(self, monkeypatch):
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
        line = reports.manifest_line(reports.build_manifest(["walk"], seed=1))
        assert json.loads(line)["manifest"]["seed"] == 1


class TestJson:
    def test_report_and_manifest(self, monkeypatch):
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
        text = reports.to_json(Hypotheses(theta0=0.0, theta1=-0.5), reports.build_manifest(["x"]))
        document = json.loads(text)
        assert document["report"] == {"theta0": 0.0, "theta1": -0.5}
        assert "manifest" in document

    def test_lists_of_models(self):
        text = reports.to_json([Hypotheses(theta0=0.0, theta1=1.0)])
        assert json.loads(text)["report"] == [{"theta0": 0.0, "theta1": 1.0}]

    def test_full_precision(self):
        value = 0.1 + 0.2
        line = reports.json_line(Hypotheses(theta0=0.0, theta1=value))
        assert json.loads(line)["theta1"] == value


class TestFormatting:
    @pytest.mark.parametrize("value, expected", [(0.05, "1/20"), (0.125, "1/8"), (20.0, "20"), (1.0, "1")])
    def test_ratio(self, value, expected):
        assert reports.ratio(value) == expected

    @pytest.mark.parametrize("value, expected", [(31.13, "32"), (32.0, "32"), (None, ""), (float("inf"), "inf")])
    def test_events_round_up(self, value, expected):
        assert reports.events(value) == expected

    def test_probability(self):
        assert reports.probability(0.037254) == "0.0373"
        assert reports.probability(None) == ""

    def test_aligned_table(self):
        text = reports.to_table(["k", "alpha"], [["8", "0.0882"], ["64", "0.0119"]])
        lines = text.splitlines()
        assert lines[0] == " k   alpha"
        assert lines[1] == "--  ------"
        assert lines[3] == "64  0.0119"

    def test_csv(self):
        assert reports.to_csv(["a", "b"], [[1, 2.5]]) == "a,b\n1,2.5\n"
