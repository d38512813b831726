"""Command-line interface behaviour and exit codes."""

from __future__ import annotations

import csv
import json

import pytest

from ontoclean_workbench.cli import main
from ontoclean_workbench.engine import labeling_to_json
from ontoclean_workbench.harness import load_benchmark
from ontoclean_workbench.labeler import render_labels
from ontoclean_workbench.taxonomy import serialize_taxonomy


@pytest.fixture
def pizza_files(tmp_path):
    benchmark = load_benchmark("pizza")
    taxonomy_path = tmp_path / "taxonomy.json"
    labels_path = tmp_path / "labels.json"
    taxonomy_path.write_text(serialize_taxonomy(benchmark.taxonomy, "json"), "utf-8")
    labels_path.write_text(json.dumps(labeling_to_json(benchmark.gold)), "utf-8")
    return benchmark, taxonomy_path, labels_path


class TestCheck:
    def test_gold_passes(self, pizza_files, capsys):
        _, taxonomy_path, labels_path = pizza_files
        assert main(["check", str(taxonomy_path), str(labels_path)]) == 0
        assert json.loads(capsys.readouterr().out) == []

    def test_flipped_label_fails(self, pizza_files, tmp_path, capsys):
        benchmark, taxonomy_path, _ = pizza_files
        doc = labeling_to_json(benchmark.gold)
        doc["Margherita"]["I"] = "-"  # +I ancestors above it
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(doc), "utf-8")
        assert main(["check", str(taxonomy_path), str(bad)]) == 1
        violations = json.loads(capsys.readouterr().out)
        assert violations and violations[0]["subject"] == "Margherita"

    def test_individuation_flag(self, tmp_path, capsys):
        taxonomy_path = tmp_path / "t.json"
        labels_path = tmp_path / "l.json"
        taxonomy_path.write_text(json.dumps({"classes": [{"id": "Water"}], "edges": []}))
        labels_path.write_text(json.dumps({"Water": {"I": "-"}}))
        assert main(["check", str(taxonomy_path), str(labels_path)]) == 0
        capsys.readouterr()
        assert main(["check", str(taxonomy_path), str(labels_path), "--individuation"]) == 1
        violations = json.loads(capsys.readouterr().out)
        assert violations[0]["kind"] == "SortalIndividuation"

    def test_missing_file_is_usage_error(self, tmp_path):
        assert main(["check", str(tmp_path / "nope.json"), str(tmp_path / "nope2.json")]) == 2


class TestRender:
    def test_flat(self, pizza_files, capsys):
        _, taxonomy_path, _ = pizza_files
        assert main(["render", str(taxonomy_path), "--flat"]) == 0
        lines = capsys.readouterr().out.strip("\n").split("\n")
        assert len(lines) == 16
        assert lines[0] == "Food"

    def test_hier_deterministic_per_seed(self, pizza_files, capsys):
        _, taxonomy_path, _ = pizza_files
        main(["render", str(taxonomy_path), "--hier", "--seed", "3"])
        first = capsys.readouterr().out
        main(["render", str(taxonomy_path), "--hier", "--seed", "3"])
        assert capsys.readouterr().out == first


class TestLabel:
    def test_label_with_fixture_endpoint(self, pizza_files, tmp_path, capsys):
        benchmark, taxonomy_path, _ = pizza_files
        fixtures = tmp_path / "fixtures"
        fixtures.mkdir()
        (fixtures / "default.txt").write_text(render_labels(benchmark.gold), "utf-8")
        out = tmp_path / "labels_out.json"
        code = main(
            [
                "label", str(taxonomy_path),
                "--endpoint", f"mock://{fixtures}",
                "--hier", "--seed", "0",
                "--out", str(out),
            ]
        )
        assert code == 0
        assert json.loads(out.read_text()) == labeling_to_json(benchmark.gold)

    def test_endpoint_resolution_order(self, pizza_files, tmp_path, monkeypatch, capsys):
        benchmark, taxonomy_path, _ = pizza_files
        fixtures = tmp_path / "fx"
        fixtures.mkdir()
        (fixtures / "default.txt").write_text(render_labels(benchmark.gold), "utf-8")
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"endpoint_url": "mock:///nonexistent", "model": "m"}))
        # env var beats the config file
        monkeypatch.setenv("ONTOCLEAN_LLM_ENDPOINT", f"mock://{fixtures}")
        assert main(["label", str(taxonomy_path), "--config", str(config)]) == 0

    def test_no_endpoint_is_an_error(self, pizza_files, monkeypatch, capsys):
        _, taxonomy_path, _ = pizza_files
        monkeypatch.delenv("ONTOCLEAN_LLM_ENDPOINT", raising=False)
        assert main(["label", str(taxonomy_path)]) == 2
        err = json.loads(capsys.readouterr().err.splitlines()[-1])
        assert "endpoint" in err["message"]


class TestEval:
    def test_eval_with_gold_fixture(self, tmp_path, capsys):
        benchmark = load_benchmark("pizza")
        fixtures = tmp_path / "fx"
        fixtures.mkdir()
        (fixtures / "default.txt").write_text(render_labels(benchmark.gold), "utf-8")
        out = tmp_path / "report.csv"
        code = main(
            [
                "eval", "--benchmark", "pizza", "--trials", "2",
                "--endpoint", f"mock://{fixtures}",
                "--out", str(out),
            ]
        )
        assert code == 0
        stdout = capsys.readouterr().out
        assert stdout.count("accuracy=1.000") == 4
        rows = list(csv.DictReader(out.read_text().splitlines()))
        assert len(rows) == 4
        assert all(row["accuracy"] == "1.000000" for row in rows)
        assert all(row["trials"] == "2" for row in rows)

    def test_eval_both_adds_pooled_report(self, tmp_path, capsys):
        fixtures = tmp_path / "fx"
        fixtures.mkdir()
        # one fixture per benchmark keyed by prompt hash is impractical here;
        # reuse a response that labels only classes present in each taxonomy
        text = render_labels(load_benchmark("pizza").gold) + "\n" + render_labels(
            load_benchmark("upper").gold
        )
        (fixtures / "default.txt").write_text(text, "utf-8")
        out = tmp_path / "report.json"
        code = main(
            [
                "eval", "--benchmark", "both", "--trials", "1",
                "--endpoint", f"mock://{fixtures}",
                "--out", str(out), "--report-format", "json",
            ]
        )
        assert code == 0
        doc = json.loads(out.read_text())
        descriptors = [r["config_descriptor"] for r in doc["reports"]]
        assert len(descriptors) == 3
        assert descriptors[-1].startswith("pooled|")
        pooled = doc["reports"][-1]["per_property"]
        assert all(pooled[p]["accuracy"] == 1.0 for p in "IURD")
