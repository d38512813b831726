"""Benchmarks, accuracy scoring, trial runs, and report files."""

from __future__ import annotations

import csv
import json
import random
from dataclasses import replace

import pytest

from conftest import random_dag, random_total_labeling
from ontoclean_workbench.engine import (
    LabelSet,
    RigidityValue,
    check_constraints,
    labeling_from_json,
)
from ontoclean_workbench.errors import (
    AllTrialsFailed,
    ClassSetMismatch,
    UnknownBenchmark,
)
from ontoclean_workbench.harness import (
    AccuracyReport,
    PropertyCounts,
    compute_accuracy,
    load_benchmark,
    pool_reports,
    run_trials,
    write_report,
)
from ontoclean_workbench.labeler import (
    Flat,
    Hierarchical,
    LlmConfig,
    PromptConfig,
    render_labels,
)


def mock_config(directory) -> LlmConfig:
    return LlmConfig(endpoint_url=f"mock://{directory}", model="mock")


class TestLoadBenchmark:
    def test_unknown_name(self):
        with pytest.raises(UnknownBenchmark):
            load_benchmark("cheese")

    def test_pizza_covers_toppings_and_bases(self):
        benchmark = load_benchmark("pizza")
        assert "Pizza" in benchmark.taxonomy
        assert any("Topping" in cls for cls in benchmark.taxonomy.classes)
        assert any("Base" in cls for cls in benchmark.taxonomy.classes)

    def test_upper_covers_general_concepts(self):
        benchmark = load_benchmark("upper")
        for cls in ("Object", "Event", "Relation"):
            assert cls in benchmark.taxonomy

    def test_gold_is_total_and_clean(self):
        for name in ("pizza", "upper"):
            benchmark = load_benchmark(name)
            assert set(benchmark.gold) == set(benchmark.taxonomy.classes)
            assert all(ls.is_total for ls in benchmark.gold.values())
            assert check_constraints(benchmark.taxonomy, benchmark.gold) == []


class TestComputeAccuracy:
    def test_identical_prediction(self):
        gold = load_benchmark("pizza").gold
        counts = compute_accuracy(gold, gold)
        assert all(c.accuracy == 1.0 for c in counts.values())

    def test_single_flip_costs_one_property(self):
        gold = labeling_from_json(
            {
                "A": {"I": "+", "U": "+", "R": "+", "D": "-"},
                "B": {"I": "+", "U": "+", "R": "+", "D": "-"},
                "C": {"I": "+", "U": "+", "R": "+", "D": "-"},
                "D": {"I": "+", "U": "+", "R": "+", "D": "-"},
            }
        )
        pred = dict(gold)
        pred["B"] = LabelSet.from_json({"I": "+", "U": "-", "R": "+", "D": "-"})
        counts = compute_accuracy(pred, gold)
        assert counts["U"].accuracy == 0.75
        for prop in "IRD":
            assert counts[prop].accuracy == 1.0

    def test_missing_prediction_counts_incorrect(self):
        gold = load_benchmark("pizza").gold
        counts = compute_accuracy({}, gold)
        assert all(c.accuracy == 0.0 for c in counts.values())
        assert all(c.incorrect == len(gold) for c in counts.values())

    def test_extra_classes_rejected(self):
        gold = labeling_from_json({"A": {"I": "+", "U": "+", "R": "+", "D": "-"}})
        with pytest.raises(ClassSetMismatch):
            compute_accuracy(labeling_from_json({"Z": {"I": "+"}}), gold)

    def test_permutation_invariance_and_count_identity(self):
        rng = random.Random(43)
        for _ in range(50):
            t = random_dag(rng)
            gold = random_total_labeling(rng, t)
            pred = random_total_labeling(rng, t)
            counts = compute_accuracy(pred, gold)
            shuffled_items = list(pred.items())
            rng.shuffle(shuffled_items)
            assert compute_accuracy(dict(shuffled_items), gold) == counts
            for c in counts.values():
                assert c.correct + c.incorrect == len(t)
                assert 0.0 <= c.accuracy <= 1.0

    def test_one_flip_moves_exactly_one_count(self):
        # flipping between the gold value and a non-gold value moves exactly
        # one property's counts by one; wrong-to-wrong flips move nothing
        rng = random.Random(47)
        for _ in range(100):
            t = random_dag(rng)
            gold = random_total_labeling(rng, t)
            pred = random_total_labeling(rng, t)
            before = compute_accuracy(pred, gold)
            cls = rng.choice(t.classes)
            prop = rng.choice("IURD")
            symbols = ["+", "-", "~"] if prop in "UR" else ["+", "-"]
            current = pred[cls].get(prop).value
            flipped = rng.choice([s for s in symbols if s != current])
            pred2 = dict(pred)
            pred2[cls] = LabelSet.from_json({**pred[cls].to_json(), prop: flipped})
            after = compute_accuracy(pred2, gold)
            deltas = {
                p: (after[p].correct - before[p].correct, after[p].incorrect - before[p].incorrect)
                for p in "IURD"
            }
            gold_value = gold[cls].get(prop).value
            if gold_value in (current, flipped):
                assert sum(abs(dc) + abs(di) for dc, di in deltas.values()) == 2
                dc, di = deltas[prop]
                assert abs(dc) == 1 and di == -dc
            else:
                assert all(delta == (0, 0) for delta in deltas.values())


class TestRunTrials:
    def test_gold_fixture_scores_one(self, tmp_path):
        benchmark = load_benchmark("pizza")
        (tmp_path / "default.txt").write_text(render_labels(benchmark.gold), "utf-8")
        reports = run_trials(
            benchmark, [(PromptConfig(representation=Hierarchical(0)), mock_config(tmp_path))],
            n_trials=3,
        )
        (report,) = reports
        assert report.trials == 3
        for prop in "IURD":
            assert report.per_property[prop].accuracy == 1.0
            assert report.per_property[prop].correct == 3 * len(benchmark.taxonomy)

    def test_corrupted_rigidity_fixture(self, tmp_path):
        benchmark = load_benchmark("pizza")
        corrupted = {
            cls: ls.with_value("R", RigidityValue.ANTI) for cls, ls in benchmark.gold.items()
        }
        (tmp_path / "default.txt").write_text(render_labels(corrupted), "utf-8")
        expected_r = sum(
            1 for ls in benchmark.gold.values() if ls.rigidity is RigidityValue.ANTI
        ) / len(benchmark.gold)
        (report,) = run_trials(
            benchmark, [(PromptConfig(representation=Hierarchical(0)), mock_config(tmp_path))],
            n_trials=2,
        )
        assert report.per_property["R"].accuracy == expected_r
        for prop in "IUD":
            assert report.per_property[prop].accuracy == 1.0

    def test_deterministic_with_deterministic_mock(self, tmp_path):
        benchmark = load_benchmark("upper")
        (tmp_path / "default.txt").write_text(render_labels(benchmark.gold), "utf-8")
        config = [(PromptConfig(representation=Hierarchical(0)), mock_config(tmp_path))]
        first = run_trials(benchmark, config, n_trials=2)
        second = run_trials(benchmark, config, n_trials=2)
        assert first == second

    def test_all_failures_abort(self, tmp_path):
        benchmark = load_benchmark("pizza")  # empty fixture dir: every call fails
        with pytest.raises(AllTrialsFailed):
            run_trials(
                benchmark,
                [(PromptConfig(representation=Flat()), mock_config(tmp_path))],
                n_trials=2,
            )

    def test_partial_failures_annotated_and_excluded(self, tmp_path, mock_llm):
        benchmark = load_benchmark("pizza")
        gold_text = render_labels(benchmark.gold)
        mock_llm.set_script([(200, gold_text), (500, ""), (200, gold_text)])
        lc = LlmConfig(
            endpoint_url=mock_llm.url, model="m", max_retries=0, backoff_base=0.01
        )
        (report,) = run_trials(
            benchmark, [(PromptConfig(representation=Flat()), lc)], n_trials=3
        )
        assert report.trials == 2
        assert "excluded=1" in report.config_descriptor
        for prop in "IURD":
            assert report.per_property[prop].correct == 2 * len(benchmark.taxonomy)


class TestReports:
    def sample_report(self) -> AccuracyReport:
        return AccuracyReport(
            config_descriptor="pizza|strategy=zero|representation=hierarchical|model=m|trials=3",
            trials=3,
            per_property={
                "I": PropertyCounts(48, 0),
                "U": PropertyCounts(36, 12),
                "R": PropertyCounts(48, 0),
                "D": PropertyCounts(24, 24),
            },
        )

    def test_csv_shape(self, tmp_path):
        path = tmp_path / "report.csv"
        write_report([self.sample_report()], path, "csv")
        rows = list(csv.reader(path.read_text("utf-8").splitlines()))
        assert rows[0] == [
            "config_descriptor", "property", "correct", "incorrect", "accuracy", "trials",
        ]
        assert len(rows) == 5
        assert [row[1] for row in rows[1:]] == ["I", "U", "R", "D"]
        assert rows[2][2:] == ["36", "12", "0.750000", "3"]

    def test_json_round_trip(self, tmp_path):
        path = tmp_path / "report.json"
        report = self.sample_report()
        write_report([report], path, "json")
        doc = json.loads(path.read_text("utf-8"))
        assert AccuracyReport.from_json(doc["reports"][0]) == report

    def test_rewrite_is_byte_identical(self, tmp_path):
        for fmt in ("csv", "json"):
            a = tmp_path / f"a.{fmt}"
            b = tmp_path / f"b.{fmt}"
            write_report([self.sample_report()], a, fmt)
            write_report([self.sample_report()], b, fmt)
            assert a.read_bytes() == b.read_bytes()

    def test_pooling_sums_counts(self):
        report = self.sample_report()
        pooled = pool_reports([report, report], "pooled")
        assert pooled.trials == 6
        assert pooled.per_property["U"] == PropertyCounts(72, 24)
        assert pooled.per_property["U"].accuracy == report.per_property["U"].accuracy
