"""Benchmarks, per-property accuracy, multi-trial experiment runs, reports.

Accuracy is scored per meta-property: for every gold-labelled class, a
prediction counts as correct only when it matches the gold value exactly;
a differing or missing value counts as incorrect. Multi-trial runs sum the
counts over trials, so ``correct + incorrect == trials * class_count``
holds per property.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

from .engine import (
    Labeling,
    PROPERTY_KEYS,
    check_constraints,
    labeling_from_json,
)
from .errors import (
    AllTrialsFailed,
    ClassSetMismatch,
    CorruptBenchmark,
    LlmError,
    EmptyResponse,
    UnknownBenchmark,
    WorkbenchError,
)
from .labeler import (
    Hierarchical,
    LlmConfig,
    PromptConfig,
    label_ontology,
)
from .taxonomy import Taxonomy, parse_taxonomy

BENCHMARK_NAMES = ("pizza", "upper")

DEFAULT_TRIALS = 30


@dataclass(frozen=True)
class Benchmark:
    name: str
    taxonomy: Taxonomy
    gold: Labeling
    manifest: dict


@dataclass(frozen=True)
class PropertyCounts:
    correct: int
    incorrect: int

    @property
    def accuracy(self) -> float:
        total = self.correct + self.incorrect
        return self.correct / total if total else 0.0


@dataclass(frozen=True)
class AccuracyReport:
    config_descriptor: str
    trials: int
    per_property: dict[str, PropertyCounts]

    def to_json(self) -> dict:
        return {
            "config_descriptor": self.config_descriptor,
            "trials": self.trials,
            "per_property": {
                prop: {
                    "correct": counts.correct,
                    "incorrect": counts.incorrect,
                    "accuracy": counts.accuracy,
                }
                for prop, counts in self.per_property.items()
            },
        }

    @staticmethod
    def from_json(doc: dict) -> "AccuracyReport":
        return AccuracyReport(
            config_descriptor=doc["config_descriptor"],
            trials=doc["trials"],
            per_property={
                prop: PropertyCounts(entry["correct"], entry["incorrect"])
                for prop, entry in doc["per_property"].items()
            },
        )


def load_benchmark(name: str) -> Benchmark:
    """Load a bundled benchmark and verify its integrity."""
    if name not in BENCHMARK_NAMES:
        raise UnknownBenchmark(f"no benchmark named {name!r}; available: {BENCHMARK_NAMES}")
    root = resources.files(__package__).joinpath(f"data/benchmarks/{name}")
    taxonomy = parse_taxonomy(root.joinpath("taxonomy.json").read_text("utf-8"), "json")
    gold = labeling_from_json(json.loads(root.joinpath("gold.json").read_text("utf-8")))
    manifest = json.loads(root.joinpath("manifest.json").read_text("utf-8"))

    if manifest.get("class_count") != len(taxonomy):
        raise CorruptBenchmark(
            f"{name}: manifest declares {manifest.get('class_count')} classes, "
            f"taxonomy has {len(taxonomy)}"
        )
    missing = [cls for cls in taxonomy.classes if cls not in gold]
    if missing:
        raise CorruptBenchmark(f"{name}: gold labels missing for {missing}")
    extra = [cls for cls in gold if cls not in taxonomy]
    if extra:
        raise CorruptBenchmark(f"{name}: gold labels for unknown classes {extra}")
    partial = [cls for cls, ls in gold.items() if not ls.is_total]
    if partial:
        raise CorruptBenchmark(f"{name}: gold labeling not total on {partial}")
    violations = check_constraints(taxonomy, gold)
    if violations:
        raise CorruptBenchmark(
            f"{name}: gold labeling breaks the inheritance constraints: "
            + "; ".join(v.message for v in violations)
        )
    return Benchmark(name=name, taxonomy=taxonomy, gold=gold, manifest=manifest)


def compute_accuracy(pred: Labeling, gold: Labeling) -> dict[str, PropertyCounts]:
    """Per-property correct/incorrect counts of ``pred`` against a total gold."""
    unknown = [cls for cls in pred if cls not in gold]
    if unknown:
        raise ClassSetMismatch(f"prediction labels classes outside the gold set: {unknown}")
    counts = {prop: [0, 0] for prop in PROPERTY_KEYS}
    for cls, gold_labels in gold.items():
        predicted = pred.get(cls)
        for prop in PROPERTY_KEYS:
            expected = gold_labels.get(prop)
            if expected is None:
                continue
            actual = predicted.get(prop) if predicted is not None else None
            counts[prop][0 if actual is expected else 1] += 1
    return {prop: PropertyCounts(c, i) for prop, (c, i) in counts.items()}


def describe_config(benchmark_name: str, pc: PromptConfig, lc: LlmConfig, n_trials: int) -> str:
    rep = "flat" if not isinstance(pc.representation, Hierarchical) else "hierarchical"
    return (
        f"{benchmark_name}|strategy={pc.strategy.value}|representation={rep}"
        f"|model={lc.model}|trials={n_trials}"
    )


def run_trials(
    benchmark: Benchmark,
    configs: list[tuple[PromptConfig, LlmConfig]],
    n_trials: int = DEFAULT_TRIALS,
) -> list[AccuracyReport]:
    """Run every config for ``n_trials`` labelling rounds and score each one.

    Hierarchical representations use the trial index as spanning-tree seed so
    a rerun sees the identical prompt sequence. Trials that fail in the LLM
    layer are excluded from the counts; the exclusion count is appended to the
    config descriptor. A config where every trial fails aborts the run.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    reports = []
    for pc, lc in configs:
        totals = {prop: [0, 0] for prop in PROPERTY_KEYS}
        failures = 0
        for trial in range(n_trials):
            trial_pc = pc
            if isinstance(pc.representation, Hierarchical):
                trial_pc = replace(pc, representation=Hierarchical(seed=trial))
            try:
                outcome = label_ontology(benchmark.taxonomy, trial_pc, lc)
            except (LlmError, EmptyResponse):
                failures += 1
                continue
            for prop, counts in compute_accuracy(outcome.labeling, benchmark.gold).items():
                totals[prop][0] += counts.correct
                totals[prop][1] += counts.incorrect
        descriptor = describe_config(benchmark.name, pc, lc, n_trials)
        if failures == n_trials:
            raise AllTrialsFailed(f"every trial failed for config {descriptor}")
        if failures:
            descriptor += f"|excluded={failures}"
        reports.append(
            AccuracyReport(
                config_descriptor=descriptor,
                trials=n_trials - failures,
                per_property={prop: PropertyCounts(c, i) for prop, (c, i) in totals.items()},
            )
        )
    return reports


def pool_reports(reports: list[AccuracyReport], descriptor: str) -> AccuracyReport:
    """Sum several reports into one (e.g. the same config across benchmarks)."""
    if not reports:
        raise ValueError("nothing to pool")
    totals = {prop: [0, 0] for prop in PROPERTY_KEYS}
    trials = 0
    for report in reports:
        trials += report.trials
        for prop, counts in report.per_property.items():
            totals[prop][0] += counts.correct
            totals[prop][1] += counts.incorrect
    return AccuracyReport(
        config_descriptor=descriptor,
        trials=trials,
        per_property={prop: PropertyCounts(c, i) for prop, (c, i) in totals.items()},
    )


def render_report_csv(reports: list[AccuracyReport]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["config_descriptor", "property", "correct", "incorrect", "accuracy", "trials"])
    for report in reports:
        for prop in PROPERTY_KEYS:
            counts = report.per_property[prop]
            writer.writerow(
                [
                    report.config_descriptor,
                    prop,
                    counts.correct,
                    counts.incorrect,
                    f"{counts.accuracy:.6f}",
                    report.trials,
                ]
            )
    return buffer.getvalue()


def render_report_json(reports: list[AccuracyReport]) -> str:
    return json.dumps({"reports": [r.to_json() for r in reports]}, indent=2) + "\n"


def write_report(reports: list[AccuracyReport], path: str | Path, format: str) -> None:
    """Write reports to ``path``; rows are ordered by config, then I, U, R, D."""
    if not reports:
        raise WorkbenchError("no reports to write")
    if format == "csv":
        text = render_report_csv(reports)
    elif format == "json":
        text = render_report_json(reports)
    else:
        raise ValueError(f"unknown report format: {format!r}")
    Path(path).write_text(text, encoding="utf-8")
