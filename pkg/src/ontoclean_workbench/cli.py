"""Command-line entry points.

Commands: ``check`` (verify a labelling), ``render`` (print a prompt
representation), ``label`` (one LLM labelling run), ``eval`` (multi-trial
benchmark evaluation), ``serve`` (start the review service).

LLM settings resolve in order: command-line flag, environment variable
(``ONTOCLEAN_LLM_ENDPOINT``, ``ONTOCLEAN_LLM_MODEL``,
``ONTOCLEAN_LLM_API_KEY``), then a ``--config`` JSON file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import engine, harness, labeler, taxonomy
from .errors import WorkbenchError

ENDPOINT_ENV = "ONTOCLEAN_LLM_ENDPOINT"
MODEL_ENV = "ONTOCLEAN_LLM_MODEL"


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    doc = json.loads(_read(path))
    if not isinstance(doc, dict):
        raise WorkbenchError("config file must hold a JSON object")
    return doc


def _resolve(flag, env_var: str, config: dict, key: str, default=None):
    if flag is not None:
        return flag
    env = os.environ.get(env_var) if env_var else None
    if env:
        return env
    return config.get(key, default)


def _llm_config(args, config: dict) -> labeler.LlmConfig:
    endpoint = _resolve(args.endpoint, ENDPOINT_ENV, config, "endpoint_url")
    if not endpoint:
        raise WorkbenchError("no endpoint configured (flag --endpoint, env, or config file)")
    model = _resolve(args.model, MODEL_ENV, config, "model")
    if not model:
        if endpoint.startswith("mock://"):
            model = "mock"
        else:
            raise WorkbenchError("no model configured (flag --model, env, or config file)")
    return labeler.LlmConfig(
        endpoint_url=endpoint,
        model=model,
        temperature=_resolve(args.temperature, "", config, "temperature", 0.0),
        max_tokens=_resolve(args.max_tokens, "", config, "max_tokens", 2048),
        timeout=_resolve(args.timeout, "", config, "timeout", 60.0),
        max_retries=_resolve(args.max_retries, "", config, "max_retries", 2),
    )


def _prompt_config(args) -> labeler.PromptConfig:
    strategy = labeler.PromptStrategy(args.strategy)
    if args.flat:
        representation: labeler.Representation = labeler.Flat()
    else:
        representation = labeler.Hierarchical(seed=args.seed)
    return labeler.PromptConfig(
        strategy=strategy,
        representation=representation,
        guidance=getattr(args, "guidance", None),
    )


def _add_llm_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--endpoint", help="chat-completions API base or mock://<dir>")
    parser.add_argument("--model", help="model name sent to the endpoint")
    parser.add_argument("--temperature", type=float, default=None)
    parser.add_argument("--max-tokens", dest="max_tokens", type=int, default=None)
    parser.add_argument("--timeout", type=float, default=None)
    parser.add_argument("--max-retries", dest="max_retries", type=int, default=None)
    parser.add_argument("--config", help="JSON file with default LLM settings")


def _add_representation_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--flat", action="store_true", help="flat class list")
    group.add_argument("--hier", action="store_true", help="spanning-tree hierarchy (default)")
    parser.add_argument("--seed", type=int, default=0, help="spanning-tree seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ontoclean", description="OntoClean ontology refinement workbench"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="verify a labelling against the constraints")
    p.add_argument("taxonomy")
    p.add_argument("labels")
    p.add_argument("--format", choices=taxonomy.TAXONOMY_FORMATS, default="json")
    p.add_argument(
        "--individuation",
        action="store_true",
        help="also flag classes with no +I anywhere in their ancestry",
    )
    p.add_argument("--out", help="write the violation JSON here instead of stdout")

    p = sub.add_parser("render", help="print a prompt representation of a taxonomy")
    p.add_argument("taxonomy")
    p.add_argument("--format", choices=taxonomy.TAXONOMY_FORMATS, default="json")
    _add_representation_flags(p)

    p = sub.add_parser("label", help="run one LLM labelling pass over a taxonomy")
    p.add_argument("taxonomy")
    p.add_argument("--format", choices=taxonomy.TAXONOMY_FORMATS, default="json")
    p.add_argument("--strategy", choices=[s.value for s in labeler.PromptStrategy], default="zero")
    p.add_argument("--guidance", help="extra reviewer guidance for the prompt")
    p.add_argument("--out", help="write the labeling JSON here instead of stdout")
    _add_representation_flags(p)
    _add_llm_flags(p)

    p = sub.add_parser("eval", help="multi-trial benchmark evaluation")
    p.add_argument("--benchmark", choices=[*harness.BENCHMARK_NAMES, "both"], required=True)
    p.add_argument("--trials", type=int, default=harness.DEFAULT_TRIALS)
    p.add_argument("--strategy", choices=[s.value for s in labeler.PromptStrategy], default="zero")
    p.add_argument("--out", help="report file path")
    p.add_argument("--report-format", choices=["csv", "json"], default="csv")
    _add_representation_flags(p)
    _add_llm_flags(p)

    p = sub.add_parser("serve", help="start the review HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--sessions-dir", default="sessions")

    return parser


def _cmd_check(args) -> int:
    t = taxonomy.parse_taxonomy(_read(args.taxonomy), args.format)
    labeling = engine.labeling_from_json(json.loads(_read(args.labels)))
    violations = engine.check_constraints(t, labeling)
    if args.individuation:
        violations += engine.check_sortal_individuation(t, labeling)
    text = json.dumps([v.to_json() for v in violations], indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0 if not violations else 1


def _cmd_render(args) -> int:
    t = taxonomy.parse_taxonomy(_read(args.taxonomy), args.format)
    if args.flat:
        sys.stdout.write(taxonomy.to_flat_text(t) + "\n")
    else:
        tree = taxonomy.random_spanning_tree(t, args.seed)
        sys.stdout.write(taxonomy.to_hierarchical_text(tree) + "\n")
    return 0


def _cmd_label(args) -> int:
    t = taxonomy.parse_taxonomy(_read(args.taxonomy), args.format)
    config = _load_config_file(args.config)
    result = labeler.label_ontology(t, _prompt_config(args), _llm_config(args, config))
    for lineno, reason in result.warnings:
        print(f"warning: line {lineno}: {reason}", file=sys.stderr)
    text = json.dumps(engine.labeling_to_json(result.labeling), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_eval(args) -> int:
    config = _load_config_file(args.config)
    lc = _llm_config(args, config)
    pc = _prompt_config(args)
    names = list(harness.BENCHMARK_NAMES) if args.benchmark == "both" else [args.benchmark]
    reports: list[harness.AccuracyReport] = []
    per_benchmark = []
    for name in names:
        benchmark = harness.load_benchmark(name)
        batch = harness.run_trials(benchmark, [(pc, lc)], n_trials=args.trials)
        per_benchmark.extend(batch)
    reports.extend(per_benchmark)
    if len(names) > 1:
        pooled_descriptor = harness.describe_config("pooled", pc, lc, args.trials)
        reports.append(harness.pool_reports(per_benchmark, pooled_descriptor))
    for report in reports:
        for prop in engine.PROPERTY_KEYS:
            counts = report.per_property[prop]
            print(
                f"{report.config_descriptor} {prop} accuracy={counts.accuracy:.3f} "
                f"correct={counts.correct} incorrect={counts.incorrect}"
            )
    if args.out:
        harness.write_report(reports, args.out, args.report_format)
    return 0


def _cmd_serve(args) -> int:
    from .service import run_server

    run_server(host=args.host, port=args.port, sessions_dir=args.sessions_dir)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "check": _cmd_check,
        "render": _cmd_render,
        "label": _cmd_label,
        "eval": _cmd_eval,
        "serve": _cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except WorkbenchError as exc:
        print(
            json.dumps({"error_code": exc.code, "message": str(exc)}),
            file=sys.stderr,
        )
        return 2
    except OSError as exc:
        print(json.dumps({"error_code": "io_error", "message": str(exc)}), file=sys.stderr)
        return 2


def main_entry() -> None:
    raise SystemExit(main())
