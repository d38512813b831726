"""Prompt construction, completion-endpoint transport, and reply parsing.

The prompt is a deterministic concatenation: the labelling instruction, the
meta-property definitions (in-context strategy only), any reviewer guidance,
a one-line output-format instruction, and finally the ontology rendered flat
or as a seeded spanning-tree hierarchy.

Model replies are read line by line against the grammar
``<ClassName>: I+, U-, R~, D+`` (any subset of properties, ``~`` legal only
on U and R). Anything that does not parse becomes a warning, never a
failure; real model output is frequently decorated with prose and the
pipeline has to survive it.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from importlib import resources
from pathlib import Path

import requests

from .engine import LabelSet, Labeling, PROPERTY_KEYS, value_from_symbol
from .errors import (
    AuthError,
    EmptyResponse,
    IllegalValue,
    MalformedResponse,
    RateLimited,
    TransportError,
)
from .taxonomy import Taxonomy, random_spanning_tree, to_flat_text, to_hierarchical_text

API_KEY_ENV = "ONTOCLEAN_LLM_API_KEY"

INSTRUCTION = "Label this ontology with OntoClean criteria."
FORMAT_INSTRUCTION = (
    "Answer with one line per class, formatted exactly as: "
    "<ClassName>: I+|-, U+|-|~, R+|-|~, D+|-"
)

_DEFINITION_ORDER = ("Identity", "Unity", "Rigidity", "Dependence")


def load_default_definitions() -> dict[str, str]:
    """The bundled meta-property definition texts used by in-context prompts."""
    text = resources.files(__package__).joinpath("data/definitions.json").read_text("utf-8")
    return json.loads(text)


class PromptStrategy(Enum):
    ZERO_SHOT = "zero"
    IN_CONTEXT = "incontext"


@dataclass(frozen=True)
class Flat:
    """Render the ontology as a bare class list."""


@dataclass(frozen=True)
class Hierarchical:
    """Render the ontology as a tab-indented random spanning tree."""

    seed: int = 0


Representation = Flat | Hierarchical


@dataclass(frozen=True)
class PromptConfig:
    strategy: PromptStrategy = PromptStrategy.ZERO_SHOT
    representation: Representation = Hierarchical(0)
    guidance: str | None = None
    definitions: dict[str, str] = field(default_factory=load_default_definitions)


@dataclass(frozen=True)
class LlmConfig:
    """Where and how to call the chat-completions endpoint.

    ``endpoint_url`` is the API base; ``{endpoint_url}/chat/completions``
    receives the POST. A url of the form ``mock://<directory>`` switches to
    the fixture transport, which replays recorded responses from files named
    by the sha256 of the prompt (``default.txt`` as fallback).

    ``api_key`` falls back to the ``ONTOCLEAN_LLM_API_KEY`` environment
    variable when unset.
    """

    endpoint_url: str
    model: str
    temperature: float = 0.0
    max_tokens: int = 2048
    timeout: float = 60.0
    max_retries: int = 2
    api_key: str | None = None
    backoff_base: float = 0.5

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


@dataclass(frozen=True)
class LabelingResult:
    labeling: Labeling
    warnings: list[tuple[int, str]]
    raw_response: str
    attempts: int


def build_prompt(t: Taxonomy, cfg: PromptConfig) -> str:
    """Assemble the full prompt text; byte-identical for identical inputs."""
    parts = [INSTRUCTION]
    if cfg.strategy is PromptStrategy.IN_CONTEXT:
        for name in _DEFINITION_ORDER:
            if not cfg.definitions.get(name):
                raise ValueError(f"in-context prompting needs a definition for {name}")
            parts.append(f"{name}='{cfg.definitions[name]}'")
    if cfg.guidance:
        parts.append("Additional guidance: " + cfg.guidance)
    parts.append(FORMAT_INSTRUCTION)
    rep = cfg.representation
    if isinstance(rep, Flat):
        parts.append(to_flat_text(t))
    else:
        parts.append(to_hierarchical_text(random_spanning_tree(t, rep.seed)))
    return "\n".join(parts)


# Cap on concurrent endpoint calls, shared process-wide.
_inflight = threading.BoundedSemaphore(4)


def set_inflight_limit(limit: int) -> None:
    """Replace the shared in-flight cap; call only while no request is running."""
    global _inflight
    if limit < 1:
        raise ValueError("limit must be >= 1")
    _inflight = threading.BoundedSemaphore(limit)


def call_llm(prompt: str, cfg: LlmConfig) -> str:
    """Send the prompt, return the first choice's message text."""
    return _complete(prompt, cfg)[0]


def _complete(prompt: str, cfg: LlmConfig) -> tuple[str, int]:
    """Like call_llm, but also reports how many HTTP attempts were made."""
    if cfg.endpoint_url.startswith("mock://"):
        return _mock_response(prompt, cfg), 1

    url = cfg.endpoint_url.rstrip("/") + "/chat/completions"
    body = {
        "model": cfg.model,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": cfg.temperature,
        "max_tokens": cfg.max_tokens,
    }
    headers = {"Content-Type": "application/json"}
    api_key = cfg.api_key or os.environ.get(API_KEY_ENV)
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"

    last_error: Exception = TransportError("no attempt made")
    attempts = 0
    with _inflight:
        while attempts <= cfg.max_retries:
            attempts += 1
            try:
                response = requests.post(url, json=body, headers=headers, timeout=cfg.timeout)
            except requests.RequestException as exc:
                last_error = TransportError(str(exc))
            else:
                status = response.status_code
                if status == 200:
                    return _extract_content(response), attempts
                if status in (401, 403):
                    raise AuthError(f"endpoint rejected credentials (HTTP {status})")
                if status == 429:
                    last_error = RateLimited("rate limited (HTTP 429)")
                elif 500 <= status < 600:
                    last_error = TransportError(f"server error (HTTP {status})")
                else:
                    raise TransportError(f"unexpected status HTTP {status}")
            if attempts <= cfg.max_retries:
                time.sleep(cfg.backoff_base * (2 ** (attempts - 1)))
    raise last_error


def _extract_content(response) -> str:
    try:
        payload = response.json()
    except ValueError as exc:
        raise MalformedResponse(f"response body is not JSON: {exc}") from exc
    try:
        content = payload["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError):
        raise MalformedResponse("response lacks choices[0].message.content") from None
    if not isinstance(content, str):
        raise MalformedResponse("message content is not a string")
    return content


def _mock_response(prompt: str, cfg: LlmConfig) -> str:
    fixture_dir = Path(cfg.endpoint_url[len("mock://"):])
    digest = hashlib.sha256(prompt.encode("utf-8")).hexdigest()
    for candidate in (fixture_dir / f"{digest}.txt", fixture_dir / "default.txt"):
        if candidate.is_file():
            return candidate.read_text("utf-8")
    raise TransportError(f"no fixture for prompt {digest[:12]}... in {fixture_dir}")


# name up to the colon that introduces the token list, which must open with
# a property letter and a sign
_LINE_RE = re.compile(r"^\s*(?P<name>.*?)\s*:\s*(?P<body>[IURD]\s*[+\-~].*?)\s*$")
_TOKEN_RE = re.compile(r"^([IURD])\s*([+\-~])$")


def parse_labels(response: str, t: Taxonomy) -> LabelingResult:
    """Read label lines out of a model reply, warning about everything else.

    Unknown classes, repeated class lines (first wins), illegal tokens, and
    lines outside the grammar are reported as ``(line_number, reason)``
    warnings. Raises EmptyResponse only when no line named a known class.
    """
    labeling: Labeling = {}
    warnings: list[tuple[int, str]] = []

    for lineno, line in enumerate(response.split("\n"), start=1):
        if not line.strip():
            continue
        match = _LINE_RE.match(line)
        if not match:
            warnings.append((lineno, "line does not match '<ClassName>: <tokens>'"))
            continue
        name = match.group("name")
        if name not in t:
            warnings.append((lineno, f"unknown class {name!r}"))
            continue
        if name in labeling:
            warnings.append((lineno, f"duplicate line for class {name!r} (first wins)"))
            continue
        labels = LabelSet()
        for token in match.group("body").split(","):
            token = token.strip()
            if not token:
                continue
            token_match = _TOKEN_RE.match(token)
            if not token_match:
                warnings.append((lineno, f"malformed token {token!r}"))
                continue
            prop, symbol = token_match.groups()
            try:
                value = value_from_symbol(prop, symbol)
            except IllegalValue as exc:
                warnings.append((lineno, str(exc)))
                continue
            if labels.get(prop) is not None:
                warnings.append((lineno, f"duplicate property {prop} (first wins)"))
                continue
            labels = labels.with_value(prop, value)
        labeling[name] = labels

    if not labeling:
        raise EmptyResponse("no line named a known class")
    return LabelingResult(labeling=labeling, warnings=warnings, raw_response=response, attempts=1)


def render_labels(labeling: Labeling) -> str:
    """Write a labeling in the reply grammar (the inverse of parse_labels).

    Class ids containing a colon cannot be represented faithfully.
    """
    lines = []
    for cls, labels in labeling.items():
        tokens = [f"{p}{labels.get(p).value}" for p in PROPERTY_KEYS if labels.get(p) is not None]
        lines.append(f"{cls}: " + ", ".join(tokens))
    return "\n".join(lines)


def label_ontology(t: Taxonomy, pc: PromptConfig, lc: LlmConfig) -> LabelingResult:
    """Prompt the model for a labeling of ``t``.

    When a reply labels fewer than half of the classes, the prompt is
    resubmitted (up to ``max_retries`` extra times) and the attempt that
    labelled the most classes wins.
    """
    prompt = build_prompt(t, pc)
    best: LabelingResult | None = None
    best_count = -1
    submissions = 0
    for _ in range(1 + lc.max_retries):
        submissions += 1
        raw = call_llm(prompt, lc)
        try:
            result = parse_labels(raw, t)
        except EmptyResponse:
            continue
        labelled = sum(1 for ls in result.labeling.values() if not ls.is_empty)
        if labelled > best_count:
            best, best_count = result, labelled
        if labelled * 2 >= len(t.classes):
            break
    if best is None:
        raise EmptyResponse(f"no parseable labels after {submissions} attempt(s)")
    return replace(best, attempts=submissions)
