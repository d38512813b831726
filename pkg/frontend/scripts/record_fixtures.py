#!/usr/bin/env python3
"""Record the review-UI interaction fixtures against the real service.

Boots the session service in-process with the mock LLM fixture endpoint,
performs the scripted review flow exactly as the frontend issues it, and
writes every (request, response) pair to tests/fixtures/session_flow.json.
The vitest suite replays that log through a fake transport, so the UI tests
exercise genuine server payloads without a network.

Run from the repository root after installing the Python package:

    python3 frontend/scripts/record_fixtures.py
"""

from __future__ import annotations

import json
import uuid
from pathlib import Path
from unittest import mock

from fastapi.testclient import TestClient

from ontoclean_workbench.harness import load_benchmark
from ontoclean_workbench.labeler import render_labels
from ontoclean_workbench.service import create_app

FRONTEND = Path(__file__).resolve().parent.parent
FIXTURES = FRONTEND / "tests" / "fixtures"
LLM_DIR = FIXTURES / "llm"
# the service resolves mock:// paths against its working directory; the
# recorder runs from the repository root
LLM_ENDPOINT = "mock://frontend/tests/fixtures/llm"

GUIDANCE_TEXT = "Treat topping kinds as stuff-like portions"


class Recorder:
    def __init__(self, client: TestClient):
        self.client = client
        self.steps: list[dict] = []

    def call(self, method: str, path: str, body: dict | None = None) -> dict:
        kwargs = {} if body is None else {"json": body}
        response = self.client.request(method, path, **kwargs)
        step = {
            "method": method,
            "path": path,
            "status": response.status_code,
            "response": response.json(),
        }
        if body is not None:
            step["request"] = body
        self.steps.append(step)
        assert response.status_code < 400, f"{method} {path} -> {response.status_code}"
        return step["response"]


def main() -> None:
    LLM_DIR.mkdir(parents=True, exist_ok=True)
    gold = load_benchmark("pizza").gold
    (LLM_DIR / "default.txt").write_text(render_labels(gold), encoding="utf-8")

    app = create_app(sessions_dir=FIXTURES / "scratch-sessions")
    fixed = uuid.UUID("00000000000000000000000000000c0f".zfill(32))
    with TestClient(app) as client, mock.patch(
        "ontoclean_workbench.service.uuid.uuid4", return_value=fixed
    ):
        recorder = Recorder(client)

        # load a benchmark session (create + authoritative re-sync)
        session = recorder.call("POST", "/sessions", {"benchmark": "pizza"})
        sid = session["id"]
        recorder.call("GET", f"/sessions/{sid}")
        recorder.call("GET", f"/sessions/{sid}/accuracy")

        # one label that introduces a violation (panel count 1): Food is a
        # root, so -I on it fails individuation even though it matches gold
        recorder.call(
            "PUT", f"/sessions/{sid}/labels/Food", {"property": "I", "value": "-"}
        )
        recorder.call("GET", f"/sessions/{sid}")
        recorder.call("GET", f"/sessions/{sid}/accuracy")

        # clear it again (panel count 0)
        recorder.call(
            "PUT", f"/sessions/{sid}/labels/Food", {"property": "I", "value": None}
        )
        recorder.call("GET", f"/sessions/{sid}")
        recorder.call("GET", f"/sessions/{sid}/accuracy")

        # guidance, then a labelling run against the mock endpoint
        recorder.call("POST", f"/sessions/{sid}/guidance", {"text": GUIDANCE_TEXT})
        recorder.call("GET", f"/sessions/{sid}")
        recorder.call("GET", f"/sessions/{sid}/accuracy")

        recorder.call(
            "POST",
            f"/sessions/{sid}/label-run",
            {
                "strategy": "zero",
                "representation": "hier",
                "seed": 0,
                "mode": "fill_missing",
                "llm": {"endpoint_url": LLM_ENDPOINT, "model": "mock"},
            },
        )
        recorder.call("GET", f"/sessions/{sid}")
        recorder.call("GET", f"/sessions/{sid}/accuracy")

    FIXTURES.mkdir(parents=True, exist_ok=True)
    out = FIXTURES / "session_flow.json"
    out.write_text(json.dumps({"steps": recorder.steps}, indent=2) + "\n", encoding="utf-8")
    print(f"recorded {len(recorder.steps)} steps -> {out}")


if __name__ == "__main__":
    main()
