"""Shared fixtures: random model generators and a scriptable mock endpoint."""

from __future__ import annotations

import json
import random
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from ontoclean_workbench.engine import (
    DependenceValue,
    IdentityValue,
    LabelSet,
    RigidityValue,
    UnityValue,
)
from ontoclean_workbench.taxonomy import Taxonomy

ALL_LABEL_SETS = [
    LabelSet(identity=i, unity=u, rigidity=r, dependence=d)
    for i in IdentityValue
    for u in UnityValue
    for r in RigidityValue
    for d in DependenceValue
]


def random_dag(rng: random.Random, max_classes: int = 6, max_edges: int = 8) -> Taxonomy:
    """Random DAG; edges follow a hidden random order, so insertion order is
    not necessarily topological."""
    n = rng.randint(1, max_classes)
    classes = [f"C{i}" for i in range(n)]
    rank = list(range(n))
    rng.shuffle(rank)  # rank[i] orders class i; edges go from higher to lower rank
    edges = set()
    if n > 1:
        for _ in range(rng.randint(0, max_edges)):
            a, b = rng.sample(range(n), 2)
            if rank[a] < rank[b]:
                a, b = b, a
            edges.add((classes[a], classes[b]))
    descriptions = {}
    for cls in classes:
        if rng.random() < 0.2:
            descriptions[cls] = f"about {cls}"
    return Taxonomy.build(classes, edges, descriptions)


def random_tree(rng: random.Random, max_classes: int = 8) -> Taxonomy:
    """Random tree-shaped taxonomy (each class at most one parent)."""
    n = rng.randint(1, max_classes)
    classes = [f"T{i}" for i in range(n)]
    edges = set()
    for i in range(1, n):
        if rng.random() < 0.85:
            edges.add((classes[i], classes[rng.randrange(i)]))
    return Taxonomy.build(classes, edges)


def random_total_labeling(rng: random.Random, t: Taxonomy) -> dict[str, LabelSet]:
    return {cls: rng.choice(ALL_LABEL_SETS) for cls in t.classes}


def random_partial_labeling(
    rng: random.Random, t: Taxonomy, p_class: float = 0.7, p_value: float = 0.6
) -> dict[str, LabelSet]:
    labeling: dict[str, LabelSet] = {}
    for cls in t.classes:
        if rng.random() > p_class:
            continue
        ls = LabelSet()
        if rng.random() < p_value:
            ls = ls.with_value("I", rng.choice(list(IdentityValue)))
        if rng.random() < p_value:
            ls = ls.with_value("U", rng.choice(list(UnityValue)))
        if rng.random() < p_value:
            ls = ls.with_value("R", rng.choice(list(RigidityValue)))
        if rng.random() < p_value:
            ls = ls.with_value("D", rng.choice(list(DependenceValue)))
        if not ls.is_empty:
            labeling[cls] = ls
    return labeling


class MockLlmServer:
    """A local chat-completions endpoint with a scriptable response queue.

    Each entry of ``script`` is ``(status, text)``; the last entry repeats
    once the queue is exhausted. Request bodies are recorded in ``requests``.
    """

    def __init__(self):
        self.script: list[tuple[int, str]] = [(200, "")]
        self.requests: list[dict] = []
        self._cursor = 0
        self._lock = threading.Lock()

        server = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                body = json.loads(self.rfile.read(length) or b"{}")
                with server._lock:
                    server.requests.append(
                        {"path": self.path, "body": body, "auth": self.headers.get("Authorization")}
                    )
                    index = min(server._cursor, len(server.script) - 1)
                    status, text = server.script[index]
                    server._cursor += 1
                if self.path != "/chat/completions":
                    status = 404
                if status == 200 and text.startswith("RAW_JSON:"):
                    payload = json.loads(text[len("RAW_JSON:"):])
                elif status == 200:
                    payload = {"choices": [{"message": {"role": "assistant", "content": text}}]}
                else:
                    payload = {"error": {"message": text or f"scripted {status}"}}
                raw = json.dumps(payload).encode()
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(raw)))
                self.end_headers()
                self.wfile.write(raw)

            def log_message(self, *args):
                pass

        self._httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()

    @property
    def url(self) -> str:
        host, port = self._httpd.server_address
        return f"http://{host}:{port}"

    def set_script(self, script: list[tuple[int, str]]) -> None:
        with self._lock:
            self.script = list(script)
            self._cursor = 0
            self.requests.clear()

    def close(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()


@pytest.fixture
def mock_llm():
    server = MockLlmServer()
    yield server
    server.close()
