"""Class taxonomies: parsing, validation, serialization, and the plain-text
renderings handed to a language model.

A taxonomy is a set of named classes plus acyclic subsumption edges
``(sub, super)``. Multiple parents and multiple roots are allowed. Two
interchange formats exist:

* ``json``: ``{"classes": [{"id": ..., "description"?: ...}], "edges": [[sub, super], ...]}``
* ``indented``: one class id per line, indented with tabs; a line at depth
  d+1 is a child of the nearest preceding line at depth d. Mentioning an id
  again attaches it under another parent, so DAGs can be read; writing the
  format requires a tree shape and carries no descriptions.

Rendering for prompts is either a flat class list or a tab-indented tree
obtained from a seeded random spanning tree, so that identical inputs always
produce identical prompt text.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

from .errors import (
    CycleDetected,
    DuplicateClass,
    NotATree,
    TaxonomySyntaxError,
    UnknownParent,
)

TAXONOMY_FORMATS = ("json", "indented")


def is_valid_class_id(value: str) -> bool:
    """A class id is a nonempty string with no tabs, newlines, or edge whitespace."""
    if not isinstance(value, str) or not value:
        return False
    if value != value.strip():
        return False
    return not any(ch in value for ch in "\t\n\r")


@dataclass(frozen=True)
class Taxonomy:
    """An immutable class hierarchy (T-box skeleton).

    ``classes`` keeps insertion order, which is authoritative for every
    rendering. ``edges`` holds ``(sub, super)`` pairs and must be acyclic.
    """

    classes: tuple[str, ...]
    edges: frozenset[tuple[str, str]] = frozenset()
    descriptions: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        seen: set[str] = set()
        for cls in self.classes:
            if not is_valid_class_id(cls):
                raise ValueError(f"invalid class id: {cls!r}")
            if cls in seen:
                raise ValueError(f"duplicate class id: {cls!r}")
            seen.add(cls)
        for sub, sup in self.edges:
            if sub not in seen or sup not in seen:
                raise ValueError(f"edge ({sub!r}, {sup!r}) references an undeclared class")
        for cls in self.descriptions:
            if cls not in seen:
                raise ValueError(f"description for undeclared class {cls!r}")
        cycle = _find_cycle(self.classes, self.edges)
        if cycle is not None:
            raise CycleDetected(cycle)

    @staticmethod
    def build(
        classes: Iterable[str],
        edges: Iterable[tuple[str, str]] = (),
        descriptions: Mapping[str, str] | None = None,
    ) -> "Taxonomy":
        """Normalize loose inputs into a validated Taxonomy."""
        return Taxonomy(
            classes=tuple(classes),
            edges=frozenset((sub, sup) for sub, sup in edges),
            descriptions=dict(descriptions or {}),
        )

    def __contains__(self, cls: str) -> bool:
        return cls in self.index

    def __len__(self) -> int:
        return len(self.classes)

    @cached_property
    def index(self) -> dict[str, int]:
        """Class id -> insertion position."""
        return {cls: i for i, cls in enumerate(self.classes)}

    @cached_property
    def parents_of(self) -> dict[str, tuple[str, ...]]:
        """Direct superclasses per class, in class insertion order."""
        out: dict[str, list[str]] = {cls: [] for cls in self.classes}
        for sub, sup in self.edges:
            out[sub].append(sup)
        return {cls: tuple(sorted(ps, key=self.index.__getitem__)) for cls, ps in out.items()}

    @cached_property
    def children_of(self) -> dict[str, tuple[str, ...]]:
        """Direct subclasses per class, in class insertion order."""
        out: dict[str, list[str]] = {cls: [] for cls in self.classes}
        for cls in self.classes:
            for sup in self.parents_of[cls]:
                out[sup].append(cls)
        return {cls: tuple(cs) for cls, cs in out.items()}

    @cached_property
    def roots(self) -> tuple[str, ...]:
        return tuple(cls for cls in self.classes if not self.parents_of[cls])

    def ancestor_distances(self, cls: str) -> dict[str, int]:
        """All transitive superclasses of ``cls`` with their shortest edge distance."""
        return self._ancestor_distances[cls]

    @cached_property
    def _ancestor_distances(self) -> dict[str, dict[str, int]]:
        out: dict[str, dict[str, int]] = {}
        for start in self.classes:
            dist: dict[str, int] = {}
            frontier = [start]
            depth = 0
            while frontier:
                depth += 1
                nxt = []
                for node in frontier:
                    for sup in self.parents_of[node]:
                        if sup not in dist:
                            dist[sup] = depth
                            nxt.append(sup)
                frontier = nxt
            out[start] = dist
        return out

    @cached_property
    def topo_order(self) -> tuple[str, ...]:
        """Parents-before-children order; ties broken by insertion order."""
        remaining = {cls: len(self.parents_of[cls]) for cls in self.classes}
        order: list[str] = []
        ready = [cls for cls in self.classes if remaining[cls] == 0]
        while ready:
            node = min(ready, key=self.index.__getitem__)
            ready.remove(node)
            order.append(node)
            for child in self.children_of[node]:
                remaining[child] -= 1
                if remaining[child] == 0:
                    ready.append(child)
        return tuple(order)


@dataclass(frozen=True)
class SpanningTree:
    """One parent per class, drawn from the taxonomy's edges.

    ``parent`` is keyed in the source taxonomy's class insertion order; that
    ordering drives the hierarchical rendering.
    """

    parent: dict[str, str | None]
    roots: tuple[str, ...]
    seed: int


def _find_cycle(
    classes: tuple[str, ...], edges: frozenset[tuple[str, str]]
) -> list[str] | None:
    """Return one witness cycle (first == last) or None. Iterative DFS."""
    supers: dict[str, list[str]] = {cls: [] for cls in classes}
    for sub, sup in edges:
        supers[sub].append(sup)
    for lst in supers.values():
        lst.sort()

    color: dict[str, int] = {}  # 1 = on stack, 2 = done
    for start in classes:
        if color.get(start):
            continue
        stack: list[tuple[str, int]] = [(start, 0)]
        path: list[str] = []
        color[start] = 1
        path.append(start)
        while stack:
            node, i = stack[-1]
            if i < len(supers[node]):
                stack[-1] = (node, i + 1)
                nxt = supers[node][i]
                state = color.get(nxt, 0)
                if state == 1:
                    return path[path.index(nxt):] + [nxt]
                if state == 0:
                    color[nxt] = 1
                    path.append(nxt)
                    stack.append((nxt, 0))
            else:
                color[node] = 2
                path.pop()
                stack.pop()
    return None


# --- parsing -------------------------------------------------------------------

def parse_taxonomy(text: str, format: str) -> Taxonomy:
    """Parse ``text`` in the given format ("json" or "indented")."""
    if format == "json":
        return _parse_json(text)
    if format == "indented":
        return _parse_indented(text)
    raise ValueError(f"unknown taxonomy format: {format!r}")


def _require_class_id(value, context: str, line: int | None = None) -> str:
    if not is_valid_class_id(value):
        raise TaxonomySyntaxError(f"{context}: invalid class id {value!r}", line=line)
    return value


def _parse_json(text: str) -> Taxonomy:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TaxonomySyntaxError(exc.msg, line=exc.lineno, column=exc.colno) from exc
    if not isinstance(doc, dict):
        raise TaxonomySyntaxError("top-level value must be an object")

    raw_classes = doc.get("classes")
    if not isinstance(raw_classes, list):
        raise TaxonomySyntaxError('"classes" must be an array')
    classes: list[str] = []
    descriptions: dict[str, str] = {}
    seen: set[str] = set()
    for entry in raw_classes:
        if not isinstance(entry, dict) or "id" not in entry:
            raise TaxonomySyntaxError(f'class entries must be objects with an "id": {entry!r}')
        cls = _require_class_id(entry["id"], "classes")
        if cls in seen:
            raise DuplicateClass(f"class {cls!r} declared twice")
        seen.add(cls)
        classes.append(cls)
        desc = entry.get("description")
        if desc is not None:
            if not isinstance(desc, str):
                raise TaxonomySyntaxError(f"description of {cls!r} must be a string")
            descriptions[cls] = desc

    raw_edges = doc.get("edges", [])
    if not isinstance(raw_edges, list):
        raise TaxonomySyntaxError('"edges" must be an array')
    edges: set[tuple[str, str]] = set()
    for entry in raw_edges:
        if not (isinstance(entry, list) and len(entry) == 2):
            raise TaxonomySyntaxError(f"edges must be [sub, super] pairs: {entry!r}")
        sub, sup = entry
        for endpoint in (sub, sup):
            if endpoint not in seen:
                raise UnknownParent(f"edge {entry!r} references undeclared class {endpoint!r}")
        edges.add((sub, sup))

    return Taxonomy(tuple(classes), frozenset(edges), descriptions)


def _parse_indented(text: str) -> Taxonomy:
    classes: list[str] = []
    seen: set[str] = set()
    edges: set[tuple[str, str]] = set()
    # stack[d] is the most recent class rendered at depth d
    stack: list[str] = []

    for lineno, raw in enumerate(text.split("\n"), start=1):
        if raw == "":
            continue
        depth = len(raw) - len(raw.lstrip("\t"))
        name = raw[depth:]
        if not name:
            raise TaxonomySyntaxError("line holds no class id", line=lineno)
        if name.startswith(" ") or "\t" in name:
            raise TaxonomySyntaxError(
                "indentation must use tabs only and ids may not contain tabs", line=lineno
            )
        _require_class_id(name, "indented line", line=lineno)
        if depth > len(stack):
            raise TaxonomySyntaxError(
                f"indent jumps from depth {len(stack) - 1 if stack else 'none'} to {depth}",
                line=lineno,
            )
        del stack[depth:]
        if name not in seen:
            seen.add(name)
            classes.append(name)
        if depth > 0:
            edges.add((name, stack[-1]))
        stack.append(name)

    return Taxonomy(tuple(classes), frozenset(edges))  # raises CycleDetected on cycles


# --- serialization ---------------------------------------------------------------

def serialize_taxonomy(t: Taxonomy, format: str) -> str:
    """Inverse of :func:`parse_taxonomy`.

    The json form represents any taxonomy exactly. The indented form requires
    a tree shape (``NotATree`` otherwise) and cannot carry descriptions, so it
    round-trips structure only; re-parsing yields classes in render order.
    """
    if format == "json":
        return _serialize_json(t)
    if format == "indented":
        return _serialize_indented(t)
    raise ValueError(f"unknown taxonomy format: {format!r}")


def _serialize_json(t: Taxonomy) -> str:
    entries = []
    for cls in t.classes:
        entry: dict = {"id": cls}
        if cls in t.descriptions:
            entry["description"] = t.descriptions[cls]
        entries.append(entry)
    edges = sorted(t.edges, key=lambda e: (t.index[e[0]], t.index[e[1]]))
    doc = {"classes": entries, "edges": [list(e) for e in edges]}
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _serialize_indented(t: Taxonomy) -> str:
    for cls in t.classes:
        if len(t.parents_of[cls]) > 1:
            raise NotATree(f"class {cls!r} has multiple parents")
    tree = SpanningTree(
        parent={cls: (t.parents_of[cls][0] if t.parents_of[cls] else None) for cls in t.classes},
        roots=t.roots,
        seed=0,
    )
    return to_hierarchical_text(tree)


# --- prompt renderings --------------------------------------------------------------

def to_flat_text(t: Taxonomy) -> str:
    """One class id per line, in insertion order, hierarchy dropped."""
    return "\n".join(t.classes)


_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix64(state: int) -> int:
    # splitmix64 finalizer; gives the same stream on every platform
    z = (state + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _uniform_index(seed: int, position: int, n: int) -> int:
    """Uniform draw from range(n), derived from (seed, position) only."""
    state = (seed & _MASK64) ^ _splitmix64(position + 1)
    limit = (1 << 64) - ((1 << 64) % n)
    while True:
        state = (state + _GOLDEN) & _MASK64
        value = _splitmix64(state)
        if value < limit:  # rejection keeps the choice exactly uniform
            return value % n


def random_spanning_tree(t: Taxonomy, seed: int) -> SpanningTree:
    """Pick one parent per multi-parent class, reproducibly.

    Each class draws from a pseudo-random stream keyed by ``seed`` and its
    position in topological-then-insertion order, so the same taxonomy and
    seed yield the identical tree on any platform.
    """
    position = {cls: i for i, cls in enumerate(t.topo_order)}
    parent: dict[str, str | None] = {}
    for cls in t.classes:
        parents = t.parents_of[cls]
        if not parents:
            parent[cls] = None
        elif len(parents) == 1:
            parent[cls] = parents[0]
        else:
            parent[cls] = parents[_uniform_index(seed, position[cls], len(parents))]
    roots = tuple(cls for cls in t.classes if parent[cls] is None)
    return SpanningTree(parent=parent, roots=roots, seed=seed)


def to_hierarchical_text(tree: SpanningTree) -> str:
    """Depth-first tab-indented rendering; every class appears exactly once."""
    children: dict[str, list[str]] = {cls: [] for cls in tree.parent}
    for cls, par in tree.parent.items():
        if par is not None:
            children[par].append(cls)

    lines: list[str] = []
    for root in tree.roots:
        stack: list[tuple[str, int]] = [(root, 0)]
        while stack:
            node, depth = stack.pop()
            lines.append("\t" * depth + node)
            for child in reversed(children[node]):
                stack.append((child, depth + 1))
    return "\n".join(lines)
