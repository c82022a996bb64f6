"""Immutable simple undirected graphs over dense integer vertex ids.

Vertices are the integers ``0..n-1``; an optional label map attaches
human-readable names used by reports and DOT output.  Adjacency lists are
kept sorted so that every downstream tie-break ("smallest neighbor id") is
deterministic.
"""

from __future__ import annotations

import json
from collections import Counter, deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np


class GraphError(ValueError):
    """Invalid graph input."""


class SelfLoopError(GraphError):
    def __init__(self, u: int):
        super().__init__(f"self-loop at vertex {u}")
        self.vertex = u


class DuplicateEdgeError(GraphError):
    def __init__(self, u: int, v: int):
        super().__init__(f"duplicate edge ({u}, {v})")
        self.edge = (u, v)


class EndpointOutOfRangeError(GraphError):
    def __init__(self, u: int, n: int):
        super().__init__(f"endpoint {u} outside [0, {n})")
        self.vertex = u


class InstanceFormatError(ValueError):
    """Malformed graph interchange file."""


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph in canonical form (sorted adjacency lists).

    Instances are immutable and safe to share across threads; build them
    through :func:`build_graph`.
    """

    n: int
    adjacency: tuple[tuple[int, ...], ...]
    labels: dict[int, str] = field(default_factory=dict)

    def degree(self, u: int) -> int:
        return len(self.adjacency[u])

    def neighbors(self, u: int) -> tuple[int, ...]:
        return self.adjacency[u]

    def label(self, u: int) -> str:
        return self.labels.get(u, str(u))

    def edges(self) -> list[tuple[int, int]]:
        """All edges as (u, v) pairs with u < v, sorted."""
        return [(u, v) for u in range(self.n) for v in self.adjacency[u] if u < v]

    @property
    def num_edges(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    # Flat CSR-style views used by the Monte Carlo kernel.  cached_property
    # writes to __dict__ directly, so this stays compatible with frozen=True.
    @cached_property
    def _csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        degrees = np.array([len(a) for a in self.adjacency], dtype=np.int64)
        offsets = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(degrees, out=offsets[1:])
        flat = np.fromiter(
            (v for adj in self.adjacency for v in adj), dtype=np.int64, count=offsets[-1]
        )
        for arr in (degrees, offsets, flat):
            arr.flags.writeable = False
        return flat, offsets, degrees


@dataclass(frozen=True)
class ValidationReport:
    connected: bool
    max_degree: int
    degree_histogram: dict[int, int]


@dataclass(frozen=True)
class LabeledInstance:
    """A graph packaged with its walk endpoints and excitation set.

    ``params`` records generator parameters for reporting only; it is not
    serialized and does not participate in equality.
    """

    graph: Graph
    a: int
    b: int
    excited: frozenset[int]
    params: dict[str, int] = field(default_factory=dict, compare=False)

    def id_of(self, label: str) -> int:
        """Vertex id carrying the given label."""
        for u, name in self.graph.labels.items():
            if name == label:
                return u
        raise KeyError(label)


def build_graph(
    n: int,
    edges,
    labels: dict[int, str] | None = None,
) -> Graph:
    """Build a canonical Graph from an edge list.

    Rejects self-loops, duplicate edges (in either orientation) and
    endpoints outside ``[0, n)``.
    """
    if n < 0:
        raise GraphError(f"vertex count must be nonnegative, got {n}")
    adj: list[list[int]] = [[] for _ in range(n)]
    seen: set[tuple[int, int]] = set()
    for u, v in edges:
        u, v = int(u), int(v)
        for w in (u, v):
            if not 0 <= w < n:
                raise EndpointOutOfRangeError(w, n)
        if u == v:
            raise SelfLoopError(u)
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise DuplicateEdgeError(u, v)
        seen.add(key)
        adj[u].append(v)
        adj[v].append(u)
    adjacency = tuple(tuple(sorted(a)) for a in adj)
    return Graph(n=n, adjacency=adjacency, labels=dict(labels or {}))


def validate(g: Graph) -> ValidationReport:
    """Connectivity (full BFS traversal) and degree statistics."""
    degrees = [len(a) for a in g.adjacency]
    max_degree = max(degrees, default=0)
    connected = True
    if g.n > 0:
        seen = bytearray(g.n)
        seen[0] = 1
        queue = deque([0])
        count = 1
        while queue:
            u = queue.popleft()
            for v in g.adjacency[u]:
                if not seen[v]:
                    seen[v] = 1
                    count += 1
                    queue.append(v)
        connected = count == g.n
    return ValidationReport(
        connected=connected,
        max_degree=max_degree,
        degree_histogram=dict(Counter(degrees)),
    )


# ---------------------------------------------------------------------------
# Interchange format
# ---------------------------------------------------------------------------

_INSTANCE_KEYS = {"n", "edges", "labels", "excited", "source", "target"}


def instance_to_dict(inst: LabeledInstance) -> dict:
    g = inst.graph
    return {
        "n": g.n,
        "edges": [[u, v] for u, v in g.edges()],
        "labels": {str(u): name for u, name in sorted(g.labels.items())},
        "excited": sorted(inst.excited),
        "source": inst.a,
        "target": inst.b,
    }


def instance_from_dict(data: dict) -> LabeledInstance:
    if not isinstance(data, dict):
        raise InstanceFormatError("instance file must hold a JSON object")
    unknown = set(data) - _INSTANCE_KEYS
    if unknown:
        raise InstanceFormatError(f"unknown fields: {sorted(unknown)}")
    for key in ("n", "edges", "source", "target"):
        if key not in data:
            raise InstanceFormatError(f"missing required field: {key}")
    labels = {int(k): str(v) for k, v in data.get("labels", {}).items()}
    g = build_graph(int(data["n"]), [tuple(e) for e in data["edges"]], labels)
    excited = frozenset(int(x) for x in data.get("excited", []))
    a, b = int(data["source"]), int(data["target"])
    for w in excited | {a, b}:
        if not 0 <= w < g.n:
            raise EndpointOutOfRangeError(w, g.n)
    return LabeledInstance(graph=g, a=a, b=b, excited=excited)


def save_instance(inst: LabeledInstance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst), indent=1) + "\n")


def load_instance(path: str | Path) -> LabeledInstance:
    return instance_from_dict(json.loads(Path(path).read_text()))


def to_dot(inst: LabeledInstance) -> str:
    """DOT rendering; excited vertices filled, source/target shaped."""
    g = inst.graph
    lines = ["graph geowalk {"]
    for u in range(g.n):
        attrs = [f'label="{g.label(u)}"']
        if u in inst.excited:
            attrs.append("style=filled")
            attrs.append("fillcolor=gold")
        if u == inst.a:
            attrs.append("shape=box")
        if u == inst.b:
            attrs.append("shape=doublecircle")
        lines.append(f"  {u} [{' '.join(attrs)}];")
    for u, v in g.edges():
        lines.append(f"  {u} -- {v};")
    lines.append("}")
    return "\n".join(lines) + "\n"
