"""BFS distances to the target and the deterministic step forced at excited vertices.

From an excited vertex the walk moves one step along a fixed shortest path
to the target.  Shortest paths are generally not unique, so the step is
pinned by a tie-break rule over the distance-decreasing neighbors:
``"min"`` (default) picks the smallest neighbor id, ``"max"`` the largest.
Any fixed rule yields a valid walk; only ``"min"`` is exercised by the
verification suite.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from geowalk.graph import Graph


class DisconnectedGraphError(ValueError):
    def __init__(self, unreachable: int):
        super().__init__(f"vertex {unreachable} cannot reach the target")
        self.vertex = unreachable


@dataclass(frozen=True)
class DistanceField:
    """Unit-length graph distances from every vertex to ``target``."""

    target: int
    dist: tuple[int, ...]


@dataclass(frozen=True)
class BiasMap:
    """Forced next vertex for each excited vertex (target excluded).

    Every forced step strictly decreases distance to the target, so the
    digraph of forced steps is acyclic.
    """

    target: int
    forced_step: dict[int, int]


def bfs_distances(g: Graph, target: int) -> DistanceField:
    """Exact unweighted shortest-path distances to ``target``.

    Raises :class:`DisconnectedGraphError` if any vertex cannot reach it.
    """
    if not 0 <= target < g.n:
        raise ValueError(f"target {target} outside [0, {g.n})")
    dist = [-1] * g.n
    dist[target] = 0
    queue = deque([target])
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for v in g.adjacency[u]:
            if dist[v] < 0:
                dist[v] = du
                queue.append(v)
    for u, d in enumerate(dist):
        if d < 0:
            raise DisconnectedGraphError(u)
    return DistanceField(target=target, dist=tuple(dist))


def descending_neighbors(g: Graph, field: DistanceField, u: int) -> list[int]:
    """Neighbors of ``u`` one step closer to the target, ascending id."""
    du = field.dist[u]
    return [v for v in g.adjacency[u] if field.dist[v] == du - 1]


def bias_map(
    g: Graph,
    field: DistanceField,
    excited,
    tie_break: str = "min",
) -> BiasMap:
    """Forced geodesic step for every excited vertex except the target."""
    if tie_break not in ("min", "max"):
        raise ValueError(f"tie_break must be 'min' or 'max', got {tie_break!r}")
    forced: dict[int, int] = {}
    for x in sorted(excited):
        if x == field.target:
            continue
        down = descending_neighbors(g, field, x)
        # connected graph: every non-target vertex has a descending neighbor
        forced[x] = down[0] if tie_break == "min" else down[-1]
    return BiasMap(target=field.target, forced_step=forced)


def forced_next_array(g: Graph, bias: BiasMap):
    """Dense lookup: forced successor per vertex, -1 where the walk is free."""
    import numpy as np

    arr = np.full(g.n, -1, dtype=np.int64)
    for x, y in bias.forced_step.items():
        arr[x] = y
    arr.flags.writeable = False
    return arr
