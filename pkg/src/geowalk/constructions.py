"""Parametric generators for the graph families under study.

Vertex ids are laid out spine-first (a = 0, then v_1..v_m, then b), with
gadget vertices appended in a fixed nested order, so ids, labels and every
downstream tie-break are stable across runs.
"""

from __future__ import annotations

from math import isqrt

from geowalk.graph import Graph, LabeledInstance, build_graph


def unbounded_construction(k: int, m: int | None = None) -> LabeledInstance:
    """Spine a, v_1..v_m, b with k disjoint paths of length i+1 from a to
    each v_i; only a is excited.

    By default m = floor(sqrt(k)); passing m explicitly is an expert knob
    for exploration and is not covered by the verification suite.
    Vertex count: 2 + m + k * m * (m + 1) / 2.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if m is None:
        m = isqrt(k)
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    a = 0
    b = m + 1
    labels = {a: "a", b: "b"}
    for i in range(1, m + 1):
        labels[i] = f"v{i}"
    edges = [(a, 1), (m, b)]
    edges += [(i, i + 1) for i in range(1, m)]
    next_id = m + 2
    for i in range(1, m + 1):  # gadget of v_i: k paths, i internal vertices each
        for copy in range(1, k + 1):
            prev = a
            for pos in range(1, i + 1):
                labels[next_id] = f"r_{i}_{pos}_{copy}"
                edges.append((prev, next_id))
                prev = next_id
                next_id += 1
            edges.append((prev, i))
    g = build_graph(next_id, edges, labels)
    return LabeledInstance(
        graph=g, a=a, b=b, excited=frozenset({a}), params={"k": k, "m": m}
    )


def bounded_construction(m: int) -> LabeledInstance:
    """Max-degree-3 family: spine a, v_1..v_m, b; a path of length 2m+2
    hangs off each v_i and ends at s_i; the chain s_m..s_1 feeds back to a.

    Excited set: a and every s_i (the s-chain marches deterministically to
    a, and a steps to v_1).  Vertex count: 2 + m * (2m + 3).
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    a = 0
    b = m + 1
    labels = {a: "a", b: "b"}
    for i in range(1, m + 1):
        labels[i] = f"v{i}"
    s = {i: m + 1 + i for i in range(1, m + 1)}
    for i, sid in s.items():
        labels[sid] = f"s{i}"
    edges = [(a, 1), (m, b), (a, s[1])]
    edges += [(i, i + 1) for i in range(1, m)]
    edges += [(s[i], s[i + 1]) for i in range(1, m)]
    next_id = 2 * m + 2
    side_len = 2 * m + 1
    for i in range(1, m + 1):
        prev = s[i]
        for j in range(1, side_len + 1):
            labels[next_id] = f"r_{i}_{j}"
            edges.append((prev, next_id))
            prev = next_id
            next_id += 1
        edges.append((prev, i))
    g = build_graph(next_id, edges, labels)
    excited = frozenset({a} | set(s.values()))
    return LabeledInstance(graph=g, a=a, b=b, excited=excited, params={"m": m})


def trap_construction(clique_size: int) -> LabeledInstance:
    """Two a-b routes (lengths 2 and 3); the short route's midpoint w hangs
    onto a clique.  Exciting a funnels the walk through w and into the trap.
    """
    if clique_size < 3:
        raise ValueError(f"clique_size must be >= 3, got {clique_size}")
    a, w, b, x1, x2 = 0, 1, 2, 3, 4
    labels = {a: "a", w: "w", b: "b", x1: "x1", x2: "x2"}
    edges = [(a, w), (w, b), (a, x1), (x1, x2), (x2, b)]
    clique = list(range(5, 5 + clique_size))
    for idx, u in enumerate(clique, start=1):
        labels[u] = f"c{idx}"
    edges.append((w, clique[0]))
    edges += [(u, v) for i, u in enumerate(clique) for v in clique[i + 1 :]]
    g = build_graph(5 + clique_size, edges, labels)
    return LabeledInstance(
        graph=g,
        a=a,
        b=b,
        excited=frozenset({a}),
        params={"clique_size": clique_size},
    )


def path_construction(n: int) -> LabeledInstance:
    """Path 0-1-...-n with no excitations; a = 0, b = n."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    labels = {i: str(i) for i in range(n + 1)}
    g = build_graph(n + 1, [(i, i + 1) for i in range(n)], labels)
    return LabeledInstance(graph=g, a=0, b=n, excited=frozenset(), params={"n": n})
