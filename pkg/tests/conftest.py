"""Shared strategies and helpers for the test suite."""

from __future__ import annotations

import random

import hypothesis.strategies as st

from geowalk.graph import LabeledInstance, build_graph


@st.composite
def random_graphs(draw, max_n: int = 12, connected: bool = True):
    """Hypothesis strategy for small simple graphs (connected by default)."""
    n = draw(st.integers(min_value=2, max_value=max_n))
    edges = set()
    if connected:
        # random spanning tree: attach each vertex to an earlier one
        for v in range(1, n):
            u = draw(st.integers(min_value=0, max_value=v - 1))
            edges.add((u, v))
    possible = [(u, v) for u in range(n) for v in range(u + 1, n) if (u, v) not in edges]
    if possible:
        extra = draw(st.lists(st.sampled_from(possible), unique=True, max_size=len(possible)))
        edges.update(extra)
    if not edges:  # n == 2, connected=False can draw nothing
        edges.add((0, 1))
    return build_graph(n, sorted(edges))


@st.composite
def random_instances(draw, max_n: int = 12):
    """Connected graph plus endpoints, excitations and partial labels."""
    g = draw(random_graphs(max_n=max_n, connected=True))
    a = draw(st.integers(min_value=0, max_value=g.n - 1))
    b = draw(st.integers(min_value=0, max_value=g.n - 1))
    excited = frozenset(
        draw(st.lists(st.integers(min_value=0, max_value=g.n - 1), unique=True, max_size=g.n))
    )
    labeled = draw(st.lists(st.integers(min_value=0, max_value=g.n - 1), unique=True, max_size=4))
    labels = {u: f"name{u}" for u in labeled}
    g = build_graph(g.n, g.edges(), labels)
    return LabeledInstance(graph=g, a=a, b=b, excited=excited)


def seeded_connected_graph(rng: random.Random, n: int, extra_edges: int = 3):
    """Plain (non-hypothesis) random connected graph for Monte Carlo tests."""
    edges = set()
    for v in range(1, n):
        edges.add((rng.randrange(v), v))
    for _ in range(extra_edges):
        u, v = rng.sample(range(n), 2)
        edges.add((min(u, v), max(u, v)))
    return build_graph(n, sorted(edges))
