from collections import Counter, deque

import pytest

from geowalk.constructions import (
    bounded_construction,
    path_construction,
    trap_construction,
    unbounded_construction,
)
from geowalk.geodesic import bfs_distances
from geowalk.markov import absorption_probabilities, expected_hitting_times
from geowalk.graph import validate


def test_unbounded_smallest_case():
    inst = unbounded_construction(1)
    assert inst.graph.n == 4  # a, v1, b plus one extra a-r-v1 path
    assert inst.params == {"k": 1, "m": 1}
    assert inst.excited == {inst.a}


def test_unbounded_vertex_count_k9():
    inst = unbounded_construction(9)
    assert inst.params["m"] == 3
    assert inst.graph.n == 59


def test_unbounded_spine_degrees():
    k = 25
    inst = unbounded_construction(k)
    for i in range(1, inst.params["m"] + 1):
        assert inst.graph.degree(inst.id_of(f"v{i}")) == k + 2


def test_unbounded_gadgets_are_disjoint_paths():
    k = 5
    inst = unbounded_construction(k)
    m = inst.params["m"]
    spine = {inst.a, inst.b} | {inst.id_of(f"v{i}") for i in range(1, m + 1)}
    per_gadget = Counter()
    for u in range(inst.graph.n):
        if u in spine:
            continue
        gadget = int(inst.graph.label(u).split("_")[1])
        per_gadget[gadget] += 1
        assert inst.graph.degree(u) == 2  # strictly internal to one path
    for i in range(1, m + 1):
        assert per_gadget[i] == k * i


def _count_shortest_paths(g, src, dst):
    dist = bfs_distances(g, dst).dist
    counts = {dst: 1}
    order = sorted(range(g.n), key=lambda u: dist[u])
    for u in order:
        if u == dst:
            continue
        counts[u] = sum(counts.get(v, 0) for v in g.adjacency[u] if dist[v] == dist[u] - 1)
    return counts[src]


def test_unbounded_spine_is_unique_shortest_path():
    for k in (1, 4, 9):
        inst = unbounded_construction(k)
        m = inst.params["m"]
        assert bfs_distances(inst.graph, inst.b).dist[inst.a] == m + 1
        assert _count_shortest_paths(inst.graph, inst.a, inst.b) == 1


def test_unbounded_explicit_m_override():
    inst = unbounded_construction(3, m=2)
    assert inst.params == {"k": 3, "m": 2}
    assert inst.graph.n == 2 + 2 + 3 * 3


def test_bounded_counts():
    inst = bounded_construction(5)
    assert inst.graph.n == 67
    assert len(inst.excited) == 6


def test_bounded_max_degree_three():
    for m in (1, 2, 7, 20):
        assert validate(bounded_construction(m).graph).max_degree == 3


def test_bounded_smallest_case():
    inst = bounded_construction(1)
    assert inst.graph.n == 7
    labels = set(inst.graph.labels.values())
    assert labels == {"a", "b", "v1", "s1", "r_1_1", "r_1_2", "r_1_3"}


def test_bounded_side_path_lengths():
    # each hanging path has 2m+1 internal degree-2 vertices strung between
    # v_i and s_i, i.e. length 2m+2 end to end
    m = 4
    inst = bounded_construction(m)
    g = inst.graph
    for i in range(1, m + 1):
        internal = [u for u in range(g.n) if g.label(u).startswith(f"r_{i}_")]
        assert len(internal) == 2 * m + 1
        assert all(g.degree(u) == 2 for u in internal)
        v_i, s_i = inst.id_of(f"v{i}"), inst.id_of(f"s{i}")
        assert sum(1 for w in g.adjacency[v_i] if w in internal) == 1
        assert inst.id_of(f"r_{i}_{2 * m + 1}") in g.adjacency[v_i]
        assert inst.id_of(f"r_{i}_1") in g.adjacency[s_i]


def test_vertex_count_formulas_up_to_100():
    for m in range(1, 101):
        assert bounded_construction(m).graph.n == 2 + m * (2 * m + 3)
    for k in range(1, 101):
        inst = unbounded_construction(k)
        m = inst.params["m"]
        assert inst.graph.n == 2 + m + k * m * (m + 1) // 2


def test_trap_counts_and_errors():
    inst = trap_construction(3)
    assert inst.graph.n == 8
    for bad in (0, 1, 2):
        with pytest.raises(ValueError):
            trap_construction(bad)


def test_trap_excitation_slows_the_walk():
    inst = trap_construction(6)
    slow = expected_hitting_times(inst.graph, inst.b, inst.excited).times[inst.a]
    fast = expected_hitting_times(inst.graph, inst.b, frozenset()).times[inst.a]
    assert slow > fast


def test_path_family():
    assert path_construction(1).graph.n == 2
    inst = path_construction(5)
    q = absorption_probabilities(inst.graph, inst.b, inst.excited, avoid={0}, reach={5})
    assert q.q[1] == pytest.approx(0.2, abs=1e-12)
    inst = path_construction(2)
    sol = expected_hitting_times(inst.graph, inst.b, inst.excited)
    assert sol.times[0] == pytest.approx(4.0, abs=1e-9)
    with pytest.raises(ValueError):
        path_construction(0)


@pytest.mark.parametrize(
    "inst",
    [
        unbounded_construction(7),
        bounded_construction(4),
        trap_construction(5),
        path_construction(9),
    ],
    ids=["fan", "deg3", "trap", "path"],
)
def test_every_instance_validates(inst):
    rep = validate(inst.graph)
    assert rep.connected
    labels = inst.graph.labels
    assert inst.a in labels and inst.b in labels
    assert len(set(labels.values())) == len(labels)
