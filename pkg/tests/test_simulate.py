import numpy as np
import pytest
from scipy import stats

from geowalk.constructions import (
    bounded_construction,
    path_construction,
    trap_construction,
    unbounded_construction,
)
from geowalk.geodesic import bfs_distances, bias_map
from geowalk.graph import build_graph
from geowalk.markov import expected_hitting_times, transition_matrix
from geowalk.rng import (
    CounterStream,
    split,
    split_vec,
    stream_value,
    stream_values_vec,
)
from geowalk.simulate import WalkConfig, estimate_hitting_time, run_walk, step
from conftest import seeded_connected_graph


# ---------------------------------------------------------------------------
# counter-based rng
# ---------------------------------------------------------------------------


def test_stream_matches_reference_vectors():
    # published SplitMix64 outputs for seeds 0 and 1234567
    assert stream_value(0, 0) == 16294208416658607535
    assert stream_value(0, 1) == 7960286522194355700
    assert stream_value(0, 2) == 487617019471545679
    assert stream_value(1234567, 0) == 6457827717110365317
    assert stream_value(1234567, 1) == 3203168211198807973


def test_vector_kernel_matches_scalar():
    rs = np.random.default_rng(3)
    seeds = rs.integers(0, 2**64, 2000, dtype=np.uint64)
    ctrs = rs.integers(0, 2**40, 2000, dtype=np.uint64)
    vec = stream_values_vec(seeds, ctrs)
    for i in range(0, 2000, 97):
        assert int(vec[i]) == stream_value(int(seeds[i]), int(ctrs[i]))
    idx = np.arange(50, dtype=np.uint64)
    assert [int(v) for v in split_vec(9, idx)] == [split(9, i) for i in range(50)]


def test_randbelow_range_and_rejection():
    rng = CounterStream(42)
    draws = [rng.randbelow(3) for _ in range(3000)]
    assert set(draws) <= {0, 1, 2}
    counts = np.bincount(draws, minlength=3)
    assert stats.chisquare(counts).pvalue > 1e-6
    with pytest.raises(ValueError):
        rng.randbelow(0)


# ---------------------------------------------------------------------------
# single steps and walks
# ---------------------------------------------------------------------------


def _bias_for(inst, tie_break="min"):
    field = bfs_distances(inst.graph, inst.b)
    return bias_map(inst.graph, field, inst.excited, tie_break)


def test_step_excited_is_deterministic():
    inst = unbounded_construction(4)
    bias = _bias_for(inst)
    rng = CounterStream(0)
    for _ in range(20):
        assert step(inst.graph, bias, inst.a, rng) == inst.id_of("v1")
    inst = bounded_construction(5)
    bias = _bias_for(inst)
    assert step(inst.graph, bias, inst.id_of("s3"), rng) == inst.id_of("s2")


def test_step_unexcited_is_roughly_uniform():
    inst = path_construction(2)
    bias = _bias_for(inst)
    rng = CounterStream(7)
    hits = sum(step(inst.graph, bias, 1, rng) == 0 for _ in range(20000))
    assert abs(hits / 20000 - 0.5) < 0.02


def test_step_uniformity_chi_square_million_draws():
    # degree-3 vertex, one stream, consecutive counters (the exact draws the
    # scalar walker would make; kernel equivalence is tested separately)
    inst = trap_construction(5)
    w = inst.id_of("w")
    deg = inst.graph.degree(w)
    n = 10**6
    seeds = np.full(n, np.uint64(split(123, 0)), dtype=np.uint64)
    ctrs = np.arange(n, dtype=np.uint64)
    u = stream_values_vec(seeds, ctrs)
    limit = np.uint64(2**64 - (2**64 % deg))
    assert np.all(u < limit)  # no rejections expected at this degree
    counts = np.bincount((u % np.uint64(deg)).astype(np.int64), minlength=deg)
    assert stats.chisquare(counts).pvalue > 1e-6


def test_run_walk_start_equals_target():
    inst = path_construction(3)
    out = run_walk(inst.graph, inst.b, inst.excited, WalkConfig(start=3, seed=1))
    assert out.hit and out.steps == 0


def test_run_walk_single_edge():
    g = build_graph(2, [(0, 1)])
    for seed in range(5):
        out = run_walk(g, 1, set(), WalkConfig(start=0, seed=seed))
        assert out.hit and out.steps == 1


def test_run_walk_deterministic():
    inst = trap_construction(4)
    cfg = WalkConfig(start=inst.a, max_steps=10_000, seed=99)
    a = run_walk(inst.graph, inst.b, inst.excited, cfg, record=True)
    b = run_walk(inst.graph, inst.b, inst.excited, cfg, record=True)
    assert a == b


def test_run_walk_conflicting_target_rejected():
    inst = path_construction(3)
    with pytest.raises(ValueError):
        run_walk(inst.graph, inst.b, inst.excited, WalkConfig(start=0, target=1))


def test_trajectory_visits_target_only_last():
    inst = trap_construction(4)
    for seed in range(30):
        cfg = WalkConfig(start=inst.a, max_steps=100_000, seed=seed)
        out = run_walk(inst.graph, inst.b, inst.excited, cfg, record=True)
        assert out.hit
        assert out.trajectory[-1] == inst.b
        assert inst.b not in out.trajectory[:-1]
        assert len(out.trajectory) == out.steps + 1


def test_censored_walk_reports_cap():
    inst = bounded_construction(6)
    cfg = WalkConfig(start=inst.a, max_steps=5, seed=0)
    out = run_walk(inst.graph, inst.b, inst.excited, cfg)
    assert not out.hit and out.steps == 5


def test_walk_config_validates_cap():
    with pytest.raises(ValueError):
        WalkConfig(start=0, max_steps=0)


# ---------------------------------------------------------------------------
# batched estimation
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "inst",
    [
        path_construction(2),
        trap_construction(5),
        unbounded_construction(4),
        bounded_construction(3),
    ],
    ids=["path2", "trap5", "fan4", "deg3-m3"],
)
def test_batch_matches_scalar_walks(inst):
    master, trials, cap = 2024, 250, 3000
    outcomes = [
        run_walk(
            inst.graph,
            inst.b,
            inst.excited,
            WalkConfig(start=inst.a, max_steps=cap, seed=split(master, i)),
        )
        for i in range(trials)
    ]
    rep = estimate_hitting_time(
        inst.graph, inst.b, inst.excited, inst.a, trials, cap, master
    )
    hit_steps = [o.steps for o in outcomes if o.hit]
    assert rep.hits == sum(o.hit for o in outcomes)
    assert rep.censored == trials - rep.hits
    assert rep.mean_hit_time_conditional_on_hit == pytest.approx(
        np.mean(hit_steps), abs=1e-12
    )


def test_worker_count_does_not_change_results():
    inst = trap_construction(5)
    reps = [
        estimate_hitting_time(
            inst.graph, inst.b, inst.excited, inst.a, 50_000, 10**5, 7, workers=w
        )
        for w in (1, 2, 4)
    ]
    assert reps[0] == reps[1] == reps[2]


def test_single_trial_report():
    inst = path_construction(1)
    rep = estimate_hitting_time(inst.graph, inst.b, inst.excited, inst.a, 1, 10, 0)
    assert rep.hits + rep.censored == 1
    assert rep.trials == 1


def test_path_mean_matches_exact():
    inst = path_construction(2)
    rep = estimate_hitting_time(inst.graph, inst.b, inst.excited, inst.a, 10**6, 10**4, 0)
    assert rep.censoring_fraction == 0.0
    assert abs(rep.mean_hit_time_conditional_on_hit - 4.0) <= 3.0 * rep.standard_error


def test_fan_mean_meets_growth_floor_and_exact():
    inst = unbounded_construction(9)
    exact = expected_hitting_times(inst.graph, inst.b, inst.excited).times[inst.a]
    rep = estimate_hitting_time(
        inst.graph, inst.b, inst.excited, inst.a, 10**5, 10**6, 31
    )
    assert rep.censoring_fraction == 0.0
    assert rep.mean_hit_time_conditional_on_hit >= 729.0 / 384.0 - 3 * rep.standard_error
    assert abs(rep.mean_hit_time_conditional_on_hit - exact) <= 4 * rep.standard_error


def test_censoring_fraction_matches_exact_mass():
    # short cap on the slow construction: compare the censored share with
    # the absorbed-by-t mass from iterating the one-step law
    inst = bounded_construction(9)
    cap, trials = 1000, 2000
    PT = transition_matrix(inst.graph, inst.b, inst.excited).P.T.tocsr()
    p = np.zeros(inst.graph.n)
    p[inst.a] = 1.0
    for _ in range(cap):
        p = PT @ p
    exact_censor = 1.0 - p[inst.b]
    rep = estimate_hitting_time(
        inst.graph, inst.b, inst.excited, inst.a, trials, cap, 5
    )
    se = np.sqrt(exact_censor * (1 - exact_censor) / trials)
    assert abs(rep.censoring_fraction - exact_censor) <= 4 * se + 1e-9
    assert rep.censoring_fraction > 0.5  # the cap bites by construction


def test_exact_vs_mc_property_suite():
    import random as pyrandom

    rng = pyrandom.Random(17)
    cases = []
    for _ in range(4):
        g = seeded_connected_graph(rng, rng.randint(4, 10))
        target = rng.randrange(g.n)
        excited = {u for u in range(g.n) if rng.random() < 0.25}
        start = rng.randrange(g.n)
        cases.append((g, target, excited, start))
    cases.append((unbounded_construction(4).graph, 3, {0}, 0))
    inst = bounded_construction(2)
    cases.append((inst.graph, inst.b, inst.excited, inst.a))
    for g, target, excited, start in cases:
        exact = expected_hitting_times(g, target, excited).times[start]
        rep = estimate_hitting_time(g, target, excited, start, 30_000, 10**5, 23)
        assert rep.censoring_fraction < 1e-3
        if start == target:
            assert rep.mean_hit_time_conditional_on_hit == 0.0
            continue
        tol = 4 * rep.standard_error
        assert abs(rep.mean_hit_time_conditional_on_hit - exact) <= tol
