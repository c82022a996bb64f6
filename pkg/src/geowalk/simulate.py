"""Monte Carlo engine for the geodesic-biased walk.

Each trial owns a counter-based random stream (see :mod:`geowalk.rng`), so
batched, chunked or multi-threaded execution produces bit-identical results
to running the trials one at a time in any order.  Excited vertices step
deterministically and consume no randomness; free vertices consume exactly
one bounded-integer draw.

Walks are capped at ``max_steps``: the hitting times of interest here grow
exponentially by design, and an honest censored count beats a biased mean.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from geowalk.graph import Graph
from geowalk.geodesic import BiasMap, bfs_distances, bias_map, forced_next_array
from geowalk.rng import CounterStream, split_vec, stream_values_vec

_CHUNK = 16384
_U0 = np.uint64(0)
_U1 = np.uint64(1)


@dataclass(frozen=True)
class WalkConfig:
    """Parameters for one simulated walk.

    ``target`` may be left None when the surrounding call supplies it.
    """

    start: int
    target: int | None = None
    max_steps: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps}")


@dataclass(frozen=True)
class WalkOutcome:
    hit: bool
    steps: int
    trajectory: tuple[int, ...] | None = None


@dataclass(frozen=True)
class EstimateReport:
    trials: int
    hits: int
    censored: int
    mean_hit_time_conditional_on_hit: float
    censoring_fraction: float
    standard_error: float


def step(g: Graph, bias: BiasMap, current: int, rng: CounterStream) -> int:
    """One move: forced at excited vertices, uniform neighbor elsewhere."""
    forced = bias.forced_step.get(current)
    if forced is not None:
        return forced
    neighbors = g.adjacency[current]
    return neighbors[rng.randbelow(len(neighbors))]


def run_walk(
    g: Graph,
    target: int,
    excited,
    cfg: WalkConfig,
    *,
    record: bool = False,
    tie_break: str = "min",
) -> WalkOutcome:
    """Walk from ``cfg.start`` until the target or the step cap, reproducibly."""
    if cfg.target is not None and cfg.target != target:
        raise ValueError(f"config target {cfg.target} conflicts with {target}")
    field = bfs_distances(g, target)
    bias = bias_map(g, field, excited, tie_break)
    rng = CounterStream(cfg.seed)
    pos = cfg.start
    steps = 0
    trajectory = [pos] if record else None
    while pos != target and steps < cfg.max_steps:
        pos = step(g, bias, pos, rng)
        steps += 1
        if record:
            trajectory.append(pos)
    hit = pos == target
    return WalkOutcome(
        hit=hit,
        steps=steps if hit else cfg.max_steps,
        trajectory=tuple(trajectory) if record else None,
    )


def _walk_batch(
    flat: np.ndarray,
    offsets: np.ndarray,
    degrees: np.ndarray,
    forced: np.ndarray,
    start: int,
    target: int,
    seeds: np.ndarray,
    max_steps: int,
):
    """Advance one walk per seed in lockstep; returns (hit, steps) arrays."""
    nt = len(seeds)
    pos = np.full(nt, start, dtype=np.int64)
    ctr = np.zeros(nt, dtype=np.uint64)
    steps = np.zeros(nt, dtype=np.int64)
    hit = pos == target
    alive = ~hit
    while True:
        idx = np.nonzero(alive)[0]
        if idx.size == 0:
            break
        p = pos[idx]
        new_pos = forced[p]
        free = new_pos < 0
        if free.any():
            free_trials = idx[free]
            free_pos = p[free]
            d = degrees[free_pos].astype(np.uint64)
            draw = np.empty(free_trials.size, dtype=np.int64)
            pending = np.arange(free_trials.size)
            while pending.size:
                sel = free_trials[pending]
                u = stream_values_vec(seeds[sel], ctr[sel])
                ctr[sel] += _U1
                dd = d[pending]
                rem = (_U0 - dd) % dd  # 2**64 mod degree
                ok = (rem == _U0) | (u < (_U0 - rem))
                accepted = pending[ok]
                draw[accepted] = (u[ok] % dd[ok]).astype(np.int64)
                pending = pending[~ok]
            new_pos[free] = flat[offsets[free_pos] + draw]
        pos[idx] = new_pos
        steps[idx] += 1
        arrived = new_pos == target
        hit[idx[arrived]] = True
        alive[idx] = ~arrived & (steps[idx] < max_steps)
    return hit, np.where(hit, steps, max_steps)


def estimate_hitting_time(
    g: Graph,
    target: int,
    excited,
    start: int,
    trials: int,
    max_steps: int,
    master_seed: int,
    *,
    workers: int = 1,
    tie_break: str = "min",
) -> EstimateReport:
    """Censored Monte Carlo estimate of the expected hitting time.

    Trial i runs on the stream seeded by ``split(master_seed, i)``; the
    aggregate is independent of chunking and worker count.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if max_steps < 1:
        raise ValueError(f"max_steps must be >= 1, got {max_steps}")
    field = bfs_distances(g, target)
    bias = bias_map(g, field, excited, tie_break)
    forced = forced_next_array(g, bias)
    flat, offsets, degrees = g._csr
    seeds = split_vec(master_seed, np.arange(trials, dtype=np.uint64))

    spans = [(lo, min(lo + _CHUNK, trials)) for lo in range(0, trials, _CHUNK)]

    def run_span(span):
        lo, hi = span
        return _walk_batch(
            flat, offsets, degrees, forced, start, target, seeds[lo:hi], max_steps
        )

    if workers <= 1 or len(spans) <= 1:
        parts = [run_span(s) for s in spans]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run_span, spans))
    hit = np.concatenate([p[0] for p in parts])
    steps = np.concatenate([p[1] for p in parts])

    hits = int(hit.sum())
    censored = trials - hits
    hit_steps = steps[hit]
    mean = float(hit_steps.mean()) if hits else float("nan")
    if hits >= 2:
        se = float(hit_steps.std(ddof=1) / np.sqrt(hits))
    else:
        se = float("nan")
    return EstimateReport(
        trials=trials,
        hits=hits,
        censored=censored,
        mean_hit_time_conditional_on_hit=mean,
        censoring_fraction=censored / trials,
        standard_error=se,
    )
