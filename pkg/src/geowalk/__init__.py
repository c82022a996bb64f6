"""Geodesic-biased random walks on finite graphs: generators, exact solvers, Monte Carlo."""

__version__ = "0.1.0"

from geowalk.graph import (
    Graph,
    LabeledInstance,
    ValidationReport,
    build_graph,
    load_instance,
    save_instance,
    validate,
)
from geowalk.geodesic import BiasMap, DistanceField, bfs_distances, bias_map
from geowalk.markov import (
    AbsorptionSolution,
    HittingSolution,
    InducedChain,
    TransitionMatrix,
    absorption_probabilities,
    expected_hitting_times,
    induce_chain,
    retrace_probability,
    transition_matrix,
)
from geowalk.simulate import (
    EstimateReport,
    WalkConfig,
    WalkOutcome,
    estimate_hitting_time,
    run_walk,
    step,
)
from geowalk.constructions import (
    bounded_construction,
    path_construction,
    trap_construction,
    unbounded_construction,
)

__all__ = [
    "Graph",
    "LabeledInstance",
    "ValidationReport",
    "build_graph",
    "validate",
    "save_instance",
    "load_instance",
    "DistanceField",
    "BiasMap",
    "bfs_distances",
    "bias_map",
    "TransitionMatrix",
    "HittingSolution",
    "AbsorptionSolution",
    "InducedChain",
    "transition_matrix",
    "expected_hitting_times",
    "absorption_probabilities",
    "induce_chain",
    "retrace_probability",
    "WalkConfig",
    "WalkOutcome",
    "EstimateReport",
    "step",
    "run_walk",
    "estimate_hitting_time",
    "unbounded_construction",
    "bounded_construction",
    "trap_construction",
    "path_construction",
]
