"""Exact numerics for the geodesic-biased walk.

Builds the row-stochastic transition matrix (uniform rows at free vertices,
unit rows at excited ones, absorbing target), solves expected hitting times
and absorption probabilities by sparse LU with iterative refinement, and
reduces the walk to the chain it induces on a watched vertex set.

A separate exact-rational path (arbitrary-precision sparse elimination,
``n <= 2000``) provides an independent oracle for every float solve.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from geowalk.graph import Graph
from geowalk.geodesic import DisconnectedGraphError, bfs_distances, bias_map

try:  # gmpy2 speeds the rational oracle up considerably; Fraction is fine too
    from gmpy2 import mpq as _Rat
except ImportError:  # pragma: no cover - exercised only without gmpy2
    _Rat = Fraction

RATIONAL_MAX_VERTICES = 2000


class SolveOverflowError(ArithmeticError):
    """Solution exceeds the representable floating-point range."""


class ResidualTooLargeError(ArithmeticError):
    def __init__(self, residual: float, tol: float):
        super().__init__(f"residual {residual:.3e} above tolerance {tol:.3e}")
        self.residual = residual
        self.tol = tol


class StatesOverlapError(ValueError):
    """Avoid and reach sets intersect."""


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    P: sp.csr_matrix
    absorbing: frozenset[int]


@dataclass(frozen=True, eq=False)
class HittingSolution:
    target: int
    times: np.ndarray
    residual: float


@dataclass(frozen=True, eq=False)
class AbsorptionSolution:
    avoid: frozenset[int]
    reach: frozenset[int]
    q: np.ndarray
    residual: float


@dataclass(frozen=True, eq=False)
class InducedChain:
    """Walk watched on ``states``: row i gives the distribution of the next
    watched vertex other than i itself (absorbing rows are identity)."""

    states: tuple[int, ...]
    matrix: np.ndarray
    absorbing: frozenset[int]


@dataclass(frozen=True)
class RetraceReport:
    m: int
    epsilon: float
    per_index: tuple[float, ...]


def _forced_map(g: Graph, bias_target: int, excited, tie_break: str) -> dict[int, int]:
    field = bfs_distances(g, bias_target)
    return bias_map(g, field, excited, tie_break).forced_step


def transition_matrix(
    g: Graph, target: int, excited, tie_break: str = "min"
) -> TransitionMatrix:
    """One-step law: uniform at free vertices, forced at excited, absorbing target."""
    forced = _forced_map(g, target, excited, tie_break)
    rows, cols, vals = [], [], []
    for x in range(g.n):
        if x == target:
            rows.append(x); cols.append(x); vals.append(1.0)
        elif x in forced:
            rows.append(x); cols.append(forced[x]); vals.append(1.0)
        else:
            deg = g.degree(x)
            w = 1.0 / deg
            for y in g.adjacency[x]:
                rows.append(x); cols.append(y); vals.append(w)
    P = sp.csr_matrix((vals, (rows, cols)), shape=(g.n, g.n))
    return TransitionMatrix(P=P, absorbing=frozenset({target}))


def _check_reaches(g: Graph, target: int, forced: dict[int, int], absorbing: set[int]):
    """Every vertex must be able to hit ``absorbing`` under the dynamics."""
    reverse: list[list[int]] = [[] for _ in range(g.n)]
    for x in range(g.n):
        if x == target or x in absorbing:
            continue
        succ = [forced[x]] if x in forced else list(g.adjacency[x])
        for y in succ:
            reverse[y].append(x)
    seen = set(absorbing)
    stack = list(absorbing)
    while stack:
        u = stack.pop()
        for w in reverse[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    for x in range(g.n):
        if x not in seen:
            raise DisconnectedGraphError(x)


def _finite_support(g: Graph, target: int, bias_target: int, forced: dict[int, int]):
    """Vertices whose expected time to hit ``target`` is finite.

    The walk stops for good at its own bias target, so any vertex that can
    slip there without passing ``target`` first has infinite expected
    hitting time.  Returns None when that cannot happen (bias aimed at the
    hitting target itself).
    """
    if bias_target == target:
        return None
    reverse: list[list[int]] = [[] for _ in range(g.n)]
    for x in range(g.n):
        if x == target or x == bias_target:
            continue  # paths may not pass through the hitting target
        succ = [forced[x]] if x in forced else list(g.adjacency[x])
        for y in succ:
            reverse[y].append(x)
    escapes = {bias_target}
    stack = [bias_target]
    while stack:
        u = stack.pop()
        for w in reverse[u]:
            if w not in escapes:
                escapes.add(w)
                stack.append(w)
    escapes.discard(target)
    return np.array([x for x in range(g.n) if x not in escapes], dtype=np.int64)


def _solve_refined(A: sp.csc_matrix, b: np.ndarray, tol: float):
    """Sparse LU with iterative refinement; returns (x, relative residual)."""
    lu = splu(A)

    def residual(x):
        r = b - A @ x
        scale = max(1.0, float(np.max(np.abs(x))))
        return r, float(np.max(np.abs(r))) / scale

    x = lu.solve(b)
    if not np.all(np.isfinite(x)):
        raise SolveOverflowError("linear solve produced non-finite values")
    r, res = residual(x)
    for _ in range(10):
        if res <= tol * 1e-3:
            break
        dx = lu.solve(r)
        if not np.all(np.isfinite(dx)):
            break
        x_new = x + dx
        r_new, res_new = residual(x_new)
        if res_new >= res:
            break
        x, r, res = x_new, r_new, res_new
    if not np.all(np.isfinite(x)):
        raise SolveOverflowError("linear solve produced non-finite values")
    if res > tol:
        raise ResidualTooLargeError(res, tol)
    return x, res


def _interior_system(P: sp.csr_matrix, interior: np.ndarray):
    """(I - Q) over the interior states, as CSC, plus P restricted columns."""
    Q = P[interior][:, interior]
    A = (sp.identity(len(interior), format="csr") - Q).tocsc()
    return A


def expected_hitting_times(
    g: Graph,
    target: int,
    excited,
    *,
    bias_target: int | None = None,
    tol: float = 1e-9,
    rational: bool = False,
    tie_break: str = "min",
) -> HittingSolution:
    """Expected steps to first reach ``target`` from every vertex.

    ``bias_target`` aims the geodesic bias (defaults to ``target``); the
    hitting time is measured at ``target`` regardless.  Solves the
    first-step system (I - Q) T = 1 over the non-absorbing states.  When
    the bias target differs from the hitting target, vertices that can
    reach the (absorbing) bias target without passing the hitting target
    get time ``inf``.
    """
    bt = target if bias_target is None else bias_target
    forced = _forced_map(g, bt, excited, tie_break)
    if rational:
        exact = rational_hitting_times(
            g, target, excited, bias_target=bt, tie_break=tie_break
        )
        try:
            times = np.array([float(v) for v in exact])
        except OverflowError as exc:
            raise SolveOverflowError("rational solution exceeds float range") from exc
        return HittingSolution(target=target, times=times, residual=0.0)

    tm = transition_matrix(g, bt, excited, tie_break)
    finite = _finite_support(g, target, bt, forced)
    if finite is None:
        _check_reaches(g, bt, forced, {target})
        times = np.zeros(g.n)
        interior = np.array([x for x in range(g.n) if x != target], dtype=np.int64)
    else:
        times = np.full(g.n, np.inf)
        times[target] = 0.0
        interior = finite[finite != target]
    res = 0.0
    if len(interior):
        A = _interior_system(tm.P, interior)
        b = np.ones(len(interior))
        x, res = _solve_refined(A, b, tol)
        times[interior] = x
    return HittingSolution(target=target, times=times, residual=res)


def absorption_probabilities(
    g: Graph,
    target: int,
    excited,
    avoid,
    reach,
    *,
    tol: float = 1e-9,
    rational: bool = False,
    tie_break: str = "min",
) -> AbsorptionSolution:
    """Probability of hitting ``reach`` before ``avoid`` from every vertex.

    The walk's own target stays absorbing: if it lies outside both sets,
    getting absorbed there counts as failing to reach ``reach``.
    """
    avoid = frozenset(avoid)
    reach = frozenset(reach)
    if not avoid or not reach:
        raise ValueError("avoid and reach sets must be nonempty")
    if avoid & reach:
        raise StatesOverlapError(f"states in both sets: {sorted(avoid & reach)}")
    forced = _forced_map(g, target, excited, tie_break)
    boundary = set(avoid) | set(reach) | {target}
    _check_reaches(g, target, forced, boundary)
    if rational:
        exact = rational_absorption_probabilities(
            g, target, excited, avoid, reach, tie_break=tie_break
        )
        q = np.array([float(v) for v in exact])
        return AbsorptionSolution(avoid=avoid, reach=reach, q=q, residual=0.0)

    tm = transition_matrix(g, target, excited, tie_break)
    interior = np.array([x for x in range(g.n) if x not in boundary], dtype=np.int64)
    q = np.zeros(g.n)
    q[list(reach)] = 1.0
    res = 0.0
    if len(interior):
        A = _interior_system(tm.P, interior)
        b = np.asarray(tm.P[interior][:, sorted(reach)].sum(axis=1)).ravel()
        x, res = _solve_refined(A, b, tol)
        q[interior] = x
    return AbsorptionSolution(avoid=avoid, reach=reach, q=q, residual=res)


def induce_chain(
    g: Graph,
    target: int,
    excited,
    states,
    absorbing,
    *,
    tol: float = 1e-9,
    rational: bool = False,
    tie_break: str = "min",
) -> InducedChain:
    """Reduce the walk to the chain of its successive visits to ``states``.

    Row i is the distribution of the first watched vertex other than i
    reached after one step from i (one absorption solve per row, with the
    other watched vertices absorbing).  Rows marked ``absorbing`` are
    identity.  The walk target must be one of the absorbing states so no
    probability mass can leak out of the watched set.
    """
    states = tuple(states)
    if not states:
        raise ValueError("states must be nonempty")
    if len(set(states)) != len(states):
        raise ValueError("states must be distinct")
    absorbing = frozenset(absorbing)
    if not absorbing <= set(states):
        raise ValueError("absorbing states must be a subset of states")
    if target not in absorbing:
        raise ValueError("the walk target must be among the absorbing states")

    index = {s: k for k, s in enumerate(states)}
    if rational:
        forced = _forced_map(g, target, excited, tie_break)
        rows = _rational_rows(g, target, forced)
        M = np.zeros((len(states), len(states)))
        for k, i in enumerate(states):
            if i in absorbing:
                M[k, k] = 1.0
                continue
            row = _rational_induced_row(rows, states, i, g.n)
            for j, v in row.items():
                M[k, index[j]] = float(v)
        return InducedChain(states=states, matrix=M, absorbing=absorbing)

    tm = transition_matrix(g, target, excited, tie_break)
    P = tm.P
    n_s = len(states)
    M = np.zeros((n_s, n_s))
    for k, i in enumerate(states):
        if i in absorbing:
            M[k, k] = 1.0
            continue
        watched = np.array([s for s in states if s != i], dtype=np.int64)
        watched_pos = {int(s): w for w, s in enumerate(watched)}
        interior = np.array(
            [x for x in range(g.n) if x not in watched_pos], dtype=np.int64
        )
        A = _interior_system(P, interior)
        R = P[interior][:, watched].toarray()
        lu = splu(A)
        H = lu.solve(R)  # hit distribution over watched, from each interior state
        pos = {int(x): r for r, x in enumerate(interior)}
        row = P[i].toarray().ravel()
        dist = np.zeros(len(watched))
        for y in np.nonzero(row)[0]:
            w = row[y]
            if int(y) in watched_pos:
                dist[watched_pos[int(y)]] += w
            else:
                dist += w * H[pos[int(y)]]
        for j, v in zip(watched, dist):
            M[k, index[int(j)]] = v
    row_sums = M.sum(axis=1)
    if np.max(np.abs(row_sums - 1.0)) > 1e-9:
        raise ResidualTooLargeError(float(np.max(np.abs(row_sums - 1.0))), 1e-9)
    return InducedChain(states=states, matrix=M, absorbing=absorbing)


def retrace_probability(m: int, *, tol: float = 1e-9) -> RetraceReport:
    """Chance that a spine vertex's side excursion carries the walk back to
    the start of the bounded-degree construction.

    For each spine position the probability of reaching the excited chain
    before returning is obtained by an absorption solve on the full graph,
    then folded through the one-step recursion of the three-way choice at
    the spine vertex.  All positions must agree.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    from geowalk.constructions import bounded_construction

    inst = bounded_construction(m)
    g = inst.graph
    values = []
    for i in range(1, m + 1):
        v_i = inst.id_of(f"v{i}")
        s_i = inst.id_of(f"s{i}")
        top = inst.id_of(f"r_{i}_{2 * m + 1}")
        sol = absorption_probabilities(
            g, inst.b, inst.excited, avoid={v_i}, reach={s_i}, tol=tol
        )
        rho = float(sol.q[top])
        values.append(rho / (2.0 + rho))
    spread = max(values) - min(values)
    if spread > 1e-10:
        raise ArithmeticError(f"retrace probabilities disagree across positions: {values}")
    return RetraceReport(m=m, epsilon=float(np.mean(values)), per_index=tuple(values))


# ---------------------------------------------------------------------------
# Exact-rational oracle (n <= RATIONAL_MAX_VERTICES)
# ---------------------------------------------------------------------------


def _rational_rows(g: Graph, target: int, forced: dict[int, int]):
    rows = {}
    for x in range(g.n):
        if x == target:
            rows[x] = {x: _Rat(1)}
        elif x in forced:
            rows[x] = {forced[x]: _Rat(1)}
        else:
            w = _Rat(1, g.degree(x))
            rows[x] = {y: w for y in g.adjacency[x]}
    return rows


def _solve_sparse_rational(system: dict[int, dict], rhs_list: list[dict[int, object]]):
    """Exact Gaussian elimination with Markowitz-style diagonal pivoting.

    ``system`` maps unknown id to a sparse row over unknown ids.  The
    matrices here are M-matrices (I minus a substochastic block), so the
    diagonal never vanishes and diagonal pivoting is always valid.
    Returns one dense dict per right-hand side.
    """
    rows = {i: dict(r) for i, r in system.items()}
    nrhs = len(rhs_list)
    rhs = {i: [b.get(i, _Rat(0)) for b in rhs_list] for i in rows}
    cols: dict[int, set[int]] = {i: set() for i in rows}
    for i, r in rows.items():
        for c in r:
            cols[c].add(i)

    retired: list[tuple[int, dict, list]] = []
    remaining = set(rows)
    while remaining:
        pivot = min(
            remaining,
            key=lambda i: ((len(rows[i]) - 1) * (len(cols[i]) - 1), i),
        )
        remaining.discard(pivot)
        prow = rows.pop(pivot)
        prhs = rhs.pop(pivot)
        pval = prow[pivot]
        for c in prow:
            cols[c].discard(pivot)
        touchers = cols.pop(pivot)
        retired.append((pivot, prow, prhs))
        for r in touchers:
            row = rows[r]
            f = row.pop(pivot) / pval
            for c, v in prow.items():
                if c == pivot:
                    continue
                new = row.get(c, _Rat(0)) - f * v
                if new == 0:
                    if c in row:
                        del row[c]
                        cols[c].discard(r)
                else:
                    if c not in row:
                        cols[c].add(r)
                    row[c] = new
            rrhs = rhs[r]
            for k in range(nrhs):
                rrhs[k] = rrhs[k] - f * prhs[k]

    solutions = [dict() for _ in range(nrhs)]
    for pivot, prow, prhs in reversed(retired):
        for k in range(nrhs):
            acc = prhs[k]
            for c, v in prow.items():
                if c != pivot:
                    acc = acc - v * solutions[k][c]
            solutions[k][pivot] = acc / prow[pivot]
    return solutions


def _guard_rational(g: Graph):
    if g.n > RATIONAL_MAX_VERTICES:
        raise ValueError(
            f"exact-rational mode supports n <= {RATIONAL_MAX_VERTICES}, got {g.n}"
        )


def _rational_interior_system(rows, interior: set[int]):
    system = {}
    for x in interior:
        row = {}
        for y, w in rows[x].items():
            if y in interior:
                row[y] = -w
        row[x] = row.get(x, _Rat(0)) + _Rat(1)
        system[x] = row
    return system


def rational_hitting_times(
    g: Graph,
    target: int,
    excited,
    *,
    bias_target: int | None = None,
    tie_break: str = "min",
) -> list:
    """Exact expected hitting times as rationals (index = vertex id).

    Entries are ``math.inf`` for vertices that can escape to a distinct
    bias target without passing the hitting target.
    """
    _guard_rational(g)
    bt = target if bias_target is None else bias_target
    forced = _forced_map(g, bt, excited, tie_break)
    rows = _rational_rows(g, bt, forced)
    finite = _finite_support(g, target, bt, forced)
    if finite is None:
        _check_reaches(g, bt, forced, {target})
        interior = {x for x in range(g.n) if x != target}
    else:
        interior = {int(x) for x in finite if x != target}
    system = _rational_interior_system(rows, interior)
    rhs = {x: _Rat(1) for x in interior}
    (sol,) = _solve_sparse_rational(system, [rhs])
    out = []
    for x in range(g.n):
        if x == target:
            out.append(_Rat(0))
        elif x in interior:
            out.append(sol[x])
        else:
            out.append(float("inf"))
    return out


def rational_absorption_probabilities(
    g: Graph,
    target: int,
    excited,
    avoid,
    reach,
    *,
    tie_break: str = "min",
) -> list:
    """Exact probabilities of hitting ``reach`` before ``avoid``."""
    _guard_rational(g)
    avoid = frozenset(avoid)
    reach = frozenset(reach)
    if avoid & reach:
        raise StatesOverlapError(f"states in both sets: {sorted(avoid & reach)}")
    forced = _forced_map(g, target, excited, tie_break)
    rows = _rational_rows(g, target, forced)
    boundary = set(avoid) | set(reach) | {target}
    interior = {x for x in range(g.n) if x not in boundary}
    system = _rational_interior_system(rows, interior)
    rhs = {
        x: sum((w for y, w in rows[x].items() if y in reach), _Rat(0))
        for x in interior
    }
    (sol,) = _solve_sparse_rational(system, [rhs])
    out = []
    for x in range(g.n):
        if x in reach:
            out.append(_Rat(1))
        elif x in avoid or x == target:
            out.append(_Rat(0))
        else:
            out.append(sol.get(x, _Rat(0)))
    return out


def _rational_induced_row(rows, states, i: int, n: int):
    """Exact induced-chain row for non-absorbing watched vertex ``i``."""
    watched = [s for s in states if s != i]
    watched_set = set(watched)
    interior = {x for x in range(n) if x not in watched_set}
    system = _rational_interior_system(rows, interior)
    rhs_list = [
        {x: rows[x].get(j, _Rat(0)) for x in interior if j in rows[x]}
        for j in watched
    ]
    sols = _solve_sparse_rational(system, rhs_list)
    return {j: sols[k].get(i, _Rat(0)) for k, j in enumerate(watched)}
