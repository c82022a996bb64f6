"""Closed-form bound evaluators for the slowdown constructions.

Everything here is pure arithmetic.  Quantities that outgrow the float
range are evaluated in the log domain; linear values are reported alongside
whenever they are representable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

import numpy as np


class DomainError(ValueError):
    """Argument outside the bound's domain."""


@dataclass(frozen=True)
class LogBound:
    """A positive quantity carried as its natural log, plus the linear
    value when it fits in a float."""

    log_value: float
    value: float | None


@dataclass(frozen=True)
class ExcursionBounds:
    """Tail bounds for the escape of the bounded-degree construction.

    ``p_long`` bounds excursions that survive more than m**1.5 watched
    steps without retracing; ``p_short`` bounds the rest through the
    Bernoulli tail of the +-1 walk; their sum lower-bounds the escape
    time from the first spine vertex via the renewal inequality
    T >= 1/p.  ``hitting_bound_simple`` is the relaxed closed form
    exp(sqrt(m)/10) / (m**1.5 + 1).
    """

    m: int
    epsilon: Fraction
    p_long: float
    log_p_long: float
    p_long_relaxed: float
    p_short: float
    log_p_short: float
    p_total: float
    log_p_total: float
    hitting_bound: float
    log_hitting_bound: float
    hitting_bound_simple: float
    log_hitting_bound_simple: float


@dataclass(frozen=True)
class BoundReport:
    name: str
    params: dict
    relation: str  # "ge", "le" or "eq" on measured vs bound
    bound_value: float
    measured_value: float
    satisfied: bool
    slack: float


def make_report(
    name: str,
    params: dict,
    relation: str,
    bound_value: float,
    measured_value: float,
    rel_tol: float = 1e-9,
) -> BoundReport:
    scale = max(abs(bound_value), abs(measured_value), 1.0)
    if relation == "ge":
        satisfied = measured_value >= bound_value - rel_tol * scale
        slack = measured_value - bound_value
    elif relation == "le":
        satisfied = measured_value <= bound_value + rel_tol * scale
        slack = bound_value - measured_value
    elif relation == "eq":
        slack = -abs(measured_value - bound_value)
        satisfied = -slack <= rel_tol * scale
    else:
        raise ValueError(f"unknown relation {relation!r}")
    return BoundReport(
        name=name,
        params=dict(params),
        relation=relation,
        bound_value=bound_value,
        measured_value=measured_value,
        satisfied=bool(satisfied),
        slack=slack,
    )


def chernoff_bound(mu: float, delta: float) -> float:
    """Upper tail of a Bernoulli sum: P(X >= (1+delta) mu) <= this value."""
    if mu <= 0:
        raise DomainError(f"mu must be positive, got {mu}")
    if delta <= 0:
        raise DomainError(f"delta must be positive, got {delta}")
    return math.exp(-(delta * delta) * mu / (2.0 + delta))


def gamblers_ruin(n: int) -> float:
    """Chance the simple walk on 0..n, started at 1, reaches n before 0."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return 1.0 / n


def epsilon_retrace(m: int) -> Fraction:
    """Retrace probability of the bounded-degree construction, 1/(4m+5)."""
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m}")
    return Fraction(1, 4 * m + 5)


def spine_hitting_lower_bound(k: int, j: int) -> LogBound:
    """Growth floor for reaching the j-th spine vertex of the fan
    construction: k**(j-1) / (4**(j-1) * (j-1)!).

    Exact integer arithmetic for small j, log-gamma beyond.
    """
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if not 1 <= j <= isqrt(k) + 1:
        raise DomainError(f"j must lie in [1, {isqrt(k) + 1}] for k={k}, got {j}")
    log_value = (j - 1) * (math.log(k) - math.log(4.0)) - math.lgamma(j)
    if j <= 21:
        exact = Fraction(k ** (j - 1), 4 ** (j - 1) * math.factorial(j - 1))
        return LogBound(log_value=log_value, value=float(exact))
    value = math.exp(log_value) if log_value < 700.0 else None
    return LogBound(log_value=log_value, value=value)


def spine_ratio_floor(k: int, j: int) -> float:
    """Per-step growth factor (k+2j+2)/(2j+2) of the fan's spine times."""
    if k < 1 or j < 1:
        raise DomainError(f"k and j must be >= 1, got k={k}, j={j}")
    return (k + 2 * j + 2) / (2 * j + 2)


def excursion_bounds(m: int) -> ExcursionBounds:
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m}")
    eps = epsilon_retrace(m)
    m32 = m ** 1.5
    steps = math.floor(m32)
    log_p_long = steps * math.log1p(-1.0 / (4 * m + 5))
    log_relaxed = -math.sqrt(m) / 10.0
    log_p_short = 1.5 * math.log(m) + log_relaxed
    # p_long + p_short via logs so huge m stays finite
    hi = max(log_p_long, log_p_short)
    log_p_total = hi + math.log(math.exp(log_p_long - hi) + math.exp(log_p_short - hi))
    log_hitting = -log_p_total
    log_simple = math.sqrt(m) / 10.0 - math.log(m32 + 1.0)

    def lin(lv: float) -> float:
        return math.exp(lv) if lv < 700.0 else math.inf

    return ExcursionBounds(
        m=m,
        epsilon=eps,
        p_long=lin(log_p_long),
        log_p_long=log_p_long,
        p_long_relaxed=lin(log_relaxed),
        p_short=lin(log_p_short),
        log_p_short=log_p_short,
        p_total=lin(log_p_total),
        log_p_total=log_p_total,
        hitting_bound=lin(log_hitting),
        log_hitting_bound=log_hitting,
        hitting_bound_simple=lin(log_simple),
        log_hitting_bound_simple=log_simple,
    )


def slowdown_exponent(n: int, family: str) -> float:
    """Exponent of the hitting-time growth: n**(1/4) * log(n) / 100 for the
    unbounded-degree family, n**(1/4) / 100 for the max-degree-3 family."""
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    root = n ** 0.25
    if family == "unbounded":
        return root * math.log(n) / 100.0
    if family == "bounded":
        return root / 100.0
    raise DomainError(f"family must be 'unbounded' or 'bounded', got {family!r}")


# ---------------------------------------------------------------------------
# Pure-arithmetic validity sweeps
# ---------------------------------------------------------------------------


def long_excursion_relaxation_margin(m_max: int = 10_000) -> float:
    """Worst margin of (1 - 1/(4m+5))**(m**1.5) <= exp(-sqrt(m)/10) over
    integer m in [1, m_max], in the log domain (>= 0 means it holds)."""
    m = np.arange(1, m_max + 1, dtype=np.float64)
    lhs = (m ** 1.5) * np.log1p(-1.0 / (4.0 * m + 5.0))
    rhs = -np.sqrt(m) / 10.0
    return float(np.min(rhs - lhs))


def step_tail_margin(m_max: int = 1_000) -> float:
    """Worst margin of exp(-m**2/(4t+2m)) <= exp(-sqrt(m)/10) over integer
    m in [1, m_max] and t in [1, floor(m**1.5)], in the log domain."""
    worst = math.inf
    for m in range(1, m_max + 1):
        t = np.arange(1, math.floor(m ** 1.5) + 1, dtype=np.float64)
        lhs = -(m * m) / (4.0 * t + 2.0 * m)
        margin = float(np.min(-math.sqrt(m) / 10.0 - lhs))
        worst = min(worst, margin)
    return worst
