"""Optimal-policy oracles and the brute-force validator.

Three independent routes to "what should have been ordered":
  * newsvendor_q_star: smallest q whose demand CDF reaches the critical
    ratio, exact for finite-support processes.
  * expost_optimal: closed-form per-order decomposition of the hindsight
    optimum for the multi-period problem, given realized demands and
    arrival periods.
  * brute_force_dp: exhaustive dynamic program over order quantities for
    small instances. Exists purely to validate expost_optimal; the two are
    deliberately separate code paths.

All cost arithmetic is exact (integers and fractions).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .rational import as_fraction
from .rng import StochasticProcess, poisson_cdf

__all__ = [
    "ExPostSolution",
    "brute_force_dp",
    "critical_ratio",
    "distance_to_optimal",
    "expost_optimal",
    "newsvendor_expected_profit",
    "newsvendor_q_star",
]


def critical_ratio(c_u, c_o) -> Fraction:
    """Critical ratio c_u / (c_u + c_o).

    c_u is the per-unit cost of ordering one too few (underage), c_o of
    ordering one too many (overage). Both must be >= 0 and not both zero.
    """
    cu = as_fraction(c_u, "c_u")
    co = as_fraction(c_o, "c_o")
    if cu < 0 or co < 0:
        raise ValueError(f"costs must be >= 0, got c_u={c_u}, c_o={c_o}")
    if cu == 0 and co == 0:
        raise ValueError("c_u and c_o cannot both be zero")
    return cu / (cu + co)


def _finite_support_cdf(process: StochasticProcess) -> list[tuple[int, Fraction]] | None:
    """(value, CDF(value)) at each support point, exact, or None if the
    support is unbounded."""
    p = process.params
    if process.kind == "uniform_int":
        low, high = p["low"], p["high"]
        n = high - low + 1
        return [(v, Fraction(v - low + 1, n)) for v in range(low, high + 1)]
    if process.kind == "constant":
        return [(p["value"], Fraction(1))]
    if process.kind == "trace":
        values = sorted(p["values"])
        n = len(values)
        out: list[tuple[int, Fraction]] = []
        seen = 0
        for i, v in enumerate(values):
            seen = i + 1
            if i + 1 < n and values[i + 1] == v:
                continue
            out.append((v, Fraction(seen, n)))
        return out
    return None


def newsvendor_q_star(process: StochasticProcess, c_u, c_o) -> int:
    """Smallest q with P(D <= q) >= c_u / (c_u + c_o).

    Exact for uniform_int, constant, and trace demand. Poisson and truncated
    normal use float CDFs, which is ample for the fractiles involved.
    """
    ratio = critical_ratio(c_u, c_o)
    if ratio == 0:
        return 0
    support = _finite_support_cdf(process)
    if support is not None:
        for value, cdf in support:
            if cdf >= ratio:
                return value
        return support[-1][0]
    p = process.params
    target = float(ratio)
    if process.kind == "poisson":
        q = 0
        while poisson_cdf(p["lam"], q) < target:
            q += 1
            if q > 10_000_000:
                raise ValueError("poisson fractile search did not converge")
        return q
    # normal_truncated: integer value q has CDF Phi((q + 0.5 - mu) / sigma),
    # with all mass below the floor lumped onto the floor.
    mu, sigma, low = p["mu"], p["sigma"], p.get("low", 0)

    def cdf(q: int) -> float:
        return 0.5 * (1.0 + math.erf((q + 0.5 - mu) / (sigma * math.sqrt(2.0))))

    q = low
    while cdf(q) < target:
        q += 1
        if q > low + max(1, int(12 * sigma + abs(mu))) + 10_000:
            raise ValueError("normal fractile search did not converge")
    return q


def newsvendor_expected_profit(process: StochasticProcess, q: int, price, cost) -> Fraction:
    """Exact E[price * min(q, D) - cost * q] for finite-support demand."""
    r = as_fraction(price, "price")
    c = as_fraction(cost, "cost")
    p = process.params
    if process.kind == "uniform_int":
        low, high = p["low"], p["high"]
        n = high - low + 1
        values = range(low, high + 1)
        weights = [Fraction(1, n)] * n
    elif process.kind == "constant":
        values = [p["value"]]
        weights = [Fraction(1)]
    elif process.kind == "trace":
        values = list(p["values"])
        weights = [Fraction(1, len(values))] * len(values)
    else:
        raise ValueError(f"no exact expected profit for kind {process.kind!r}")
    expected_sales = sum((w * min(q, d) for w, d in zip(weights, values)), Fraction(0))
    return r * expected_sales - c * q


@dataclass(frozen=True)
class ExPostSolution:
    """Hindsight-optimal order quantities and what each order covers.

    cover_ends[m] is the last period whose demand order m stocks for; the
    order covers demand in [arrival, cover_end] plus any backlog outstanding
    at arrival.
    """

    orders: tuple[int, ...]
    cover_ends: tuple[int, ...]
    total_cost: Fraction


def _validate_instance(
    demands: Sequence[int],
    order_periods: Sequence[int],
    arrival_periods: Sequence[int],
) -> None:
    if not demands:
        raise ValueError("demands must be non-empty")
    for d in demands:
        if isinstance(d, bool) or not isinstance(d, int) or d < 0:
            raise ValueError(f"demands must be ints >= 0, got {d!r}")
    if len(order_periods) != len(arrival_periods):
        raise ValueError("order_periods and arrival_periods must have equal length")
    T = len(demands)
    prev_t = 0
    for t in order_periods:
        if isinstance(t, bool) or not isinstance(t, int) or not 1 <= t <= T:
            raise ValueError(f"order period {t!r} outside 1..{T}")
        if t <= prev_t:
            raise ValueError("order_periods must be strictly increasing")
        prev_t = t
    prev_v = 0
    for t, v in zip(order_periods, arrival_periods):
        if isinstance(v, bool) or not isinstance(v, int) or v <= t:
            raise ValueError(f"arrival {v!r} must land strictly after placement {t}")
        if v < prev_v:
            raise ValueError("arrivals must be non-decreasing (no order crossing)")
        prev_v = v


def expost_optimal(
    demands: Sequence[int],
    order_periods: Sequence[int],
    arrival_periods: Sequence[int],
    initial_inventory: int = 0,
    h=1,
    b=9,
) -> ExPostSolution:
    """Hindsight-optimal orders for realized demands and arrival times.

    Order m covers the periods [v_m, s_m] where s_m = v_m + k* and k* is the
    largest k with k * (h + b) < b * W, W = min(v_{m+1}, T+1) - v_m: a unit
    for period v_m + k is stocked exactly when holding it k periods beats
    backordering it until the next arrival, and backorder pressure stops at
    the horizon (v_{M+1} := T+1 bounds the last window, and any window is
    clipped at T+1 because no cost accrues past T). With b = 0 backorders
    are free and nothing is ever stocked; orders whose window is empty
    (simultaneous arrivals) contribute zero, which keeps the order index
    aligned.
    """
    _validate_instance(demands, order_periods, arrival_periods)
    hf = as_fraction(h, "h")
    bf = as_fraction(b, "b")
    if hf < 0 or bf < 0:
        raise ValueError("h and b must be >= 0")
    T = len(demands)
    M = len(order_periods)
    prefix = [0]
    for d in demands:
        prefix.append(prefix[-1] + d)

    def cumd(lo: int, hi: int) -> int:
        if hi < lo:
            return 0
        return prefix[min(hi, T)] - prefix[lo - 1]

    bounds = list(arrival_periods) + [T + 1]
    orders: list[int] = []
    covers: list[int] = []
    level = initial_inventory
    cost = Fraction(0)
    m = 0
    for t in range(1, T + 1):
        while m < M and arrival_periods[m] == t:
            window = min(bounds[m + 1], T + 1) - arrival_periods[m]
            if window <= 0 or bf == 0:
                a, s = 0, arrival_periods[m]
            else:
                # largest k with k (h + b) < b W, exact ceiling arithmetic
                k = -((-bf * window) // (hf + bf)) - 1
                s = arrival_periods[m] + int(k)
                a = max(cumd(t, s) - level, 0)
            orders.append(a)
            covers.append(s)
            level += a
            m += 1
        level -= demands[t - 1]
        cost += hf * max(level, 0) + bf * max(-level, 0)
    while m < M:
        # Arrivals beyond the horizon cannot affect cost; canonical zero.
        orders.append(0)
        covers.append(arrival_periods[m])
        m += 1
    return ExPostSolution(tuple(orders), tuple(covers), cost)


def brute_force_dp(
    demands: Sequence[int],
    order_periods: Sequence[int],
    arrival_periods: Sequence[int],
    initial_inventory: int = 0,
    h=1,
    b=9,
    max_order: int | None = None,
) -> tuple[tuple[int, ...], Fraction]:
    """Exhaustive optimum over integer order vectors, for small instances.

    Enumerates every order quantity from 0 up to a per-state cover-all bound
    (quantities beyond covering all remaining demand plus backlog are
    dominated), memoized on (order index, inventory). Independent of
    expost_optimal by construction: no fractile formula appears here.
    Instances are capped at 4 orders and a 400-unit order bound.
    """
    _validate_instance(demands, order_periods, arrival_periods)
    hf = as_fraction(h, "h")
    bf = as_fraction(b, "b")
    if hf < 0 or bf < 0:
        raise ValueError("h and b must be >= 0")
    T = len(demands)
    M = len(order_periods)
    if M > 4:
        raise ValueError(f"brute_force_dp is capped at 4 orders, got {M}")
    ceiling = sum(demands) + max(0, -initial_inventory)
    if max_order is None:
        max_order = ceiling
    if max_order > 400:
        raise ValueError(f"order bound {max_order} exceeds the brute-force cap of 400")
    prefix = [0]
    for d in demands:
        prefix.append(prefix[-1] + d)

    def cumd(lo: int, hi: int) -> int:
        if hi < lo:
            return 0
        return prefix[min(hi, T)] - prefix[lo - 1]

    def span_cost(start: int, stop: int, level: int) -> Fraction:
        """Cost of periods start..stop-1 from signed level at start of
        `start` with no arrivals in between."""
        total = Fraction(0)
        for t in range(start, stop):
            level -= demands[t - 1]
            total += hf * max(level, 0) + bf * max(-level, 0)
        return total

    # Only arrivals within the horizon carry cost consequences.
    events = [v for v in arrival_periods if v <= T]
    n = len(events)
    prelude = span_cost(1, events[0] if n else T + 1, initial_inventory)
    level0 = initial_inventory - cumd(1, (events[0] if n else T + 1) - 1)

    from functools import lru_cache

    @lru_cache(maxsize=None)
    def best(i: int, level: int) -> tuple[Fraction, int]:
        """(minimal remaining cost, best order) from event i at signed level."""
        v = events[i]
        nxt = events[i + 1] if i + 1 < n else T + 1
        bound = min(max_order, cumd(v, T) + max(0, -level))
        best_cost: Fraction | None = None
        best_a = 0
        for a in range(bound + 1):
            cost = span_cost(v, nxt, level + a)
            if i + 1 < n:
                cost += best(i + 1, level + a - cumd(v, nxt - 1))[0]
            if best_cost is None or cost < best_cost:
                best_cost = cost
                best_a = a
        return best_cost if best_cost is not None else Fraction(0), best_a

    orders: list[int] = []
    if n == 0:
        total = prelude
    else:
        total = prelude + best(0, level0)[0]
        level = level0
        for i in range(n):
            a = best(i, level)[1]
            orders.append(a)
            nxt = events[i + 1] if i + 1 < n else T + 1
            level = level + a - cumd(events[i], nxt - 1)
    while len(orders) < M:
        orders.append(0)
    best.cache_clear()
    return tuple(orders), total


def distance_to_optimal(orders: Sequence[int], optimal: Sequence[int]) -> float:
    """Euclidean distance between an order vector and the hindsight optimum."""
    if len(orders) != len(optimal):
        raise ValueError(
            f"order vectors differ in length: {len(orders)} vs {len(optimal)}"
        )
    return math.sqrt(sum((int(a) - int(o)) ** 2 for a, o in zip(orders, optimal)))
