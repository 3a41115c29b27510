"""Behavioral and performance metrics computed from episode logs.

Undefined metrics are None, never 0: a missing correlation and a zero
correlation mean different things, and reports must preserve that
distinction. Anchoring comes back exact (Fraction); everything destined for
a report table is a float.

Metric conventions:
  * anchoring alpha = 1 - mean_t((q_t - mu) / (q* - mu)): 0 is fully
    rational ordering at q*, 1 is full anchoring on the demand mean.
  * demand chasing rho = Pearson correlation of (q_t, d_{t-1}).
  * bullwhip beta = population std of upstream orders over population std of
    what that stage sees as demand; computed per adjacent link and
    end to end. Reported only for the serial chain.
  * turnover = sum of end-of-period on-hand stock over sum of demand served
    to that stage (the inventory-weighted form; the source text's prose
    reads as the reciprocal, the pinned definition is this one).
  * stockout rate = fraction of periods in which any due demand or
    downstream order went unfilled; always within [0, 1] per role.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

from .episode import EpisodeLog
from .errors import ConfigError
from .oracles import distance_to_optimal, expost_optimal, newsvendor_q_star
from .rational import as_fraction
from .rng import parse_process

__all__ = [
    "EpisodeReport",
    "aggregate_reports",
    "anchoring_alpha",
    "average_cost",
    "bullwhip_ratio",
    "compute_report",
    "demand_chasing_rho",
    "stockout_rate",
    "turnover_rate",
]


def anchoring_alpha(orders: Sequence[Any], mu, q_star) -> Fraction | None:
    """Exact anchoring coefficient, or None when the anchor is degenerate
    (q* equals the mean, no orders, or an undefined mean)."""
    if mu is None or q_star is None or not orders:
        return None
    mu_f = as_fraction(mu, "mu")
    q_f = as_fraction(q_star, "q_star")
    if q_f == mu_f:
        return None
    total = Fraction(0)
    for q in orders:
        total += (as_fraction(q, "order") - mu_f) / (q_f - mu_f)
    return 1 - total / len(orders)


def demand_chasing_rho(orders: Sequence[int], demands: Sequence[int]) -> float | None:
    """Pearson correlation between this period's order and last period's
    demand. None when fewer than two pairs exist or either side is constant."""
    if len(orders) != len(demands):
        raise ValueError("orders and demands must be equally long")
    x = [float(q) for q in orders[1:]]
    y = [float(d) for d in demands[:-1]]
    if len(x) < 2:
        return None
    try:
        return statistics.correlation(x, y)
    except statistics.StatisticsError:
        return None


def _population_variance(series: Sequence[int]) -> Fraction:
    n = len(series)
    mean = Fraction(sum(series), n)
    return sum(((v - mean) ** 2 for v in series), Fraction(0)) / n


def bullwhip_ratio(upstream: Sequence[int], downstream: Sequence[int]) -> float | None:
    """Ratio of population standard deviations, upstream over downstream.

    Exact variance arithmetic, so two identical non-constant series give
    exactly 1.0. None when the downstream series has zero variance or either
    series is shorter than two periods.
    """
    if len(upstream) < 2 or len(downstream) < 2:
        return None
    var_up = _population_variance(list(upstream))
    var_down = _population_variance(list(downstream))
    if var_down == 0:
        return None
    return math.sqrt(var_up / var_down)


def average_cost(costs: Sequence[Fraction], horizon: int) -> Fraction:
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    return sum(costs, Fraction(0)) / horizon


def turnover_rate(on_hand: Sequence[int], demands: Sequence[int]) -> Fraction | None:
    """Sum of positive end-of-period stock over sum of demand; None when no
    demand occurred."""
    total_demand = sum(demands)
    if total_demand == 0:
        return None
    return Fraction(sum(max(v, 0) for v in on_hand), total_demand)


def stockout_rate(unfilled: Sequence[int]) -> Fraction:
    if not unfilled:
        raise ValueError("need at least one period")
    return Fraction(sum(1 for u in unfilled if u > 0), len(unfilled))


BG_LINKS = (
    ("retailer", "demand"),
    ("wholesaler", "retailer"),
    ("distributor", "wholesaler"),
    ("plant", "distributor"),
)


@dataclass
class EpisodeReport:
    """Float-valued summary of one episode, ready for tables."""

    env_id: str
    seed: int
    horizon: int
    total_cost: float
    avg_cost: float
    per_role_avg_cost: dict[str, float]
    turnover: float | None
    per_role_turnover: dict[str, float | None]
    stockout: dict[str, float]
    stockout_mean: float
    stockout_sum: float
    alpha: float | None = None
    rho: float | None = None
    q_star: int | None = None
    demand_mean: float | None = None
    distance: float | None = None
    expost_cost: float | None = None
    bullwhip: dict[str, float | None] | None = None

    def to_flat(self) -> dict[str, float | None]:
        flat: dict[str, float | None] = {
            "total_cost": self.total_cost,
            "avg_cost": self.avg_cost,
            "turnover": self.turnover,
            "stockout_mean": self.stockout_mean,
            "stockout_sum": self.stockout_sum,
            "alpha": self.alpha,
            "rho": self.rho,
            "distance": self.distance,
            "expost_cost": self.expost_cost,
        }
        for role, value in self.per_role_avg_cost.items():
            flat[f"avg_cost.{role}"] = value
        for role, value in self.per_role_turnover.items():
            flat[f"turnover.{role}"] = value
        for role, value in self.stockout.items():
            flat[f"stockout.{role}"] = value
        if self.bullwhip is not None:
            for link, value in self.bullwhip.items():
                flat[f"bullwhip.{link}"] = value
        return flat

    def to_dict(self) -> dict[str, Any]:
        return {
            "env_id": self.env_id,
            "seed": self.seed,
            "horizon": self.horizon,
            "q_star": self.q_star,
            "demand_mean": self.demand_mean,
            **self.to_flat(),
        }


def _roles(log: EpisodeLog) -> list[str]:
    return list(log.steps[0].end_state.keys())


def _order_series(log: EpisodeLog, role: str) -> list[int]:
    """Total order per acted period, in period order."""
    return [step.actions[role].total() for step in log.steps if role in step.actions]


def _incoming_series(log: EpisodeLog, role: str) -> list[int]:
    """What each stage experiences as demand, per period."""
    series = []
    for step in log.steps:
        if role in step.demand:
            series.append(step.demand[role])
        elif "incoming" in step.extra and role in step.extra["incoming"]:
            series.append(step.extra["incoming"][role])
        else:
            series.append(0)
    return series


def compute_report(log: EpisodeLog) -> EpisodeReport:
    """Metrics appropriate to the episode's environment; the rest stay None."""
    if not log.steps:
        raise ValueError("cannot report on an empty episode")
    env_id = log.config.env_id
    roles = _roles(log)
    T = len(log.steps)
    per_role_cost = {
        role: float(average_cost([s.costs[role] for s in log.steps], T)) for role in roles
    }
    total = sum((s.costs[r] for s in log.steps for r in roles), Fraction(0))
    per_role_turn: dict[str, float | None] = {}
    stockout: dict[str, float] = {}
    for role in roles:
        on_hand = [s.end_state[role]["on_hand"] for s in log.steps]
        incoming = _incoming_series(log, role)
        turn = turnover_rate(on_hand, incoming)
        per_role_turn[role] = None if turn is None else float(turn)
        stockout[role] = float(stockout_rate([s.unfilled[role] for s in log.steps]))
    customer_demand = [sum(s.demand.values()) for s in log.steps]
    system_turn = turnover_rate(
        [sum(s.end_state[r]["on_hand"] for r in roles) for s in log.steps],
        customer_demand,
    )
    report = EpisodeReport(
        env_id=env_id,
        seed=log.config.seed,
        horizon=log.config.horizon,
        total_cost=float(total),
        avg_cost=float(total / T),
        per_role_avg_cost=per_role_cost,
        turnover=None if system_turn is None else float(system_turn),
        per_role_turnover=per_role_turn,
        stockout=stockout,
        stockout_mean=sum(stockout.values()) / len(roles),
        stockout_sum=sum(stockout.values()),
    )
    params = log.config.env_params
    if env_id == "NVP":
        process = parse_process(params.get("demand", {"kind": "uniform_int", "low": 0, "high": 300}), "demand")
        price = as_fraction(params.get("price", 12), "price")
        cost = as_fraction(params.get("cost", 3), "cost")
        mu = process.mean()
        q_star = newsvendor_q_star(process, price - cost, cost)
        orders = _order_series(log, "vendor")
        demands = [s.demand["vendor"] for s in log.steps]
        alpha = anchoring_alpha(orders, mu, q_star)
        report.alpha = None if alpha is None else float(alpha)
        report.rho = demand_chasing_rho(orders, demands)
        report.q_star = q_star
        report.demand_mean = None if mu is None else float(mu)
    elif env_id == "MPR":
        demands = [s.demand["manager"] for s in log.steps]
        placed = sorted(
            (s.extra["placed"] for s in log.steps if "placed" in s.extra),
            key=lambda p: p["slot"],
        )
        if placed:
            solution = expost_optimal(
                demands,
                [p["period"] for p in placed],
                [p["arrival"] for p in placed],
                initial_inventory=params.get("initial_inventory", 10),
                h=params.get("h", 1),
                b=params.get("b", 9),
            )
            report.distance = distance_to_optimal([p["qty"] for p in placed], solution.orders)
            report.expost_cost = float(solution.total_cost)
    elif env_id == "BG":
        series: dict[str, list[int]] = {"demand": [s.demand["retailer"] for s in log.steps]}
        for role in roles:
            series[role] = _order_series(log, role)
        links: dict[str, float | None] = {}
        for upstream, downstream in BG_LINKS:
            links[f"{upstream}_vs_{downstream}"] = bullwhip_ratio(series[upstream], series[downstream])
        links["end_to_end"] = bullwhip_ratio(series["plant"], series["demand"])
        report.bullwhip = links
    return report


def aggregate_reports(reports: Sequence[EpisodeReport]) -> dict[str, Any]:
    """Across-seed mean and sample standard deviation per metric.

    None values are skipped; a metric undefined in every episode stays None.
    With a single defined value the std is None (sample std needs n >= 2).
    """
    if not reports:
        raise ValueError("no reports to aggregate")
    env_ids = {r.env_id for r in reports}
    if len(env_ids) > 1:
        raise ConfigError(f"cannot aggregate across environments: {sorted(env_ids)}")
    keys: list[str] = []
    for report in reports:
        for key in report.to_flat():
            if key not in keys:
                keys.append(key)
    metrics: dict[str, Any] = {}
    for key in keys:
        values = [r.to_flat().get(key) for r in reports]
        defined = [v for v in values if v is not None]
        if not defined:
            metrics[key] = {"mean": None, "std": None, "n": 0}
            continue
        metrics[key] = {
            "mean": statistics.fmean(defined),
            "std": statistics.stdev(defined) if len(defined) >= 2 else None,
            "n": len(defined),
        }
    return {
        "env_id": reports[0].env_id,
        "n_episodes": len(reports),
        "seeds": [r.seed for r in reports],
        "metrics": metrics,
    }
