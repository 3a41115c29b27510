"""Single-period newsvendor environment.

Each period is an independent selling season: the agent orders q, demand d
realizes, profit is r * min(q, d) - c * q with zero salvage and lost sales.
No inventory carries over between periods. The logged cost is the negated
profit so that lower is better everywhere in the toolkit.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Mapping

from ..errors import ConfigError
from ..rng import Stream
from .base import (
    Action,
    CostParams,
    Environment,
    Observation,
    PeriodResult,
    demand_process,
    describe_process,
    parse_cost_value,
    ratio_param,
    reject_unknown,
)

DEFAULT_DEMAND = {"kind": "uniform_int", "low": 0, "high": 300}

_KNOWN = {"demand", "price", "cost", "info_sharing"}


class NewsvendorEnv(Environment):
    env_id = "NVP"
    multi_agent = False

    def __init__(self, params: Mapping[str, Any], horizon: int, seed: int) -> None:
        super().__init__(params, horizon, seed)
        reject_unknown(params, _KNOWN, self.env_id)
        self.demand = demand_process(params, DEFAULT_DEMAND)
        r = ratio_param(params, "price", 12)
        c = ratio_param(params, "cost", 3)
        if not r > c > 0:
            raise ConfigError(f"NVP requires price > cost > 0, got price={r}, cost={c}")
        self.costs = CostParams(r=r, c=c)
        self._stream = Stream(self.demand, seed)
        self._last_demand: int | None = None

    @property
    def roles(self) -> tuple[str, ...]:
        return ("vendor",)

    def channels(self, role: str) -> tuple[str, ...]:
        self._check_role(role)
        return ("order",)

    def begin_period(self, period: int) -> dict[str, int]:
        return {"vendor": 0}

    def observe(self, period: int, role: str) -> Observation:
        self._check_role(role)
        return Observation(
            period=period,
            role=role,
            on_hand=0,
            backlog=0,
            pipeline=(),
            last_demand=self._last_demand,
            cost_params=self.costs.visible("r", "c"),
            extra={"demand": self.demand.to_dict(), "horizon": self.horizon},
            partners=None,
        )

    def apply(self, period: int, actions: Mapping[str, Action]) -> PeriodResult:
        q = actions["vendor"].orders["order"]
        d = self._stream.draw()
        sold = min(q, d)
        profit = self.costs.r * sold - self.costs.c * q
        self._last_demand = d
        return PeriodResult(
            demand={"vendor": d},
            shipments={"vendor": sold},
            unfilled={"vendor": d - sold},
            end_state={"vendor": {"on_hand": 0, "backlog": 0, "net": 0}},
            costs={"vendor": -profit},
        )

    def render_context(self, obs: Observation) -> str:
        r = obs.cost_params["r"]
        c = obs.cost_params["c"]
        demand_desc = describe_process(self.demand)
        lines = [
            "You purchase stock for a product with a one-period selling season.",
            f"Each unit costs {c} to buy and sells for {r}. Units left unsold at the"
            " end of the period are discarded with no salvage value, and demand"
            " beyond your stock is lost.",
            f"Demand this period is {demand_desc}.",
            f"This is period {obs.period} of {self.horizon}. Each period is a fresh"
            " season; nothing carries over.",
        ]
        if obs.last_demand is not None:
            lines.append(f"Last period's demand was {obs.last_demand}.")
        lines.append("Decide the quantity to purchase now (order channel 'order').")
        return "\n".join(lines)

    @classmethod
    def recompute_step_cost(
        cls, params: Mapping[str, Any], step: Mapping[str, Any]
    ) -> dict[str, Fraction]:
        r = parse_cost_value(params.get("price", 12), "price")
        c = parse_cost_value(params.get("cost", 3), "cost")
        q = step["actions"]["vendor"]["orders"]["order"]
        d = step["demand"]["vendor"]
        return {"vendor": c * q - r * min(q, d)}
