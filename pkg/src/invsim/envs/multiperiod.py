"""Multi-period replenishment with periodic review and stochastic lead times.

Inventory is a signed level: positive is stock on hand, negative is
backordered demand that is filled as soon as goods arrive. Orders are only
accepted at review periods. Each order's lead time is random, and arrivals
never cross: a draw that would land an order before an earlier one is
resampled up to 100 times, then lifted to the earlier arrival period.

Period sequence: arrivals due this period mature, the agent observes and
(on review periods) orders, demand realizes, and the period cost
h * [I]+ + b * [-I]+ settles on the end-of-period level I.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Mapping

from ..errors import ConfigError
from ..rng import Stream
from .base import (
    Action,
    CostParams,
    EchelonState,
    Environment,
    Observation,
    PeriodResult,
    PipelineEntry,
    check_trace_length,
    demand_process,
    describe_process,
    int_param,
    lead_process,
    parse_cost_value,
    ratio_param,
    reject_unknown,
)

DEFAULT_DEMAND = {"kind": "poisson", "lam": 10}
DEFAULT_LEAD = {"kind": "uniform_int", "low": 1, "high": 4}

MAX_RESAMPLES = 100

_KNOWN = {
    "demand",
    "lead",
    "review_every",
    "review_periods",
    "h",
    "b",
    "initial_inventory",
    "info_sharing",
}


def build_schedule(params: Mapping[str, Any], horizon: int) -> tuple[int, ...]:
    """Review periods. Either an explicit list or every k-th period from 1."""
    explicit = params.get("review_periods")
    if explicit is not None:
        if not isinstance(explicit, (list, tuple)) or not explicit:
            raise ConfigError("review_periods must be a non-empty list")
        periods = []
        for t in explicit:
            if isinstance(t, bool) or not isinstance(t, int) or not 1 <= t <= horizon:
                raise ConfigError(f"review period {t!r} outside 1..{horizon}")
            periods.append(t)
        if sorted(set(periods)) != periods:
            raise ConfigError("review_periods must be strictly increasing")
        return tuple(periods)
    every = int_param(params, "review_every", 2, minimum=1)
    return tuple(range(1, horizon + 1, every))


class MultiPeriodEnv(Environment):
    env_id = "MPR"
    multi_agent = False

    def __init__(self, params: Mapping[str, Any], horizon: int, seed: int) -> None:
        super().__init__(params, horizon, seed)
        reject_unknown(params, _KNOWN, self.env_id)
        self.demand = demand_process(params, DEFAULT_DEMAND)
        check_trace_length(self.demand, horizon, "demand")
        self.lead = lead_process(params, "lead", DEFAULT_LEAD, "lead")
        self.schedule = build_schedule(params, horizon)
        check_trace_length(self.lead, len(self.schedule), "lead")
        h = ratio_param(params, "h", 1)
        b = ratio_param(params, "b", 9)
        self.costs = CostParams(h=h, b=b)
        initial = params.get("initial_inventory", 10)
        if isinstance(initial, bool) or not isinstance(initial, int):
            raise ConfigError(f"initial_inventory must be an integer, got {initial!r}")
        # Signed level: a negative initial inventory means opening backorders.
        self._level = initial
        self._state = EchelonState()
        self._demand_stream = Stream(self.demand, seed)
        self._lead_stream = Stream(self.lead, seed)
        self._last_arrival = 0
        self._last_demand: int | None = None
        self._slot = 0

    @property
    def roles(self) -> tuple[str, ...]:
        return ("manager",)

    def channels(self, role: str) -> tuple[str, ...]:
        self._check_role(role)
        return ("order",)

    def acting_roles(self, period: int) -> tuple[str, ...]:
        return ("manager",) if period in self.schedule else ()

    def begin_period(self, period: int) -> dict[str, int]:
        arrived = self._state.mature(period)
        self._level += arrived
        return {"manager": arrived}

    def observe(self, period: int, role: str) -> Observation:
        self._check_role(role)
        upcoming = [t for t in self.schedule if t >= period]
        return Observation(
            period=period,
            role=role,
            on_hand=max(self._level, 0),
            backlog=max(-self._level, 0),
            pipeline=self._state.pipeline_view(),
            last_demand=self._last_demand,
            cost_params=self.costs.visible("h", "b"),
            extra={
                "review": period in self.schedule,
                "next_review": upcoming[0] if upcoming else None,
                "horizon": self.horizon,
            },
            partners=None,
        )

    def place_order(self, period: int, qty: int) -> PipelineEntry:
        """Draw a lead time under the non-crossing rule and queue the order.

        Zero-quantity orders still consume a draw and a pipeline slot so the
        order index stays aligned with the review schedule.
        """
        if period not in self.schedule:
            raise ConfigError(f"MPR: period {period} is not a review period")
        draw = self._lead_stream.draw()
        for _ in range(MAX_RESAMPLES - 1):
            if period + draw >= self._last_arrival:
                break
            draw = self._lead_stream.draw()
        arrival = max(period + draw, self._last_arrival)
        entry = PipelineEntry(arrival=arrival, qty=qty, placed=period)
        self._state.add_order(entry, period)
        self._last_arrival = arrival
        self._slot += 1
        return entry

    def apply(self, period: int, actions: Mapping[str, Action]) -> PeriodResult:
        extra: dict[str, Any] = {}
        if "manager" in actions:
            entry = self.place_order(period, actions["manager"].orders["order"])
            extra["placed"] = {
                "slot": self._slot - 1,
                "period": period,
                "arrival": entry.arrival,
                "qty": entry.qty,
            }
        elif period in self.schedule:
            raise ConfigError(f"MPR: review period {period} is missing its order")
        d = self._demand_stream.draw()
        available = max(self._level, 0)
        served = min(available, d)
        self._level -= d
        self._last_demand = d
        level = self._level
        cost = self.costs.h * max(level, 0) + self.costs.b * max(-level, 0)
        return PeriodResult(
            demand={"manager": d},
            shipments={"manager": served},
            unfilled={"manager": d - served},
            end_state={
                "manager": {
                    "on_hand": max(level, 0),
                    "backlog": max(-level, 0),
                    "net": level,
                }
            },
            costs={"manager": cost},
            extra=extra,
        )

    def render_context(self, obs: Observation) -> str:
        h = obs.cost_params["h"]
        b = obs.cost_params["b"]
        lines = [
            "You manage the inventory of a single product reviewed on a fixed"
            " schedule.",
            f"Holding one unit in stock for a period costs {h}; each unit of unmet"
            f" demand is backordered at a cost of {b} per period until filled.",
            f"Customer demand each period is {describe_process(self.demand)}.",
            f"Orders you place arrive after a random lead time ({describe_process(self.lead)}"
            " periods), and orders never overtake each other in transit.",
            f"This is period {obs.period} of {self.horizon}.",
            f"Stock on hand: {obs.on_hand}. Backordered demand: {obs.backlog}.",
        ]
        if obs.pipeline:
            pipe = ", ".join(f"{qty} (placed period {placed})" for placed, qty in obs.pipeline)
            lines.append(f"Outstanding orders not yet arrived: {pipe}.")
        else:
            lines.append("No orders are currently in transit.")
        if obs.last_demand is not None:
            lines.append(f"Last period's demand was {obs.last_demand}.")
        lines.append(
            "This is a review period: decide the quantity to order now"
            " (order channel 'order')."
        )
        return "\n".join(lines)

    @classmethod
    def recompute_step_cost(
        cls, params: Mapping[str, Any], step: Mapping[str, Any]
    ) -> dict[str, Fraction]:
        h = parse_cost_value(params.get("h", 1), "h")
        b = parse_cost_value(params.get("b", 9), "b")
        net = step["end_state"]["manager"]["net"]
        return {"manager": h * max(net, 0) + b * max(-net, 0)}
