"""Single node with dual sourcing: a regular and an expedited supply channel.

Both suppliers have unlimited stock. The expedited channel is strictly
faster and strictly more expensive per unit. Purchase cost is charged in the
period the order is placed; unmet demand is backordered. Period cost is
h * on_hand + b * backlog + c_reg * q_reg + c_exp * q_exp.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Mapping

from ..errors import ConfigError
from ..rational import as_fraction
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
    parse_cost_value,
    ratio_param,
    reject_unknown,
)

DEFAULT_DEMAND = {"kind": "poisson", "lam": 10}
DEFAULT_LEADS = {"regular": 4, "expedited": 1}
DEFAULT_COSTS = {"regular": 1, "expedited": 2}

CHANNELS = ("regular", "expedited")

_KNOWN = {"lead_times", "unit_costs", "h", "b", "initial_inventory", "demand", "info_sharing"}


def _channel_map(params: Mapping[str, Any], name: str, defaults: Mapping[str, Any]) -> dict[str, Any]:
    value = params.get(name, {})
    if not isinstance(value, Mapping):
        raise ConfigError(f"{name} must be a mapping with keys {CHANNELS}")
    unknown = set(value) - set(CHANNELS)
    if unknown:
        raise ConfigError(f"{name} names unknown channels {sorted(unknown)}")
    return {**defaults, **value}


class DualSourceEnv(Environment):
    env_id = "SCN"
    multi_agent = False

    def __init__(self, params: Mapping[str, Any], horizon: int, seed: int) -> None:
        super().__init__(params, horizon, seed)
        reject_unknown(params, _KNOWN, self.env_id)
        leads = _channel_map(params, "lead_times", DEFAULT_LEADS)
        for channel, value in leads.items():
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ConfigError(f"lead_times[{channel!r}] must be an int >= 1, got {value!r}")
        if not leads["expedited"] < leads["regular"]:
            raise ConfigError(f"expedited lead must beat regular lead, got {leads}")
        self.leads = leads
        raw_costs = _channel_map(params, "unit_costs", DEFAULT_COSTS)
        try:
            self.unit_costs = {ch: as_fraction(raw_costs[ch], f"unit_costs[{ch}]") for ch in CHANNELS}
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if any(c < 0 for c in self.unit_costs.values()):
            raise ConfigError("unit costs must be >= 0")
        if not self.unit_costs["expedited"] > self.unit_costs["regular"]:
            raise ConfigError(
                f"expedited unit cost must exceed regular, got {raw_costs}"
            )
        self.h = ratio_param(params, "h", 1)
        self.b = ratio_param(params, "b", 9)
        self.demand = demand_process(params, DEFAULT_DEMAND)
        check_trace_length(self.demand, horizon, "demand")
        initial = params.get("initial_inventory", 10)
        if isinstance(initial, bool) or not isinstance(initial, int) or initial < 0:
            raise ConfigError(f"initial_inventory must be an int >= 0, got {initial!r}")
        self._state = EchelonState(on_hand=initial)
        self._stream = Stream(self.demand, seed)
        self._last_demand: int | None = None

    @property
    def roles(self) -> tuple[str, ...]:
        return ("buyer",)

    def channels(self, role: str) -> tuple[str, ...]:
        self._check_role(role)
        return CHANNELS

    def begin_period(self, period: int) -> dict[str, int]:
        return {"buyer": self._state.mature(period)}

    def observe(self, period: int, role: str) -> Observation:
        self._check_role(role)
        state = self._state
        costs = CostParams(h=self.h, b=self.b)
        return Observation(
            period=period,
            role=role,
            on_hand=state.on_hand,
            backlog=state.backlog,
            pipeline=state.pipeline_view(),
            last_demand=self._last_demand,
            cost_params=costs.visible("h", "b"),
            extra={
                "lead_time": dict(self.leads),
                "unit_cost": {
                    ch: int(c) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
                    for ch, c in self.unit_costs.items()
                },
                "in_transit": {
                    channel: sum(e.qty for e in state.pipeline if e.channel == channel)
                    for channel in CHANNELS
                },
                "horizon": self.horizon,
            },
            partners=None,
        )

    def apply(self, period: int, actions: Mapping[str, Action]) -> PeriodResult:
        orders = actions["buyer"].orders
        state = self._state
        purchase = Fraction(0)
        for channel in CHANNELS:
            qty = orders[channel]
            purchase += self.unit_costs[channel] * qty
            if qty > 0:
                state.add_order(
                    PipelineEntry(
                        arrival=period + self.leads[channel],
                        qty=qty,
                        placed=period,
                        channel=channel,
                    ),
                    period,
                )
        d = self._stream.draw()
        due = d + state.backlog
        served = min(state.on_hand, due)
        state.on_hand -= served
        state.backlog = due - served
        self._last_demand = d
        cost = self.h * state.on_hand + self.b * state.backlog + purchase
        return PeriodResult(
            demand={"buyer": d},
            shipments={"buyer": served},
            unfilled={"buyer": state.backlog},
            end_state={
                "buyer": {
                    "on_hand": state.on_hand,
                    "backlog": state.backlog,
                    "net": state.net(),
                }
            },
            costs={"buyer": cost},
            extra={"purchase_cost": str(purchase) if purchase.denominator != 1 else int(purchase)},
        )

    def render_context(self, obs: Observation) -> str:
        h = obs.cost_params["h"]
        b = obs.cost_params["b"]
        leads = obs.extra["lead_time"]
        unit = obs.extra["unit_cost"]
        lines = [
            "You buy a single product from two suppliers with unlimited stock.",
            f"Regular channel: {unit['regular']} per unit, arrives after"
            f" {leads['regular']} periods. Expedited channel: {unit['expedited']}"
            f" per unit, arrives after {leads['expedited']} period(s).",
            "Purchase cost is charged when you place the order.",
            f"Each period you also pay {h} per unit held and {b} per unit of"
            " backordered demand.",
            f"Customer demand each period is {describe_process(self.demand)}.",
            f"This is period {obs.period} of {obs.extra['horizon']}.",
            f"Stock on hand: {obs.on_hand}. Backordered demand: {obs.backlog}.",
            f"In transit: {obs.extra['in_transit']['regular']} regular,"
            f" {obs.extra['in_transit']['expedited']} expedited.",
        ]
        if obs.last_demand is not None:
            lines.append(f"Last period's demand was {obs.last_demand}.")
        lines.append(
            "Decide both order quantities now (order channels 'regular' and"
            " 'expedited'; either may be zero)."
        )
        return "\n".join(lines)

    @classmethod
    def recompute_step_cost(
        cls, params: Mapping[str, Any], step: Mapping[str, Any]
    ) -> dict[str, Fraction]:
        h = parse_cost_value(params.get("h", 1), "h")
        b = parse_cost_value(params.get("b", 9), "b")
        raw_costs = _channel_map(params, "unit_costs", DEFAULT_COSTS)
        unit = {ch: parse_cost_value(raw_costs[ch], ch) for ch in CHANNELS}
        end = step["end_state"]["buyer"]
        orders = step["actions"]["buyer"]["orders"]
        purchase = sum((unit[ch] * orders[ch] for ch in CHANNELS), Fraction(0))
        return {"buyer": h * end["on_hand"] + b * end["backlog"] + purchase}
