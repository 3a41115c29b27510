"""Four-echelon serial supply chain (retailer, wholesaler, distributor, plant).

Customer demand hits the retailer; each stage orders from the stage above;
the plant orders from an exogenous manufacturer with unlimited stock. Orders
placed in period t are seen upstream within the same period (information
moves instantly), while goods shipped in period t arrive L periods later.
A stage ships as much of its due amount (new incoming order plus backlog) as
its on-hand stock allows; the shortfall becomes backlog, so on_hand and
backlog are never both positive after settlement.

Period cost per stage is h * on_hand + b * backlog at end of period.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Mapping

from ..errors import ConfigError
from ..rng import Stream, parse_process
from .base import (
    Action,
    CostParams,
    EchelonState,
    Environment,
    Observation,
    PeriodResult,
    PipelineEntry,
    check_trace_length,
    int_param,
    per_role_ratio,
    reject_unknown,
)

ROLES = ("retailer", "wholesaler", "distributor", "plant")

_KNOWN = {
    "lead_time",
    "h",
    "b",
    "initial_inventory",
    "initial_pipeline",
    "demand",
    "info_sharing",
}


def default_demand(horizon: int) -> dict[str, Any]:
    """Stationary demand of 4 that steps to 8 from period 5 onward."""
    values = [4] * min(4, horizon) + [8] * max(horizon - 4, 0)
    return {"kind": "trace", "values": values}


class BeerGameEnv(Environment):
    env_id = "BG"
    multi_agent = True

    def __init__(self, params: Mapping[str, Any], horizon: int, seed: int) -> None:
        super().__init__(params, horizon, seed)
        reject_unknown(params, _KNOWN, self.env_id)
        self.lead_time = int_param(params, "lead_time", 2, minimum=1)
        self.h = per_role_ratio(params, "h", ROLES, "0.5")
        self.b = per_role_ratio(params, "b", ROLES, 1)
        initial = params.get("initial_inventory", 12)
        pipeline = params.get("initial_pipeline", [4] * self.lead_time)
        if not isinstance(pipeline, (list, tuple)):
            raise ConfigError("initial_pipeline must be a list of quantities")
        for qty in pipeline:
            if isinstance(qty, bool) or not isinstance(qty, int) or qty < 0:
                raise ConfigError(f"initial_pipeline entries must be ints >= 0, got {qty!r}")
        try:
            self.demand = parse_process(params.get("demand", default_demand(horizon)), "demand")
        except ValueError as exc:
            raise ConfigError(f"demand: {exc}") from None
        check_trace_length(self.demand, horizon, "demand")
        self._stream = Stream(self.demand, seed)
        self._states: dict[str, EchelonState] = {}
        for role in ROLES:
            init_role = initial[role] if isinstance(initial, Mapping) else initial
            if isinstance(init_role, bool) or not isinstance(init_role, int) or init_role < 0:
                raise ConfigError(f"initial_inventory for {role} must be an int >= 0")
            state = EchelonState(on_hand=init_role)
            # Primed in-transit goods arrive over the first len(pipeline) periods.
            for i, qty in enumerate(pipeline, start=1):
                state.pipeline.append(
                    PipelineEntry(arrival=i, qty=qty, placed=i - self.lead_time)
                )
            self._states[role] = state
        self._last_incoming: dict[str, int | None] = {role: None for role in ROLES}
        self._last_orders: dict[str, int] = {role: 0 for role in ROLES}

    @property
    def roles(self) -> tuple[str, ...]:
        return ROLES

    def channels(self, role: str) -> tuple[str, ...]:
        self._check_role(role)
        return ("order",)

    def begin_period(self, period: int) -> dict[str, int]:
        return {role: self._states[role].mature(period) for role in ROLES}

    def observe(self, period: int, role: str) -> Observation:
        self._check_role(role)
        state = self._states[role]
        costs = CostParams(h=self.h[role], b=self.b[role])
        return Observation(
            period=period,
            role=role,
            on_hand=state.on_hand,
            backlog=state.backlog,
            pipeline=state.pipeline_view(),
            last_demand=self._last_incoming[role],
            cost_params=costs.visible("h", "b"),
            extra={
                "lead_time": self.lead_time,
                "horizon": self.horizon,
                "echelon": ROLES.index(role),
            },
            partners=self._partner_payload(role),
        )

    def _partner_view(self, role: str) -> dict[str, int]:
        state = self._states[role]
        return {
            "on_hand": state.on_hand,
            "backlog": state.backlog,
            "last_order": self._last_orders[role],
        }

    def apply(self, period: int, actions: Mapping[str, Action]) -> PeriodResult:
        orders = {role: actions[role].orders["order"] for role in ROLES}
        d = self._stream.draw()
        incoming = {
            "retailer": d,
            "wholesaler": orders["retailer"],
            "distributor": orders["wholesaler"],
            "plant": orders["distributor"],
        }
        shipments: dict[str, int] = {}
        downstream = {"wholesaler": "retailer", "distributor": "wholesaler", "plant": "distributor"}
        for role in ROLES:
            state = self._states[role]
            due = incoming[role] + state.backlog
            shipped = min(state.on_hand, due)
            state.on_hand -= shipped
            state.backlog = due - shipped
            shipments[role] = shipped
        for role, receiver in downstream.items():
            if shipments[role] > 0:
                self._states[receiver].add_order(
                    PipelineEntry(arrival=period + self.lead_time, qty=shipments[role], placed=period),
                    period,
                )
        # Manufacturer has unlimited stock: the plant's order always ships.
        if orders["plant"] > 0:
            self._states["plant"].add_order(
                PipelineEntry(arrival=period + self.lead_time, qty=orders["plant"], placed=period),
                period,
            )
        costs = {
            role: self.h[role] * self._states[role].on_hand + self.b[role] * self._states[role].backlog
            for role in ROLES
        }
        self._last_incoming = dict(incoming)
        self._last_orders = dict(orders)
        return PeriodResult(
            demand={"retailer": d},
            shipments=shipments,
            unfilled={role: self._states[role].backlog for role in ROLES},
            end_state={
                role: {
                    "on_hand": self._states[role].on_hand,
                    "backlog": self._states[role].backlog,
                    "net": self._states[role].net(),
                }
                for role in ROLES
            },
            costs=costs,
            extra={"incoming": incoming},
        )

    def render_context(self, obs: Observation) -> str:
        h = obs.cost_params["h"]
        b = obs.cost_params["b"]
        position = ROLES.index(obs.role)
        supplier = "the manufacturer (unlimited stock)" if obs.role == "plant" else f"the {ROLES[position + 1]}"
        customer = "end customers" if obs.role == "retailer" else f"the {ROLES[position - 1]}"
        lines = [
            "You run one stage of a four-stage supply chain:"
            " retailer, wholesaler, distributor, plant.",
            f"You are the {obs.role}. You receive orders from {customer} and"
            f" replenish by ordering from {supplier}.",
            f"Goods you order arrive after {obs.extra['lead_time']} periods once"
            " shipped; your supplier ships only what it has on hand and owes you"
            " the rest.",
            f"Each period you pay {h} per unit held in stock and {b} per unit of"
            " unfilled orders on your books.",
            f"This is period {obs.period} of {obs.extra['horizon']}.",
            f"Stock on hand: {obs.on_hand}. Unfilled orders owed downstream:"
            f" {obs.backlog}.",
        ]
        if obs.pipeline:
            pipe = ", ".join(f"{qty} (shipped period {placed})" for placed, qty in obs.pipeline)
            lines.append(f"Incoming goods in transit: {pipe}.")
        else:
            lines.append("Nothing is currently in transit to you.")
        if obs.last_demand is not None:
            lines.append(f"Last period you were asked for {obs.last_demand} units.")
        if obs.partners is not None:
            lines.append("Shared partner state (on hand / owed / last order):")
            for partner in ROLES:
                if partner == obs.role:
                    continue
                view = obs.partners[partner]
                lines.append(
                    f"  {partner}: {view['on_hand']} / {view['backlog']} / {view['last_order']}"
                )
        lines.append("Decide the quantity to order from your supplier now"
                     " (order channel 'order').")
        return "\n".join(lines)

    @classmethod
    def recompute_step_cost(
        cls, params: Mapping[str, Any], step: Mapping[str, Any]
    ) -> dict[str, Fraction]:
        h = per_role_ratio(params, "h", ROLES, "0.5")
        b = per_role_ratio(params, "b", ROLES, 1)
        out: dict[str, Fraction] = {}
        for role in ROLES:
            end = step["end_state"][role]
            out[role] = h[role] * end["on_hand"] + b[role] * end["backlog"]
        return out
