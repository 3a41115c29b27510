"""Two-level warehouse network: one central hub supplying three mini-warehouses.

Customer demand arrives at the mini-warehouses only. Each mini can replenish
through the hub (cheap to hold upstream, short final leg, but the hub may be
out of stock) or directly from the manufacturer (always ships, longer leg).
The hub replenishes from the manufacturer. Route lengths satisfy
hub_mini < direct < manu_hub + hub_mini, so going direct beats a cold-start
through the hub but loses to hub stock already in place.

Hub scarcity is settled deterministically: owed backlog ships first in the
order it was incurred, then the current period's orders in fixed role order.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Mapping

from ..errors import ConfigError
from ..rng import StochasticProcess, Stream, parse_process
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

DEFAULT_DEMAND = {"kind": "uniform_int", "low": 0, "high": 8}
DEFAULT_LEADS = {"manu_hub": 4, "hub_mini": 1, "direct": 2}

MINIS = ("mini1", "mini2", "mini3")
ROLES = ("hub",) + MINIS

_KNOWN = {"lead_times", "h", "b", "initial_inventory", "demand", "info_sharing"}


class WarehouseEnv(Environment):
    env_id = "TWN"
    multi_agent = True

    def __init__(self, params: Mapping[str, Any], horizon: int, seed: int) -> None:
        super().__init__(params, horizon, seed)
        reject_unknown(params, _KNOWN, self.env_id)
        leads = dict(DEFAULT_LEADS)
        override = params.get("lead_times", {})
        if not isinstance(override, Mapping):
            raise ConfigError("lead_times must be a mapping")
        unknown = set(override) - set(DEFAULT_LEADS)
        if unknown:
            raise ConfigError(f"lead_times names unknown routes {sorted(unknown)}")
        leads.update(override)
        for name, value in leads.items():
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ConfigError(f"lead_times[{name!r}] must be an int >= 1, got {value!r}")
        if not leads["hub_mini"] < leads["direct"] < leads["manu_hub"] + leads["hub_mini"]:
            raise ConfigError(
                "route lengths must satisfy hub_mini < direct < manu_hub + hub_mini, "
                f"got {leads}"
            )
        self.leads = leads
        self.h = per_role_ratio(params, "h", ROLES, "0.5")
        self.b = per_role_ratio(params, "b", ROLES, 1)
        initial = params.get("initial_inventory", {})
        if not isinstance(initial, Mapping):
            raise ConfigError("initial_inventory must be a mapping of role to units")
        defaults = {"hub": 24, "mini1": 12, "mini2": 12, "mini3": 12}
        self._states: dict[str, EchelonState] = {}
        for role in ROLES:
            init_role = initial.get(role, defaults[role])
            if isinstance(init_role, bool) or not isinstance(init_role, int) or init_role < 0:
                raise ConfigError(f"initial_inventory for {role} must be an int >= 0")
            self._states[role] = EchelonState(on_hand=init_role)
        spec = params.get("demand", DEFAULT_DEMAND)
        self._demand: dict[str, StochasticProcess] = {}
        self._streams: dict[str, Stream] = {}
        for mini in MINIS:
            try:
                process = parse_process(spec, f"demand/{mini}")
            except ValueError as exc:
                raise ConfigError(f"demand: {exc}") from None
            check_trace_length(process, horizon, "demand")
            self._demand[mini] = process
            self._streams[mini] = Stream(process, seed)
        # Hub backlog as a FIFO queue of (mini, qty) still owed.
        self._owed: list[tuple[str, int]] = []
        self._last_incoming: dict[str, int | None] = {role: None for role in ROLES}
        self._last_orders: dict[str, int] = {role: 0 for role in ROLES}

    @property
    def roles(self) -> tuple[str, ...]:
        return ROLES

    def channels(self, role: str) -> tuple[str, ...]:
        self._check_role(role)
        if role == "hub":
            return ("manufacturer",)
        return ("hub", "direct")

    def begin_period(self, period: int) -> dict[str, int]:
        return {role: self._states[role].mature(period) for role in ROLES}

    def observe(self, period: int, role: str) -> Observation:
        self._check_role(role)
        state = self._states[role]
        costs = CostParams(h=self.h[role], b=self.b[role])
        if role == "hub":
            extra: dict[str, Any] = {
                "lead_time": {"manufacturer": self.leads["manu_hub"]},
                "horizon": self.horizon,
            }
        else:
            extra = {
                "lead_time": {"hub": self.leads["hub_mini"], "direct": self.leads["direct"]},
                "in_transit": {
                    channel: sum(e.qty for e in state.pipeline if e.channel == channel)
                    for channel in ("hub", "direct")
                },
                "horizon": self.horizon,
            }
        return Observation(
            period=period,
            role=role,
            on_hand=state.on_hand,
            backlog=state.backlog,
            pipeline=state.pipeline_view(),
            last_demand=self._last_incoming[role],
            cost_params=costs.visible("h", "b"),
            extra=extra,
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
        hub = self._states["hub"]
        hub_order = actions["hub"].orders["manufacturer"]
        if hub_order > 0:
            hub.add_order(
                PipelineEntry(
                    arrival=period + self.leads["manu_hub"],
                    qty=hub_order,
                    placed=period,
                    channel="manufacturer",
                ),
                period,
            )
        for mini in MINIS:
            direct = actions[mini].orders["direct"]
            if direct > 0:
                self._states[mini].add_order(
                    PipelineEntry(
                        arrival=period + self.leads["direct"],
                        qty=direct,
                        placed=period,
                        channel="direct",
                    ),
                    period,
                )
        new_hub_orders = {mini: actions[mini].orders["hub"] for mini in MINIS}
        queue = list(self._owed) + [
            (mini, qty) for mini, qty in new_hub_orders.items() if qty > 0
        ]
        owed: list[tuple[str, int]] = []
        allocations = {mini: 0 for mini in MINIS}
        for mini, qty in queue:
            shipped = min(hub.on_hand, qty)
            hub.on_hand -= shipped
            if shipped > 0:
                allocations[mini] += shipped
            if qty - shipped > 0:
                owed.append((mini, qty - shipped))
        self._owed = owed
        hub.backlog = sum(qty for _, qty in owed)
        for mini, qty in allocations.items():
            if qty > 0:
                self._states[mini].add_order(
                    PipelineEntry(
                        arrival=period + self.leads["hub_mini"],
                        qty=qty,
                        placed=period,
                        channel="hub",
                    ),
                    period,
                )
        demand: dict[str, int] = {}
        served_total: dict[str, int] = {}
        for mini in MINIS:
            state = self._states[mini]
            d = self._streams[mini].draw()
            due = d + state.backlog
            served = min(state.on_hand, due)
            state.on_hand -= served
            state.backlog = due - served
            demand[mini] = d
            served_total[mini] = served
        costs = {
            role: self.h[role] * self._states[role].on_hand + self.b[role] * self._states[role].backlog
            for role in ROLES
        }
        incoming_hub = sum(new_hub_orders.values())
        self._last_incoming = {
            "hub": incoming_hub,
            **{mini: demand[mini] for mini in MINIS},
        }
        self._last_orders = {
            "hub": hub_order,
            **{mini: actions[mini].total() for mini in MINIS},
        }
        return PeriodResult(
            demand=demand,
            shipments={"hub": sum(allocations.values()), **served_total},
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
            extra={"incoming": {"hub": incoming_hub}, "hub_allocations": allocations},
        )

    def render_context(self, obs: Observation) -> str:
        h = obs.cost_params["h"]
        b = obs.cost_params["b"]
        lines = []
        if obs.role == "hub":
            lines += [
                "You run the central warehouse that supplies three local"
                " mini-warehouses.",
                "You replenish from the manufacturer (unlimited stock); orders"
                f" arrive after {obs.extra['lead_time']['manufacturer']} periods.",
                "Mini-warehouse orders you cannot fill immediately stay owed and"
                " ship as soon as stock allows.",
                f"Each period you pay {h} per unit held and {b} per unit owed.",
                f"This is period {obs.period} of {obs.extra['horizon']}.",
                f"Stock on hand: {obs.on_hand}. Units owed to mini-warehouses:"
                f" {obs.backlog}.",
            ]
            if obs.pipeline:
                pipe = ", ".join(f"{qty} (ordered period {placed})" for placed, qty in obs.pipeline)
                lines.append(f"Incoming from the manufacturer: {pipe}.")
            if obs.last_demand is not None:
                lines.append(f"Last period the minis ordered {obs.last_demand} units from you.")
            lines.append("Decide the quantity to order from the manufacturer now"
                         " (order channel 'manufacturer').")
        else:
            leads = obs.extra["lead_time"]
            lines += [
                "You run one of three local mini-warehouses serving customer"
                " demand.",
                "You can replenish two ways each period: from the central hub"
                f" (arrives {leads['hub']} period(s) after it ships; the hub ships"
                " only what it has and owes the rest), or directly from the"
                f" manufacturer (always ships, arrives after {leads['direct']}"
                " periods).",
                f"Each period you pay {h} per unit held and {b} per unit of"
                " backordered customer demand.",
                f"This is period {obs.period} of {obs.extra['horizon']}.",
                f"Stock on hand: {obs.on_hand}. Backordered demand: {obs.backlog}.",
                f"In transit to you: {obs.extra['in_transit']['hub']} from the hub,"
                f" {obs.extra['in_transit']['direct']} direct.",
            ]
            if obs.last_demand is not None:
                lines.append(f"Last period's customer demand was {obs.last_demand}.")
            if obs.partners is not None and "hub" in obs.partners:
                hub_view = obs.partners["hub"]
                lines.append(
                    f"Shared hub state: {hub_view['on_hand']} on hand,"
                    f" {hub_view['backlog']} owed, last order {hub_view['last_order']}."
                )
            lines.append(
                "Decide both order quantities now (order channels 'hub' and"
                " 'direct'; either may be zero)."
            )
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
