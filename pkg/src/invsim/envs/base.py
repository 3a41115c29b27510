"""Shared environment machinery: state, observations, actions, the env ABC.

Conventions used by every environment:
  * Periods are 1-based and run 1..horizon.
  * Quantities (demand, orders, inventory, shipments) are integers.
  * Costs are exact rationals (fractions.Fraction).
  * on_hand and backlog are tracked separately and are never both positive
    after a period settles; net inventory is on_hand - backlog.
  * An order placed in period t with lead L arrives at the start of
    period t + L, so L >= 1 means nothing arrives in its placement period.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, ClassVar, Mapping

from ..errors import ConfigError
from ..rational import as_fraction, ratio_from_json, ratio_to_json
from ..rng import StochasticProcess, parse_process

__all__ = [
    "Action",
    "CostParams",
    "EchelonState",
    "Environment",
    "Observation",
    "PeriodResult",
    "PipelineEntry",
    "validate_action",
]


@dataclass(frozen=True)
class CostParams:
    """Unit cost coefficients; each env uses the applicable subset."""

    h: Fraction = Fraction(0)
    b: Fraction = Fraction(0)
    c: Fraction = Fraction(0)
    r: Fraction = Fraction(0)

    def visible(self, *names: str) -> dict[str, int | str]:
        return {name: ratio_to_json(getattr(self, name)) for name in names}


@dataclass(frozen=True)
class Observation:
    """One agent's view of one period, before it acts.

    pipeline lists (placed_period, quantity) pairs for that agent's own
    outstanding orders; realized arrival times stay hidden. partners is
    populated only when info sharing is on and never includes the observer.
    """

    period: int
    role: str
    on_hand: int
    backlog: int
    pipeline: tuple[tuple[int, int], ...]
    last_demand: int | None
    cost_params: Mapping[str, int | str]
    extra: Mapping[str, Any] = field(default_factory=dict)
    partners: Mapping[str, Mapping[str, int]] | None = None

    def net_inventory(self) -> int:
        return self.on_hand - self.backlog

    def in_transit(self) -> int:
        return sum(qty for _, qty in self.pipeline)

    def to_payload(self) -> dict[str, Any]:
        payload: dict[str, Any] = {
            "period": self.period,
            "role": self.role,
            "on_hand": self.on_hand,
            "backlog": self.backlog,
            "pipeline": [[placed, qty] for placed, qty in self.pipeline],
            "last_demand": self.last_demand,
            "cost_params": dict(self.cost_params),
            "extra": dict(self.extra),
            "partners": None if self.partners is None else {k: dict(v) for k, v in self.partners.items()},
        }
        return payload

    @classmethod
    def from_payload(cls, payload: Mapping[str, Any]) -> "Observation":
        return cls(
            period=payload["period"],
            role=payload["role"],
            on_hand=payload["on_hand"],
            backlog=payload["backlog"],
            pipeline=tuple((p, q) for p, q in payload["pipeline"]),
            last_demand=payload["last_demand"],
            cost_params=dict(payload["cost_params"]),
            extra=dict(payload.get("extra", {})),
            partners=None
            if payload.get("partners") is None
            else {k: dict(v) for k, v in payload["partners"].items()},
        )


@dataclass(frozen=True)
class Action:
    """Order quantities keyed by channel; every declared channel is present."""

    orders: Mapping[str, int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "orders", dict(self.orders))

    def total(self) -> int:
        return sum(self.orders.values())

    def to_payload(self) -> dict[str, Any]:
        return {"orders": dict(self.orders)}

    @classmethod
    def from_payload(cls, payload: Mapping[str, Any]) -> "Action":
        return cls(orders=dict(payload["orders"]))


def validate_action(action: Any, channels: tuple[str, ...], role: str) -> Action:
    """Structural check: exact channel set, non-negative integers. Anything
    else is an error; quantities are never clamped or filled in."""
    if not isinstance(action, Action):
        raise ConfigError(f"{role}: decision must be an Action, got {type(action).__name__}")
    orders = action.orders
    expected = set(channels)
    got = set(orders)
    if got != expected:
        missing = sorted(expected - got)
        unknown = sorted(got - expected)
        detail = []
        if missing:
            detail.append(f"missing channels {missing}")
        if unknown:
            detail.append(f"unknown channels {unknown}")
        raise ConfigError(f"{role}: order channels do not match: " + "; ".join(detail))
    for channel, qty in orders.items():
        if isinstance(qty, bool) or not isinstance(qty, int) or qty < 0:
            raise ConfigError(
                f"{role}: order for channel {channel!r} must be a non-negative integer, got {qty!r}"
            )
    return action


@dataclass
class PipelineEntry:
    """One outstanding order: arrives at the start of period `arrival`."""

    arrival: int
    qty: int
    placed: int
    channel: str = "order"


@dataclass
class EchelonState:
    """Mutable per-role stock state."""

    on_hand: int = 0
    backlog: int = 0
    pipeline: list[PipelineEntry] = field(default_factory=list)

    def net(self) -> int:
        return self.on_hand - self.backlog

    def in_transit(self) -> int:
        return sum(entry.qty for entry in self.pipeline)

    def add_order(self, entry: PipelineEntry, current_period: int) -> None:
        if entry.qty < 0:
            raise ConfigError("pipeline quantity must be >= 0")
        if entry.arrival <= current_period:
            raise ConfigError(
                f"arrival period {entry.arrival} must be after current period {current_period}"
            )
        self.pipeline.append(entry)

    def mature(self, period: int) -> int:
        """Move every entry due this period into on_hand; returns the total."""
        due = [e for e in self.pipeline if e.arrival == period]
        if not due:
            return 0
        self.pipeline = [e for e in self.pipeline if e.arrival != period]
        total = sum(e.qty for e in due)
        self.on_hand += total
        return total

    def pipeline_view(self) -> tuple[tuple[int, int], ...]:
        return tuple((e.placed, e.qty) for e in sorted(self.pipeline, key=lambda e: (e.placed, e.arrival, e.channel)))


@dataclass
class PeriodResult:
    """Everything env.apply settles for one period, for the episode log."""

    demand: dict[str, int]
    shipments: dict[str, int]
    unfilled: dict[str, int]
    end_state: dict[str, dict[str, int]]
    costs: dict[str, Fraction]
    extra: dict[str, Any] = field(default_factory=dict)


class Environment(ABC):
    """Discrete-time environment driven by the episode kernel.

    Per period the kernel calls begin_period (arrivals mature), then observe
    for every role (all observations reflect the same pre-decision state, so
    moves are simultaneous), then apply with the collected actions.
    """

    env_id: ClassVar[str]
    multi_agent: ClassVar[bool]

    def __init__(self, params: Mapping[str, Any], horizon: int, seed: int) -> None:
        self.horizon = horizon
        self.seed = seed
        self.info_sharing = bool(params.get("info_sharing", False))
        if self.info_sharing and not self.multi_agent:
            raise ConfigError(f"{self.env_id}: info_sharing requires a multi-agent environment")

    @property
    @abstractmethod
    def roles(self) -> tuple[str, ...]: ...

    @abstractmethod
    def channels(self, role: str) -> tuple[str, ...]: ...

    def acting_roles(self, period: int) -> tuple[str, ...]:
        return self.roles

    @abstractmethod
    def begin_period(self, period: int) -> dict[str, int]:
        """Mature pipeline arrivals; returns arrived quantity per role."""

    @abstractmethod
    def observe(self, period: int, role: str) -> Observation: ...

    @abstractmethod
    def apply(self, period: int, actions: Mapping[str, Action]) -> PeriodResult:
        """Commit all simultaneous actions, realize demand, settle costs."""

    @abstractmethod
    def render_context(self, obs: Observation) -> str:
        """Frame-neutral natural-language description of the decision the
        observing agent faces, for external language agents."""

    @classmethod
    @abstractmethod
    def recompute_step_cost(
        cls, params: Mapping[str, Any], step: Mapping[str, Any]
    ) -> dict[str, Fraction]:
        """Recompute per-role period cost from a logged step, for audits."""

    # -- shared helpers -------------------------------------------------

    def _check_role(self, role: str) -> None:
        if role not in self.roles:
            raise ConfigError(f"{self.env_id}: unknown role {role!r}")

    def _partner_payload(self, observer: str) -> dict[str, dict[str, int]] | None:
        if not self.info_sharing:
            return None
        return {
            role: self._partner_view(role)
            for role in self.roles
            if role != observer
        }

    def _partner_view(self, role: str) -> dict[str, int]:
        raise NotImplementedError


def ratio_param(params: Mapping[str, Any], name: str, default: Any) -> Fraction:
    value = params.get(name, default)
    try:
        frac = as_fraction(value, name)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if frac < 0:
        raise ConfigError(f"{name} must be >= 0, got {value!r}")
    return frac


def int_param(params: Mapping[str, Any], name: str, default: Any, minimum: int = 0) -> int:
    value = params.get(name, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}")
    return value


def per_role_ratio(
    params: Mapping[str, Any], name: str, roles: tuple[str, ...], default: Any
) -> dict[str, Fraction]:
    """Accept a scalar applied to all roles or a {role: value} mapping."""
    value = params.get(name, default)
    if isinstance(value, Mapping):
        unknown = set(value) - set(roles)
        if unknown:
            raise ConfigError(f"{name} names unknown roles {sorted(unknown)}")
        return {
            role: ratio_param(value, role, default) for role in roles
        }
    frac = ratio_param(params, name, default)
    return {role: frac for role in roles}


def demand_process(params: Mapping[str, Any], default: Mapping[str, Any], stream_id: str = "demand") -> StochasticProcess:
    spec = params.get("demand", default)
    try:
        return parse_process(spec, stream_id)
    except ValueError as exc:
        raise ConfigError(f"demand: {exc}") from None


def lead_process(params: Mapping[str, Any], name: str, default: Mapping[str, Any], stream_id: str) -> StochasticProcess:
    spec = params.get(name, default)
    try:
        process = parse_process(spec, stream_id)
    except ValueError as exc:
        raise ConfigError(f"{name}: {exc}") from None
    if process.min_value() < 1:
        raise ConfigError(f"{name}: lead times must be strictly positive")
    return process


def reject_unknown(params: Mapping[str, Any], known: set[str], env_id: str) -> None:
    unknown = set(params) - known
    if unknown:
        raise ConfigError(f"{env_id}: unknown parameters {sorted(unknown)}")


def check_trace_length(process: StochasticProcess, needed: int, name: str) -> None:
    """Traces must cover every draw the horizon can require; no cycling."""
    if process.kind == "trace" and len(process.params["values"]) < needed:
        raise ConfigError(
            f"{name}: trace has {len(process.params['values'])} values, needs {needed}"
        )


def describe_process(process: StochasticProcess) -> str:
    """Plain-language demand description for agent-facing context text."""
    p = process.params
    if process.kind == "uniform_int":
        return f"an integer drawn uniformly from [{p['low']}, {p['high']}]"
    if process.kind == "poisson":
        return f"a Poisson random variable with mean {p['lam']}"
    if process.kind == "constant":
        return f"a constant {p['value']} every period"
    if process.kind == "trace":
        return "a fixed schedule known only to the market"
    return (
        f"a normal random variable (mean {p['mu']}, standard deviation {p['sigma']}) "
        f"rounded to an integer and floored at {p.get('low', 0)}"
    )


def parse_cost_value(value: Any, name: str) -> Fraction:
    try:
        return ratio_from_json(value, name)
    except ValueError:
        try:
            return as_fraction(value, name)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
