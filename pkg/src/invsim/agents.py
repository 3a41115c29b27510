"""Scripted ordering policies and the agent factory.

Every agent follows the same in-process protocol the kernel drives: start
(handshake facts), decide (observation plus memory window in, action out),
finish (episode totals), close. Scripted agents are deterministic functions
of (seed, observation, memory); the random kind derives its own stream from
the episode seed, isolated from environment streams.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping

import numpy as np

from .envs import Action
from .envs.base import Observation
from .episode import EpisodeIntro, MemoryWindow, SimConfig, run_episode
from .errors import AgentError, ConfigError
from .oracles import expost_optimal, newsvendor_q_star
from .rational import as_fraction
from .rng import generator_for, parse_process

__all__ = ["AGENT_KINDS", "AgentSpec", "ScriptedAgent"]

AGENT_KINDS = (
    "optimal_nvp",
    "expost_replay",
    "base_stock",
    "order_up_to",
    "mean_anchored",
    "demand_chaser",
    "constant",
    "random",
    "external",
)


class ScriptedAgent:
    """Base for in-process policies; stores the handshake for channel info."""

    def __init__(self) -> None:
        self.intro: EpisodeIntro | None = None

    def start(self, intro: EpisodeIntro) -> None:
        self.intro = intro
        return None

    def decide(self, obs: Observation, memory: MemoryWindow) -> Action:
        raise NotImplementedError

    def finish(self, totals: Mapping[str, Any]) -> None:
        return None

    def close(self) -> None:
        return None

    def _channels(self) -> tuple[str, ...]:
        if self.intro is None:
            raise AgentError("agent was asked to decide before the handshake")
        return self.intro.channels

    def _single_channel(self, qty: int, channel: str | None = None) -> Action:
        channels = self._channels()
        target = channel if channel is not None else channels[0]
        if target not in channels:
            raise AgentError(f"channel {target!r} not offered; choices are {channels}")
        return Action(orders={ch: (qty if ch == target else 0) for ch in channels})


class OptimalNewsvendorAgent(ScriptedAgent):
    """Orders the critical-ratio quantity every period."""

    def __init__(self, q_star: int) -> None:
        super().__init__()
        self.q_star = q_star

    def decide(self, obs: Observation, memory: MemoryWindow) -> Action:
        return self._single_channel(self.q_star)


class ExPostReplayAgent(ScriptedAgent):
    """Replays a precomputed order vector, one entry per decision."""

    def __init__(self, orders: list[int]) -> None:
        super().__init__()
        self.orders = list(orders)
        self._next = 0

    def decide(self, obs: Observation, memory: MemoryWindow) -> Action:
        if self._next >= len(self.orders):
            raise AgentError(
                f"replay vector exhausted after {len(self.orders)} decisions"
            )
        qty = self.orders[self._next]
        self._next += 1
        return self._single_channel(qty)


class BaseStockAgent(ScriptedAgent):
    """Orders up to a fixed target on one channel.

    Order quantity is max(0, S - position) with position = net inventory
    plus everything in transit.
    """

    def __init__(self, S: int, channel: str | None = None) -> None:
        super().__init__()
        self.S = S
        self.channel = channel

    def decide(self, obs: Observation, memory: MemoryWindow) -> Action:
        position = obs.net_inventory() + obs.in_transit()
        return self._single_channel(max(0, self.S - position), self.channel)


class OrderUpToAgent(ScriptedAgent):
    """Orders up to a moving target proportional to the latest demand.

    target = cover * last observed demand; the naive forecast reacts fully
    to every demand move, which makes this the canonical variance-amplifying
    baseline. cover defaults to the channel lead time plus 2.
    """

    def __init__(self, cover: int | None = None, channel: str | None = None) -> None:
        super().__init__()
        self.cover = cover
        self.channel = channel

    def _default_cover(self, obs: Observation) -> int:
        lead = obs.extra.get("lead_time", 1)
        if isinstance(lead, Mapping):
            target = self.channel or self._channels()[0]
            lead = lead.get(target, 1)
        return int(lead) + 2

    def decide(self, obs: Observation, memory: MemoryWindow) -> Action:
        cover = self.cover if self.cover is not None else self._default_cover(obs)
        latest = obs.last_demand if obs.last_demand is not None else 0
        position = obs.net_inventory() + obs.in_transit()
        return self._single_channel(max(0, cover * latest - position), self.channel)


class MeanAnchoredAgent(ScriptedAgent):
    """Orders mu + (1 - alpha0) * (q_star - mu), a fixed pull toward the mean.

    alpha0 = 0 reproduces the optimal order, alpha0 = 1 the demand mean, and
    values up to 1.5 overshoot the mean away from the optimum. The blend must
    land on a non-negative integer: quantities are never rounded or clamped
    behind the caller's back.
    """

    def __init__(self, alpha0, mu, q_star) -> None:
        super().__init__()
        alpha = as_fraction(alpha0, "alpha0")
        if not 0 <= alpha <= Fraction(3, 2):
            raise ConfigError(f"alpha0 must lie in [0, 1.5], got {alpha0!r}")
        blend = as_fraction(mu, "mu") + (1 - alpha) * (as_fraction(q_star, "q_star") - as_fraction(mu, "mu"))
        if blend.denominator != 1 or blend < 0:
            raise ConfigError(
                f"mean-anchored order mu + (1-alpha0)(q*-mu) = {blend} is not a"
                " non-negative integer; pick compatible alpha0, mu, q_star"
            )
        self.quantity = int(blend)

    def decide(self, obs: Observation, memory: MemoryWindow) -> Action:
        return self._single_channel(self.quantity)


class DemandChaserAgent(ScriptedAgent):
    """Orders exactly last period's demand."""

    def __init__(self, initial: int = 0) -> None:
        super().__init__()
        self.initial = initial

    def decide(self, obs: Observation, memory: MemoryWindow) -> Action:
        latest = obs.last_demand if obs.last_demand is not None else self.initial
        return self._single_channel(latest)


class ConstantAgent(ScriptedAgent):
    """Same order every period: a single quantity or a per-channel map."""

    def __init__(self, q: int | None = None, orders: Mapping[str, int] | None = None) -> None:
        super().__init__()
        if (q is None) == (orders is None):
            raise ConfigError("constant agent needs exactly one of q or orders")
        self.q = q
        self.orders = dict(orders) if orders is not None else None

    def decide(self, obs: Observation, memory: MemoryWindow) -> Action:
        if self.orders is not None:
            channels = self._channels()
            if set(self.orders) != set(channels):
                raise AgentError(
                    f"constant orders cover {sorted(self.orders)}, channels are {channels}"
                )
            return Action(orders=dict(self.orders))
        return self._single_channel(self.q or 0)


class RandomAgent(ScriptedAgent):
    """Orders an independent uniform integer each period, decoupled from
    demand by construction. Draws come from the agent's own seed stream."""

    def __init__(self, low: int, high: int, seed: int, role: str, channel: str | None = None) -> None:
        super().__init__()
        if not 0 <= low <= high:
            raise ConfigError(f"random agent needs 0 <= low <= high, got [{low}, {high}]")
        self.low = low
        self.high = high
        self.channel = channel
        self._gen: np.random.Generator = generator_for(seed, f"agent/{role}")

    def decide(self, obs: Observation, memory: MemoryWindow) -> Action:
        qty = int(self._gen.integers(self.low, self.high + 1))
        return self._single_channel(qty, self.channel)


def _require_int(params: Mapping[str, Any], name: str, minimum: int | None = None) -> int:
    if name not in params:
        raise ConfigError(f"agent params missing {name!r}")
    value = params[name]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"agent param {name} must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"agent param {name} must be >= {minimum}, got {value}")
    return value


@dataclass(frozen=True)
class AgentSpec:
    """Config-level description of one agent; build() instantiates it."""

    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "params", dict(self.params))
        if self.kind not in AGENT_KINDS:
            raise ConfigError(f"unknown agent kind {self.kind!r}; known: {AGENT_KINDS}")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "AgentSpec":
        if not isinstance(data, Mapping) or "kind" not in data:
            raise ConfigError(f"agent spec must be a mapping with a 'kind', got {data!r}")
        body = dict(data)
        kind = body.pop("kind")
        return cls(kind=kind, params=body)

    def label(self) -> str:
        if not self.params:
            return self.kind
        inner = ",".join(f"{k}={self.params[k]}" for k in sorted(self.params))
        return f"{self.kind}({inner})"

    def build(self, config: SimConfig, role: str):
        p = self.params
        if self.kind == "optimal_nvp":
            if config.env_id != "NVP":
                raise ConfigError("optimal_nvp agent only fits the NVP environment")
            if "q_star" in p:
                return OptimalNewsvendorAgent(_require_int(p, "q_star", minimum=0))
            return OptimalNewsvendorAgent(_nvp_q_star(config))
        if self.kind == "expost_replay":
            if "orders" in p:
                orders = p["orders"]
                if not isinstance(orders, (list, tuple)):
                    raise ConfigError("expost_replay orders must be a list")
                return ExPostReplayAgent([_require_int({"q": q}, "q", minimum=0) for q in orders])
            if config.env_id != "MPR":
                raise ConfigError("expost_replay can only be auto-solved for MPR")
            return ExPostReplayAgent(list(solve_expost_orders(config)))
        if self.kind == "base_stock":
            return BaseStockAgent(_require_int(p, "S", minimum=0), p.get("channel"))
        if self.kind == "order_up_to":
            cover = _require_int(p, "cover", minimum=1) if "cover" in p else None
            return OrderUpToAgent(cover, p.get("channel"))
        if self.kind == "mean_anchored":
            if "alpha0" not in p:
                raise ConfigError("mean_anchored needs alpha0")
            mu = p.get("mu")
            q_star = p.get("q_star")
            if mu is None or q_star is None:
                derived_mu, derived_q = _nvp_anchors(config)
                mu = derived_mu if mu is None else mu
                q_star = derived_q if q_star is None else q_star
            return MeanAnchoredAgent(p["alpha0"], mu, q_star)
        if self.kind == "demand_chaser":
            initial = _require_int(p, "initial", minimum=0) if "initial" in p else 0
            return DemandChaserAgent(initial)
        if self.kind == "constant":
            orders = p.get("orders")
            q = p.get("q")
            if q is not None:
                q = _require_int(p, "q", minimum=0)
            if orders is not None:
                if not isinstance(orders, Mapping):
                    raise ConfigError("constant orders must map channel to quantity")
                orders = {ch: _require_int({ch: v}, ch, minimum=0) for ch, v in orders.items()}
            return ConstantAgent(q, orders)
        if self.kind == "random":
            low = _require_int(p, "low", minimum=0)
            high = _require_int(p, "high", minimum=0)
            return RandomAgent(low, high, config.seed, role, p.get("channel"))
        # external: transports live in their own module
        from .external import build_external_agent

        return build_external_agent(p, config)


def _nvp_process(config: SimConfig):
    spec = config.env_params.get("demand", {"kind": "uniform_int", "low": 0, "high": 300})
    return parse_process(spec, "demand")


def _nvp_q_star(config: SimConfig) -> int:
    process = _nvp_process(config)
    price = as_fraction(config.env_params.get("price", 12), "price")
    cost = as_fraction(config.env_params.get("cost", 3), "cost")
    return newsvendor_q_star(process, price - cost, cost)


def _nvp_anchors(config: SimConfig) -> tuple[Fraction, int]:
    if config.env_id != "NVP":
        raise ConfigError("mean_anchored without explicit mu/q_star only fits NVP")
    process = _nvp_process(config)
    mu = process.mean()
    if mu is None:
        raise ConfigError("demand process has no closed-form mean; pass mu explicitly")
    return mu, _nvp_q_star(config)


def solve_expost_orders(config: SimConfig) -> tuple[int, ...]:
    """Hindsight-optimal order vector for an MPR configuration.

    Demand and arrival realizations depend only on the seed (order timing is
    fixed by the review schedule and quantities never shift the streams), so
    a zero-order probe episode reveals them; the oracle then solves the
    realized instance.
    """
    if config.env_id != "MPR":
        raise ConfigError("expost orders are defined for MPR only")
    probe = run_episode(config, {"manager": ConstantAgent(q=0)})
    demands = [s.demand["manager"] for s in probe.steps]
    placed = sorted(
        (s.extra["placed"] for s in probe.steps if "placed" in s.extra),
        key=lambda rec: rec["slot"],
    )
    solution = expost_optimal(
        demands,
        [rec["period"] for rec in placed],
        [rec["arrival"] for rec in placed],
        initial_inventory=config.env_params.get("initial_inventory", 10),
        h=config.env_params.get("h", 1),
        b=config.env_params.get("b", 9),
    )
    return solution.orders
