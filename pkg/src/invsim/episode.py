"""Episode kernel: configuration, memory windows, logs, and the period loop.

The kernel drives one episode of any registered environment. Moves are
simultaneous: every role's observation for period t is built before any
action is applied, and external sessions are serviced sequentially in fixed
role order on top of those frozen observations. Rewards are costs negated;
logs store the costs.

Episode logs serialize to JSON Lines: a header object, one object per
period, and a totals object. Serialization is canonical (sorted keys, no
floats) so identical runs produce byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Mapping, Protocol

from .envs import Action, Environment, Observation, make_env, validate_action
from .envs.base import describe_process  # noqa: F401  (re-exported for reports)
from .errors import AgentError, ConfigError, EpisodeAborted
from .rational import ratio_from_json, ratio_to_json
from .rng import MAX_SEED

__all__ = [
    "EpisodeIntro",
    "EpisodeLog",
    "MemoryWindow",
    "SimConfig",
    "StepRecord",
    "push_memory",
    "run_episode",
    "verify_log_costs",
]


@dataclass(frozen=True)
class SimConfig:
    """Everything needed to reproduce one episode except the agents."""

    env_id: str
    horizon: int
    seed: int
    env_params: Mapping[str, Any] = field(default_factory=dict)
    memory_window: int = 5

    def __post_init__(self) -> None:
        object.__setattr__(self, "env_params", dict(self.env_params))
        if isinstance(self.horizon, bool) or not isinstance(self.horizon, int) or self.horizon < 1:
            raise ConfigError(f"horizon must be an integer >= 1, got {self.horizon!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed <= MAX_SEED:
            raise ConfigError(f"seed must be an integer in [0, 2**64), got {self.seed!r}")
        if (
            isinstance(self.memory_window, bool)
            or not isinstance(self.memory_window, int)
            or self.memory_window < 0
        ):
            raise ConfigError(f"memory_window must be an integer >= 0, got {self.memory_window!r}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "env_id": self.env_id,
            "horizon": self.horizon,
            "seed": self.seed,
            "env_params": dict(self.env_params),
            "memory_window": self.memory_window,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SimConfig":
        return cls(
            env_id=data["env_id"],
            horizon=data["horizon"],
            seed=data["seed"],
            env_params=data.get("env_params", {}),
            memory_window=data.get("memory_window", 5),
        )


@dataclass(frozen=True)
class MemoryWindow:
    """Rolling window of the agent's own last k (observation, action) pairs."""

    capacity: int
    entries: tuple[tuple[Observation, Action], ...] = ()

    def to_payload(self) -> list[dict[str, Any]]:
        return [
            {"observation": obs.to_payload(), "action": act.to_payload()}
            for obs, act in self.entries
        ]


def push_memory(window: MemoryWindow, obs: Observation, action: Action) -> MemoryWindow:
    """Append one pair, evicting the oldest beyond capacity. Capacity 0 keeps
    the window empty."""
    if window.capacity == 0:
        return window
    entries = (window.entries + ((obs, action),))[-window.capacity :]
    return MemoryWindow(window.capacity, entries)


@dataclass(frozen=True)
class EpisodeIntro:
    """Handshake facts delivered to each agent before period 1."""

    env_id: str
    role: str
    horizon: int
    channels: tuple[str, ...]
    framing: str | None = None
    info_sharing: bool = False
    cognitive_reflection: bool = False


class Agent(Protocol):
    def start(self, intro: EpisodeIntro) -> Mapping[str, Any] | None:
        """May return session info (model name, sampling params) for the log."""

    def decide(self, obs: Observation, memory: MemoryWindow) -> Action: ...

    def finish(self, totals: Mapping[str, Fraction]) -> None: ...

    def close(self) -> None: ...


@dataclass
class StepRecord:
    period: int
    demand: dict[str, int]
    arrivals: dict[str, int]
    observations: dict[str, Observation]
    actions: dict[str, Action]
    shipments: dict[str, int]
    unfilled: dict[str, int]
    end_state: dict[str, dict[str, int]]
    costs: dict[str, Fraction]
    extra: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": "step",
            "period": self.period,
            "demand": self.demand,
            "arrivals": self.arrivals,
            "observations": {role: obs.to_payload() for role, obs in self.observations.items()},
            "actions": {role: act.to_payload() for role, act in self.actions.items()},
            "shipments": self.shipments,
            "unfilled": self.unfilled,
            "end_state": self.end_state,
            "costs": {role: ratio_to_json(cost) for role, cost in self.costs.items()},
            "extra": self.extra,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "StepRecord":
        return cls(
            period=data["period"],
            demand=dict(data["demand"]),
            arrivals=dict(data["arrivals"]),
            observations={
                role: Observation.from_payload(payload)
                for role, payload in data["observations"].items()
            },
            actions={role: Action.from_payload(p) for role, p in data["actions"].items()},
            shipments=dict(data["shipments"]),
            unfilled=dict(data["unfilled"]),
            end_state={role: dict(state) for role, state in data["end_state"].items()},
            costs={role: ratio_from_json(v, "cost") for role, v in data["costs"].items()},
            extra=dict(data.get("extra", {})),
        )


def _dump(obj: Mapping[str, Any]) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


@dataclass
class EpisodeLog:
    config: SimConfig
    meta: dict[str, Any]
    steps: list[StepRecord]
    totals: dict[str, Fraction]

    def total_system_cost(self) -> Fraction:
        return self.totals["system"]

    def to_jsonl(self) -> str:
        lines = [_dump({"kind": "header", "config": self.config.to_dict(), "meta": self.meta})]
        lines.extend(_dump(step.to_dict()) for step in self.steps)
        lines.append(
            _dump({"kind": "totals", "costs": {k: ratio_to_json(v) for k, v in self.totals.items()}})
        )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str | Iterable[str]) -> "EpisodeLog":
        lines = text.splitlines() if isinstance(text, str) else list(text)
        rows = [json.loads(line) for line in lines if line.strip()]
        if not rows or rows[0].get("kind") != "header":
            raise ValueError("episode log must start with a header line")
        if rows[-1].get("kind") != "totals":
            raise ValueError("episode log must end with a totals line")
        config = SimConfig.from_dict(rows[0]["config"])
        steps = [StepRecord.from_dict(row) for row in rows[1:-1]]
        totals = {k: ratio_from_json(v, "total") for k, v in rows[-1]["costs"].items()}
        return cls(config=config, meta=dict(rows[0].get("meta", {})), steps=steps, totals=totals)


def run_episode(
    config: SimConfig,
    agents: Mapping[str, Any],
    meta: Mapping[str, Any] | None = None,
) -> EpisodeLog:
    """Run one full episode and return its log.

    agents maps every environment role to an object with the Agent protocol
    (scripted policies and external protocol sessions both qualify). Any
    agent failure aborts the episode with a diagnostic naming the period,
    role, and error code; no default action is ever substituted.
    """
    env = make_env(config.env_id, config.env_params, config.horizon, config.seed)
    roles = env.roles
    if set(agents) != set(roles):
        raise ConfigError(
            f"agent roster {sorted(agents)} does not match roles {sorted(roles)}"
        )
    meta = dict(meta or {})
    framing = meta.get("framing")
    reflection = bool(meta.get("cognitive_reflection", False))
    memories = {role: MemoryWindow(config.memory_window) for role in roles}
    steps: list[StepRecord] = []
    try:
        for role in roles:
            intro = EpisodeIntro(
                env_id=config.env_id,
                role=role,
                horizon=config.horizon,
                channels=env.channels(role),
                framing=framing,
                info_sharing=env.info_sharing,
                cognitive_reflection=reflection,
            )
            try:
                info = agents[role].start(intro)
            except AgentError as exc:
                raise EpisodeAborted(
                    f"agent {role!r} failed during handshake: {exc}",
                    period=0,
                    role=role,
                    code=exc.code,
                ) from exc
            if info:
                meta.setdefault("agent_info", {})[role] = info
        for period in range(1, config.horizon + 1):
            arrivals = env.begin_period(period)
            observations = {role: env.observe(period, role) for role in roles}
            acting = env.acting_roles(period)
            actions: dict[str, Action] = {}
            for role in roles:
                if role not in acting:
                    continue
                try:
                    raw = agents[role].decide(observations[role], memories[role])
                except AgentError as exc:
                    raise EpisodeAborted(
                        f"agent {role!r} failed at period {period}: {exc}",
                        period=period,
                        role=role,
                        code=exc.code,
                    ) from exc
                try:
                    actions[role] = validate_action(raw, env.channels(role), role)
                except ConfigError as exc:
                    raise EpisodeAborted(
                        f"agent {role!r} returned an invalid action at period {period}: {exc}",
                        period=period,
                        role=role,
                        code="schema_violation",
                    ) from exc
            result = env.apply(period, actions)
            for role in acting:
                memories[role] = push_memory(memories[role], observations[role], actions[role])
            steps.append(
                StepRecord(
                    period=period,
                    demand=result.demand,
                    arrivals=arrivals,
                    observations=observations,
                    actions=actions,
                    shipments=result.shipments,
                    unfilled=result.unfilled,
                    end_state=result.end_state,
                    costs=result.costs,
                    extra=result.extra,
                )
            )
        totals: dict[str, Fraction] = {role: Fraction(0) for role in roles}
        for step in steps:
            for role, cost in step.costs.items():
                totals[role] += cost
        totals["system"] = sum(totals.values(), Fraction(0))
        payload = {role: ratio_to_json(totals[role]) for role in list(roles) + ["system"]}
        for role in roles:
            try:
                agents[role].finish(payload)
            except Exception:
                # The episode is already complete; a dying agent cannot
                # invalidate it. Transport teardown happens in close().
                pass
        return EpisodeLog(config=config, meta=meta, steps=steps, totals=totals)
    finally:
        for role in roles:
            close = getattr(agents[role], "close", None)
            if close is not None:
                try:
                    close()
                except Exception:
                    pass


def verify_log_costs(log: EpisodeLog) -> None:
    """Audit a log: recompute every period cost from the logged outcomes and
    check totals. Raises ValueError on the first mismatch."""
    from .envs import ENVIRONMENTS

    env_cls = ENVIRONMENTS[log.config.env_id]
    sums: dict[str, Fraction] = {}
    for step in log.steps:
        expected = env_cls.recompute_step_cost(log.config.env_params, step.to_dict())
        for role, cost in step.costs.items():
            if cost != expected[role]:
                raise ValueError(
                    f"period {step.period} role {role}: logged cost {cost} != recomputed {expected[role]}"
                )
            sums[role] = sums.get(role, Fraction(0)) + cost
    sums["system"] = sum((v for k, v in sums.items() if k != "system"), Fraction(0))
    for role, total in log.totals.items():
        if sums.get(role, Fraction(0)) != total:
            raise ValueError(f"totals mismatch for {role}: {sums.get(role)} != {total}")
