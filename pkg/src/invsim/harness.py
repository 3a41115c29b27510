"""Batch experiment harness: config files, seed batches, logs, and reports.

An experiment config (JSON) names one environment, one agent per role, and
a seed list. The harness runs every seed sequentially in declared order,
writes one JSONL episode log per seed, and aggregates per-episode metrics
into mean/std summary reports (JSON and CSV). Within-series statistics such
as the bullwhip ratio are computed per seed and then averaged; raw series
from different seeds are never pooled.

Running the same config twice produces byte-identical logs and reports.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

from .agents import AgentSpec
from .envs import ENVIRONMENTS, make_env
from .episode import EpisodeLog, SimConfig, run_episode
from .errors import ConfigError
from .metrics import EpisodeReport, aggregate_reports, compute_report
from .rng import MAX_SEED

__all__ = [
    "BatchResult",
    "ExperimentConfig",
    "collect_reports",
    "emit_table",
    "load_config",
    "run_batch",
    "write_reports",
]

FRAMINGS = ("PF", "NF")

_NAME_RE = re.compile(r"^[A-Za-z0-9._-]+$")


@dataclass
class ExperimentConfig:
    """One experiment: an environment, an agent roster, and a seed batch."""

    env_id: str
    horizon: int
    seeds: list[int]
    agents: dict[str, AgentSpec]
    env_params: dict[str, Any] = field(default_factory=dict)
    memory_window: int = 5
    framing: str | None = None
    cognitive_reflection: bool = False
    info_sharing: bool = False
    name: str | None = None
    out_dir: str | None = None

    def __post_init__(self) -> None:
        if self.env_id not in ENVIRONMENTS:
            raise ConfigError(f"unknown environment {self.env_id!r}; known: {sorted(ENVIRONMENTS)}")
        if self.name is None:
            self.name = self.env_id.lower()
        if not _NAME_RE.match(self.name):
            raise ConfigError(f"experiment name must match [A-Za-z0-9._-]+, got {self.name!r}")
        if not isinstance(self.seeds, list) or not self.seeds:
            raise ConfigError("seeds must be a non-empty list of integers")
        for seed in self.seeds:
            if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed <= MAX_SEED:
                raise ConfigError(f"seed {seed!r} outside [0, 2**64)")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be unique")
        if self.framing is not None:
            if self.framing not in FRAMINGS:
                raise ConfigError(f"framing must be one of {FRAMINGS} or omitted, got {self.framing!r}")
            if self.env_id != "NVP":
                raise ConfigError("framing variants are defined for NVP only")
        env_cls = ENVIRONMENTS[self.env_id]
        if self.info_sharing and not env_cls.multi_agent:
            raise ConfigError("info_sharing requires a multi-agent environment")
        # Probe instantiation validates env_params and reveals the role set.
        probe = make_env(self.env_id, self._env_params_full(), self.horizon, self.seeds[0])
        roles = set(probe.roles)
        if set(self.agents) != roles:
            raise ConfigError(
                f"agent roster {sorted(self.agents)} does not match roles {sorted(roles)}"
            )

    def _env_params_full(self) -> dict[str, Any]:
        params = dict(self.env_params)
        if self.info_sharing:
            params["info_sharing"] = True
        return params

    def sim_config(self, seed: int) -> SimConfig:
        return SimConfig(
            env_id=self.env_id,
            horizon=self.horizon,
            seed=seed,
            env_params=self._env_params_full(),
            memory_window=self.memory_window,
        )

    def meta(self) -> dict[str, Any]:
        return {
            "experiment": self.name,
            "framing": self.framing,
            "cognitive_reflection": self.cognitive_reflection,
            "info_sharing": self.info_sharing,
            "agents": {role: spec.label() for role, spec in sorted(self.agents.items())},
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ExperimentConfig":
        if not isinstance(data, Mapping):
            raise ConfigError("experiment config must be a JSON object")
        known = {
            "env",
            "horizon",
            "seeds",
            "agents",
            "env_params",
            "memory_window",
            "framing",
            "cognitive_reflection",
            "info_sharing",
            "name",
            "out_dir",
        }
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields {sorted(unknown)}")
        for required in ("env", "horizon", "seeds", "agents"):
            if required not in data:
                raise ConfigError(f"config is missing {required!r}")
        agents_raw = data["agents"]
        if not isinstance(agents_raw, Mapping) or not agents_raw:
            raise ConfigError("agents must map each role to an agent spec")
        agents = {role: AgentSpec.from_dict(spec) for role, spec in agents_raw.items()}
        horizon = data["horizon"]
        if isinstance(horizon, bool) or not isinstance(horizon, int) or horizon < 1:
            raise ConfigError(f"horizon must be an integer >= 1, got {horizon!r}")
        memory = data.get("memory_window", 5)
        if isinstance(memory, bool) or not isinstance(memory, int) or memory < 0:
            raise ConfigError(f"memory_window must be an integer >= 0, got {memory!r}")
        if not isinstance(data["seeds"], list):
            raise ConfigError("seeds must be a non-empty list of integers")
        return cls(
            env_id=data["env"],
            horizon=horizon,
            seeds=list(data["seeds"]),
            agents=agents,
            env_params=dict(data.get("env_params", {})),
            memory_window=memory,
            framing=data.get("framing"),
            cognitive_reflection=bool(data.get("cognitive_reflection", False)),
            info_sharing=bool(data.get("info_sharing", False)),
            name=data.get("name"),
            out_dir=data.get("out_dir"),
        )


def load_config(path: str | Path) -> ExperimentConfig:
    """Read a JSON experiment config. JSON is the one supported format."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return ExperimentConfig.from_dict(data)


@dataclass
class BatchResult:
    config: ExperimentConfig
    logs: list[EpisodeLog]
    reports: list[EpisodeReport]
    aggregate: dict[str, Any]


def run_batch(config: ExperimentConfig, out_dir: str | Path | None = None) -> BatchResult:
    """Run every seed and (when an output directory is set) persist logs and
    reports. Agent failures propagate as EpisodeAborted."""
    out = out_dir or config.out_dir
    logs: list[EpisodeLog] = []
    for seed in config.seeds:
        sim = config.sim_config(seed)
        agents = {role: spec.build(sim, role) for role, spec in config.agents.items()}
        logs.append(run_episode(sim, agents, meta=config.meta()))
    reports = [compute_report(log) for log in logs]
    aggregate = aggregate_reports(reports)
    aggregate["experiment"] = config.name
    aggregate["agents"] = config.meta()["agents"]
    result = BatchResult(config=config, logs=logs, reports=reports, aggregate=aggregate)
    if out is not None:
        write_outputs(result, Path(out))
    return result


def write_outputs(result: BatchResult, out: Path) -> None:
    episodes_dir = out / "episodes"
    episodes_dir.mkdir(parents=True, exist_ok=True)
    for log in result.logs:
        path = episodes_dir / f"{result.config.name}-seed{log.config.seed}.jsonl"
        path.write_text(log.to_jsonl(), encoding="utf-8")
    write_reports(result.reports, result.aggregate, out)


def _dump_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_reports(reports: Sequence[EpisodeReport], aggregate: Mapping[str, Any], out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "aggregate": dict(aggregate),
        "episodes": [r.to_dict() for r in reports],
    }
    (out / "report.json").write_text(_dump_json(payload), encoding="utf-8")
    (out / "report.csv").write_text(render_csv(reports, aggregate), encoding="utf-8")


def render_csv(reports: Sequence[EpisodeReport], aggregate: Mapping[str, Any]) -> str:
    """One row per episode plus mean/std rows; empty cells are undefined."""
    keys: list[str] = []
    for report in reports:
        for key in report.to_flat():
            if key not in keys:
                keys.append(key)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["seed"] + keys)
    for report in reports:
        flat = report.to_flat()
        writer.writerow([report.seed] + [_cell(flat.get(key)) for key in keys])
    metrics = aggregate["metrics"]
    for stat in ("mean", "std"):
        writer.writerow([stat] + [_cell(metrics.get(key, {}).get(stat)) for key in keys])
    return buffer.getvalue()


def _cell(value: Any) -> str:
    if value is None:
        return ""
    return repr(float(value))


TABLE_COLUMNS = ("avg_cost", "turnover", "stockout_mean", "distance")


def collect_reports(root: str | Path) -> list[tuple[dict[str, Any], list[EpisodeReport]]]:
    """Recompute per-episode reports from every episode log under root.

    Logs are grouped by (environment, experiment name, agent roster) so one
    table row summarizes one batch. Returns (group meta, reports) pairs in
    sorted group order.
    """
    root = Path(root)
    logs = sorted(root.rglob("*.jsonl"))
    if not logs:
        raise ConfigError(f"no episode logs (*.jsonl) found under {root}")
    groups: dict[str, tuple[dict[str, Any], list[EpisodeReport]]] = {}
    for path in logs:
        log = EpisodeLog.from_jsonl(path.read_text(encoding="utf-8"))
        meta = log.meta
        key_parts = {
            "env": log.config.env_id,
            "experiment": meta.get("experiment", ""),
            "agents": meta.get("agents", {}),
            "framing": meta.get("framing"),
            "info_sharing": meta.get("info_sharing", False),
        }
        key = json.dumps(key_parts, sort_keys=True)
        groups.setdefault(key, (key_parts, []))[1].append(compute_report(log))
    return [groups[key] for key in sorted(groups)]


def emit_table(
    grouped: Sequence[tuple[Mapping[str, Any], Sequence[EpisodeReport]]],
) -> tuple[str, list[dict[str, Any]]]:
    """Cross-experiment summary table: one row per batch.

    Columns follow the cost/turnover/stockout layout; stockout is the mean
    per-role rate so the column stays within [0, 1] (per-role values and
    their sum live in the JSON reports).
    """
    rows: list[dict[str, Any]] = []
    for meta, reports in grouped:
        aggregate = aggregate_reports(list(reports))
        agents = meta.get("agents", {})
        label = ";".join(f"{role}={name}" for role, name in sorted(agents.items()))
        row: dict[str, Any] = {
            "agent": label,
            "env": meta.get("env", reports[0].env_id),
            "experiment": meta.get("experiment", ""),
            "episodes": len(reports),
        }
        for column in TABLE_COLUMNS:
            stats = aggregate["metrics"].get(column, {"mean": None, "std": None})
            row[column] = stats["mean"]
            row[f"{column}_std"] = stats["std"]
        rows.append(row)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    header = ["agent", "env", "experiment", "episodes"]
    for column in TABLE_COLUMNS:
        header += [column, f"{column}_std"]
    writer.writerow(header)
    for row in rows:
        writer.writerow(
            [row["agent"], row["env"], row["experiment"], row["episodes"]]
            + [_cell(row[c]) if not isinstance(row[c], str) else row[c] for c in header[4:]]
        )
    return buffer.getvalue(), rows
