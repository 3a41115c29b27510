"""Seedable discrete-time inventory simulations with optimal-policy oracles,
behavioral metrics, scripted agents, and a language-neutral wire protocol."""

from __future__ import annotations

from .agents import AGENT_KINDS, AgentSpec
from .envs import ENVIRONMENTS, Action, Environment, Observation, make_env
from .episode import (
    EpisodeIntro,
    EpisodeLog,
    MemoryWindow,
    SimConfig,
    StepRecord,
    push_memory,
    run_episode,
    verify_log_costs,
)
from .errors import AgentError, ConfigError, EpisodeAborted, SimError
from .harness import ExperimentConfig, load_config, run_batch
from .metrics import (
    EpisodeReport,
    aggregate_reports,
    anchoring_alpha,
    average_cost,
    bullwhip_ratio,
    compute_report,
    demand_chasing_rho,
    stockout_rate,
    turnover_rate,
)
from .oracles import (
    ExPostSolution,
    brute_force_dp,
    critical_ratio,
    distance_to_optimal,
    expost_optimal,
    newsvendor_expected_profit,
    newsvendor_q_star,
)
from .rng import StochasticProcess, Stream, generator_for, parse_process, sample

__version__ = "0.1.0"

__all__ = [
    "AGENT_KINDS",
    "Action",
    "AgentError",
    "AgentSpec",
    "ConfigError",
    "ENVIRONMENTS",
    "Environment",
    "EpisodeAborted",
    "EpisodeIntro",
    "EpisodeLog",
    "EpisodeReport",
    "ExPostSolution",
    "ExperimentConfig",
    "MemoryWindow",
    "Observation",
    "SimConfig",
    "SimError",
    "StepRecord",
    "StochasticProcess",
    "Stream",
    "aggregate_reports",
    "anchoring_alpha",
    "average_cost",
    "brute_force_dp",
    "bullwhip_ratio",
    "compute_report",
    "critical_ratio",
    "demand_chasing_rho",
    "distance_to_optimal",
    "expost_optimal",
    "generator_for",
    "load_config",
    "make_env",
    "newsvendor_expected_profit",
    "newsvendor_q_star",
    "parse_process",
    "push_memory",
    "run_batch",
    "run_episode",
    "sample",
    "stockout_rate",
    "turnover_rate",
    "verify_log_costs",
]
