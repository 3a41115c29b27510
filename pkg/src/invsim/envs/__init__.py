"""Environment registry."""

from __future__ import annotations

from typing import Any, Mapping

from ..errors import ConfigError
from .base import (
    Action,
    CostParams,
    EchelonState,
    Environment,
    Observation,
    PeriodResult,
    PipelineEntry,
    validate_action,
)
from .beergame import BeerGameEnv
from .dualsource import DualSourceEnv
from .multiperiod import MultiPeriodEnv
from .newsvendor import NewsvendorEnv
from .warehouse import WarehouseEnv

__all__ = [
    "Action",
    "CostParams",
    "EchelonState",
    "Environment",
    "ENVIRONMENTS",
    "Observation",
    "PeriodResult",
    "PipelineEntry",
    "make_env",
    "validate_action",
]

ENVIRONMENTS: dict[str, type[Environment]] = {
    env.env_id: env
    for env in (NewsvendorEnv, MultiPeriodEnv, BeerGameEnv, WarehouseEnv, DualSourceEnv)
}


def make_env(env_id: str, params: Mapping[str, Any], horizon: int, seed: int) -> Environment:
    if env_id not in ENVIRONMENTS:
        raise ConfigError(f"unknown environment {env_id!r}; known: {sorted(ENVIRONMENTS)}")
    return ENVIRONMENTS[env_id](params, horizon, seed)
