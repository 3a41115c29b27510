"""Seeded random streams for demand, lead-time, and agent-noise draws.

A simulation owns a single root seed. Every named stream derives its own
counter-based generator (Philox keyed through SeedSequence) from that seed,
so drawing more values from one stream never shifts another stream's
sequence. Replaying with the same seed reproduces every draw exactly.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping

import numpy as np

__all__ = [
    "PROCESS_KINDS",
    "ProcessError",
    "StochasticProcess",
    "Stream",
    "generator_for",
    "parse_process",
    "sample",
]

PROCESS_KINDS = ("uniform_int", "normal_truncated", "poisson", "constant", "trace")

MAX_SEED = 2**64 - 1


class ProcessError(ValueError):
    """Invalid stochastic-process specification or draw request."""


def _stream_key(stream_id: str) -> int:
    digest = hashlib.sha256(stream_id.encode("utf-8")).digest()
    return int.from_bytes(digest[:16], "big")


def generator_for(seed: int, stream_id: str) -> np.random.Generator:
    """Counter-based generator for one (root seed, stream id) pair."""
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed <= MAX_SEED:
        raise ProcessError(f"seed must be an integer in [0, 2**64): {seed!r}")
    seq = np.random.SeedSequence([seed, _stream_key(stream_id)])
    return np.random.Generator(np.random.Philox(seq))


def _as_int(value: Any, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ProcessError(f"{name} must be an integer, got {value!r}")
    return value


@dataclass(frozen=True)
class StochasticProcess:
    """Declarative spec of one integer-valued random process.

    kind and params:
      uniform_int       low, high          inclusive integer bounds, 0 <= low <= high
      normal_truncated  mu, sigma[, low]   rounded Gaussian, floored at low (default 0)
      poisson           lam                rate >= 0
      constant          value              fixed non-negative integer
      trace             values             explicit non-negative draws, consumed in order
    """

    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)
    stream_id: str = "demand"

    def __post_init__(self) -> None:
        object.__setattr__(self, "params", dict(self.params))
        if self.kind not in PROCESS_KINDS:
            raise ProcessError(f"unknown process kind {self.kind!r}")
        if not self.stream_id:
            raise ProcessError("stream_id must be non-empty")
        p = self.params
        if self.kind == "uniform_int":
            low = _as_int(p.get("low"), "low")
            high = _as_int(p.get("high"), "high")
            if low < 0 or high < low:
                raise ProcessError(f"uniform_int needs 0 <= low <= high, got [{low}, {high}]")
        elif self.kind == "normal_truncated":
            mu = p.get("mu")
            sigma = p.get("sigma")
            if not isinstance(mu, (int, float)) or isinstance(mu, bool):
                raise ProcessError(f"mu must be numeric, got {mu!r}")
            if not isinstance(sigma, (int, float)) or isinstance(sigma, bool) or sigma <= 0:
                raise ProcessError(f"sigma must be positive, got {sigma!r}")
            low = _as_int(p.get("low", 0), "low")
            if low < 0:
                raise ProcessError(f"truncation floor must be >= 0, got {low}")
        elif self.kind == "poisson":
            lam = p.get("lam")
            if not isinstance(lam, (int, float)) or isinstance(lam, bool) or lam < 0:
                raise ProcessError(f"lam must be >= 0, got {lam!r}")
        elif self.kind == "constant":
            value = _as_int(p.get("value"), "value")
            if value < 0:
                raise ProcessError(f"constant value must be >= 0, got {value}")
        elif self.kind == "trace":
            values = p.get("values")
            if not isinstance(values, (list, tuple)) or not values:
                raise ProcessError("trace needs a non-empty values list")
            for v in values:
                if _as_int(v, "trace value") < 0:
                    raise ProcessError(f"trace values must be >= 0, got {v}")
            object.__setattr__(self, "params", {**dict(p), "values": tuple(values)})

    def min_value(self) -> int:
        """Smallest value the process can produce. Used to validate that
        lead-time processes are strictly positive."""
        p = self.params
        if self.kind == "uniform_int":
            return p["low"]
        if self.kind == "normal_truncated":
            return p.get("low", 0)
        if self.kind == "poisson":
            return 0
        if self.kind == "constant":
            return p["value"]
        return min(p["values"])

    def max_value(self) -> int | None:
        """Largest possible value, or None when unbounded."""
        p = self.params
        if self.kind == "uniform_int":
            return p["high"]
        if self.kind == "constant":
            return p["value"]
        if self.kind == "trace":
            return max(p["values"])
        return None

    def mean(self) -> Fraction | None:
        """Exact mean where it has a closed form, else None.

        normal_truncated returns None: rounding plus truncation has no
        rational closed form, and callers must treat the anchor as undefined
        rather than approximate it.
        """
        p = self.params
        if self.kind == "uniform_int":
            return Fraction(p["low"] + p["high"], 2)
        if self.kind == "poisson":
            return Fraction(str(p["lam"]))
        if self.kind == "constant":
            return Fraction(p["value"])
        if self.kind == "trace":
            return Fraction(sum(p["values"]), len(p["values"]))
        return None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind, **self.params}
        if self.kind == "trace":
            out["values"] = list(self.params["values"])
        if self.stream_id != "demand":
            out["stream_id"] = self.stream_id
        return out


def parse_process(spec: Any, stream_id: str) -> StochasticProcess:
    """Build a process from a config mapping like {"kind": "poisson", "lam": 10}."""
    if isinstance(spec, StochasticProcess):
        if spec.stream_id != stream_id:
            return StochasticProcess(spec.kind, spec.params, stream_id)
        return spec
    if not isinstance(spec, Mapping):
        raise ProcessError(f"process spec must be a mapping, got {type(spec).__name__}")
    body = dict(spec)
    kind = body.pop("kind", None)
    body.pop("stream_id", None)
    if kind is None:
        raise ProcessError("process spec is missing 'kind'")
    return StochasticProcess(kind, body, stream_id)


class Stream:
    """Lazy, stateful view of one process under one root seed.

    Each draw consumes from this stream's own generator only; trace
    processes are consumed in order and raise once exhausted.
    """

    def __init__(self, process: StochasticProcess, seed: int) -> None:
        self.process = process
        self._gen = generator_for(seed, process.stream_id)
        self._count = 0

    def draw(self) -> int:
        p = self.process.params
        kind = self.process.kind
        self._count += 1
        if kind == "uniform_int":
            return int(self._gen.integers(p["low"], p["high"] + 1))
        if kind == "normal_truncated":
            raw = round(float(self._gen.normal(p["mu"], p["sigma"])))
            return max(p.get("low", 0), int(raw))
        if kind == "poisson":
            return int(self._gen.poisson(p["lam"]))
        if kind == "constant":
            return p["value"]
        values = p["values"]
        if self._count > len(values):
            raise ProcessError(
                f"trace on stream {self.process.stream_id!r} exhausted after {len(values)} draws"
            )
        return values[self._count - 1]


def sample(process: StochasticProcess, seed: int, n: int) -> list[int]:
    """Draw n values. Same (process, seed, n) always returns the same list."""
    if isinstance(n, bool) or not isinstance(n, int) or n < 0:
        raise ProcessError(f"n must be a non-negative integer, got {n!r}")
    stream = Stream(process, seed)
    return [stream.draw() for _ in range(n)]


def poisson_cdf(lam: float, q: int) -> float:
    """P(X <= q) for Poisson(lam). Iterative pmf accumulation."""
    if q < 0:
        return 0.0
    term = math.exp(-lam)
    total = term
    for k in range(1, q + 1):
        term *= lam / k
        total += term
    return min(total, 1.0)
