"""Monte Carlo reporting primitives and the deterministic seeding scheme.

Per-trial randomness derives from (master seed, trial index) as

    trial_seed = first 8 bytes of SHA-256(b"qvote" || seed_be64 || index_be64)

interpreted big-endian.  The algorithm is fixed so that trial counts and
aggregates are comparable across runs and platforms; aggregation is
order-independent, so trials may execute in parallel.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any

import numpy as np

DEFAULT_Z = 3.0


def derive_trial_seed(master_seed: int, trial_index: int) -> int:
    payload = (
        b"qvote"
        + int(master_seed).to_bytes(8, "big", signed=False)
        + int(trial_index).to_bytes(8, "big", signed=False)
    )
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big")


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    return np.random.default_rng(derive_trial_seed(master_seed, trial_index))


@dataclass
class Estimate:
    """Binomial probability estimate with a z-sigma confidence radius."""

    p_hat: float
    ci_radius: float
    z: float = DEFAULT_Z
    analytic: float | None = None

    def to_json(self) -> dict:
        doc: dict[str, Any] = {
            "p_hat": self.p_hat,
            "ci_radius": self.ci_radius,
            "z": self.z,
            "analytic": self.analytic,
        }
        if self.analytic is not None:
            doc["abs_diff"] = abs(self.p_hat - self.analytic)
        return doc


def binomial_estimate(
    successes: int, trials: int, z: float = DEFAULT_Z, analytic: float | None = None
) -> Estimate:
    p = successes / trials
    radius = z * (p * (1.0 - p) / trials) ** 0.5
    return Estimate(p_hat=p, ci_radius=radius, z=z, analytic=analytic)


@dataclass
class AttackReport:
    """Aggregated evidence from an adversary-strategy simulation."""

    attack: str
    params: dict
    trials: int
    seed: int | None
    estimates: dict[str, Estimate] = field(default_factory=dict)
    metrics: dict[str, Any] = field(default_factory=dict)
    per_trial: list | None = None

    def to_json(self) -> dict:
        doc: dict[str, Any] = {
            "attack": self.attack,
            "params": self.params,
            "trials": self.trials,
            "seed": self.seed,
            "estimates": {k: v.to_json() for k, v in self.estimates.items()},
            "metrics": self.metrics,
        }
        if self.per_trial is not None:
            doc["per_trial"] = self.per_trial
        return doc


@dataclass
class ScenarioReport:
    """Machine-readable result of one CLI scenario run.

    Identical configs (including seed) produce byte-identical JSON except
    for the timestamp field.
    """

    scenario: str
    params: dict
    trials: int
    seed: int | None
    counts: dict[str, int] = field(default_factory=dict)
    estimates: dict[str, Estimate] = field(default_factory=dict)
    values: dict[str, Any] = field(default_factory=dict)
    detail: dict[str, Any] = field(default_factory=dict)
    timestamp: str = ""

    def __post_init__(self) -> None:
        if not self.timestamp:
            self.timestamp = datetime.now(timezone.utc).isoformat()

    def to_json(self) -> dict:
        return {
            "scenario": self.scenario,
            "params": self.params,
            "trials": self.trials,
            "seed": self.seed,
            "counts": self.counts,
            "estimates": {k: v.to_json() for k, v in self.estimates.items()},
            "values": self.values,
            "detail": self.detail,
            "timestamp": self.timestamp,
        }

    def dumps(self) -> str:
        return stable_json_dumps(self.to_json())


def stable_json_dumps(doc: dict) -> str:
    """Deterministic serialization: sorted keys, fixed separators."""
    return json.dumps(doc, sort_keys=True, indent=2)
