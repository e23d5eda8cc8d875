"""Round loop tying local training to the aggregation defense.

Determinism contract: every random draw comes from a generator keyed by the
scenario seed plus a purpose tag plus (round, client) indices, so metric
sequences are reproducible regardless of how training is scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path

import numpy as np

from ..kvconfig import ConfigError, parse_kv_file
from ..models import ModelVector, RoundConfig
from ..numeric import widen
from ..pipeline import run_defense_round
from ..rng import NoiseSource
from .task import default_task
from .training import ClientSim, TrainConfig, accuracy, predict, train_local, zero_model

DEFENSES = ("flame", "fedavg")

# rng purpose tags (arbitrary but fixed)
_TAG_DATA = 1
_TAG_EVAL = 2
_TAG_TRAIN = 3


@dataclass(frozen=True)
class Scenario:
    clients: int = 20
    malicious: int = 5
    rounds: int = 30
    defense: str = "flame"
    seed: int = 2024

    feature_dim: int = 32
    signal_dims: int = 8
    class_separation: float = 1.0
    cov_scale: float = 0.6
    trigger_width: int = 3
    trigger_value: float = 4.0
    target_label: int = 1

    samples_per_client: int = 200
    eval_samples: int = 2000
    learning_rate: float = 0.2
    epochs: int = 3
    batch_size: int = 32

    poison_ratio: float = 0.5
    boost: float = 4.0

    noise_range: float = 0.001
    cascade_stages: int = 4

    def __post_init__(self):
        if self.clients < 1 or self.rounds < 1:
            raise ValueError("need at least one client and one round")
        if self.malicious < 0 or 2 * self.malicious >= self.clients:
            raise ValueError(
                f"malicious clients must stay below half: {self.malicious} of {self.clients}"
            )
        if self.defense not in DEFENSES:
            raise ValueError(f"defense must be one of {DEFENSES}")
        if not (0.0 <= self.poison_ratio <= 1.0):
            raise ValueError("poison_ratio must lie in [0, 1]")


@dataclass(frozen=True)
class RoundMetrics:
    round_index: int
    main_accuracy: float
    backdoor_accuracy: float
    accepted_count: int
    rejected_malicious: int
    rejected_benign: int


def _rng(*key: int) -> np.random.Generator:
    return np.random.default_rng(key)


def _build_clients(scenario: Scenario, task) -> list[ClientSim]:
    train_cfg = TrainConfig(
        learning_rate=scenario.learning_rate,
        epochs=scenario.epochs,
        batch_size=scenario.batch_size,
    )
    clients = []
    for cid in range(scenario.clients):
        rng = _rng(scenario.seed, _TAG_DATA, cid)
        features, labels = task.sample(rng, scenario.samples_per_client)
        malicious = cid < scenario.malicious
        boost = scenario.boost if malicious else 1.0
        if malicious and scenario.poison_ratio > 0.0:
            k = math.ceil(scenario.poison_ratio * scenario.samples_per_client)
            poisoned_x, poisoned_y = task.poison(features[:k], labels[:k])
            features = np.concatenate([poisoned_x, features[k:]])
            labels = np.concatenate([poisoned_y, labels[k:]])
        clients.append(
            ClientSim(
                client_id=cid,
                malicious=malicious,
                features=features,
                labels=labels,
                train=train_cfg,
                boost=boost,
            )
        )
    return clients


def fedavg(models: list[ModelVector]) -> ModelVector:
    """Plain unweighted average, float64 accumulation in client order."""
    acc = np.zeros(models[0].param_count, dtype=np.float64)
    for m in models:
        acc += widen(m.params)
    return ModelVector((acc / len(models)).astype(np.float32))


def run_experiment(scenario: Scenario) -> list[RoundMetrics]:
    task = default_task(
        feature_dim=scenario.feature_dim,
        signal_dims=scenario.signal_dims,
        class_separation=scenario.class_separation,
        cov_scale=scenario.cov_scale,
        trigger_width=scenario.trigger_width,
        trigger_value=scenario.trigger_value,
        target_label=scenario.target_label,
    )
    clients = _build_clients(scenario, task)

    eval_rng = _rng(scenario.seed, _TAG_EVAL)
    eval_x, eval_y = task.sample(eval_rng, scenario.eval_samples)
    # Backdoor accuracy is measured on triggered samples whose true class is
    # not the target, otherwise correct predictions would inflate it.
    non_target = eval_y != task.target_label
    triggered_x = task.apply_trigger(eval_x[non_target])

    round_config = RoundConfig(
        n=scenario.clients,
        p=task.feature_dim + 1,
        cascade_stages=scenario.cascade_stages,
        noise_range=scenario.noise_range,
        rng_seed=scenario.seed,
    )
    noise = NoiseSource(scenario.seed)
    global_model = zero_model(task)

    history: list[RoundMetrics] = []
    for round_index in range(scenario.rounds):
        local_models = [
            train_local(c, global_model, _rng(scenario.seed, _TAG_TRAIN, round_index, c.client_id))
            for c in clients
        ]
        if scenario.defense == "flame":
            global_model, report = run_defense_round(
                global_model, local_models, round_config, noise=noise
            )
            labels = report.labels.labels
            rejected_malicious = sum(
                1 for c in clients if c.malicious and labels[c.client_id] == 0
            )
            rejected_benign = sum(
                1 for c in clients if not c.malicious and labels[c.client_id] == 0
            )
            accepted = report.accepted_count
        else:
            global_model = fedavg(local_models)
            accepted = scenario.clients
            rejected_malicious = 0
            rejected_benign = 0

        params = widen(global_model.params)
        backdoor = float(np.mean(predict(params, triggered_x) == task.target_label))
        history.append(
            RoundMetrics(
                round_index=round_index,
                main_accuracy=accuracy(global_model, eval_x, eval_y),
                backdoor_accuracy=backdoor,
                accepted_count=accepted,
                rejected_malicious=rejected_malicious,
                rejected_benign=rejected_benign,
            )
        )
    return history


CSV_HEADER = "round,MA,BA,acceptedCount,rejectedMalicious,rejectedBenign"


def metrics_to_csv(history: list[RoundMetrics]) -> str:
    lines = [CSV_HEADER]
    for m in history:
        lines.append(
            f"{m.round_index},{m.main_accuracy:.6f},{m.backdoor_accuracy:.6f},"
            f"{m.accepted_count},{m.rejected_malicious},{m.rejected_benign}"
        )
    return "\n".join(lines) + "\n"


# -- scenario files ----------------------------------------------------------

_FIELD_TYPES = {f.name: f.type for f in fields(Scenario)}


def scenario_from_file(path: str | Path, **overrides) -> Scenario:
    """Build a Scenario from a key=value file; unknown keys are rejected."""
    raw = parse_kv_file(path)
    raw.update({k: str(v) for k, v in overrides.items()})
    kwargs = {}
    for key, value in raw.items():
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{path}: unknown scenario key {key!r}")
        kind = _FIELD_TYPES[key]
        try:
            if kind == "int":
                kwargs[key] = int(value)
            elif kind == "float":
                kwargs[key] = float(value)
            else:
                kwargs[key] = value
        except ValueError:
            raise ConfigError(f"{path}: key {key!r} expects {kind}, got {value!r}") from None
    try:
        return Scenario(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def bundled_scenario_path(name: str) -> Path:
    """Path of a scenario file shipped with the package."""
    candidate = resources.files(__package__) / "scenarios" / name
    with resources.as_file(candidate) as path:
        return Path(path)
