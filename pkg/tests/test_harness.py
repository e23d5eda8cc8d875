import dataclasses

import numpy as np
import pytest

from flsg.harness import Scenario, default_task, run_experiment
from flsg.harness.experiment import fedavg, metrics_to_csv, scenario_from_file
from flsg.harness.task import SyntheticTask
from flsg.harness.training import ClientSim, TrainConfig, accuracy, train_local, zero_model
from flsg.models import ModelVector

from conftest import random_models


def small_task():
    return default_task(feature_dim=12, signal_dims=4, trigger_width=2)


def make_client(rng, task, malicious=False, poison_ratio=0.5, boost=1.0, samples=300,
                epochs=50, lr=0.3):
    x, y = task.sample(rng, samples)
    if malicious:
        k = int(poison_ratio * samples)
        px, py = task.poison(x[:k], y[:k])
        x = np.concatenate([px, x[k:]])
        y = np.concatenate([py, y[k:]])
    return ClientSim(
        client_id=0,
        malicious=malicious,
        features=x,
        labels=y,
        train=TrainConfig(learning_rate=lr, epochs=epochs, batch_size=32),
        boost=boost,
    )


def test_task_validation():
    with pytest.raises(ValueError):
        default_task(feature_dim=4, signal_dims=3, trigger_width=2)
    with pytest.raises(ValueError):
        SyntheticTask(
            feature_dim=4,
            class_means=np.zeros((2, 4)),
            cov_scale=1.0,
            trigger_indices=(1, 1),
            trigger_values=(1.0, 1.0),
            target_label=1,
        )
    with pytest.raises(ValueError):
        SyntheticTask(
            feature_dim=4,
            class_means=np.zeros((2, 4)),
            cov_scale=1.0,
            trigger_indices=(9,),
            trigger_values=(1.0,),
            target_label=1,
        )


def test_trigger_overwrites_only_trigger_features(rng):
    task = small_task()
    x, y = task.sample(rng, 20)
    trig = task.apply_trigger(x)
    idx = list(task.trigger_indices)
    assert np.all(trig[:, idx] == np.array(task.trigger_values))
    others = [i for i in range(task.feature_dim) if i not in idx]
    assert np.array_equal(trig[:, others], x[:, others])
    px, py = task.poison(x, y)
    assert np.all(py == task.target_label)


def test_zero_epochs_returns_global_unchanged(rng):
    task = small_task()
    client = make_client(rng, task, epochs=0)
    g = ModelVector(rng.standard_normal(task.feature_dim + 1).astype(np.float32))
    out = train_local(client, g, rng)
    assert out == g


def test_benign_client_learns_separable_blobs(rng):
    task = small_task()
    client = make_client(rng, task, epochs=50)
    trained = train_local(client, zero_model(task), rng)
    assert accuracy(trained, client.features, client.labels) >= 0.95


def test_malicious_client_learns_backdoor(rng):
    task = small_task()
    client = make_client(rng, task, malicious=True, poison_ratio=0.5, epochs=50)
    trained = train_local(client, zero_model(task), rng)
    # evaluate the backdoor on the client's own fresh triggered samples
    x, y = task.sample(rng, 500)
    mask = y != task.target_label
    from flsg.harness.training import predict
    from flsg.numeric import widen

    triggered = task.apply_trigger(x[mask])
    hit = np.mean(predict(widen(trained.params), triggered) == task.target_label)
    assert hit >= 0.90


def test_boost_scales_update(rng):
    task = small_task()
    base = make_client(rng, task, samples=64, epochs=2)
    g = zero_model(task)
    plain = train_local(base, g, np.random.default_rng(5))
    boosted_client = dataclasses.replace(base, boost=4.0)
    boosted = train_local(boosted_client, g, np.random.default_rng(5))
    np.testing.assert_allclose(boosted.params, 4.0 * plain.params, rtol=1e-5)


def test_model_dimension_checked(rng):
    task = small_task()
    client = make_client(rng, task, samples=16, epochs=1)
    with pytest.raises(ValueError):
        train_local(client, ModelVector(np.zeros(5, dtype=np.float32)), rng)


def test_fedavg_is_plain_mean(rng):
    models = random_models(rng, 4, 10)
    avg = fedavg(models)
    expected = np.mean([m.params.astype(np.float64) for m in models], axis=0).astype(np.float32)
    assert avg.params.tolist() == pytest.approx(expected.tolist(), rel=1e-6)


def test_scenario_rejects_majority_attackers():
    with pytest.raises(ValueError):
        Scenario(clients=10, malicious=5)
    with pytest.raises(ValueError):
        Scenario(clients=10, malicious=6)
    Scenario(clients=10, malicious=4)  # fine


def test_scenario_rejects_unknown_defense():
    with pytest.raises(ValueError):
        Scenario(defense="krum")


def test_reproducible_metrics():
    scenario = Scenario(clients=8, malicious=2, rounds=3, samples_per_client=60,
                        eval_samples=200, epochs=2, seed=7)
    assert run_experiment(scenario) == run_experiment(scenario)


def test_metrics_csv_shape():
    scenario = Scenario(clients=6, malicious=1, rounds=2, samples_per_client=40,
                        eval_samples=100, epochs=1, seed=3)
    history = run_experiment(scenario)
    csv = metrics_to_csv(history)
    lines = csv.strip().split("\n")
    assert lines[0] == "round,MA,BA,acceptedCount,rejectedMalicious,rejectedBenign"
    assert len(lines) == 3


def test_defense_filters_boosted_attack_quickly():
    scenario = Scenario(clients=10, malicious=3, rounds=4, samples_per_client=100,
                        eval_samples=400, seed=11)
    history = run_experiment(scenario)
    for metrics in history:
        malicious_in = scenario.malicious - metrics.rejected_malicious
        benign_in = metrics.accepted_count - malicious_in
        assert malicious_in <= benign_in
    assert history[-1].backdoor_accuracy <= 0.2
    assert history[-1].main_accuracy >= 0.9


def test_scenario_file_round_trip(tmp_path):
    path = tmp_path / "tiny.cfg"
    path.write_text("clients = 6\nmalicious = 2\nrounds = 2\ndefense = fedavg\nseed = 5\n")
    scenario = scenario_from_file(path)
    assert scenario.clients == 6
    assert scenario.malicious == 2
    assert scenario.defense == "fedavg"
    override = scenario_from_file(path, defense="flame")
    assert override.defense == "flame"


def test_scenario_file_unknown_key(tmp_path):
    from flsg.kvconfig import ConfigError

    path = tmp_path / "bad.cfg"
    path.write_text("clients = 6\nwarp_drive = 1\n")
    with pytest.raises(ConfigError):
        scenario_from_file(path)


def test_scenario_file_bad_value(tmp_path):
    from flsg.kvconfig import ConfigError

    path = tmp_path / "bad.cfg"
    path.write_text("clients = six\n")
    with pytest.raises(ConfigError):
        scenario_from_file(path)
