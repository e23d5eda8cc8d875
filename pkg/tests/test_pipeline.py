import numpy as np
import pytest

import flsg.pipeline as pipeline_module
from flsg.cosine import cosine_distances_naive
from flsg.errors import NoAcceptedModels
from flsg.models import ClusterLabels, ModelVector, RoundConfig
from flsg.pipeline import run_defense_round
from flsg.preprocess import preprocess
from flsg.rng import NoiseSource

from conftest import random_models


def test_report_is_consistent(rng):
    g = random_models(rng, 1, 40)[0]
    locals_ = random_models(rng, 8, 40)
    config = RoundConfig(n=8, p=40, cascade_stages=3, noise_range=0.001, rng_seed=5)
    out, report = run_defense_round(g, locals_, config)
    assert out.param_count == 40
    assert report.accepted_count == report.labels.accepted_count
    assert report.accepted_count >= config.min_cluster_size
    assert report.cascade.dot_products_computed == 8 * 7 // 2
    assert report.matrix.n == 8
    diffs, norms = preprocess(g, locals_)
    assert report.matrix == cosine_distances_naive(diffs, norms)
    assert report.scale.median_norm in norms.norms.tolist()


def test_deterministic_given_seed(rng):
    g = random_models(rng, 1, 25)[0]
    locals_ = random_models(rng, 6, 25)
    config = RoundConfig(n=6, p=25, noise_range=0.01, rng_seed=77)
    out1, _ = run_defense_round(g, locals_, config)
    out2, _ = run_defense_round(g, locals_, config)
    assert out1 == out2


def test_explicit_noise_source_advances(rng):
    g = random_models(rng, 1, 25)[0]
    locals_ = random_models(rng, 6, 25)
    config = RoundConfig(n=6, p=25, noise_range=0.01, rng_seed=77)
    noise = NoiseSource(77)
    out1, _ = run_defense_round(g, locals_, config, noise=noise)
    out2, _ = run_defense_round(g, locals_, config, noise=noise)
    assert out1 != out2  # stream advanced across rounds


def test_model_count_must_match_config(rng):
    g = random_models(rng, 1, 10)[0]
    with pytest.raises(ValueError):
        run_defense_round(g, random_models(rng, 3, 10), RoundConfig(n=4, p=10))


def test_all_noise_fallback_accepts_everyone(rng, monkeypatch):
    g = random_models(rng, 1, 12)[0]
    locals_ = random_models(rng, 5, 12)
    monkeypatch.setattr(
        pipeline_module, "cluster_and_label", lambda matrix, mcs: ClusterLabels((0,) * matrix.n)
    )
    config = RoundConfig(n=5, p=12, noise_range=0.0)
    out, report = run_defense_round(g, locals_, config)
    assert report.all_noise_fallback
    assert report.accepted_count == 5
    assert out.param_count == 12


def test_all_noise_without_fallback_raises(rng, monkeypatch):
    g = random_models(rng, 1, 12)[0]
    locals_ = random_models(rng, 5, 12)
    monkeypatch.setattr(
        pipeline_module, "cluster_and_label", lambda matrix, mcs: ClusterLabels((0,) * matrix.n)
    )
    config = RoundConfig(n=5, p=12, noise_range=0.0, accept_all_on_no_cluster=False)
    with pytest.raises(NoAcceptedModels):
        run_defense_round(g, locals_, config)


def test_identical_models_are_fixed_point(rng):
    m = random_models(rng, 1, 30)[0]
    locals_ = [ModelVector(m.params.copy()) for _ in range(3)]
    config = RoundConfig(n=3, p=30, noise_range=0.0)
    out, report = run_defense_round(m, locals_, config)
    assert out == m
    assert report.accepted_count == 3
