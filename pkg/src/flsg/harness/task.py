"""Synthetic two-class task with a feature-overwrite trigger backdoor.

Clean data are Gaussian blobs: the two classes differ on the leading "signal"
features and share zero mean everywhere else.  The trigger overwrites a fixed
set of trailing feature indices with fixed values; a poisoned sample is a
clean sample with the trigger applied and its label forced to the target.
Keeping the trigger off the signal features makes the backdoor orthogonal to
the main task, the regime the attack needs to stay stealthy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SyntheticTask:
    feature_dim: int
    class_means: np.ndarray  # shape (2, feature_dim)
    cov_scale: float
    trigger_indices: tuple
    trigger_values: tuple
    target_label: int

    def __post_init__(self):
        means = np.ascontiguousarray(self.class_means, dtype=np.float64)
        if means.shape != (2, self.feature_dim):
            raise ValueError(f"class_means must have shape (2, {self.feature_dim})")
        means.flags.writeable = False
        object.__setattr__(self, "class_means", means)
        idx = tuple(int(i) for i in self.trigger_indices)
        vals = tuple(float(v) for v in self.trigger_values)
        if len(idx) != len(set(idx)):
            raise ValueError("trigger indices must be distinct")
        if any(i < 0 or i >= self.feature_dim for i in idx):
            raise ValueError("trigger indices must lie within the feature dimension")
        if len(vals) != len(idx):
            raise ValueError("need one trigger value per trigger index")
        if self.target_label not in (0, 1):
            raise ValueError("target_label must be 0 or 1")
        if self.cov_scale <= 0:
            raise ValueError("cov_scale must be positive")
        object.__setattr__(self, "trigger_indices", idx)
        object.__setattr__(self, "trigger_values", vals)

    @property
    def class_count(self) -> int:
        return 2

    def sample(self, rng: np.random.Generator, count: int) -> tuple[np.ndarray, np.ndarray]:
        """Draw ``count`` labelled clean samples, classes balanced by coin flip."""
        labels = rng.integers(0, 2, size=count)
        features = self.class_means[labels] + self.cov_scale * rng.standard_normal(
            (count, self.feature_dim)
        )
        return features, labels

    def apply_trigger(self, features: np.ndarray) -> np.ndarray:
        triggered = np.array(features, dtype=np.float64, copy=True)
        triggered[:, list(self.trigger_indices)] = list(self.trigger_values)
        return triggered

    def poison(self, features: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        poisoned = self.apply_trigger(features)
        forced = np.full_like(labels, self.target_label)
        return poisoned, forced


def default_task(
    feature_dim: int = 32,
    signal_dims: int = 8,
    class_separation: float = 1.0,
    cov_scale: float = 0.6,
    trigger_width: int = 3,
    trigger_value: float = 4.0,
    target_label: int = 1,
) -> SyntheticTask:
    """Blobs at +/- class_separation on the leading features; trigger on the
    trailing ones, which carry no class signal."""
    if signal_dims + trigger_width > feature_dim:
        raise ValueError("signal and trigger features must not overlap")
    means = np.zeros((2, feature_dim))
    means[0, :signal_dims] = -class_separation
    means[1, :signal_dims] = +class_separation
    trigger_indices = tuple(range(feature_dim - trigger_width, feature_dim))
    return SyntheticTask(
        feature_dim=feature_dim,
        class_means=means,
        cov_scale=cov_scale,
        trigger_indices=trigger_indices,
        trigger_values=tuple(trigger_value for _ in trigger_indices),
        target_label=target_label,
    )
