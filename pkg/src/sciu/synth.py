"""Synthetic classification datasets with two injected noise types.

Clean samples cluster around a random unit direction per class, scaled by a
per-sample intensity. Low-quality samples have their features replaced by
class-free Gaussian noise (the label is kept, so they are objectively
unusable yet still annotated). Mislabeled samples keep clean features but
carry a wrong label: either a low-intensity flip to class 0 (the "neutral"
analogue) or a uniformly random other class.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, Sample, QUALITY_CLEAN, QUALITY_LOW
from .errors import ValidationError


@dataclass
class SynthConfig:
    n_classes: int = 7
    dim: int = 16
    per_class: int = 700
    low_quality_rate: float = 0.15
    mislabel_rate: float = 0.15
    neutral_bias_fraction: float = 0.5
    intensity_low: float = 2.0
    intensity_high: float = 3.0
    cluster_spread: float = 0.2
    seed: int = 0

    def validate(self) -> None:
        if self.n_classes < 2:
            raise ValidationError("need at least 2 classes")
        if self.dim < 1 or self.per_class < 1:
            raise ValidationError("dim and per_class must be positive")
        for name in ("low_quality_rate", "mislabel_rate"):
            v = getattr(self, name)
            if not (0.0 <= v < 1.0):
                raise ValidationError(f"{name} must be in [0, 1)")
        if self.low_quality_rate + self.mislabel_rate >= 1.0:
            raise ValidationError("low_quality_rate + mislabel_rate must be < 1")
        if not (0.0 <= self.neutral_bias_fraction <= 1.0):
            raise ValidationError("neutral_bias_fraction must be in [0, 1]")
        if self.intensity_low <= 0 or self.intensity_high < self.intensity_low:
            raise ValidationError("intensity range must satisfy 0 < low <= high")
        if self.cluster_spread <= 0:
            raise ValidationError("cluster_spread must be positive")


def generate(config: SynthConfig) -> Dataset:
    config.validate()
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0x5711]))

    means = rng.standard_normal((config.n_classes, config.dim))
    means /= np.linalg.norm(means, axis=1, keepdims=True)

    # Low-quality corruption replaces the structured signal with isotropic
    # noise at the signal's own amplitude: same energy, zero class signal.
    mean_intensity_sq = (config.intensity_low**2
                         + config.intensity_low * config.intensity_high
                         + config.intensity_high**2) / 3.0
    global_std = np.sqrt(mean_intensity_sq + config.cluster_spread**2)

    samples = []
    next_id = 0
    for c in range(config.n_classes):
        for _ in range(config.per_class):
            intensity = rng.uniform(config.intensity_low, config.intensity_high)
            roll = rng.uniform()
            if roll < config.low_quality_rate:
                feats = rng.normal(0.0, global_std, config.dim)
                samples.append(
                    Sample(next_id, feats, label=c, true_label=c,
                           quality_flag=QUALITY_LOW)
                )
            elif roll < config.low_quality_rate + config.mislabel_rate:
                neutral = rng.uniform() < config.neutral_bias_fraction and c != 0
                if neutral:
                    intensity = config.intensity_low
                    wrong = 0
                else:
                    wrong = int(rng.integers(config.n_classes - 1))
                    if wrong >= c:
                        wrong += 1
                feats = means[c] * intensity + rng.normal(
                    0.0, config.cluster_spread, config.dim
                )
                samples.append(
                    Sample(next_id, feats, label=wrong, true_label=c,
                           quality_flag=QUALITY_CLEAN)
                )
            else:
                feats = means[c] * intensity + rng.normal(
                    0.0, config.cluster_spread, config.dim
                )
                samples.append(
                    Sample(next_id, feats, label=c, true_label=c,
                           quality_flag=QUALITY_CLEAN)
                )
            next_id += 1
    return Dataset(samples, n_classes=config.n_classes, dim=config.dim)
