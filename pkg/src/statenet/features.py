"""Sample featurization: model state averages, final states, and the
character-frequency baseline.

The model featurizer streams samples through a frozen model in order. The
state starts at zero at the beginning of the stream and is deliberately
never reset between samples, so the feature rows depend on the processing
order; callers fix and record that order.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import core
from .errors import ConfigError, DataError, DimensionError


class FeatureMode(enum.Enum):
    AVERAGE_STATE = "average"
    FINAL_STATE = "final"

    @classmethod
    def parse(cls, text: str) -> "FeatureMode":
        for member in cls:
            if member.value == text:
                return member
        raise ConfigError(f"unknown feature mode {text!r} (use 'average' or 'final')")


@dataclass
class FeatureMatrix:
    """Real-valued feature rows in [0, 1] with aligned topic labels."""

    values: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        if self.values.ndim != 2:
            raise DimensionError(f"feature values must be 2-D, got {self.values.shape}")
        if self.labels.shape != (self.values.shape[0],):
            raise DimensionError(
                f"{self.labels.shape[0] if self.labels.ndim == 1 else self.labels.shape} "
                f"labels for {self.values.shape[0]} rows")

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def validate_range(self) -> None:
        if self.values.size == 0:
            return
        lo, hi = self.values.min(), self.values.max()
        if not (lo >= 0.0 and hi <= 1.0):
            raise DataError("feature values outside [0, 1] or non-finite")


def featurize_stream(params: core.ModelParams, samples, mode: FeatureMode) -> FeatureMatrix:
    """Feature rows for `samples`, streamed through a frozen model in order.

    AVERAGE_STATE rows are the per-unit fraction of characters for which the
    unit was active within the sample; FINAL_STATE rows are the state right
    after the sample's last character. Weights and biases are never modified.
    """
    n = params.n
    samples = list(samples)
    values = np.zeros((len(samples), n), dtype=np.float64)
    labels = np.empty(len(samples), dtype=np.int64)
    h = core.zero_state(n)
    counts = np.zeros(n, dtype=np.int64)
    for r, sample in enumerate(samples):
        if len(sample.chars) == 0:
            raise DataError(f"sample {r} is empty; cannot featurize")
        counts[:] = 0
        core.run_text_stream(params, sample.chars, h, counts)
        if mode is FeatureMode.AVERAGE_STATE:
            values[r] = counts / len(sample.chars)
        else:
            values[r] = h
        labels[r] = sample.label
    out = FeatureMatrix(values=values, labels=labels)
    out.validate_range()
    return out


def baseline_featurize(samples, vocab_size: int = 96) -> FeatureMatrix:
    """Character-frequency rows: element c = count of index c / sample length."""
    samples = list(samples)
    values = np.zeros((len(samples), vocab_size), dtype=np.float64)
    labels = np.empty(len(samples), dtype=np.int64)
    for r, sample in enumerate(samples):
        if len(sample.chars) == 0:
            raise DataError(f"sample {r} is empty; cannot featurize")
        counts = np.bincount(sample.chars.astype(np.int64), minlength=vocab_size)
        if counts.shape[0] > vocab_size:
            raise DimensionError(f"sample {r} has character indices >= {vocab_size}")
        values[r] = counts / len(sample.chars)
        labels[r] = sample.label
    out = FeatureMatrix(values=values, labels=labels)
    out.validate_range()
    return out
