"""The model: binary state update, reconstruction, and the learning rules.

The model is a single real-valued weight matrix of shape (n, m+n) plus an
input-bias vector (length m+n) and a hidden-bias vector (length n). Inputs
and states are binary vectors (represented as uint8 numpy arrays with values
0/1). One time step maps the concatenated [input, state] vector through the
matrix and a strict Heaviside threshold to the next state; the transposed
matrix maps the next state back to a reconstruction of [input, state], and
the element-wise reconstruction error drives all weight learning. A separate
density rule nudges each hidden bias toward a target average activation
rate.

All arithmetic is 64-bit; accumulations run in ascending index order so
results are reproducible bit-for-bit (see `kernels`).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConfigError, DimensionError, NumericError
from .rng import uniform_open_symmetric


class UpdateSource(enum.Enum):
    """Which state vector scales the rows of the weight update.

    PREV_STATE uses the state the step started from (the default rule).
    NEXT_STATE uses the freshly computed state instead; exposed for ablation
    since that variant is the one consistent with reconstruction flowing
    through the next state.
    """

    PREV_STATE = "prev"
    NEXT_STATE = "next"

    @classmethod
    def parse(cls, text: str) -> "UpdateSource":
        for member in cls:
            if member.value == text:
                return member
        raise ConfigError(f"unknown update source {text!r} (use 'prev' or 'next')")


@dataclass
class LearningConfig:
    """Learning rates and density target.

    `r_x` applies to the input part of the reconstruction error, `r_h` to the
    state part, `density` is the target average activation rate per hidden
    unit. Scalars here; they are expanded to per-element vectors where the
    update rules consume them.
    """

    r_x: float = 0.01
    r_h: float = 1e-6
    density: float = 0.1
    update_source: UpdateSource = UpdateSource.PREV_STATE

    def validate(self) -> None:
        if not (self.r_x >= 0.0 and np.isfinite(self.r_x)):
            raise ConfigError(f"r_x must be finite and >= 0, got {self.r_x}")
        if not (self.r_h >= 0.0 and np.isfinite(self.r_h)):
            raise ConfigError(f"r_h must be finite and >= 0, got {self.r_h}")
        if not (0.0 <= self.density <= 1.0):
            raise ConfigError(f"density must be in [0, 1], got {self.density}")

    def rate_vector(self, m: int, n: int) -> np.ndarray:
        """Per-column learning rates over the concatenated [input, state] axis."""
        r = np.empty(m + n, dtype=np.float64)
        r[:m] = self.r_x
        r[m:] = self.r_h
        return r

    def state_rate_vector(self, n: int) -> np.ndarray:
        return np.full(n, self.r_h, dtype=np.float64)

    def density_vector(self, n: int) -> np.ndarray:
        return np.full(n, self.density, dtype=np.float64)


@dataclass
class ModelParams:
    """Weights and biases, with a transposed mirror for fast forward passes.

    `w` is canonical, shape (n, m+n); `wt` always equals `w.T` and exists so
    both matrix orientations can be read contiguously. Mutate only through
    `train_step`/`train_text_stream`, which keep the mirror in sync.
    """

    w: np.ndarray
    a: np.ndarray
    b: np.ndarray
    m: int
    n: int
    wt: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.w.shape != (self.n, self.m + self.n):
            raise DimensionError(
                f"w has shape {self.w.shape}, expected {(self.n, self.m + self.n)}")
        if self.a.shape != (self.m + self.n,):
            raise DimensionError(f"a has shape {self.a.shape}, expected ({self.m + self.n},)")
        if self.b.shape != (self.n,):
            raise DimensionError(f"b has shape {self.b.shape}, expected ({self.n},)")
        if self.wt is None:
            # .copy() and not ascontiguousarray: for n=1 the transpose is
            # already "contiguous" and would alias w, double-applying every
            # mirrored update.
            self.wt = self.w.T.copy()

    def validate_finite(self) -> None:
        if not (np.isfinite(self.w).all() and np.isfinite(self.a).all()
                and np.isfinite(self.b).all()):
            raise NumericError("model parameters contain non-finite values")

    def copy(self) -> "ModelParams":
        return ModelParams(w=self.w.copy(), a=self.a.copy(), b=self.b.copy(),
                           m=self.m, n=self.n, wt=self.wt.copy())

    def same_values(self, other: "ModelParams") -> bool:
        return (self.m == other.m and self.n == other.n
                and np.array_equal(self.w, other.w)
                and np.array_equal(self.a, other.a)
                and np.array_equal(self.b, other.b))


@dataclass
class StepTrace:
    """Per-step diagnostics from one training step."""

    h_next: np.ndarray
    x_recon: np.ndarray
    h_recon: np.ndarray
    state_err: int
    input_err: int
    density: float


def zero_state(n: int) -> np.ndarray:
    """The model's initial state: all zeros."""
    return np.zeros(n, dtype=np.uint8)


def as_bits(vec, length: int, name: str = "vector") -> np.ndarray:
    """Validate and coerce a 0/1 sequence into a uint8 array of `length`."""
    arr = np.asarray(vec)
    if arr.ndim != 1 or arr.shape[0] != length:
        raise DimensionError(f"{name} has shape {arr.shape}, expected ({length},)")
    as_f = arr.astype(np.float64)
    if not np.all((as_f == 0.0) | (as_f == 1.0)):
        raise ValueError(f"{name} must contain only 0 and 1")
    return arr.astype(np.uint8)


def hamming(u: np.ndarray, v: np.ndarray) -> int:
    """Number of positions where two equal-length binary vectors differ."""
    if u.shape != v.shape:
        raise DimensionError(f"hamming: shapes {u.shape} vs {v.shape}")
    return int(np.count_nonzero(u != v))


def heaviside(pre_activation: np.ndarray) -> np.ndarray:
    """Strict step function: 1 where the input is > 0, else 0 (0 maps to 0)."""
    z = np.asarray(pre_activation, dtype=np.float64)
    if not np.isfinite(z).all():
        raise NumericError("heaviside input contains non-finite values")
    return (z > 0.0).astype(np.uint8)


def init_params(m: int, n: int, seed: int) -> ModelParams:
    """Fresh parameters with every entry uniform in (-1/(m+n), +1/(m+n)).

    Entries come from one splitmix64 stream seeded with `seed`, in the order
    w (row-major), then a, then b, so a given seed yields bit-identical
    parameters everywhere.
    """
    if m < 1 or n < 1:
        raise ValueError(f"m and n must be >= 1, got m={m} n={n}")
    width = 1.0 / (m + n)
    total = n * (m + n) + (m + n) + n
    vals = uniform_open_symmetric(seed, total, width)
    w = vals[:n * (m + n)].reshape(n, m + n).copy()
    a = vals[n * (m + n):n * (m + n) + m + n].copy()
    b = vals[n * (m + n) + m + n:].copy()
    return ModelParams(w=w, a=a, b=b, m=m, n=n)


def _active_input_state(x: np.ndarray, h: np.ndarray, m: int) -> np.ndarray:
    """Ascending active positions of the concatenated [x, h] vector."""
    xi = np.flatnonzero(x)
    hi = np.flatnonzero(h) + m
    return np.concatenate([xi, hi]).astype(np.int64)


def step(params: ModelParams, x, h) -> np.ndarray:
    """Advance the state by one input: threshold(W [x,h] + b).

    Pure: parameters are not modified and the result depends only on the
    arguments.
    """
    xb = as_bits(x, params.m, "x")
    hb = as_bits(h, params.n, "h")
    z = np.zeros(params.n, dtype=np.float64)
    kernels.accum_rows(params.wt, _active_input_state(xb, hb, params.m), z)
    z += params.b
    return heaviside(z)


def reconstruct(params: ModelParams, h_next) -> tuple[np.ndarray, np.ndarray]:
    """Estimate the previous [input, state] from a state: threshold(W' h + a).

    Returns the estimate split at the input/state boundary. Pure.
    """
    hb = as_bits(h_next, params.n, "h_next")
    y = np.zeros(params.m + params.n, dtype=np.float64)
    kernels.accum_rows(params.w, np.flatnonzero(hb).astype(np.int64), y)
    y += params.a
    bits = heaviside(y)
    return bits[:params.m], bits[params.m:]


def rollback(params: ModelParams, h_next, k: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Chain k reconstructions backwards from a state.

    Pair 1 reconstructs from `h_next`; each later pair reconstructs from the
    state estimate of the previous pair. Parameters are not modified.
    """
    if k < 1:
        raise ValueError(f"rollback depth must be >= 1, got {k}")
    pairs = []
    h = h_next
    for _ in range(k):
        x_rec, h_rec = reconstruct(params, h)
        pairs.append((x_rec, h_rec))
        h = h_rec
    return pairs


def train_step(params: ModelParams, cfg: LearningConfig, x, h) -> StepTrace:
    """One learning step: advance, reconstruct, then update in place.

    The next state and the reconstruction are both computed from the
    pre-update parameters; the weight, input-bias, and hidden-bias updates
    are then applied as one batch derived from those pre-update values. The
    returned trace carries the pre-update reconstruction errors.
    """
    cfg.validate()
    xb = as_bits(x, params.m, "x")
    hb = as_bits(h, params.n, "h")
    m, n = params.m, params.n

    h_next = step(params, xb, hb)
    x_rec, h_rec = reconstruct(params, h_next)

    v = np.concatenate([xb, hb]).astype(np.int64)
    recon = np.concatenate([x_rec, h_rec]).astype(np.int64)
    err = v - recon
    cols = np.flatnonzero(err).astype(np.int64)
    delta = np.zeros(m + n, dtype=np.float64)
    rvec = cfg.rate_vector(m, n)
    delta[cols] = rvec[cols] * err[cols].astype(np.float64)

    source = h_next if cfg.update_source is UpdateSource.NEXT_STATE else hb
    rows = np.flatnonzero(source).astype(np.int64)
    kernels.block_update(params.w, params.wt, rows, cols, delta)
    params.a[cols] += delta[cols]
    params.b += cfg.state_rate_vector(n) * (cfg.density_vector(n) - h_next.astype(np.float64))

    if not (np.isfinite(params.a).all() and np.isfinite(params.b).all()
            and np.isfinite(delta).all()):
        raise NumericError("parameters became non-finite during a training step")

    return StepTrace(
        h_next=h_next,
        x_recon=x_rec,
        h_recon=h_rec,
        state_err=hamming(hb, h_rec),
        input_err=hamming(xb, x_rec),
        density=float(np.count_nonzero(h_next)) / n,
    )


def train_text_stream(params: ModelParams, cfg: LearningConfig, chars: np.ndarray,
                      h: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Train over a sequence of one-hot input indices, mutating `params` and `h`.

    Fused fast path, bit-identical to calling `train_step` once per character
    with the corresponding one-hot input. Returns per-step arrays
    (state_err, input_err, active_count).
    """
    cfg.validate()
    m, n = params.m, params.n
    seq = np.ascontiguousarray(chars, dtype=np.int64)
    if seq.size and (seq.min() < 0 or seq.max() >= m):
        raise DimensionError("character index out of range for input dimension")
    if h.shape != (n,):
        raise DimensionError(f"state has shape {h.shape}, expected ({n},)")
    state_err = np.empty(seq.size, dtype=np.int64)
    input_err = np.empty(seq.size, dtype=np.int64)
    active = np.empty(seq.size, dtype=np.int64)
    bad = kernels.train_chars(
        params.w, params.wt, params.a, params.b,
        cfg.rate_vector(m, n), cfg.state_rate_vector(n), cfg.density_vector(n),
        m, seq, h, cfg.update_source is UpdateSource.NEXT_STATE,
        state_err, input_err, active)
    if bad != kernels.NO_ERROR:
        raise NumericError(f"non-finite pre-activation at stream step {bad}")
    return state_err, input_err, active


def run_text_stream(params: ModelParams, chars: np.ndarray, h: np.ndarray,
                    counts: np.ndarray) -> None:
    """Frozen forward pass over one-hot input indices; no learning.

    Mutates the state `h` in place and adds each post-character state into
    `counts` (int64). Parameters are never written.
    """
    m, n = params.m, params.n
    seq = np.ascontiguousarray(chars, dtype=np.int64)
    if seq.size and (seq.min() < 0 or seq.max() >= m):
        raise DimensionError("character index out of range for input dimension")
    bad = kernels.run_chars(params.wt, params.b, m, seq, h, counts)
    if bad != kernels.NO_ERROR:
        raise NumericError(f"non-finite pre-activation at stream step {bad}")
