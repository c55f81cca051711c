"""Unit and property tests for the model math."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import gen
from statenet import core
from statenet.core import (LearningConfig, ModelParams, UpdateSource,
                           heaviside, init_params, reconstruct, rollback,
                           step, train_step, zero_state)
from statenet.errors import ConfigError, DimensionError, NumericError


def test_heaviside_is_strict():
    z = np.array([-1.0, -1e-300, 0.0, 1e-300, 2.0])
    assert heaviside(z).tolist() == [0, 0, 0, 1, 1]
    assert heaviside(z).dtype == np.uint8


def test_heaviside_rejects_non_finite():
    with pytest.raises(NumericError):
        heaviside(np.array([1.0, np.nan]))
    with pytest.raises(NumericError):
        heaviside(np.array([np.inf]))


def test_hamming_examples():
    u = np.array([1, 0, 1, 1], dtype=np.uint8)
    assert core.hamming(u, u) == 0
    assert core.hamming(u, 1 - u) == 4
    assert core.hamming(u, np.array([1, 0, 0, 1], dtype=np.uint8)) == 1


def test_zero_state():
    h = zero_state(5)
    assert h.dtype == np.uint8 and h.shape == (5,) and not h.any()


class TestInitParams:
    def test_shapes_and_bounds(self):
        params = init_params(3, 7, seed=99)
        assert params.w.shape == (7, 10)
        assert params.a.shape == (10,)
        assert params.b.shape == (7,)
        width = 1.0 / 10
        for arr in (params.w, params.a, params.b):
            assert np.all(np.abs(arr) < width)
            assert np.all(arr != 0.0)

    def test_deterministic(self):
        assert init_params(4, 6, seed=5).same_values(init_params(4, 6, seed=5))
        assert not init_params(4, 6, seed=5).same_values(init_params(4, 6, seed=6))

    def test_mirror_consistency(self):
        params = init_params(4, 6, seed=5)
        assert np.array_equal(params.wt, params.w.T)

    @pytest.mark.parametrize("m,n", [(0, 3), (3, 0), (-1, 2)])
    def test_rejects_bad_dims(self, m, n):
        with pytest.raises(ValueError):
            init_params(m, n, seed=1)


def test_step_zero_params_gives_zero_state():
    zero = ModelParams(w=np.zeros((4, 6)), a=np.zeros(6), b=np.zeros(4), m=2, n=4)
    x = np.array([1, 0], dtype=np.uint8)
    h = np.array([1, 1, 0, 1], dtype=np.uint8)
    assert not step(zero, x, h).any()


def test_step_hand_computed():
    # n=2, m=1: unit 0 sees 0.5(x) - 0.25(h1) + bias 0.1 -> 0.35 -> fires;
    # unit 1 sees -0.5(x) + 0.5(h1) - 0.1 -> -0.1 -> stays off.
    w = np.array([[0.5, 0.0, -0.25],
                  [-0.5, 0.0, 0.5]])
    params = ModelParams(w=w, a=np.zeros(3), b=np.array([0.1, -0.1]), m=1, n=2)
    x = np.array([1], dtype=np.uint8)
    h = np.array([0, 1], dtype=np.uint8)
    assert step(params, x, h).tolist() == [1, 0]


def test_step_validates_shapes():
    params = init_params(2, 3, seed=0)
    with pytest.raises(DimensionError):
        step(params, np.array([1, 0, 0], dtype=np.uint8), zero_state(3))
    with pytest.raises(DimensionError):
        step(params, np.array([1, 0], dtype=np.uint8), zero_state(4))


def test_as_bits_rejects_non_binary():
    with pytest.raises(ValueError):
        core.as_bits(np.array([0.0, 2.0]), 2)
    with pytest.raises(DimensionError):
        core.as_bits(np.array([0.0, 1.0]), 3)


def test_reconstruct_zero_weights_is_bias_threshold():
    params = ModelParams(w=np.zeros((3, 5)), a=np.array([0.1, -0.1, 0.0, 0.2, -0.2]),
                         b=np.zeros(3), m=2, n=3)
    x_rec, h_rec = reconstruct(params, np.array([1, 0, 1], dtype=np.uint8))
    assert x_rec.tolist() == [1, 0]
    assert h_rec.tolist() == [0, 1, 0]


def test_rollback_depth_validation():
    params = init_params(2, 3, seed=1)
    with pytest.raises(ValueError):
        rollback(params, zero_state(3), 0)


def test_rollback_zero_model_all_zero():
    params = ModelParams(w=np.zeros((3, 5)), a=np.zeros(5), b=np.zeros(3), m=2, n=3)
    out = rollback(params, np.array([1, 1, 1], dtype=np.uint8), 4)
    assert len(out) == 4
    for x_rec, h_rec in out:
        assert not x_rec.any() and not h_rec.any()


def test_rollback_chains_reconstruct():
    rng = np.random.default_rng(3)
    params = gen.rand_params(rng, 3, 5)
    h = gen.rand_bits(rng, 5)
    out = rollback(params, h, 3)
    cur = h
    for x_rec, h_rec in out:
        ex, eh = reconstruct(params, cur)
        assert np.array_equal(x_rec, ex) and np.array_equal(h_rec, eh)
        cur = eh


class TestTrainStep:
    def test_updates_are_batched_from_pre_update_values(self):
        # The reconstruction inside train_step must use the pre-update
        # parameters: trace errors equal reconstruct() on a frozen copy.
        rng = np.random.default_rng(11)
        params = gen.rand_params(rng, 3, 4)
        frozen = params.copy()
        cfg = LearningConfig(r_x=0.3, r_h=0.2, density=0.4)
        x, h = gen.rand_onehot(rng, 3), gen.rand_bits(rng, 4)
        trace = train_step(params, cfg, x, h)
        h_next = step(frozen, x, h)
        x_rec, h_rec = reconstruct(frozen, h_next)
        assert np.array_equal(trace.h_next, h_next)
        assert np.array_equal(trace.x_recon, x_rec)
        assert np.array_equal(trace.h_recon, h_rec)
        assert trace.input_err == core.hamming(x, x_rec)
        assert trace.state_err == core.hamming(h, h_rec)
        assert trace.density == float(h_next.sum()) / 4

    def test_perfect_reconstruction_leaves_weights_alone(self):
        # Build a case where the reconstruction is exact by hand: zero
        # weights keep every unit off, and the bias a spells out [x, h]
        # directly, so the error vector is zero and w and a must not move.
        m, n = 4, 5
        x = np.array([0, 1, 0, 0], dtype=np.uint8)
        h = np.array([1, 0, 1, 0, 0], dtype=np.uint8)
        a = np.where(np.concatenate([x, h]) > 0, 1.0, -1.0)
        params = ModelParams(w=np.zeros((n, m + n)), a=a,
                             b=np.full(n, -1.0), m=m, n=n)
        frozen = params.copy()
        cfg = LearningConfig(r_x=0.3, r_h=0.2, density=0.4)
        trace = train_step(params, cfg, x, h)
        assert trace.input_err == 0 and trace.state_err == 0
        assert np.array_equal(frozen.w, params.w)
        assert np.array_equal(frozen.a, params.a)
        # The bias rule still runs: every unit stayed off, so each gains
        # r_h * density in one add.
        assert np.array_equal(params.b, frozen.b + 0.2 * 0.4)

    def test_mirror_stays_in_sync(self):
        rng = np.random.default_rng(13)
        params = gen.rand_params(rng, 3, 6)
        cfg = LearningConfig(r_x=0.4, r_h=0.3, density=0.5)
        h = zero_state(6)
        for _ in range(25):
            x = gen.rand_onehot(rng, 3)
            trace = train_step(params, cfg, x, h)
            h = trace.h_next
        assert np.array_equal(params.wt, params.w.T)

    def test_bias_moves_toward_density_target(self):
        # Inactive units gain r_h * d, active units lose r_h * (1 - d),
        # each as a single IEEE add per step.
        params = gen.rand_params(np.random.default_rng(14), 2, 4)
        cfg = LearningConfig(r_x=0.1, r_h=0.25, density=0.2)
        b_before = params.b.copy()
        x = gen.rand_onehot(np.random.default_rng(15), 2)
        h = gen.rand_bits(np.random.default_rng(16), 4)
        trace = train_step(params, cfg, x, h)
        for i in range(4):
            if trace.h_next[i]:
                assert params.b[i] == b_before[i] + 0.25 * (0.2 - 1.0)
            else:
                assert params.b[i] == b_before[i] + 0.25 * 0.2


@given(st.integers(0, 2**32), st.integers(1, 5), st.integers(1, 6),
       st.integers(1, 30))
@settings(max_examples=60, deadline=None)
def test_fused_stream_equals_stepwise(seed, m, n, length):
    """The numba text path must be bit-identical to per-char train_step."""
    rng = np.random.default_rng(seed)
    params_fused = gen.rand_params(rng, m, n)
    params_steps = params_fused.copy()
    cfg = gen.rand_learning(rng)
    chars = rng.integers(0, m, size=length).astype(np.int16)

    h_fused = zero_state(n)
    se, ie, act = core.train_text_stream(params_fused, cfg, chars, h_fused)

    h = zero_state(n)
    for t, c in enumerate(chars):
        x = np.zeros(m, dtype=np.uint8)
        x[c] = 1
        trace = train_step(params_steps, cfg, x, h)
        h = trace.h_next
        assert se[t] == trace.state_err
        assert ie[t] == trace.input_err
        assert act[t] == int(trace.h_next.sum())

    assert np.array_equal(h_fused, h)
    assert params_fused.same_values(params_steps)
    assert np.array_equal(params_fused.wt, params_steps.wt)


@given(st.integers(0, 2**32), st.integers(1, 5), st.integers(1, 6),
       st.integers(1, 30))
@settings(max_examples=60, deadline=None)
def test_frozen_stream_equals_stepwise(seed, m, n, length):
    rng = np.random.default_rng(seed)
    params = gen.rand_params(rng, m, n)
    frozen = params.copy()
    chars = rng.integers(0, m, size=length).astype(np.int16)

    h_fast = zero_state(n)
    counts = np.zeros(n, dtype=np.int64)
    core.run_text_stream(params, chars, h_fast, counts)

    h = zero_state(n)
    expect_counts = np.zeros(n, dtype=np.int64)
    for c in chars:
        x = np.zeros(m, dtype=np.uint8)
        x[c] = 1
        h = step(params, x, h)
        expect_counts += h

    assert np.array_equal(h_fast, h)
    assert np.array_equal(counts, expect_counts)
    assert params.same_values(frozen)


def test_train_stream_rejects_out_of_range_chars():
    params = init_params(3, 4, seed=2)
    cfg = LearningConfig()
    with pytest.raises(DimensionError):
        core.train_text_stream(params, cfg, np.array([0, 3], dtype=np.int16),
                               zero_state(4))


def test_learning_config_validation():
    with pytest.raises(ConfigError):
        LearningConfig(r_x=-0.1).validate()
    with pytest.raises(ConfigError):
        LearningConfig(r_h=float("nan")).validate()
    with pytest.raises(ConfigError):
        LearningConfig(density=1.5).validate()
    LearningConfig().validate()


def test_update_source_parse():
    assert UpdateSource.parse("prev") is UpdateSource.PREV_STATE
    assert UpdateSource.parse("next") is UpdateSource.NEXT_STATE
    with pytest.raises(ConfigError):
        UpdateSource.parse("both")


def test_model_params_shape_checks():
    with pytest.raises(DimensionError):
        ModelParams(w=np.zeros((3, 4)), a=np.zeros(5), b=np.zeros(3), m=2, n=3)
    with pytest.raises(DimensionError):
        ModelParams(w=np.zeros((3, 5)), a=np.zeros(4), b=np.zeros(3), m=2, n=3)
