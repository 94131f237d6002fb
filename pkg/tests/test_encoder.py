import numpy as np
import pytest

from tde_snn.encoder import (
    EncoderState,
    Event,
    EventFormatError,
    accumulate_events,
    baseline_encode,
    direct_encode,
    init_encoder_state,
    read_events_bin,
    read_events_csv,
    se_encode,
    se_features,
    stem_forward,
    write_events_bin,
    write_events_csv,
)
from tde_snn.neuron import LifParams
from tde_snn.tensor import BatchNormParams, ConvSpec, tensor
from tde_snn import rng as rng_mod
from tde_snn.diversity import coverage, pattern_histogram


def identity_conv(channels):
    w = np.zeros((channels, channels, 1, 1))
    for c in range(channels):
        w[c, c, 0, 0] = 1.0
    return ConvSpec(channels, channels, 1, weights=w, bias=np.zeros(channels))


def state_with(convs, alpha, channels=2):
    return EncoderState(
        stem_conv=identity_conv(channels),
        stem_bn=BatchNormParams.identity(channels),
        per_step_convs=convs,
        alpha=list(alpha),
    )


class TestAccumulate:
    def test_empty_list_zero_frame(self):
        frame = accumulate_events([], 2, 2, (0, 10))
        np.testing.assert_array_equal(frame.data, np.zeros((1, 2, 2)))

    def test_signed_sum_example(self):
        events = [Event(1, 1, 5, 1), Event(1, 1, 6, 1), Event(0, 0, 7, -1)]
        frame = accumulate_events(events, 2, 2, (0, 10))
        assert frame.data[0, 0, 0] == -1.0
        assert frame.data[0, 1, 1] == 2.0
        assert frame.data[0, 0, 1] == 0.0 and frame.data[0, 1, 0] == 0.0

    def test_window_filters(self):
        events = [Event(0, 0, 100, 1)]
        frame = accumulate_events(events, 2, 2, (0, 10))
        np.testing.assert_array_equal(frame.data, 0.0)

    def test_out_of_range_names_index(self):
        with pytest.raises(ValueError, match="event 1"):
            accumulate_events([Event(0, 0, 1, 1), Event(5, 0, 1, 1)], 2, 2, (0, 10))

    def test_empty_window_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            accumulate_events([], 2, 2, (10, 10))

    def test_polarity_validated(self):
        with pytest.raises(ValueError, match="polarity"):
            Event(0, 0, 1, 2)


class TestEventFiles:
    def test_csv_round_trip(self, tmp_path):
        events = [Event(3, 1, 100, 1), Event(0, 2, 250, -1)]
        path = tmp_path / "ev.csv"
        write_events_csv(events, path)
        back = read_events_csv(path)
        assert back == events

    def test_bin_round_trip(self, tmp_path):
        events = [Event(65535, 0, 2**40, -1), Event(7, 9, 0, 1)]
        path = tmp_path / "ev.bin"
        write_events_bin(events, path)
        assert read_events_bin(path) == events

    def test_bin_record_is_13_bytes(self, tmp_path):
        path = tmp_path / "ev.bin"
        write_events_bin([Event(1, 2, 3, 1)], path)
        assert path.stat().st_size == 13

    def test_malformed_csv_names_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("0,0,1,1\n0,0,oops,1\n")
        with pytest.raises(EventFormatError, match="record 2"):
            read_events_csv(path)

    def test_csv_wrong_field_count(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("0,0,1\n")
        with pytest.raises(EventFormatError, match="4 fields"):
            read_events_csv(path)

    def test_truncated_bin_rejected(self, tmp_path):
        path = tmp_path / "bad.bin"
        path.write_bytes(b"\x00" * 14)
        with pytest.raises(EventFormatError, match="multiple of 13"):
            read_events_bin(path)


class TestDirectEncode:
    def test_t1_adds_leading_axis(self):
        img = tensor(np.random.default_rng(0).normal(size=(2, 3, 3)))
        out = direct_encode(img, 1)
        assert out.shape == (1, 2, 3, 3)
        np.testing.assert_array_equal(out.data[0], img.data)

    def test_slices_bit_equal(self):
        img = tensor(np.random.default_rng(1).normal(size=(1, 4, 4)))
        out = direct_encode(img, 4)
        for t in range(1, 4):
            np.testing.assert_array_equal(out.data[t], out.data[0])

    def test_time_variance_exactly_zero(self):
        img = tensor(np.random.default_rng(2).normal(size=(2, 5, 5)))
        out = direct_encode(img, 6)
        # replication: deviations from the first slice vanish bitwise
        centered = out.data - out.data[0]
        np.testing.assert_array_equal((centered**2).mean(axis=0), 0.0)

    def test_t_positive(self):
        with pytest.raises(ValueError, match="T >= 1"):
            direct_encode(tensor(np.zeros((1, 2, 2))), 0)


class TestSeFeatures:
    def test_alpha_one_equals_direct_encode(self):
        rng = np.random.default_rng(0)
        f = tensor(rng.normal(size=(2, 4, 4)))
        convs = [
            ConvSpec(2, 2, 3, padding=1, weights=rng.normal(size=(2, 2, 3, 3)))
            for _ in range(3)
        ]
        state = state_with(convs, [1.0, 1.0, 1.0])
        out = se_features(f, state)
        np.testing.assert_array_equal(out.data, direct_encode(f, 3).data)

    def test_alpha_zero_identity_conv_fixed_point(self):
        f = tensor(np.random.default_rng(1).normal(size=(2, 3, 3)))
        state = state_with([identity_conv(2) for _ in range(4)], [0.0] * 4)
        out = se_features(f, state)
        for t in range(4):
            np.testing.assert_allclose(out.data[t], f.data, rtol=1e-15)

    def test_half_alpha_identity_conv(self):
        f = tensor(np.random.default_rng(2).normal(size=(2, 3, 3)))
        state = state_with([identity_conv(2), identity_conv(2)], [0.5, 0.5])
        out = se_features(f, state)
        np.testing.assert_allclose(out.data[0], f.data, rtol=1e-15)
        np.testing.assert_allclose(out.data[1], f.data, rtol=1e-15)

    def test_shape_changing_conv_rejected(self):
        f = tensor(np.zeros((2, 4, 4)))
        bad = ConvSpec(2, 2, 3, padding=0, weights=np.zeros((2, 2, 3, 3)))
        state = state_with([bad], [0.5])
        with pytest.raises(ValueError, match="changed shape"):
            se_features(f, state)

    def test_no_blowup_with_normalized_weights(self):
        # L1-normalized kernels keep the recurrence inside the input's range
        rng = np.random.default_rng(3)
        convs = []
        for _ in range(6):
            w = rng.normal(size=(2, 2, 3, 3))
            w /= np.abs(w).sum(axis=(1, 2, 3), keepdims=True)
            convs.append(ConvSpec(2, 2, 3, padding=1, weights=w))
        state = state_with(convs, [0.3] * 6)
        f = tensor(rng.normal(size=(2, 5, 5)))
        out = se_features(f, state)
        bound = np.abs(f.data).max()
        assert np.abs(out.data).max() <= bound * (1 + 1e-12)

    def test_temporal_variance_positive_at_golden_seed(self):
        state = init_encoder_state(42, 1, 4, 4)
        img = tensor(rng_mod.stream(42, "input").normal(size=(1, 8, 8)))
        feats = se_features(stem_forward(img, state), state)
        assert feats.data.var(axis=0).max() > 0.0


class TestSeEncode:
    def test_zero_input_silent(self):
        state = init_encoder_state(0, 1, 3, 4)
        out = se_encode(tensor(np.zeros((1, 5, 5))), state, LifParams())
        np.testing.assert_array_equal(out.data, 0.0)

    def test_alpha_one_reduces_to_baseline(self):
        state = init_encoder_state(7, 1, 4, 4, alpha_init=1.0)
        img = tensor(rng_mod.stream(7, "input").normal(size=(1, 6, 6)))
        se = se_encode(img, state, LifParams())
        base = baseline_encode(img, state, LifParams())
        np.testing.assert_array_equal(se.data, base.data)

    def test_channel_mismatch_rejected(self):
        state = init_encoder_state(0, 2, 3, 2)
        with pytest.raises(ValueError, match="in_channels"):
            se_encode(tensor(np.zeros((1, 4, 4))), state, LifParams())

    def test_golden_coverage_exceeds_baseline(self):
        # frozen from the reference run at seed 42 (8x8 input, T=4, C=8)
        state = init_encoder_state(42, 1, 8, 4)
        img = tensor(rng_mod.stream(42, "input").normal(size=(1, 8, 8)))
        p = LifParams()
        cov_se = coverage(pattern_histogram(se_encode(img, state, p)))
        cov_base = coverage(pattern_histogram(baseline_encode(img, state, p)))
        assert (cov_se, cov_base) == (16, 7)
        assert cov_se > cov_base


class TestEncoderState:
    def test_lengths_validated(self):
        with pytest.raises(ValueError, match="share length"):
            EncoderState(
                stem_conv=identity_conv(1),
                stem_bn=BatchNormParams.identity(1),
                per_step_convs=[identity_conv(1)],
                alpha=[0.5, 0.5],
            )

    def test_alpha_range_validated(self):
        with pytest.raises(ValueError, match="outside"):
            EncoderState(
                stem_conv=identity_conv(1),
                stem_bn=BatchNormParams.identity(1),
                per_step_convs=[identity_conv(1)],
                alpha=[1.5],
            )

    def test_shared_step_weights(self):
        state = init_encoder_state(3, 1, 2, 3, per_step_weights=False)
        for spec in state.per_step_convs[1:]:
            np.testing.assert_array_equal(spec.weights, state.per_step_convs[0].weights)
