import json

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from vlcnoise import (
    CaptureFormatError,
    ChannelParams,
    DataError,
    OokPattern,
    TimeSeries,
    apply_channel,
    generate_ook,
    load_capture,
    normalize_unit,
    save_capture,
)

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def ts(values, fs=1.0):
    return TimeSeries(values, fs)


class TestTimeSeries:
    def test_rejects_empty_nan_and_bad_rate(self):
        with pytest.raises(DataError, match="no samples"):
            ts([])
        with pytest.raises(DataError):
            ts([1.0, np.nan])
        with pytest.raises(DataError):
            ts([1.0], fs=0)

    def test_immutable(self):
        s = ts([1.0, 2.0])
        with pytest.raises(ValueError):
            s.samples[0] = 5.0
        src = np.array([1.0, 2.0])
        s = ts(src)
        src[0] = 9.0
        assert s.samples[0] == 1.0

    def test_times_are_index_over_rate(self):
        assert np.array_equal(ts([0, 0, 0, 0], fs=4.0).times(), [0, 0.25, 0.5, 0.75])


class TestCaptureIO:
    def test_csv_example(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text("sample_rate_hz=1000\n0.1\n0.2\n0.3\n")
        s = load_capture(p, "csv")
        assert s.sample_rate_hz == 1000.0
        assert s.samples.tolist() == [0.1, 0.2, 0.3]
        assert s.label is None

    def test_csv_label(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text("sample_rate_hz=2.5\nlabel=indoor garage\n1\n2\n")
        s = load_capture(p)
        assert s.label == "indoor garage"

    def test_empty_data_section(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text("sample_rate_hz=1000\n")
        with pytest.raises(CaptureFormatError, match="no samples"):
            load_capture(p)

    def test_bad_row_cites_position(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text("sample_rate_hz=1000\n0.1\nabc\n")
        with pytest.raises(CaptureFormatError, match=r"line 3 \(sample row 1\)"):
            load_capture(p)

    def test_missing_rate_is_an_error(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text("0.1\n0.2\n")
        with pytest.raises(CaptureFormatError, match="sample_rate_hz"):
            load_capture(p)
        j = tmp_path / "c.json"
        j.write_text(json.dumps({"samples": [1, 2]}))
        with pytest.raises(CaptureFormatError, match="sample_rate_hz"):
            load_capture(j)

    def test_json_bad_field(self, tmp_path):
        j = tmp_path / "c.json"
        j.write_text(json.dumps({"sample_rate_hz": 1, "samples": [1, "x"]}))
        with pytest.raises(CaptureFormatError, match=r"samples\[1\]"):
            load_capture(j)

    @pytest.mark.parametrize("fmt", ["csv", "json"])
    def test_round_trip_bit_exact(self, tmp_path, fmt):
        rng = np.random.default_rng(5)
        vals = np.concatenate([rng.standard_normal(200) * 10.0 ** rng.integers(-300, 300, 200),
                               [0.1, 1 / 3, 5e-324, -0.0, 1.7976931348623157e308]])
        s = TimeSeries(vals, 625e6, "x")
        p = save_capture(s, tmp_path / f"c.{fmt}")
        back = load_capture(p)
        assert back == s
        assert back.samples.tobytes() == s.samples.tobytes()

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="not found"):
            load_capture(tmp_path / "nope.csv")


class TestNormalize:
    def test_examples(self):
        assert normalize_unit(ts([2, 4, 6])).samples.tolist() == [0, 0.5, 1]
        assert normalize_unit(ts([0, 1])).samples.tolist() == [0, 1]
        with pytest.raises(DataError):
            normalize_unit(ts([5, 5, 5]))

    @given(arrays(np.float64, st.integers(2, 50), elements=finite))
    def test_idempotent_and_bounds(self, x):
        if x.min() == x.max():
            return
        once = normalize_unit(ts(x))
        assert once.samples.min() == 0.0 and once.samples.max() == 1.0
        assert np.array_equal(normalize_unit(once).samples, once.samples)
        # order preserved: sorting by input leaves the output non-decreasing
        assert np.all(np.diff(once.samples[np.argsort(x, kind="stable")]) >= 0)


class TestOok:
    def test_one_on_four_off_pattern_counts(self):
        s = generate_ook(OokPattern(1e-3, 4e-3, 1.0, 0.0, 2), 10_000)
        period = [1.0] * 10 + [0.0] * 40
        assert s.samples.tolist() == period * 2
        assert len(s) == 100

    def test_hand_countable(self):
        assert generate_ook(OokPattern(1, 1, 1, 0, 1), 2).samples.tolist() == [1, 1, 0, 0]

    def test_sub_sample_duration(self):
        with pytest.raises(DataError):
            generate_ook(OokPattern(1e-6, 4e-3, 1, 0, 1), 1000)

    def test_amplitude_order(self):
        with pytest.raises(DataError):
            OokPattern(1e-3, 4e-3, 0.2, 0.5)

    @given(st.floats(1e-3, 0.1), st.floats(1e-3, 0.1), st.integers(1, 5), st.floats(1e3, 5e4))
    def test_length_law(self, on, off, n, fs):
        p = OokPattern(on, off, 1.0, 0.0, n)
        n_on, n_off = int(np.floor(on * fs)), int(np.floor(off * fs))
        assert len(generate_ook(p, fs)) == n * (n_on + n_off)


class TestChannel:
    def test_identity(self):
        y = apply_channel(ts([1, 0, 0]), ChannelParams(), ts([0, 0, 0]))
        assert y.samples.tolist() == [1, 0, 0]

    def test_gain_and_offset(self):
        y = apply_channel(ts([1, 1]), ChannelParams(2.0, (0.5,), 0.1), ts([0, 0]))
        assert np.allclose(y.samples, [1.1, 1.1], rtol=0, atol=1e-15)

    def test_leading_alignment_matches_brute_force(self):
        x = [1.0, 0.0, 0.0, 0.0]
        h = [1.0, 1.0]
        brute = [sum(h[j] * x[i - j] for j in range(len(h)) if i - j >= 0) for i in range(len(x))]
        y = apply_channel(ts(x), ChannelParams(1.0, tuple(h), 0.0), ts([0] * 4))
        assert y.samples.tolist() == brute == [1, 1, 0, 0]

    def test_rate_mismatch(self):
        with pytest.raises(DataError, match="sample-rate"):
            apply_channel(ts([1, 2]), ChannelParams(), ts([0, 0], fs=2.0))

    def test_noise_too_short(self):
        with pytest.raises(DataError):
            apply_channel(ts([1, 2, 3]), ChannelParams(), ts([0, 0]))

    @given(arrays(np.float64, 16, elements=st.floats(-10, 10)),
           arrays(np.float64, 16, elements=st.floats(-10, 10)),
           st.floats(-3, 3), st.floats(-3, 3))
    def test_linear_in_x(self, x1, x2, a, b):
        ch = ChannelParams(1.7, (0.5, 0.25, -0.125), 0.0)
        zero = ts(np.zeros(16))
        lhs = apply_channel(ts(a * x1 + b * x2), ch, zero).samples
        rhs = a * apply_channel(ts(x1), ch, zero).samples + b * apply_channel(ts(x2), ch, zero).samples
        scale = max(1.0, np.abs(lhs).max())
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale
