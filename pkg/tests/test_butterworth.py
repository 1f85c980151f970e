import numpy as np
import pytest
from scipy.signal import butter, freqz

import reference as ref
from pupilclean.filters import (ButterworthParams, FilterError,
                                butterworth_filter, design_butterworth,
                                group_delay_samples, phase_response)
from pupilclean.model import Recording, Series


def sine_recording(freq_hz, fs=300.0, seconds=60.0, amplitude=1.0, offset=4.0):
    n = int(fs * seconds)
    ts = np.arange(n) * (1000.0 / fs)
    vals = offset + amplitude * np.sin(2 * np.pi * freq_hz * ts / 1000.0)
    s = Series(vals, np.ones(n, bool))
    return Recording(ts, fs, pupil_left=s, pupil_right=s)


def measured_gain_db(freq_hz, fs=300.0, cutoff=4.0):
    rec = sine_recording(freq_hz, fs=fs)
    out = butterworth_filter(rec, ButterworthParams(cutoff_hz=cutoff,
                                                    compensate_phase=False))
    y = out.pupil_left.values
    n = len(y)
    settled = slice(n // 4, 3 * n // 4)
    amp = (y[settled].max() - y[settled].min()) / 2.0
    return 20 * np.log10(amp / 1.0)


class TestDesign:
    def test_dc_gain_exactly_one(self):
        for fc, fs in [(4, 300), (1, 60), (10, 1000), (0.5, 120)]:
            c = design_butterworth(fc, fs)
            assert sum(c.b) / sum(c.a) == pytest.approx(1.0, abs=1e-9)

    def test_matches_scipy_butter(self):
        b_ref, a_ref = butter(3, 4.0, fs=300.0)
        c = design_butterworth(4.0, 300.0)
        np.testing.assert_allclose(c.b, b_ref, rtol=1e-9)
        np.testing.assert_allclose(c.a, a_ref, rtol=1e-9)

    def test_cutoff_attenuation_3db(self):
        c = design_butterworth(4.0, 300.0)
        w, h = freqz(c.b, c.a, worN=[2 * np.pi * 4.0 / 300.0])
        assert 20 * np.log10(abs(h[0])) == pytest.approx(-3.0103, abs=0.01)

    def test_magnitude_profile_in_passband_region(self):
        # |H|^2 = 1/(1+(f/fc)^6) within 0.2 dB where warping is negligible
        fc, fs = 4.0, 300.0
        c = design_butterworth(fc, fs)
        freqs = np.linspace(0.1, 3 * fc, 200)
        w = 2 * np.pi * freqs / fs
        _, h = freqz(c.b, c.a, worN=w)
        measured_db = 20 * np.log10(np.abs(h))
        analytic_db = -10 * np.log10(1 + (freqs / fc) ** 6)
        assert np.max(np.abs(measured_db - analytic_db)) < 0.2

    def test_magnitude_exact_on_prewarped_axis_to_half_nyquist(self):
        # the bilinear map preserves |H| exactly at the prewarped frequency
        fc, fs = 4.0, 300.0
        c = design_butterworth(fc, fs)
        freqs = np.linspace(0.1, fs / 4, 300)
        w = 2 * np.pi * freqs / fs
        _, h = freqz(c.b, c.a, worN=w)
        warped = (fs / np.pi) * np.tan(np.pi * freqs / fs)
        fc_warped = (fs / np.pi) * np.tan(np.pi * fc / fs)
        analytic = 1.0 / np.sqrt(1 + (warped / fc_warped) ** 6)
        np.testing.assert_allclose(np.abs(h), analytic, rtol=1e-9)

    def test_cutoff_at_nyquist_rejected(self):
        with pytest.raises(FilterError):
            design_butterworth(150.0, 300.0)
        with pytest.raises(FilterError):
            design_butterworth(-1.0, 300.0)


class TestPhaseResponse:
    def test_zero_at_dc(self):
        assert phase_response(0.0) == 0.0

    def test_minus_three_quarter_pi_at_cutoff(self):
        # denominator at w=1 is -1 + j, argument 3pi/4
        assert phase_response(1.0) == pytest.approx(-3 * np.pi / 4, abs=1e-12)

    def test_small_w_slope_is_dc_group_delay(self):
        w = 1e-4
        slope = (phase_response(w) - phase_response(0.0)) / w
        assert slope == pytest.approx(-2.0, abs=1e-6)

    def test_continuous_strictly_decreasing_to_limit(self):
        ws = np.linspace(0, 50, 5000)
        phases = np.array([phase_response(w) for w in ws])
        assert np.all(np.diff(phases) < 0)
        assert np.max(np.abs(np.diff(phases))) < 0.1  # no branch jumps
        assert phases[-1] > -3 * np.pi / 2
        assert phase_response(1e6) == pytest.approx(-3 * np.pi / 2, abs=1e-4)

    def test_negative_frequency_rejected(self):
        with pytest.raises(FilterError):
            phase_response(-0.1)


class TestMeasuredGain:
    def test_dc_input_passes_unchanged(self):
        n = 3000
        ts = np.arange(n) * (1000.0 / 300.0)
        s = Series(np.full(n, 3.0), np.ones(n, bool))
        rec = Recording(ts, 300.0, pupil_left=s, pupil_right=s)
        out = butterworth_filter(rec, ButterworthParams(compensate_phase=False))
        assert np.abs(out.pupil_left.values[500:] - 3.0).max() < 1e-6

    def test_gain_at_cutoff(self):
        assert measured_gain_db(4.0) == pytest.approx(-3.01, abs=0.2)

    def test_gain_at_four_times_cutoff(self):
        assert measured_gain_db(16.0) == pytest.approx(-36.1, abs=1.0)


class TestCompensation:
    def test_shift_count(self):
        assert group_delay_samples(4.0, 300.0) == 24

    def test_uncompensated_lag_24_samples(self):
        rec = sine_recording(0.5)
        out = butterworth_filter(rec, ButterworthParams(compensate_phase=False))
        lag = cross_correlation_lag(rec.pupil_left.values, out.pupil_left.values)
        assert abs(lag - 24) <= 1

    def test_compensated_lag_within_one_sample(self):
        rec = sine_recording(0.5)
        out = butterworth_filter(rec, ButterworthParams(compensate_phase=True))
        lag = cross_correlation_lag(rec.pupil_left.values, out.pupil_left.values)
        assert abs(lag) <= 1

    def test_tail_holds_last_value(self):
        rec = sine_recording(0.5, seconds=2.0)
        out = butterworth_filter(rec, ButterworthParams(compensate_phase=True))
        d = group_delay_samples(4.0, 300.0)
        tail = out.pupil_left.values[-d:]
        assert np.all(tail == tail[0])


class TestPreconditions:
    def test_gap_in_channel_rejected(self):
        rec = sine_recording(0.5, seconds=2.0)
        present = np.ones(len(rec), bool)
        present[100:110] = False
        broken = rec.with_series(pupil_left=Series(rec.pupil_left.values, present))
        with pytest.raises(FilterError, match="missing"):
            butterworth_filter(broken)

    def test_non_uniform_sampling_rejected(self):
        ts = np.array([0.0, 3.3, 6.7, 20.0, 23.3])
        s = Series(np.full(5, 3.0), np.ones(5, bool))
        rec = Recording(ts, 300.0, pupil_left=s)
        with pytest.raises(FilterError, match="non-uniform"):
            butterworth_filter(rec)

    def test_cutoff_above_nyquist_rejected(self):
        rec = sine_recording(0.5, seconds=1.0)
        with pytest.raises(FilterError):
            butterworth_filter(rec, ButterworthParams(cutoff_hz=200.0))


class TestAgainstReference:
    def test_difference_equation_loop(self, rng):
        n = 2000
        ts = np.arange(n) * (1000.0 / 300.0)
        vals = 3.0 + 0.5 * np.sin(2 * np.pi * 0.7 * ts / 1000.0) \
            + rng.normal(0, 0.05, n)
        vals = np.clip(vals, 0.5, None)
        s = Series(vals, np.ones(n, bool))
        rec = Recording(ts, 300.0, pupil_left=s, pupil_right=s)
        for compensate in (False, True):
            out = butterworth_filter(rec, ButterworthParams(compensate_phase=compensate))
            expected = ref.ref_butterworth(list(vals), 300.0, 4.0, compensate)
            np.testing.assert_allclose(out.pupil_left.values, expected, atol=1e-8)


def cross_correlation_lag(x, y, max_lag=200):
    x = x - x.mean()
    y = y - y.mean()
    lags = np.arange(-max_lag, max_lag + 1)
    scores = [np.dot(x[max(0, -k):len(x) - max(0, k)],
                     y[max(0, k):len(y) - max(0, -k)]) for k in lags]
    return int(lags[int(np.argmax(scores))])
