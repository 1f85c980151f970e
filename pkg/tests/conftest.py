import numpy as np
import pytest

from pupilclean.model import GazeSeries, Recording, Series


def make_series(values, present=None):
    values = np.asarray(values, dtype=float)
    if present is None:
        present = np.ones(len(values), dtype=bool)
    return Series(values, np.asarray(present, dtype=bool))


def random_recording(rng, n=1000, rate=300.0, with_gaze=True, miss_frac=0.1,
                     gap_runs=3):
    """Random binocular recording with scattered missing samples and a few
    multi-sample gaps (blink-like runs)."""
    ts = np.arange(n) * (1000.0 / rate)
    out = {}
    for name in ("pupil_left", "pupil_right"):
        vals = rng.uniform(2.0, 6.0, n)
        present = rng.random(n) > miss_frac
        out[name] = (vals, present)
    gaze = {}
    if with_gaze:
        for name in ("gaze_left", "gaze_right"):
            x = rng.uniform(0, 1920, n)
            y = rng.uniform(0, 1080, n)
            px = rng.random(n) > miss_frac
            py = rng.random(n) > miss_frac
            gaze[name] = (x, px, y, py)
    # plant contiguous gaps across all channels of one eye
    for _ in range(gap_runs):
        start = int(rng.integers(0, max(1, n - 80)))
        length = int(rng.integers(5, 80))
        eye = rng.choice(["left", "right"])
        pv, pp = out[f"pupil_{eye}"]
        pp = pp.copy()
        pp[start:start + length] = False
        out[f"pupil_{eye}"] = (pv, pp)
        if with_gaze:
            x, px, y, py = gaze[f"gaze_{eye}"]
            px, py = px.copy(), py.copy()
            px[start:start + length] = False
            py[start:start + length] = False
            gaze[f"gaze_{eye}"] = (x, px, y, py)
    kwargs = {name: Series(v, p) for name, (v, p) in out.items()}
    for name, (x, px, y, py) in gaze.items():
        kwargs[name] = GazeSeries(Series(x, px), Series(y, py))
    return Recording(timestamps_ms=ts, sample_rate_hz=rate, **kwargs)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def simple_recording(rng):
    return random_recording(rng, n=200)
