import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_recording
from pupilclean.codec import (MAGIC, CodecError, read_compressed,
                              write_compressed)
from pupilclean.model import GazeSeries, Recording, Series


def assert_identical(a: Recording, b: Recording):
    np.testing.assert_array_equal(a.timestamps_ms, b.timestamps_ms)

    def eq(sa, sb):
        assert (sa is None) == (sb is None)
        if sa is not None:
            np.testing.assert_array_equal(sa.present, sb.present)
            np.testing.assert_array_equal(sa.values[sa.present], sb.values[sb.present])

    eq(a.pupil_left, b.pupil_left)
    eq(a.pupil_right, b.pupil_right)
    for name in ("gaze_left", "gaze_right"):
        ga, gb = getattr(a, name), getattr(b, name)
        assert (ga is None) == (gb is None)
        if ga is not None:
            eq(ga.x, gb.x)
            eq(ga.y, gb.y)


class TestRoundTrip:
    def test_full_recording(self, rng):
        rec = random_recording(rng, n=500)
        assert_identical(rec, read_compressed(write_compressed(rec)))

    def test_monocular_no_gaze(self):
        rec = Recording(np.array([0.0, 5.0, 10.0]), 200.0,
                        pupil_left=Series(np.array([3.0, 3.1, 3.2]),
                                          np.array([True, False, True])))
        out = read_compressed(write_compressed(rec))
        assert out.pupil_right is None
        assert out.gaze_left is None
        assert out.pupil_left.present.tolist() == [True, False, True]

    def test_100_random_recordings_bit_exact(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            rec = random_recording(rng, n=int(rng.integers(2, 120)),
                                   with_gaze=bool(rng.integers(0, 2)))
            assert_identical(rec, read_compressed(write_compressed(rec)))

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**31), n=st.integers(1, 60),
           with_gaze=st.booleans())
    def test_property_round_trip(self, seed, n, with_gaze):
        rng = np.random.default_rng(seed)
        rec = random_recording(rng, n=n, with_gaze=with_gaze, gap_runs=1)
        assert_identical(rec, read_compressed(write_compressed(rec)))


class TestMalformed:
    def good(self, rng):
        return write_compressed(random_recording(rng, n=20))

    def test_bad_magic(self, rng):
        data = b"XXXX" + self.good(rng)[4:]
        with pytest.raises(CodecError, match="magic"):
            read_compressed(data)

    def test_bad_version(self, rng):
        data = bytearray(self.good(rng))
        struct.pack_into("<I", data, 4, 99)
        with pytest.raises(CodecError, match="version"):
            read_compressed(bytes(data))

    def test_truncated_header(self):
        with pytest.raises(CodecError, match="truncated"):
            read_compressed(MAGIC + b"\x01")

    def test_truncated_arrays(self, rng):
        data = self.good(rng)
        with pytest.raises(CodecError, match="count mismatch"):
            read_compressed(data[:-8])

    def test_count_mismatch(self, rng):
        data = bytearray(self.good(rng))
        struct.pack_into("<Q", data, 12, 10_000)
        with pytest.raises(CodecError, match="count mismatch"):
            read_compressed(bytes(data))

    def test_unknown_channel_bits(self, rng):
        data = bytearray(self.good(rng))
        struct.pack_into("<I", data, 8, 1 << 7)
        with pytest.raises(CodecError, match="channel bits"):
            read_compressed(bytes(data))

    def test_distinct_errors(self, rng):
        data = self.good(rng)
        corpus = {
            "magic": b"ABCD" + data[4:],
            "trunc": data[: len(data) // 2],
            "count": None,
        }
        broken = bytearray(data)
        struct.pack_into("<Q", broken, 12, 999)
        corpus["count"] = bytes(broken)
        messages = set()
        for payload in corpus.values():
            with pytest.raises(CodecError) as e:
                read_compressed(payload)
            messages.add(str(e.value))
        assert len(messages) == 3


class TestSize:
    def test_compressed_much_smaller_than_wide_tsv(self):
        # 10 min at 300 Hz, 4 channels: about 8B x 5 series x 180k samples,
        # against a synthetic 20-column export of the same session.
        rng = np.random.default_rng(1)
        n = 180_000
        ts = np.arange(n) * (1000.0 / 300.0)
        vals = rng.uniform(2, 6, n)
        present = np.ones(n, bool)
        s = Series(vals, present)
        g = GazeSeries(Series(rng.uniform(0, 1920, n), present),
                       Series(rng.uniform(0, 1080, n), present))
        rec = Recording(ts, 300.0, s, s, g, g)
        blob = write_compressed(rec)
        expected = 20 + 8 * 7 * n  # header + timestamp + 6 scalar arrays
        assert len(blob) == expected

        header = "\t".join(f"col{i}" for i in range(20))
        row = "\t".join(["123456.789"] * 20)
        tsv_size = len(header) + 1 + n * (len(row) + 1)
        assert len(blob) < tsv_size
