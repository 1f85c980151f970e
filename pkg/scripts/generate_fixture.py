"""Generate a synthetic binocular recording with planted blinks.

Writes a Tobii-style TSV export plus the equivalent compressed series
file, ready for the CLI or for uploading to the service.

Usage: python3 scripts/generate_fixture.py [--seconds 60] [--blinks 10]
       [--out-dir fixtures] [--seed 11]
"""

import argparse
from pathlib import Path

import numpy as np

from pupilclean import codec
from pupilclean.model import GazeSeries, Recording, Series


def build(seconds: float, blinks: int, seed: int, fs: float = 300.0) -> Recording:
    rng = np.random.default_rng(seed)
    n = int(fs * seconds)
    ts = np.arange(n) * (1000.0 / fs)
    baseline = 3.5 + 0.4 * np.sin(2 * np.pi * 0.2 * ts / 1000.0)
    noisy = baseline + rng.normal(0, 0.01, n)
    present = np.ones(n, bool)
    gap, shoulder = int(0.150 * fs), int(0.100 * fs)
    for b in range(blinks):
        mid = int((b + 1) * n / (blinks + 1))
        lo, hi = mid - gap // 2, mid + gap // 2
        present[lo:hi] = False
        droop = np.linspace(0, 1.5, shoulder)
        noisy[lo - shoulder:lo] -= droop
        noisy[hi:hi + shoulder] -= droop[::-1]

    def gaze():
        return GazeSeries(Series(rng.uniform(400, 1500, n), present.copy()),
                          Series(rng.uniform(200, 900, n), present.copy()))

    return Recording(ts, fs,
                     pupil_left=Series(noisy, present.copy()),
                     pupil_right=Series(noisy + 0.05, present.copy()),
                     gaze_left=gaze(), gaze_right=gaze())


def write_tsv(rec: Recording, path: Path) -> None:
    cols = ("RecordingTimestamp", "PupilLeft", "PupilRight",
            "GazePointLeftX", "GazePointLeftY",
            "GazePointRightX", "GazePointRightY",
            "ValidityLeft", "ValidityRight")
    with path.open("w") as fh:
        fh.write("\t".join(cols) + "\n")
        for i in range(len(rec)):
            s = rec.sample(i)
            left_ok = s.pupil_left is not None
            right_ok = s.pupil_right is not None
            row = [
                f"{rec.timestamps_ms[i] * 1000:.0f}",
                f"{s.pupil_left:.4f}" if left_ok else "-1",
                f"{s.pupil_right:.4f}" if right_ok else "-1",
                f"{s.gaze_left.x:.1f}" if s.gaze_left else "",
                f"{s.gaze_left.y:.1f}" if s.gaze_left else "",
                f"{s.gaze_right.x:.1f}" if s.gaze_right else "",
                f"{s.gaze_right.y:.1f}" if s.gaze_right else "",
                "0" if left_ok else "4",
                "0" if right_ok else "4",
            ]
            fh.write("\t".join(row) + "\n")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seconds", type=float, default=60.0)
    parser.add_argument("--blinks", type=int, default=10)
    parser.add_argument("--seed", type=int, default=11)
    parser.add_argument("--out-dir", type=Path, default=Path("fixtures"))
    args = parser.parse_args()

    args.out_dir.mkdir(parents=True, exist_ok=True)
    rec = build(args.seconds, args.blinks, args.seed)
    tsv = args.out_dir / "01@demo.tsv"
    cepw = args.out_dir / "01@demo.cepw"
    write_tsv(rec, tsv)
    cepw.write_bytes(codec.write_compressed(rec))
    print(f"wrote {tsv} and {cepw}: {len(rec)} samples, "
          f"{args.blinks} planted blinks")


if __name__ == "__main__":
    main()
