import json

import numpy as np
import pytest
from click.testing import CliRunner

from conftest import random_recording
from pupilclean import codec
from pupilclean.cli import EXIT_PROCESSING, EXIT_VALIDATION, main

CLEAN_CHAIN = {"filters": [{"kind": "pupil_substitution"},
                           {"kind": "standard_deviation"}]}
ERROR_CHAIN = {"filters": [{"kind": "butterworth"}]}


@pytest.fixture
def runner():
    return CliRunner()


def write_chain(tmp_path, doc, name="chain.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def write_recording(tmp_path, name="01@s.cepw", seed=3, n=600):
    rec = random_recording(np.random.default_rng(seed), n=n,
                           miss_frac=0.02, gap_runs=0)
    p = tmp_path / name
    p.write_bytes(codec.write_compressed(rec))
    return p, rec


class TestClean:
    def test_success_writes_outputs_and_summary(self, runner, tmp_path):
        chain = write_chain(tmp_path, CLEAN_CHAIN)
        a, _ = write_recording(tmp_path, "01@s.cepw", seed=1)
        b, _ = write_recording(tmp_path, "02@s.cepw", seed=2)
        out_dir = tmp_path / "out"
        result = runner.invoke(main, ["clean", str(a), str(b),
                                      "--chain", chain,
                                      "--output-dir", str(out_dir)])
        assert result.exit_code == 0
        assert (out_dir / "01@s.cleaned.cepw").exists()
        assert (out_dir / "02@s.cleaned.cepw").exists()
        lines = result.stdout.strip().splitlines()
        assert lines[0].startswith("input\toutput")
        assert len(lines) == 3

    def test_error_chain_exits_3_before_touching_files(self, runner, tmp_path):
        chain = write_chain(tmp_path, ERROR_CHAIN)
        a, _ = write_recording(tmp_path)
        out_dir = tmp_path / "out"
        result = runner.invoke(main, ["clean", str(a), "--chain", chain,
                                      "--output-dir", str(out_dir)])
        assert result.exit_code == EXIT_VALIDATION
        assert "error" in result.stderr
        assert not out_dir.exists() or not list(out_dir.iterdir())

    def test_processing_failure_exits_4_but_finishes_batch(self, runner, tmp_path):
        chain = write_chain(tmp_path, CLEAN_CHAIN)
        good, _ = write_recording(tmp_path)
        bad = tmp_path / "bad.cepw"
        bad.write_bytes(b"CEPWgarbage")
        out_dir = tmp_path / "out"
        result = runner.invoke(main, ["clean", str(good), str(bad),
                                      "--chain", chain,
                                      "--output-dir", str(out_dir)])
        assert result.exit_code == EXIT_PROCESSING
        assert (out_dir / "01@s.cleaned.cepw").exists()
        assert "1 of 2 files failed" in result.stderr

    def test_missing_input_is_usage_error(self, runner, tmp_path):
        chain = write_chain(tmp_path, CLEAN_CHAIN)
        result = runner.invoke(main, ["clean", str(tmp_path / "none.cepw"),
                                      "--chain", chain,
                                      "--output-dir", str(tmp_path / "out")])
        assert result.exit_code == 2

    def test_unreadable_chain_exits_3(self, runner, tmp_path):
        bad = tmp_path / "chain.json"
        bad.write_text("{nope")
        a, _ = write_recording(tmp_path)
        result = runner.invoke(main, ["clean", str(a), "--chain", str(bad),
                                      "--output-dir", str(tmp_path / "out")])
        assert result.exit_code == EXIT_VALIDATION

    def test_deterministic_across_worker_counts(self, runner, tmp_path):
        chain = write_chain(tmp_path, CLEAN_CHAIN)
        paths = [str(write_recording(tmp_path, f"{i:02d}@s.cepw", seed=i)[0])
                 for i in range(4)]
        for workers, out in (("1", "out1"), ("3", "out3")):
            result = runner.invoke(main, ["clean", *paths, "--chain", chain,
                                          "--output-dir", str(tmp_path / out),
                                          "--workers", workers])
            assert result.exit_code == 0
        for i in range(4):
            name = f"{i:02d}@s.cleaned.cepw"
            assert (tmp_path / "out1" / name).read_bytes() == \
                (tmp_path / "out3" / name).read_bytes()

    def test_tsv_input_with_mapping(self, runner, tmp_path):
        chain = write_chain(tmp_path, {"filters": [{"kind": "pupil_substitution"}]})
        tsv = tmp_path / "01@s.tsv"
        tsv.write_text("time_us\tleft_mm\tright_mm\n0\t3.0\t3.1\n3333\t3.0\t3.1\n")
        mapping = tmp_path / "map.json"
        mapping.write_text(json.dumps({"timestamp_column": "time_us",
                                       "pupil_left_column": "left_mm",
                                       "pupil_right_column": "right_mm",
                                       "gaze_left_x_column": None,
                                       "gaze_left_y_column": None,
                                       "gaze_right_x_column": None,
                                       "gaze_right_y_column": None,
                                       "validity_left_column": None,
                                       "validity_right_column": None}))
        out_dir = tmp_path / "out"
        result = runner.invoke(main, ["clean", str(tsv), "--chain", chain,
                                      "--mapping", str(mapping),
                                      "--output-dir", str(out_dir)])
        assert result.exit_code == 0
        assert (out_dir / "01@s.cleaned.cepw").exists()


class TestValidateChain:
    def test_clean_chain_reports_ok(self, runner, tmp_path):
        chain = write_chain(tmp_path, CLEAN_CHAIN)
        result = runner.invoke(main, ["validate-chain", chain])
        assert result.exit_code == 0
        assert "ok: no findings" in result.stdout

    def test_warnings_shown_without_failing(self, runner, tmp_path):
        chain = write_chain(tmp_path, {"filters": [{"kind": "linear_interpolation"}]})
        result = runner.invoke(main, ["validate-chain", chain])
        assert result.exit_code == 0
        assert "warning" in result.stdout

    def test_errors_exit_3(self, runner, tmp_path):
        chain = write_chain(tmp_path, ERROR_CHAIN)
        result = runner.invoke(main, ["validate-chain", chain])
        assert result.exit_code == EXIT_VALIDATION
        assert "error" in result.stdout


class TestAverage:
    def test_prints_mean(self, runner, tmp_path):
        p, rec = write_recording(tmp_path)
        result = runner.invoke(main, ["average", str(p), "--mode", "left"])
        assert result.exit_code == 0
        s = rec.pupil_left
        assert float(result.stdout) == pytest.approx(
            float(np.mean(s.values[s.present])), abs=1e-6)

    def test_bad_file_exits_4(self, runner, tmp_path):
        p = tmp_path / "x.cepw"
        p.write_bytes(b"CEPWnope")
        result = runner.invoke(main, ["average", str(p)])
        assert result.exit_code == EXIT_PROCESSING


class TestInspect:
    def test_envelope_table(self, runner, tmp_path):
        p, rec = write_recording(tmp_path)
        result = runner.invoke(main, ["inspect", str(p), "--points", "10"])
        assert result.exit_code == 0
        lines = result.stdout.strip().splitlines()
        assert lines[0] == "start_ms\tend_ms\tmin\tmax"
        assert len(lines) == 6
        top = max(float(line.split("\t")[3]) for line in lines[1:]
                  if line.split("\t")[3])
        present = rec.pupil_left.present
        assert top == pytest.approx(rec.pupil_left.values[present].max(),
                                    abs=1e-6)

    def test_unknown_channel_exits_4(self, runner, tmp_path):
        p, _ = write_recording(tmp_path)
        result = runner.invoke(main, ["inspect", str(p), "--channel", "aura"])
        assert result.exit_code == EXIT_PROCESSING


class TestPoolSize:
    def test_override(self, runner):
        result = runner.invoke(main, ["pool-size", "--cores", "12"])
        assert result.stdout.strip() == "11"

    def test_single_core(self, runner):
        result = runner.invoke(main, ["pool-size", "--cores", "1"])
        assert result.stdout.strip() == "1"
