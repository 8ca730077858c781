import json
import os

import pytest

from dynup.cli import main
from dynup.domain import save_instance
from dynup.reporting import atomic_write_text, fmt9
from tests.conftest import make_instance


@pytest.fixture
def instance_file(tmp_path, small_instance):
    path = tmp_path / "instance.json"
    save_instance(small_instance, path)
    return str(path)


def run_cli(*args):
    return main(list(args))


class TestSimulate:
    def test_writes_trace_files(self, tmp_path, instance_file):
        out = str(tmp_path / "out")
        code = run_cli("--out-dir", out, "--seed", "7", "--jobs", "1",
                       "simulate", "--instance", instance_file, "--reps", "4")
        assert code == 0
        for seed in range(7, 11):
            assert os.path.exists(os.path.join(out, f"trace-{seed}.csv"))
            assert os.path.exists(os.path.join(out, f"trace-{seed}.json"))

    def test_missing_instance_exits_2(self, tmp_path):
        code = run_cli("--out-dir", str(tmp_path), "simulate",
                       "--instance", str(tmp_path / "nope.json"))
        assert code == 2

    def test_bad_policy_exits_2(self, tmp_path, instance_file):
        code = run_cli("--out-dir", str(tmp_path), "simulate",
                       "--instance", instance_file, "--policy", "greedy")
        assert code == 2

    def test_byte_identical_reruns(self, tmp_path, instance_file):
        out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
        for out in (out1, out2):
            assert run_cli("--out-dir", out, "--seed", "3", "--jobs", "1",
                           "simulate", "--instance", instance_file, "--reps", "2") == 0
        for name in ("trace-3.csv", "trace-3.json", "trace-4.csv"):
            with open(os.path.join(out1, name), "rb") as f1, \
                 open(os.path.join(out2, name), "rb") as f2:
                assert f1.read() == f2.read()

    def test_schema_header_present(self, tmp_path, instance_file):
        out = str(tmp_path / "out")
        run_cli("--out-dir", out, "--seed", "5", "--jobs", "1",
                "simulate", "--instance", instance_file)
        with open(os.path.join(out, "trace-5.csv")) as fh:
            assert fh.readline().startswith("# schema: dynup.trace.v1")


class TestOracleCheck:
    def test_default_instance_passes(self, tmp_path, capsys):
        code = run_cli("--out-dir", str(tmp_path), "oracle-check")
        out = capsys.readouterr().out
        assert code == 0
        assert out.count("PASS") == 2
        with open(tmp_path / "oracle-check.json") as fh:
            blob = json.load(fh)
        assert blob["dominance_ok"] is True

    def test_table_dump_flag(self, tmp_path):
        code = run_cli("--out-dir", str(tmp_path), "oracle-check", "--dump-table")
        assert code == 0
        assert os.path.exists(tmp_path / "oracle-table.csv")

    def test_degenerate_instance_warns_but_runs(self, tmp_path):
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            degenerate = make_instance(20, (4, 3), (0.5, 0.3))
        path = tmp_path / "deg.json"
        save_instance(degenerate, path)
        with pytest.warns(UserWarning):
            code = run_cli("--out-dir", str(tmp_path), "oracle-check",
                           "--instance", str(path))
        assert code == 0


class TestRegretCommand:
    def test_small_sweep_outputs(self, tmp_path):
        out = str(tmp_path / "sweep")
        code = run_cli("--out-dir", out, "--seed", "2", "regret",
                       "--horizons", "50,100,200,400", "--reps", "300",
                       "--plot-data")
        assert code == 0
        assert os.path.exists(os.path.join(out, "regret-dynup2.csv"))
        assert os.path.exists(os.path.join(out, "regret-dynup2.json"))
        assert os.path.exists(os.path.join(out, "regret-dynup2.dat"))
        assert os.path.exists(os.path.join(out, "regret-dynup2.png"))

    def test_no_figures_flag(self, tmp_path):
        out = str(tmp_path / "sweep")
        code = run_cli("--out-dir", out, "--seed", "2", "regret",
                       "--horizons", "50,100,200,400", "--reps", "200",
                       "--no-figures")
        assert code == 0
        assert not os.path.exists(os.path.join(out, "regret-dynup2.png"))

    def test_bad_horizons_exit_2(self, tmp_path):
        assert run_cli("--out-dir", str(tmp_path), "regret",
                       "--horizons", "fast,slow") == 2


class TestCalibrateCommand:
    def test_demo_fit(self, tmp_path, capsys):
        code = run_cli("--out-dir", str(tmp_path), "--seed", "9",
                       "calibrate", "--demo", "2.33,1.0,5000")
        assert code == 0
        assert os.path.exists(tmp_path / "calibration.json")
        assert os.path.exists(tmp_path / "calibration.png")

    def test_needs_source(self, tmp_path):
        assert run_cli("--out-dir", str(tmp_path), "calibrate") == 2


class TestHotelCommand:
    def test_synthetic_run(self, tmp_path):
        code = run_cli("--out-dir", str(tmp_path), "--seed", "4", "hotel-study",
                       "--days", "2", "--permutations", "10")
        assert code == 0
        assert os.path.exists(tmp_path / "hotel-study.csv")
        assert os.path.exists(tmp_path / "hotel-study.json")
        assert os.path.exists(tmp_path / "hotel-study.png")

    def test_profiles_file(self, tmp_path):
        profiles = tmp_path / "profiles.json"
        profiles.write_text("[[30, 10, 1], [0, 0, 0]]")
        code = run_cli("--out-dir", str(tmp_path), "--seed", "4", "hotel-study",
                       "--profiles", str(profiles), "--permutations", "8",
                       "--no-figures")
        assert code == 0
        with open(tmp_path / "hotel-study.json") as fh:
            blob = json.load(fh)
        assert blob["days"][1]["improvement_pct"] is None


class TestDiagnosticsCommand:
    def test_single_kind(self, tmp_path):
        code = run_cli("--out-dir", str(tmp_path), "--seed", "6", "diagnostics",
                       "--kind", "stopping", "--horizon", "200", "--reps", "500")
        assert code == 0
        assert os.path.exists(tmp_path / "diagnostics.csv")
        assert os.path.exists(tmp_path / "diag-stopping_time.png")


class TestAtomicWrites:
    def test_no_partial_file_on_crash(self, tmp_path, monkeypatch):
        target = tmp_path / "report.csv"

        def exploding_replace(src, dst):
            raise RuntimeError("interrupted")

        monkeypatch.setattr(os, "replace", exploding_replace)
        with pytest.raises(RuntimeError):
            atomic_write_text(target, "half-written")
        assert not target.exists()
        leftovers = [p for p in tmp_path.iterdir()]
        assert leftovers == []

    def test_fmt9_significant_digits(self):
        assert fmt9(math_pi := 3.141592653589793) == "3.14159265"
        assert fmt9(1234567891234.0) == "1.23456789e+12"
        assert fmt9(42) == "42"
        assert fmt9(None) == ""
