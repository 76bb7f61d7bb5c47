"""Command-line front end: formats, config handling, exit codes.

Everything runs in-process through main(argv) so the exit code and the
file bytes are both observable without spawning subprocesses.
"""
import json

import numpy as np
import pytest

import actionwave.cli as cli
from actionwave import __version__
from actionwave.cli import ConfigError, InvariantError, main
from actionwave.event_engine import NonUnitaryError

ALL_EXPERIMENTS = (
    "sg",
    "mz",
    "singlet",
    "chsh",
    "neutrino",
    "pair",
    "schrodinger",
    "dirac",
    "bohm",
    "born-convergence",
)


def run_report(tmp_path, *argv):
    out = tmp_path / "report.json"
    code = main(list(argv) + ["--out", str(out)])
    return code, out


class TestReportFormat:
    def test_json_report_shape(self, tmp_path):
        code, out = run_report(tmp_path, "--experiment", "sg", "--events", "2000", "--seed", "3")
        assert code == 0
        report = json.loads(out.read_text())
        assert report["schema"] == "actionwave-report/1"
        assert report["experiment"] == "sg"
        assert report["version"] == __version__
        assert report["seed"] == 3 and report["events"] == 2000
        assert set(report) >= {"config", "analytic", "empirical", "invariants"}
        assert all(inv["passed"] for inv in report["invariants"] if inv["hard"])

    def test_frequencies_sum_to_one(self, tmp_path):
        _, out = run_report(tmp_path, "--experiment", "mz", "--events", "1000")
        report = json.loads(out.read_text())
        assert sum(report["empirical"]["frequencies"]) == pytest.approx(1.0, abs=1e-9)

    def test_csv_table_header(self, tmp_path):
        out = tmp_path / "t.csv"
        code = main(
            ["--experiment", "sg", "--events", "500", "--format", "csv", "--out", str(out)]
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("# actionwave-table/1 columns: ")
        header = lines[0].split("columns: ")[1].split(",")
        data_start = next(i for i, l in enumerate(lines) if not l.startswith("#"))
        assert lines[data_start].split(",") == header

    def test_stdout_default(self, capsys):
        assert main(["--experiment", "sg", "--events", "200"]) == 0
        captured = capsys.readouterr()
        assert json.loads(captured.out)["schema"] == "actionwave-report/1"
        assert "done in" in captured.err

    @pytest.mark.parametrize("experiment", ALL_EXPERIMENTS)
    def test_every_experiment_runs_small(self, tmp_path, experiment):
        args = ["--experiment", experiment, "--out", str(tmp_path / "r.json")]
        if experiment == "born-convergence":
            args += ["--events", "2"]  # replicates
        elif experiment == "schrodinger":
            args += ["--events", "1"]
        else:
            args += ["--events", "2000"]
        assert main(args) == 0
        report = json.loads((tmp_path / "r.json").read_text())
        assert report["experiment"] == experiment


class TestDeterminism:
    def test_byte_identical_reruns(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        argv = ["--experiment", "singlet", "--events", "5000", "--seed", "9"]
        assert main(argv + ["--out", str(a)]) == 0
        assert main(argv + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_thread_count_invisible_in_output(self, tmp_path, monkeypatch):
        argv = ["--experiment", "sg", "--events", "20000", "--seed", "5"]
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        monkeypatch.setenv("ACTIONWAVE_THREADS", "1")
        assert main(argv + ["--out", str(a)]) == 0
        monkeypatch.setenv("ACTIONWAVE_THREADS", "4")
        assert main(argv + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestScan:
    def test_csv_scan(self, tmp_path):
        out = tmp_path / "scan.csv"
        code = main(
            [
                "--experiment", "sg", "--events", "500", "--seed", "1",
                "--scan", "t=0.1,0.2,0.3", "--out", str(out),
            ]
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "# actionwave-scan/1 columns: phase,p_analytic,p_empirical,std_err,N"
        assert lines[1].startswith("# experiment=sg parameter=t seed=1")
        data = [l for l in lines if not l.startswith("#")]
        assert data[0] == "phase,p_analytic,p_empirical,std_err,N"
        assert len(data) == 4  # header + one row per value

    def test_json_scan(self, tmp_path):
        out = tmp_path / "scan.json"
        code = main(
            [
                "--experiment", "singlet", "--events", "500",
                "--scan", "delta_theta=0.0,1.5707963", "--format", "json",
                "--out", str(out),
            ]
        )
        assert code == 0
        report = json.loads(out.read_text())
        assert report["schema"] == "actionwave-scan/1"
        assert report["parameter"] == "delta_theta"
        assert len(report["rows"]) == 2
        # delta_theta = 0: exact anticorrelation in every event
        row = dict(zip(report["columns"], report["rows"][0]))
        assert row["C_empirical"] == -1.0

    def test_empty_scan_is_header_only(self, tmp_path):
        out = tmp_path / "scan.csv"
        code = main(["--experiment", "sg", "--scan", "t=", "--out", str(out)])
        assert code == 0
        data = [l for l in out.read_text().splitlines() if not l.startswith("#")]
        assert len(data) == 1

    def test_unknown_parameter(self, tmp_path):
        code, _ = run_report(tmp_path, "--experiment", "sg", "--scan", "bogus=1,2")
        assert code == 1

    def test_unscannable_experiment(self, tmp_path):
        code, _ = run_report(tmp_path, "--experiment", "born-convergence", "--scan", "p=0.5")
        assert code == 1

    def test_bad_value(self, tmp_path):
        code, _ = run_report(tmp_path, "--experiment", "sg", "--scan", "t=abc")
        assert code == 1


class TestConfigFile:
    def test_parameters_applied(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "# singlet at right angles\n"
            "experiment = singlet\n"
            "theta2 = 1.5707963267948966\n"
            "events = 4000\n"
            "seed = 12\n"
        )
        out = tmp_path / "r.json"
        assert main(["--config", str(cfg), "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["experiment"] == "singlet"
        assert report["seed"] == 12 and report["events"] == 4000
        assert report["config"]["theta2"] == pytest.approx(np.pi / 2.0)

    def test_cli_flags_override_config(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("experiment = sg\nseed = 1\nevents = 1000\n")
        out = tmp_path / "r.json"
        assert main(["--config", str(cfg), "--seed", "7", "--out", str(out)]) == 0
        assert json.loads(out.read_text())["seed"] == 7

    def test_syntax_errors_collected(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("experiment = sg\nnot a pair\nt = 1\nt = 2\n")
        assert main(["--config", str(cfg)]) == 1
        err = capsys.readouterr().err
        assert "line 2" in err
        assert "duplicate" in err

    def test_unknown_key(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("experiment = sg\nwavelength = 3\n")
        assert main(["--config", str(cfg)]) == 1
        assert "wavelength" in capsys.readouterr().err

    def test_unknown_experiment_in_config(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("experiment = tea-leaves\n")
        assert main(["--config", str(cfg)]) == 1

    def test_missing_file(self):
        assert main(["--config", "/nonexistent/run.cfg"]) == 1


class TestValidation:
    def test_experiment_required(self):
        assert main([]) == 1

    def test_unknown_experiment_flag_rejected_by_parser(self):
        with pytest.raises(SystemExit):
            main(["--experiment", "tea-leaves"])

    def test_negative_seed(self, tmp_path):
        code, _ = run_report(tmp_path, "--experiment", "sg", "--seed", "-1")
        assert code == 1

    def test_zero_events(self, tmp_path):
        code, _ = run_report(tmp_path, "--experiment", "sg", "--events", "0")
        assert code == 1

    def test_neutrino_mass_split_needs_energy(self, tmp_path):
        cfg = tmp_path / "n.cfg"
        cfg.write_text("experiment = neutrino\ndelta_m2 = 2.5\n")
        assert main(["--config", str(cfg)]) == 1

    def test_junk_thread_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("ACTIONWAVE_THREADS", "lots")
        code, _ = run_report(tmp_path, "--experiment", "sg", "--events", "100")
        assert code == 1

    def test_unwritable_out_path(self):
        assert main(["--experiment", "sg", "--events", "100", "--out", "/no/such/dir/r.json"]) == 1


class TestExitCodeMapping:
    def run_patched(self, monkeypatch, exc):
        entry = cli.EXPERIMENTS["sg"]
        patched = cli._Experiment(
            params=entry.params,
            default_events=entry.default_events,
            run=lambda p, e, s: (_ for _ in ()).throw(exc),
            scannable=entry.scannable,
        )
        monkeypatch.setitem(cli.EXPERIMENTS, "sg", patched)
        return main(["--experiment", "sg", "--events", "10"])

    def test_numeric_failure_is_2(self, monkeypatch):
        assert self.run_patched(monkeypatch, FloatingPointError("nan")) == 2

    def test_invariant_failure_is_3(self, monkeypatch):
        assert self.run_patched(monkeypatch, InvariantError("drift")) == 3

    def test_non_unitary_is_3_not_1(self, monkeypatch):
        # NonUnitaryError subclasses ValueError; it must map to 3 anyway
        assert self.run_patched(monkeypatch, NonUnitaryError("norm")) == 3

    def test_config_error_is_1(self, monkeypatch):
        assert self.run_patched(monkeypatch, ConfigError("bad")) == 1


class TestFigures:
    def test_single_run_figure(self, tmp_path):
        fig = tmp_path / "f.png"
        code = main(
            [
                "--experiment", "sg", "--events", "500",
                "--out", str(tmp_path / "r.json"), "--figure", str(fig),
            ]
        )
        assert code == 0
        assert fig.stat().st_size > 1000

    def test_scan_figure(self, tmp_path):
        fig = tmp_path / "s.png"
        code = main(
            [
                "--experiment", "sg", "--events", "500", "--scan", "t=0.2,0.6,1.0",
                "--out", str(tmp_path / "s.csv"), "--figure", str(fig),
            ]
        )
        assert code == 0
        assert fig.stat().st_size > 1000

    def test_empty_scan_skips_figure(self, tmp_path, capsys):
        fig = tmp_path / "s.png"
        code = main(
            [
                "--experiment", "sg", "--scan", "t=",
                "--out", str(tmp_path / "s.csv"), "--figure", str(fig),
            ]
        )
        assert code == 0
        assert not fig.exists()
        assert "no figure" in capsys.readouterr().err
