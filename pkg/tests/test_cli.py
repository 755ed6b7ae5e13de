import json

import pytest

from mesowigner import __version__, tasks
from mesowigner.cli import build_parser, commands, main
from mesowigner.ensembles import load_spectrum
from mesowigner.utilities.persistence import read_csv


@pytest.fixture
def two_sample_config(config_file):
    """Two samples give infinite standard errors, so nothing can be rejected."""
    return str(config_file(samples=2))


def test_every_command_is_registered():
    names = {command.name for command in commands}
    assert names == {
        "sample",
        "cov-v",
        "var-meso",
        "universality",
        "normality",
        "log-process",
        "sine-demo",
        "semicircle-ks",
        "local-law",
        "gp-sample",
        "hs-verify",
    }
    subcommands = build_parser()._subparsers._group_actions[0].choices
    assert set(subcommands) == names


def test_version(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["--version"])
    assert excinfo.value.code == 0
    assert capsys.readouterr().out.strip() == f"mesowigner {__version__}"


def test_a_command_is_required():
    with pytest.raises(SystemExit) as excinfo:
        main([])
    assert excinfo.value.code == 2


class TestSample:
    def test_writes_spectra(self, tmp_path):
        assert main(["--seed", "5", "--out", str(tmp_path), "sample", "-n", "8", "--count", "2"]) == 0
        spectrum = load_spectrum(tmp_path / "GUE_n8_seed5_s1.csv")
        assert spectrum.n == 8
        assert spectrum.spec.sample_index == 1
        assert (tmp_path / "GUE_n8_seed5_s0.json").exists()

    def test_sample_failure_names_the_seed(self, tmp_path, monkeypatch, caplog):
        def broken(template, index, spot_checks=0):
            raise RuntimeError("eigensolver exploded")

        monkeypatch.setattr(tasks, "spectrum", broken)
        assert main(["--seed", "5", "--out", str(tmp_path), "sample", "-n", "8"]) == 1
        assert "Aborted: sample 0 with seed 5 failed: eigensolver exploded" in caplog.text


class TestExperimentCommands:
    def test_cov_v(self, tmp_path, two_sample_config, capsys):
        assert main(["--config", two_sample_config, "--seed", "3", "--out", str(tmp_path), "cov-v"]) == 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["experiment"] == "CovV"
        assert report["config"]["seed"] == 3
        assert "degenerate_standard_error" in report["flags"]
        assert len(read_csv(tmp_path / "data.csv")) == 4
        assert capsys.readouterr().out.startswith("CovV: 6 estimates")

    def test_command_selects_the_experiment(self, tmp_path, two_sample_config):
        assert main(["--config", two_sample_config, "--out", str(tmp_path), "local-law"]) == 0
        assert json.loads((tmp_path / "report.json").read_text())["experiment"] == "LocalLaw"

    def test_var_meso_single_function(self, tmp_path, two_sample_config):
        assert main(["--config", two_sample_config, "--out", str(tmp_path), "var-meso", "--function", "gaussian"]) == 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert [estimate["name"] for estimate in report["estimates"]] == ["Var X(gaussian)"]

    def test_log_process_options(self, tmp_path, two_sample_config):
        argv = ["--config", two_sample_config, "--out", str(tmp_path), "log-process", "--taus", "0", "1", "--eta", "2"]
        main(argv)
        report = json.loads((tmp_path / "report.json").read_text())
        assert {estimate["name"] for estimate in report["estimates"]} == {
            "Var W(1) - W(0) [b0]",
            "Var W(1) - W(0) [kernel]",
        }

    def test_missing_config(self, caplog):
        assert main(["cov-v"]) == 1
        assert "cov-v needs --config" in caplog.text

    def test_unreadable_config(self, tmp_path, caplog):
        assert main(["--config", str(tmp_path / "nope.json"), "cov-v"]) == 1
        assert "Cannot read configuration" in caplog.text

    def test_invalid_config(self, config_file, caplog):
        assert main(["--config", str(config_file(samples=1)), "cov-v"]) == 1
        assert "Invalid experiment configuration" in caplog.text

    def test_normality_self_test(self, tmp_path):
        assert main(["--seed", "1", "--out", str(tmp_path), "normality", "--self-test", "1000"]) in (0, 2)
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["config"] == {"samples": 1000, "seed": 1}

    def test_normality_needs_enough_samples(self, two_sample_config, caplog):
        assert main(["--config", two_sample_config, "normality"]) == 1
        assert "at least 500 samples" in caplog.text


class TestGPSample:
    def test_cholesky_path(self, tmp_path):
        argv = ["--seed", "3", "--out", str(tmp_path), "gp-sample", "--origin", "CholeskyKernel"]
        assert main([*argv, "--point", "0,1", "--point", "0.5,1"]) == 0
        rows = read_csv(tmp_path / "CholeskyKernel_seed3.csv")
        assert [(row["tau"], row["eta"]) for row in rows] == [("0.0", "1.0"), ("0.5", "1.0")]
        meta = json.loads((tmp_path / "CholeskyKernel_seed3.json").read_text())
        assert meta == {"origin": "CholeskyKernel", "seed": 3}

    def test_integrated_path_with_check(self, tmp_path):
        argv = ["--out", str(tmp_path), "gp-sample", "--origin", "IntegratedGamma", "--taus", "0", "1"]
        assert main([*argv, "--check", "2000"]) in (0, 2)
        assert len(read_csv(tmp_path / "IntegratedGamma_seed0.csv")) == 2
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["experiment"] == "GPCheck"
        assert len(report["estimates"]) == 2

    def test_series_path_needs_a_point(self, tmp_path, caplog):
        assert main(["--out", str(tmp_path), "gp-sample"]) == 1
        assert "need at least one --point" in caplog.text

    def test_seed_out_of_range(self, tmp_path, caplog):
        assert main(["--seed", "-1", "--out", str(tmp_path), "gp-sample", "--point", "0,1"]) == 1
        assert "64-bit unsigned" in caplog.text

    def test_malformed_point(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["gp-sample", "--point", "0.5"])
        assert excinfo.value.code == 2


def test_hs_verify(tmp_path):
    assert main(["--out", str(tmp_path), "hs-verify", "--function", "zero", "--lambdas", "3"]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["diagnostics"]["zero"]["passed"] is True
