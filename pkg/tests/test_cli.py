"""End-to-end tests of the command-line interface."""

import json

import pytest
from click.testing import CliRunner

from feedback_lab import __version__
from feedback_lab.cli import EXIT_ERROR, cli
from feedback_lab.config.settings import ExperimentConfig
from feedback_lab.utils.exports import read_csv


@pytest.fixture
def runner():
    return CliRunner()


def make_config(tmp_path, **overrides):
    data = {"encoder": {"a": 2.0}, "horizon": 20, "output": {"log_level": "WARNING"}}
    data.update(overrides)
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def invoke(runner, args):
    result = runner.invoke(cli, args)
    assert result.exception is None or isinstance(result.exception, SystemExit), result.output
    return result


def test_version(runner):
    result = invoke(runner, ["--version"])
    assert __version__ in result.output


def test_init_writes_loadable_config(runner, tmp_path):
    path = tmp_path / "new.yaml"
    result = invoke(runner, ["init", "--config", str(path)])
    assert result.exit_code == 0
    assert ExperimentConfig.from_file(path).power_budget == 3.0

    path.write_text("horizon: 5\n", encoding="utf-8")
    result = runner.invoke(cli, ["init", "--config", str(path)], input="n\n")
    assert result.exit_code == 0
    assert path.read_text(encoding="utf-8") == "horizon: 5\n"


class TestValidate:
    def test_valid(self, runner, tmp_path):
        config = make_config(tmp_path, channel={"f": [0.5], "g": [0.3]})
        result = invoke(runner, ["validate", "-c", str(config)])
        assert result.exit_code == 0
        assert "valid" in result.output

    def test_root_outside_circle(self, runner, tmp_path):
        config = make_config(tmp_path, channel={"f": [1.5], "g": [0.0]})
        result = invoke(runner, ["validate", "-c", str(config)])
        assert result.exit_code == EXIT_ERROR
        assert "1.5" in result.output

    def test_unparseable_config(self, runner, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"horizon": ', encoding="utf-8")
        result = invoke(runner, ["validate", "-c", str(path)])
        assert result.exit_code == EXIT_ERROR
        assert "line 1," in " ".join(result.output.split())


def test_simulate(runner, tmp_path):
    config = make_config(tmp_path, channel={"f": [0.5], "g": [0.3]})
    result = invoke(runner, ["simulate", "-c", str(config), "-o", str(tmp_path / "out")])
    assert result.exit_code == 0
    assert len(read_csv(tmp_path / "out" / "transcript.csv")) == 21


def test_limits_report(runner, tmp_path):
    config = make_config(tmp_path, horizon=60)
    out = tmp_path / "out"
    result = invoke(runner, ["limits", "-c", str(config), "-o", str(out)])
    assert result.exit_code == 0
    payload = json.loads((out / "limits.json").read_text(encoding="utf-8"))
    assert payload["max_relative_residual"] <= 1e-8
    assert payload["log_base"] == "e"
    assert len(read_csv(out / "convergence.csv")) == 61


def test_steady_in_bits(runner, tmp_path):
    config = make_config(tmp_path, channel={"f": [0.5], "g": [0.3]})
    out = tmp_path / "out"
    result = invoke(runner, ["steady", "-c", str(config), "-o", str(out), "--bits"])
    assert result.exit_code == 0
    payload = json.loads((out / "steady.json").read_text(encoding="utf-8"))
    assert payload["log_base"] == "2"
    assert payload["rates"]["rate_di"] == pytest.approx(1.0)


def test_montecarlo_reruns_are_identical(runner, tmp_path):
    config = make_config(tmp_path, montecarlo={"horizons": [10, 15], "trials": 100,
                                               "chunk_size": 30})
    for name in ("a", "b"):
        result = invoke(runner, ["montecarlo", "-c", str(config), "-o", str(tmp_path / name),
                                 "--seed", "11"])
        assert result.exit_code == 0
    first = (tmp_path / "a" / "montecarlo.csv").read_bytes()
    assert first == (tmp_path / "b" / "montecarlo.csv").read_bytes()
    assert first.startswith(b"T,M_T,Pe,power_hat,power_se,errors,trials,seed")


def test_search(runner, tmp_path):
    config = make_config(tmp_path, horizon=4, power_budget=1.0,
                         search={"n": 0, "restarts": 2, "max_iter": 200, "max_workers": 2})
    out = tmp_path / "out"
    result = invoke(runner, ["search", "-c", str(config), "-o", str(out)])
    assert result.exit_code == 0
    payload = json.loads((out / "search.json").read_text(encoding="utf-8"))
    assert payload["mode"] == "power_budget"
    assert payload["power"] <= 1.0 + 1e-9


def test_search_needs_target(runner, tmp_path):
    result = invoke(runner, ["search", "-c", str(make_config(tmp_path)),
                             "-o", str(tmp_path / "out")])
    assert result.exit_code == EXIT_ERROR


def test_sk_compare(runner, tmp_path):
    config = make_config(tmp_path, horizon=100)
    out = tmp_path / "out"
    result = invoke(runner, ["sk-compare", "-c", str(config), "-o", str(out)])
    assert result.exit_code == 0
    payload = json.loads((out / "sk_compare.json").read_text(encoding="utf-8"))
    assert payload["identical"] is True


def test_verify(runner, tmp_path):
    out = tmp_path / "out"
    result = invoke(runner, ["verify", "-c", str(make_config(tmp_path)), "-o", str(out)])
    assert result.exit_code == 0, result.output
    assert json.loads((out / "verify.json").read_text(encoding="utf-8"))["passed"] is True
