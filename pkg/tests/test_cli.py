import json
import subprocess
import sys

import pytest
from click.testing import CliRunner

from tropinf.cli import main

from conftest import CORPUS, load_source

M1 = str(CORPUS / "m1.pcfx")
M2 = str(CORPUS / "m2.pcfx")


@pytest.fixture()
def runner():
    return CliRunner()


class TestCheck:
    def test_ok(self, runner):
        res = runner.invoke(main, ["check", M1])
        assert res.exit_code == 0
        assert "Bool" in res.output

    def test_missing_file(self, runner):
        res = runner.invoke(main, ["check", "nope.pcfx"])
        assert res.exit_code == 1

    def test_ill_typed(self, runner, tmp_path):
        bad = tmp_path / "bad.pcfx"
        bad.write_text("params 1\n(0 +[X1] 1) 2\n")
        res = runner.invoke(main, ["check", str(bad)])
        assert res.exit_code == 1


class TestEnumerate:
    def test_trajectory_table(self, runner):
        res = runner.invoke(main, ["enumerate", M1])
        assert res.exit_code == 0
        lines = [l for l in res.output.splitlines() if l.strip()]
        assert len(lines) == 6
        assert lines[0].startswith("00") and "X1^2" in lines[0]
        assert lines[-1].startswith("111") and "~X1^3" in lines[-1]

    def test_target_filter(self, runner):
        res = runner.invoke(main, ["enumerate", M1, "--target", "0"])
        words = [l.split()[0] for l in res.output.splitlines() if l.strip()]
        assert words == ["01", "101", "110"]


class TestAnalyze:
    def test_text_output(self, runner):
        res = runner.invoke(main, ["analyze", M1])
        assert res.exit_code == 0
        assert "~X1^3 + X1^2" in res.output
        assert "word=111" in res.output and "word=00" in res.output

    def test_json_output(self, runner):
        res = runner.invoke(main, ["analyze", M1, "--output", "json"])
        assert res.exit_code == 0
        blob = json.loads(res.output)
        assert blob["schema"] == "tropinf-report/1"
        assert blob["stable"] is True
        assert blob["polynomial_text"] == "~X1^3 + X1^2"
        assert len(blob["selected"]) == 2

    def test_other_target(self, runner):
        res = runner.invoke(main, ["analyze", M1, "--target", "0"])
        assert res.exit_code == 0
        assert "X1*~X1" in res.output

    def test_recursive_sampler(self, runner):
        res = runner.invoke(main, ["analyze", M2])
        assert res.exit_code == 0
        assert "stable: true" in res.output

    def test_max_rounds_cutoff(self, runner):
        res = runner.invoke(main, ["analyze", M1, "--max-rounds", "1"])
        assert res.exit_code == 0
        assert "stable: false" in res.output


class TestI1:
    def test_fair_coin(self, runner):
        res = runner.invoke(main, ["i1", M1, "--probs", "1/2"])
        assert res.exit_code == 0
        assert "winners: X1^2" in res.output
        assert "probability: 1/4" in res.output

    def test_bad_probs(self, runner):
        assert runner.invoke(main, ["i1", M1, "--probs", "bad"]).exit_code == 1
        assert runner.invoke(main, ["i1", M1, "--probs", "3/2"]).exit_code == 1
        assert runner.invoke(main, ["i1", M1, "--probs", "1/2,1/2"]).exit_code == 1


class TestI2:
    def test_region(self, runner):
        res = runner.invoke(main, ["i2", M1, "--monomial", "0,3"])
        assert res.exit_code == 0
        assert "-2*X1 + 3*~X1 <= 0" in res.output

    def test_membership(self, runner):
        res = runner.invoke(main, ["i2", M1, "--monomial", "0,3", "--probs", "1/4"])
        assert "member: true" in res.output
        res = runner.invoke(main, ["i2", M1, "--monomial", "0,3", "--probs", "1/2"])
        assert "member: false" in res.output

    def test_bad_monomial(self, runner):
        assert runner.invoke(main, ["i2", M1, "--monomial", "9,9"]).exit_code == 1
        assert runner.invoke(main, ["i2", M1, "--monomial", "x"]).exit_code == 1


class TestEntryPoint:
    def test_installed_script(self):
        proc = subprocess.run(
            [sys.executable, "-m", "tropinf.cli", "check", M1],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
