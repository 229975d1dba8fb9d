from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from csmm.cli import main


@pytest.fixture
def run(tmp_path):
    runner = CliRunner()

    def _run(*args, cache=True):
        base = ["--cache-dir", str(tmp_path / "cache")] if cache else ["--no-cache"]
        return runner.invoke(main, base + list(args))

    return _run


def _report(result):
    return json.loads(result.output)


def test_help_lists_commands(run):
    res = run("--help")
    assert res.exit_code == 0
    for cmd in ("verify-relations", "scaling", "moments", "ddca", "mn-table"):
        assert cmd in res.output


def test_verify_relations_pass_and_report_shape(run):
    res = run("verify-relations", "--N", "2", "--E", "2", "--families", "R_t11e", "--max-index", "1")
    assert res.exit_code == 0, res.output
    rep = _report(res)
    assert rep["schema_version"] == 1 and rep["command"]["name"] == "verify-relations" and rep["passed"]
    assert all(c["passed"] for c in rep["checks"])
    assert "seconds" in rep["timing"]


@pytest.mark.parametrize("args", [
    ["verify-relations", "--N", "0"],
    ["verify-relations", "--N", "2", "--families", "R_nope"],
    ["verify-relations", "--N", "2", "--indices", "1"],
    ["verify-relations", "--N", "2", "--flavors", "2"],
    ["moments", "--B", "-1"],
    ["moments", "--B", "x"],
    ["ddca", "--p", "2", "--finite-N", "3"],
    ["mn-table", "--n", "0"],
])
def test_usage_errors_exit_2(run, args):
    assert run(*args).exit_code == 2


def test_mn_table_csv(run):
    res = run("--format", "csv", "mn-table", "--n", "4")
    assert res.exit_code == 0
    lines = res.output.strip().splitlines()
    assert len(lines) == 6  # header plus 5 irreducibles


def test_moments_lemma_c1(run):
    res = run("moments", "--p", "2", "--M", "2", "--lemma-c1")
    assert res.exit_code == 0
    rep = _report(res)
    assert rep["checks"][0]["factor"] == 5


def test_moments_catalan_and_filling_factor(run):
    res = run("moments", "--k", "1", "--N", "2..7", "--n-max", "2")
    assert res.exit_code == 0, res.output
    names = [c["name"] for c in _report(res)["checks"]]
    assert names == ["catalan", "filling-factor"]


def test_scaling_cache_hit_is_identical(run):
    first = run("scaling", "--m", "0", "--n", "1", "--E", "2", "--N", "2..5")
    second = run("scaling", "--m", "0", "--n", "1", "--E", "2", "--N", "2..5")
    assert first.exit_code == second.exit_code == 0
    a, b = _report(first), _report(second)
    assert a["timing"]["cache"] == "miss" and b["timing"]["cache"] == "hit"
    assert a["checks"] == b["checks"]


def test_corrupt_cache_entry_recomputes(run, tmp_path):
    run("scaling", "--m", "0", "--n", "1", "--E", "2", "--N", "2..5")
    for f in (tmp_path / "cache" / "scaling").glob("*.json"):
        f.write_text("{not json")
    res = run("scaling", "--m", "0", "--n", "1", "--E", "2", "--N", "2..5")
    assert res.exit_code == 0
    assert _report(res)["timing"]["cache"] == "miss"


def test_out_directory_writes_artifacts(run, tmp_path):
    out = tmp_path / "out"
    res = run("--out", str(out), "--format", "both", "mn-table", "--n", "3")
    assert res.exit_code == 0
    assert json.loads((out / "mn-table.json").read_text())["passed"]
    assert (out / "mn-table.csv").read_text().startswith("nu")


def test_ddca_small_run(run):
    res = run("ddca", "--p", "1", "--degree-cap", "6", "--lie-index", "2", "--degeneration-index", "2")
    assert res.exit_code == 0, res.output
    rep = _report(res)
    assert rep["passed"]
    again = run("ddca", "--p", "1", "--degree-cap", "6", "--lie-index", "2", "--degeneration-index", "2")
    assert _report(again)["timing"]["cache"] == "hit"
