import json
import subprocess
import sys

import pytest

from negdep import fixtures
from negdep.cli import main
from negdep.core import Distribution, load_json


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_table2(capsys):
    code, out, err = _run(capsys, "check", "table2-wnr", "all")
    res = json.loads(out)
    assert code == 1
    assert res["wnr"]["holds"] and res["ncd"]["holds"] and res["dominance"]["holds"]
    assert not res["na"]["holds"] and not res["nr"]["holds"]
    assert res["na"]["witness"]["margin"] == "0.0001"
    assert "FAILS" in err


def test_check_selected_property_exit_zero(capsys):
    code, out, _ = _run(capsys, "check", "dominance-not-wnr", "dominance", "ncd")
    assert code == 0
    assert set(json.loads(out)) == {"dominance", "ncd"}


def test_check_file_float_backend(capsys, tmp_path):
    path = tmp_path / "d.json"
    fixtures.emit("ncd-counterexample-4", path)
    code, out, _ = _run(capsys, "check", str(path), "dominance", "--float")
    res = json.loads(out)["dominance"]
    assert code == 1
    assert res["gap"] == pytest.approx(-0.25)


def test_fixture_emit_round_trip(capsys, tmp_path):
    code, out, _ = _run(capsys, "fixtures", "list")
    assert code == 0 and out.split() == fixtures.names()
    path = tmp_path / "t.json"
    assert main(["fixtures", "emit", "table2-wnr", str(path)]) == 0
    D = Distribution.from_json(load_json(path), exact=True)
    assert list(D.pmf) == list(fixtures.table2_wnr().pmf)


@pytest.mark.parametrize("payload, message", [
    ({"n": 1}, "missing field 'pmf'"),
    ({"n": "1", "pmf": [1, 0]}, "field 'n' must be int"),
    ({"n": 1, "pmf": ["1/2", "1/3"]}, "sum"),
])
def test_bad_input_exits_two(capsys, tmp_path, payload, message):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(payload))
    code, _, err = _run(capsys, "check", str(path))
    assert code == 2
    assert message in err


def test_unknown_source_and_usage(capsys):
    assert _run(capsys, "check", "no-such-thing")[0] == 2
    assert _run(capsys, "fixtures", "emit", "nope", "x.json")[0] == 2
    assert _run(capsys, "frobnicate")[0] == 2


def test_experiment_writes_reports(capsys, tmp_path):
    code, out, _ = _run(capsys, "experiment", "probing", "--n", "3", "--trials", "4",
                        "--steps", "20", "--workers", "1", "--out", str(tmp_path))
    assert code == 0
    summary = json.loads(out)
    assert summary["experiment"] == "probing" and summary["holds"]
    assert (tmp_path / "probing.csv").exists()
    assert json.loads((tmp_path / "probing.json").read_text()) == summary


def test_experiment_is_seeded(capsys):
    args = ("experiment", "crs", "--n", "3", "--trials", "3", "--workers", "1", "--seed", "7")
    first = _run(capsys, *args)[1]
    assert _run(capsys, *args)[1] == first


def test_spi_config_errors(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"instance": {"n": 1}}))
    code, _, err = _run(capsys, "experiment", "spi", "--config", str(cfg), "--workers", "1")
    assert code == 2 and "missing field" in err


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "negdep.cli", "fixtures", "list"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "table2-wnr" in proc.stdout
