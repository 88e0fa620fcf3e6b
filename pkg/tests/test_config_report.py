import csv
import io
import json
import math

import pytest

from roe_lab.config import ENV_VAR, RunConfig, apply_overrides, load_config, parse_set_options
from roe_lab.errors import DomainError
from roe_lab.report import COLUMNS, ReportRecord, records_to_csv, records_to_json, summary_table, write_records


def test_defaults():
    c = RunConfig()
    assert c.pass_tol == 1e-3 and c.counterexample_tol == 0.1 and c.J == 10
    assert math.isnan(c.c_inv)


def test_text_round_trip(tmp_path):
    c = RunConfig(n=2, c_inv=1 / (2 * math.pi), kappa=0.99997, record_timing=True, output_dir="x y")
    path = tmp_path / "run.cfg"
    c.save(str(path))
    assert load_config(str(path)) == c
    assert RunConfig.from_text(c.to_text()) == c


def test_comments_and_blank_lines():
    c = RunConfig.from_text("# header\n\nn = 2  # trailing\nJ=4\n")
    assert c.n == 2 and c.J == 4


def test_overrides_and_precedence(tmp_path, monkeypatch):
    path = tmp_path / "a.cfg"
    path.write_text("J = 7\nseed = 3\n")
    monkeypatch.setenv(ENV_VAR, str(path))
    assert load_config().J == 7
    c = load_config(overrides=["J=5", "record_timing = yes"])
    assert c.J == 5 and c.seed == 3 and c.record_timing is True
    other = tmp_path / "b.cfg"
    other.write_text("seed = 9\n")
    assert load_config(str(other)).seed == 9


@pytest.mark.parametrize("bad", [{"nope": "1"}, {"pass_tol": "-1"}, {"J": "0"}, {"record_timing": "maybe"},
                                 {"n": "two"}])
def test_bad_overrides(bad):
    with pytest.raises(DomainError):
        apply_overrides(RunConfig(), bad)


def test_bad_lines():
    with pytest.raises(DomainError):
        RunConfig.from_text("just words\n")
    with pytest.raises(DomainError):
        parse_set_options(["novalue"])


def _records():
    return [
        ReportRecord("eigen", {"n": 3, "lam": 1.0}, "residual", 2e-9, 1e-6, seconds=0.123),
        ReportRecord("pair", {"p": math.inf}, "best_fit_residual", 0.158, 0.1, comparison=">"),
        ReportRecord("broken", {}, "value", math.nan, 1.0),
    ]


def test_record_pass_logic():
    a, b, c = _records()
    assert a.passed and b.passed and not c.passed
    assert not ReportRecord("t", {}, "m", 0.05, 0.1, comparison=">").passed


def test_csv_and_json_fields(tmp_path):
    recs = _records()
    rows = list(csv.DictReader(io.StringIO(records_to_csv(recs))))
    assert tuple(rows[0]) == COLUMNS
    assert rows[0]["params"] == "lam=1.0;n=3"
    assert rows[1]["params"] == "p=inf"
    assert [r["pass"] for r in rows] == ["true", "true", "false"]
    assert rows[0]["seconds"] == "0"  # timing off keeps outputs byte-stable
    data = json.loads(records_to_json(recs, timing=True))
    assert data[0]["seconds"] == "0.123"
    assert set(data[0]) == set(COLUMNS)
    csv_path, json_path = write_records(recs, str(tmp_path / "out"), "stem")
    assert open(csv_path).read() == records_to_csv(recs)
    assert json.loads(open(json_path).read()) == json.loads(records_to_json(recs))


def test_summary_table():
    text = summary_table(_records())
    lines = text.splitlines()
    assert lines[0].startswith("PASS") and lines[2].startswith("FAIL")
    assert "pair.best_fit_residual" in lines[1] and ">" in lines[1]
