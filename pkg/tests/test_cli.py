"""CLI surface: config parsing and validation, exit codes, report formats,
single-operator evaluation."""

import csv
import json
import math

import pytest

from subrep.cli import main

# Independent fine-grid oracle for D^0.5(smooth_bump) at the center, n=2:
# radial reduction of the defining integral, 40-digit quadrature.
FRAC_ORACLE = 6.40447956460511


def write_config(tmp_path, body, name="run.ini"):
    p = tmp_path / name
    p.write_text(body)
    return str(p)


def test_list_checks(capsys):
    assert main(["list-checks"]) == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert len(out) == 13
    assert any(line.startswith("bbm_limit") for line in out)
    assert any("Theorem 2.1" in line for line in out)


def test_run_empty_check_list_exits_zero(tmp_path, capsys):
    cfg = write_config(
        tmp_path, f"[run]\nchecks =\noutput_dir = {tmp_path / 'out'}\n"
    )
    assert main(["run", cfg]) == 0
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary == {"checks": [], "all_pass": True}


def test_run_passing_check_exits_zero(tmp_path):
    cfg = write_config(
        tmp_path,
        f"[run]\nchecks = bbm_limit\noutput_dir = {tmp_path / 'out'}\n"
        "[params]\nbbm_octaves = 15\n",
    )
    assert main(["run", cfg]) == 0
    report = json.loads((tmp_path / "out" / "bbm_limit.json").read_text())
    assert report["pass"] is True
    assert report["paper_anchor"] == "Lemma 2.4, Remark"
    for key in ("check_id", "config_digest", "samples", "empirical_constant",
                "theoretical_constant", "error_budget"):
        assert key in report


def test_run_failing_check_exits_one(tmp_path, capsys):
    # Ten octaves leave the BBM gap an order of magnitude above threshold.
    cfg = write_config(
        tmp_path,
        f"[run]\nchecks = bbm_limit\noutput_dir = {tmp_path / 'out'}\n",
    )
    assert main(["run", cfg]) == 1
    assert "FAIL" in capsys.readouterr().out
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["all_pass"] is False


def test_config_error_names_offending_field(tmp_path, capsys):
    cfg = write_config(
        tmp_path, "[run]\nchecks = bbm_limit\n[params]\nalpha = 1.5\n"
    )
    assert main(["run", cfg]) == 2
    err = capsys.readouterr().err
    assert "[params] alpha" in err
    assert "1.5" in err


def test_config_error_unknown_check(tmp_path, capsys):
    cfg = write_config(tmp_path, "[run]\nchecks = no_such_check\n")
    assert main(["run", cfg]) == 2
    assert "no_such_check" in capsys.readouterr().err


def test_config_error_bad_weight_beta(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        "[run]\ndimension = 2\nchecks = bbm_limit\n[weight]\nkind = radial_power\nbeta = 2.5\n",
    )
    assert main(["run", cfg]) == 2
    assert "[weight] beta" in capsys.readouterr().err


def test_json_reports_byte_identical(tmp_path):
    body = (
        "[run]\ndimension = 1\nchecks = beta_identity, lower_ahlfors\n"
        "output_dir = {out}\nformats = json\n"
    )
    cfg1 = write_config(tmp_path, body.format(out=tmp_path / "out1"), "a.ini")
    cfg2 = write_config(tmp_path, body.format(out=tmp_path / "out2"), "b.ini")
    assert main(["run", cfg1]) == 0
    assert main(["run", cfg2]) == 0
    for name in ("beta_identity.json", "lower_ahlfors.json", "summary.json"):
        b1 = (tmp_path / "out1" / name).read_bytes()
        b2 = (tmp_path / "out2" / name).read_bytes()
        assert b1 == b2


def test_csv_json_roundtrip(tmp_path):
    cfg = write_config(
        tmp_path,
        f"[run]\nchecks = lower_ahlfors\noutput_dir = {tmp_path / 'out'}\n"
        "formats = json, csv\n",
    )
    assert main(["run", cfg]) == 0
    report = json.loads((tmp_path / "out" / "lower_ahlfors.json").read_text())
    with open(tmp_path / "out" / "lower_ahlfors.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == len(report["samples"])
    for row, sample in zip(rows, report["samples"]):
        assert float(row["lhs"]) == sample["lhs"]
        assert float(row["rhs"]) == sample["rhs"]
        assert float(row["ratio"]) == sample["ratio"]
        assert row["config_digest"] == report["config_digest"]
        assert [float(tok) for tok in row["point"].split("|")] == sample["point"]


def test_thread_count_does_not_change_reports(tmp_path, monkeypatch):
    body = (
        "[run]\ndimension = 2\nchecks = beta_identity, bbm_limit, lower_ahlfors\n"
        "output_dir = {out}\nformats = json\n[params]\nbbm_octaves = 15\n"
    )
    cfg1 = write_config(tmp_path, body.format(out=tmp_path / "t1"), "t1.ini")
    cfg2 = write_config(tmp_path, body.format(out=tmp_path / "t4"), "t4.ini")
    monkeypatch.setenv("SUBREP_THREADS", "1")
    assert main(["run", cfg1]) == 0
    monkeypatch.setenv("SUBREP_THREADS", "4")
    assert main(["run", cfg2]) == 0
    assert (tmp_path / "t1" / "summary.json").read_bytes() == (
        tmp_path / "t4" / "summary.json"
    ).read_bytes()


def _printed_value(capsys):
    out = capsys.readouterr().out.strip()
    return float(out.split()[0])


def test_eval_riesz_zero_function(capsys):
    assert main(["eval", "riesz", "--amplitude", "0"]) == 0
    assert _printed_value(capsys) == 0.0


def test_eval_tw_matches_riesz_up_to_ball_volume(capsys):
    assert main(["eval", "tw", "--x", "0.2,0.1"]) == 0
    tw = _printed_value(capsys)
    assert main(["eval", "riesz", "--x", "0.2,0.1"]) == 0
    riesz = _printed_value(capsys)
    assert tw == pytest.approx(riesz / math.pi, rel=1e-3)


def test_eval_frac_derivative_matches_frozen_oracle(capsys):
    assert main(["eval", "frac_derivative", "--alpha", "0.5"]) == 0
    assert _printed_value(capsys) == pytest.approx(FRAC_ORACLE, rel=1e-3)


def test_eval_rejects_bad_alpha(capsys):
    assert main(["eval", "frac_derivative", "--alpha", "1.5"]) == 2
    assert "--alpha" in capsys.readouterr().err


def test_eval_unknown_operator_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["eval", "convolve"])
    assert exc.value.code == 2
