import json
import subprocess
import sys

import pytest

from paramodular.cli import run_command
from paramodular.records import ResultRecord, check_record


def _run(argv, capsys):
    code = run_command(argv)
    out = capsys.readouterr().out
    return code, [json.loads(x) for x in out.splitlines() if x.strip()]


def test_tb_enum_counts(capsys):
    code, rows = _run(["tb", "enum", "--weight", "2", "--index", "249", "--qpow", "1"], capsys)
    assert code == 0 and len(rows) == 10
    assert all(r["type"] == "theta_block" and r["cusp"] and not r["denominator"] for r in rows)
    code, rows = _run(["tb", "enum", "--weight", "2", "--index", "249", "--qpow", "1",
                       "--denominator"], capsys)
    assert len(rows) == 11 and sum(r["denominator"] for r in rows) == 1


@pytest.fixture
def igusa_file(tmp_path):
    p = tmp_path / "igusa.jsonl"
    code = run_command(["search", "--weight", "10", "--level", "1", "--c", "1", "--t", "0",
                        "--nextra", "4", "--output", str(p)])
    assert code == 0
    return p


def test_search_output_is_deterministic(igusa_file, tmp_path):
    again = tmp_path / "again.jsonl"
    run_command(["search", "--weight", "10", "--level", "1", "--c", "1", "--t", "0",
                 "--nextra", "4", "--output", str(again)])
    assert igusa_file.read_bytes() == again.read_bytes()
    (line,) = igusa_file.read_text().splitlines()
    rr = ResultRecord.from_json(line)
    check_record(rr)
    assert (rr.k, rr.N, rr.theta_block, rr.symmetry, rr.cusp) == (10, 1, "0^20 1^2", 1, True)
    assert rr.confirmation["status"] == "confirmed"
    assert ResultRecord.from_json(rr.to_json()) == rr


def test_json_config_matches_flags(igusa_file, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"weight": 10, "level": 1, "c": 1, "t": 0, "nextra": 4}))
    code, rows = _run(["search", "--config", str(cfg)], capsys)
    assert code == 0
    assert rows == [json.loads(igusa_file.read_text())]


def test_confirm_and_cusp_check(igusa_file, capsys):
    code, rows = _run(["confirm", str(igusa_file)], capsys)
    assert code == 0 and rows[0]["confirmation"]["status"] == "confirmed"
    code, rows = _run(["cusp-check", str(igusa_file), "--line", "1"], capsys)
    assert code == 0 and rows[0]["cusp"] is True


def test_bp_expand_routes(igusa_file, capsys):
    outs = []
    for route in ("exp", "product"):
        code, rows = _run(["bp", "expand", str(igusa_file), "--xi-order", "2", "--q-order", "3",
                           "--route", route], capsys)
        assert code == 0
        outs.append(rows)
    assert outs[0] == outs[1]
    assert [r["xi_power"] for r in outs[0]] == [1, 2, 3]
    # the stored psi is too short for this window
    code, rows = _run(["bp", "expand", str(igusa_file), "--xi-order", "2", "--q-order", "4"],
                      capsys)
    assert code == 1 and "q^6" in rows[0]["message"]


def test_basis_shortfall_exit_code(capsys):
    code, rows = _run(["search", "--weight", "2", "--level", "249", "--c", "1", "--t", "0"],
                      capsys)
    assert code == 3
    assert rows[0]["type"] == "error" and rows[0]["error"] == "basis-shortfall"
    assert (rows[0]["k"], rows[0]["m"]) == (2, 498) and rows[0]["remedy"]


def test_abort_exit_code(capsys):
    code, rows = _run(["search", "--weight", "46", "--level", "4", "--c", "1", "--t", "3",
                       "--nextra", "4", "--step5-policy", "abort", "--skip-cusp-test"], capsys)
    assert code == 2
    (ab,) = rows
    assert ab["type"] == "abort" and ab["step"] == "step5-strict-dependence"


def test_input_errors(tmp_path, capsys):
    code, rows = _run(["search", "--c", "1", "--t", "0"], capsys)
    assert code == 1 and rows[0]["type"] == "error"
    code, _ = _run(["search", "--weight", "2", "--level", "249"], capsys)
    assert code == 1
    empty = tmp_path / "none.jsonl"
    empty.write_text("")
    code, _ = _run(["confirm", str(empty)], capsys)
    assert code == 1


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "paramodular", "tb", "enum", "--weight", "9",
                          "--index", "16", "--qpow", "2"], capture_output=True, text=True)
    assert res.returncode == 0
    assert [json.loads(x)["block"] for x in res.stdout.splitlines()] == ["0^18 1^11 2^3 3^1"]
