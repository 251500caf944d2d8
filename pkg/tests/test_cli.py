import json
import subprocess
import sys

import pytest

from ivorra_watkins.cli import SCHEMA, build_report, load_records, main, strip_timestamp


def run(capsys, *argv):
    rc = main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_generate_116c(capsys):
    rc, out, _ = run(capsys, "generate", "--type", "I", "--p", "29")
    assert rc == 0
    assert "(5)x^2 + (-1)x" in out and "(-10)x^2 + (29)x" in out


def test_generate_328a_json(capsys):
    rc, out, _ = run(capsys, "generate", "--type", "I", "--p", "41", "--k", "5", "--json")
    rec = json.loads(out)
    assert rc == 0 and rec["schema"] == SCHEMA
    assert rec["result"]["instance"]["E"] == [-3, -8]
    assert rec["result"]["instance"]["E_dual"] == [6, 41]


def test_generate_errors(capsys):
    rc, _, err = run(capsys, "generate", "--type", "I", "--p", "37")
    assert rc == 2 and "no k" in err
    rc, _, _ = run(capsys, "generate", "--type", "I", "--p", "29", "--k", "9")
    assert rc == 2


def test_generate_known_behaviour(capsys):
    rc, out, _ = run(capsys, "generate", "--type", "XIX", "--p", "31", "--k", "1")
    assert "p ≡ 7 (mod 8)" in out and "rank ≤ 1 by descent" in out


def test_descend_x(capsys):
    rc, out, _ = run(capsys, "descend", "--type", "X", "--p", "31", "--k", "5", "--mode", "both", "--json",
                     "--jobs", "1")
    rec = json.loads(out)
    assert rc == 0
    assert rec["result"]["certificates"]["Oracle"]["final_bound"] == 1
    sev = [d["severity"] for d in rec["result"]["discrepancies"]["printed_vs_Oracle"]]
    assert sev.count("contradiction") == 2


def test_descend_xvii(capsys):
    rc, out, _ = run(capsys, "descend", "--type", "XVII", "--p", "163", "--k", "1", "--json", "--jobs", "1")
    assert json.loads(out)["result"]["certificates"]["Oracle"]["final_bound"] == 0


def test_descend_xiv_flags_inconsistency(capsys):
    rc, out, _ = run(capsys, "descend", "--type", "XIV", "--p", "79", "--k", "1", "--mode", "both", "--jobs", "1")
    assert rc == 0
    assert "INCONSISTENT" in out


def test_descend_depth_too_small(capsys):
    rc, _, err = run(capsys, "descend", "--type", "X", "--p", "31", "--k", "5", "--depth", "1", "--jobs", "1")
    assert rc == 3 and "--depth" in err


def test_sweep(capsys):
    rc, out, _ = run(capsys, "sweep", "--type", "XIX", "--k", "2", "--bound", "1000")
    assert rc == 0 and json.loads(out) == [7, 41, 239]


def test_certify(capsys, curves_csv):
    rc, out, _ = run(capsys, "certify", "--type", "I", "--p", "29", "--q", "5", "--data", str(curves_csv),
                     "--json")
    rec = json.loads(out)
    by = {c["member"]: c for c in rec["result"]["certificates"]}
    assert rc == 0
    assert by["E_dual"]["verdict"] == "CertifiedUnconditional" and by["E_dual"]["path"] == "trick-c1"
    assert by["E"]["verdict"] == "Unknown" and by["E"]["path"] == "gap-trick-q5mod8"


def test_certify_errors(capsys, curves_csv):
    assert run(capsys, "certify", "--type", "I", "--p", "29", "--q", "29", "--data", str(curves_csv))[0] == 2
    assert run(capsys, "certify", "--type", "I", "--p", "29", "--q", "5")[0] == 2
    assert run(capsys, "certify", "--type", "I", "--p", "29", "--q", "5", "--data", "/nonexistent.csv")[0] == 4


def test_certify_manual_constants(capsys):
    rc, out, _ = run(capsys, "certify", "--type", "I", "--p", "29", "--q", "17", "--member", "E",
                     "--manin-constant", "2", "--modular-degree", "30", "--json")
    cert = json.loads(out)["result"]["certificates"][0]
    assert rc == 0 and cert["verdict"] == "CertifiedUnconditional" and cert["path"] == "trick-q1mod8"


def test_output_and_validate(capsys, tmp_path):
    path = tmp_path / "runs.jsonl"
    for argv in (["generate", "--type", "I", "--p", "29"],
                 ["descend", "--type", "X", "--p", "31", "--k", "5", "--mode", "both", "--jobs", "1"],
                 ["sweep", "--type", "IX", "--k", "2", "--bound", "1000"]):
        assert main(argv + ["--output", str(path)]) == 0
    capsys.readouterr()
    recs = load_records(path)
    assert [r["command"] for r in recs] == ["generate", "descend", "sweep"]
    rc, out, _ = run(capsys, "validate", str(path))
    assert rc == 0 and "ok" in out


def test_validate_catches_tampering(capsys, tmp_path):
    path = tmp_path / "runs.jsonl"
    main(["descend", "--type", "X", "--p", "31", "--k", "5", "--jobs", "1", "--output", str(path)])
    rec = json.loads(path.read_text())
    cells = rec["result"]["certificates"]["Oracle"]["tables"]["phi"]["cells"]
    cells["-1"]["status"] = "OracleIn"
    path.write_text(json.dumps(rec) + "\n")
    capsys.readouterr()
    rc, out, _ = run(capsys, "validate", str(path))
    assert rc == 2 and "marked in" in out


def test_records_deterministic_apart_from_timestamp(capsys):
    outs = []
    for jobs in ("1", "4"):
        main(["descend", "--type", "XVI", "--p", "83", "--mode", "both", "--json", "--jobs", jobs])
        outs.append(strip_timestamp(json.loads(capsys.readouterr().out)))
    a, b = outs
    a["config"].pop("jobs", None)
    b["config"].pop("jobs", None)
    assert a == b


def test_report_deterministic_and_small_bound():
    r1 = build_report(200)
    assert r1 == build_report(200)
    assert "no instances ≤ 5" in build_report(5)
    for heading in ("## Family instances", "## Descent grids", "Twist certification", "Label dictionary"):
        assert heading in r1


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "ivorra_watkins", "sweep", "--type", "IX", "--k", "2",
                          "--bound", "100"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout) == [5]
