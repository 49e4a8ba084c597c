from __future__ import annotations

import csv
import io
import json
import shutil
import subprocess

import pytest

from pathsampler.cli import main
from pathsampler.metrics import CSV_FIELDS
from pathsampler.paths import Model, Path, is_positive


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_sample_motzkin(capsys):
    code, out, _ = run(capsys, "sample", "--model", "motzkin", "--kind", "positive", "--length", "5",
                       "--count", "3", "--seed", "1")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 3
    for line in lines:
        assert len(line) == 5 and set(line) <= set("UFD") and is_positive(Path.from_text(line))


def test_sample_is_deterministic(capsys):
    a = run(capsys, "sample", "--model", "schroeder", "--length", "30", "--count", "4", "--seed", "0x2a")[1]
    b = run(capsys, "sample", "--model", "schroeder", "--length", "30", "--count", "4", "--seed", "42")[1]
    assert a == b


def test_sample_colored(capsys):
    code, out, _ = run(capsys, "sample", "--model", "motzkin-colored", "--weight", "2/1", "--length", "4")
    line = out.strip()
    assert code == 0 and len(line) == 4 and set(line) <= set("UFDC")
    assert is_positive(Path.from_text(line, Model.COLORED))


def test_sample_json_and_csv(capsys):
    code, out, _ = run(capsys, "sample", "--model", "schroeder-little", "--kind", "excursion",
                       "--length", "8", "--count", "2", "--format", "json")
    data = json.loads(out)
    assert code == 0 and len(data) == 2
    code, out, _ = run(capsys, "sample", "--length", "6", "--count", "2", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["index"] for r in rows] == ["0", "1"] and all(len(r["steps"]) == 6 for r in rows)


@pytest.mark.parametrize("argv,needle", [
    (("sample", "--model", "schroeder", "--kind", "excursion", "--length", "3"), "even length"),
    (("sample", "--model", "motzkin", "--weight", "2", "--length", "3"), "--weight"),
    (("sample", "--model", "motzkin-colored", "--weight", "-1/2", "--length", "3"), "weight"),
    (("sample", "--model", "motzkin-colored", "--weight", "x", "--length", "3"), "weight"),
    (("sample", "--length", "-1"), "length"),
    (("sample", "--model", "nope", "--length", "3"), "invalid choice"),
    (("bench", "--model", "schroeder", "--kind", "excursion", "--baseline", "florentine", "--length", "4"),
     "florentine"),
])
def test_errors_are_single_line(capsys, argv, needle):
    code, out, err = run(capsys, *argv)
    assert code != 0 and out == ""
    assert err.count("\n") == 1 and needle in err


def test_bench_summary_and_csv(capsys, tmp_path):
    csv_path = tmp_path / "rows.csv"
    code, out, err = run(capsys, "bench", "--model", "motzkin", "--length", "300", "--trials", "20",
                         "--csv-out", str(csv_path))
    s = json.loads(out)
    assert code == 0 and s["trials"] == 20 and s["n"] == 300 and "mean_time_factor" in s
    assert "trials in" in err
    rows = list(csv.DictReader(csv_path.open()))
    assert tuple(rows[0]) == CSV_FIELDS and len(rows) == 20
    again = run(capsys, "bench", "--model", "motzkin", "--length", "300", "--trials", "20")[1]
    assert again == out


def test_bench_florentine(capsys):
    code, out, _ = run(capsys, "bench", "--baseline", "florentine", "--model", "motzkin",
                       "--length", "2000", "--trials", "40", "--format", "json")
    assert code == 0 and abs(json.loads(out)["mean_time_factor"] - 2) < 0.3


def test_verify_counts_json(capsys, tmp_path):
    target = tmp_path / "report.json"
    code, out, _ = run(capsys, "verify", "--suite", "counts", "--max-length", "8", "--format", "json",
                       "--json-out", str(target))
    rep = json.loads(out)
    assert code == 0 and rep["passed"] and rep["suite"] == "counts"
    assert json.loads(target.read_text()) == rep


def test_verify_text(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "uniformity-exact", "--max-length", "4")
    assert code == 0 and out.splitlines()[-1].startswith("uniformity-exact:")
    assert all(line.startswith("PASS") for line in out.splitlines()[:-1])


def test_verify_lemmas_small(capsys):
    assert run(capsys, "verify", "--suite", "lemmas", "--max-length", "5")[0] == 0


@pytest.mark.skipif(shutil.which("pathsampler") is None, reason="console script not installed")
def test_console_script():
    out = subprocess.run(["pathsampler", "sample", "--length", "7", "--seed", "3"],
                         capture_output=True, text=True, check=True)
    assert len(out.stdout.strip()) == 7
