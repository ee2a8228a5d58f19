import csv
import io
import json
import subprocess
import sys

import pytest

from bos_spectrum.cli import main, render


def run(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_spectrum_two_by_two(capsys):
    code, out, _ = run(["spectrum", "-e", "0.3", "-N", "2"], capsys)
    assert code == 0
    r = rows(out)
    assert [x["re_lambda"] for x in r] == ["1.1", "1.9"]
    assert all(float(x["im_lambda"]) == 0 for x in r)
    assert list(r[0]) == ["epsilon", "N", "index", "re_lambda", "im_lambda", "residual",
                          "stable", "decay_slope"]
    assert "\r" not in out


def test_spectrum_single_row_json(capsys):
    code, out, _ = run(["spectrum", "-e", "0.9", "-N", "1", "--format", "json"], capsys)
    assert code == 0
    data = json.loads(out)
    assert len(data) == 1 and data[0]["re_lambda"] == 1.0 and data[0]["decay_slope"] is None


def test_epsilon_out_of_range(capsys):
    code, _, err = run(["spectrum", "-e", "2.5", "-N", "2"], capsys)
    assert code == 1
    rec = json.loads(err)
    assert rec["exit_code"] == 1 and "(0, 2)" in rec["message"]


def test_crosscheck_rejects_integer_inverse(capsys):
    code, _, err = run(["crosscheck", "-e", "1.0"], capsys)
    assert code == 1
    assert "1/ε ∈ Z" in json.loads(err)["message"]


def test_usage_errors_exit_one(capsys):
    assert run(["sweep"], capsys)[0] == 1
    assert run(["nonsense"], capsys)[0] == 1
    assert run(["spectrum", "-e", "0.5", "-N", "x"], capsys)[0] == 1
    assert run(["spectrum", "-e", "0.5", "-N", "0"], capsys)[0] == 1


def test_crosscheck_underresolved_fails(capsys, tmp_path):
    out = tmp_path / "cc.csv"
    code, _, err = run(["crosscheck", "-e", "1.3", "-N", "20", "--gate", "1e-10", "-o",
                        str(out)], capsys)
    assert code == 2
    rec = json.loads(err)
    assert rec["exit_code"] == 2 and "row" in rec
    assert out.exists()


def test_crosscheck_half(capsys, tmp_path):
    out = tmp_path / "cc.csv"
    code, _, err = run(["crosscheck", "-e", "0.5", "-N", "1000", "-K", "200",
                        "--allow-integer-inverse", "-o", str(out)], capsys)
    assert code == 0, err
    r = rows(out.read_text())
    assert len(r) == 10
    assert max(float(x["discrepancy"]) for x in r) <= 1e-6
    complete = [x for x in r if x["complete"] == "true"]
    assert complete and all(x["missing_routes"] == "" for x in complete)


def test_sweep_blocks_in_order(capsys, tmp_path):
    out = tmp_path / "agg.csv"
    code, _, _ = run(["sweep", "-e", "0.7", "-e", "0.3", "-N", "60", "-o", str(out)], capsys)
    assert code == 0
    r = rows(out.read_text())
    eps = [float(x["epsilon"]) for x in r]
    assert eps == sorted(eps) and set(eps) == {0.3, 0.7}
    for e in (0.3, 0.7):
        ks = [int(x["k"]) for x in r if float(x["epsilon"]) == e]
        assert ks == list(range(1, len(ks) + 1))
    assert (tmp_path / "agg.eps0.3.csv").exists() and (tmp_path / "agg.eps0.7.csv").exists()


def test_scan_command(capsys):
    code, out, _ = run(["scan", "-e", "0.5", "--rect", "0", "4", "-1", "1", "--grid", "6", "3"],
                       capsys)
    assert code == 0
    r = rows(out)
    assert r and all(abs(float(x["im_lambda"])) <= 1e-8 for x in r)


def test_output_is_repeatable(capsys):
    a = run(["spectrum", "-e", "0.7", "-N", "50"], capsys)[1]
    b = run(["spectrum", "-e", "0.7", "-N", "50"], capsys)[1]
    assert a == b


def test_render_formats():
    recs = [{"a": 0.1, "b": None, "c": True, "d": float("nan")}]
    assert render(recs, ["a", "b", "c", "d"], "csv") == "a,b,c,d\n0.1,,true,nan\n"
    assert json.loads(render(recs, ["a", "b", "c", "d"], "json")) == [
        {"a": 0.1, "b": None, "c": True, "d": None}]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "bos_spectrum", "spectrum", "-e", "0.3", "-N",
                           "2"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.splitlines()[1].startswith("0.3,2,1,1.1,")
