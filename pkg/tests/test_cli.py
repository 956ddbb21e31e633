from __future__ import annotations

import csv
import io
import re
import subprocess
import sys

import pytest

from mabravo.cli import CSV_HEADER, EXIT_CHECK_FAILED, EXIT_IO, EXIT_OK, EXIT_USAGE, main


def _svg(tmp_path, *args) -> tuple[int, str]:
    out = tmp_path / "scene.svg"
    rc = main([*map(str, args), "--out", str(out)])
    return rc, out.read_text(encoding="utf-8")


def test_graphical_example(tmp_path, capsys):
    rc, svg = _svg(tmp_path, 100, 10, 1000)
    assert rc == EXIT_OK
    cells = re.search(r'<g id="cells">(.*?)</g>', svg, re.S).group(1)
    assert cells.count("<polygon") == 100
    assert svg.count('stroke="magenta"') == 1
    assert 'stroke="red"' in svg and 'stroke="green"' in svg and 'stroke="blue"' in svg
    assert 'stroke="cyan"' in svg
    summary = capsys.readouterr().out
    assert summary.count(": pass") == 7 and "FAIL" not in summary


def test_graphical_single_site(tmp_path, capsys):
    rc, svg = _svg(tmp_path, 1, 3, 7)
    assert rc == EXIT_OK
    cells = re.search(r'<g id="cells">(.*?)</g>', svg, re.S).group(1)
    assert cells.count("<polygon") == 1
    assert re.search(r'<g id="route">(.*?)</g>', svg, re.S).group(1).count("<circle") == 1
    assert "route: 0  (0 hops" in capsys.readouterr().out


def test_graphical_is_byte_identical(tmp_path):
    a = tmp_path / "a.svg"
    b = tmp_path / "b.svg"
    assert main(["50", "6", "3", "--out", str(a)]) == EXIT_OK
    assert main(["50", "6", "3", "--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def _batch(args, capsys) -> tuple[int, list[list[str]], str]:
    rc = main([*map(str, args)])
    cap = capsys.readouterr()
    return rc, list(csv.reader(io.StringIO(cap.out))), cap.err


def test_batch_two_sites(capsys):
    rc, rows, err = _batch([2, 3, 1, 1, 5], capsys)
    assert rc == EXIT_OK
    assert tuple(rows[0]) == CSV_HEADER
    assert len(rows) == 2
    row = dict(zip(CSV_HEADER, rows[1]))
    assert row["messages_sent"] in {"0", "1"}
    assert row["checks_passed"] == "true"
    assert "p50" in err


def test_batch_shape_and_summary(capsys):
    rc, rows, err = _batch([30, 5, 4, 3, 8], capsys)
    assert rc == EXIT_OK
    body = rows[1:]
    assert len(body) == 12
    assert [(int(r[0]), int(r[1])) for r in body] == [(k, j) for k in range(3) for j in range(4)]
    for r in body:
        row = dict(zip(CSV_HEADER, r))
        assert int(row["messages_sent"]) == int(row["aoi_sites"]) - 1
        assert re.fullmatch(r"\d+\.\d{6}", row["oracle_avg_depth"])
    for name in ("mabravo_d_hops", "oracle_unicast_hops", "mabravo_r_avg_depth", "oracle_avg_depth"):
        assert name in err


def test_batch_to_file_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["40", "6", "5", "3", "21", "--out", str(a)]) == EXIT_OK
    assert main(["40", "6", "5", "3", "21", "--out", str(b), "--jobs", "2"]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    # summary goes to stdout when the CSV has its own file
    assert "# runs: 15" in capsys.readouterr().out


def test_no_verify_leaves_column_empty(capsys):
    rc, rows, err = _batch([20, 4, 2, 1, 3, "--no-verify"], capsys)
    assert rc == EXIT_OK
    assert all(r[-1] == "" for r in rows[1:])
    assert "failed checks" not in err


def test_literal_guard_fails_checks(capsys):
    rc, rows, _ = _batch([60, 8, 5, 1, 14, "--literal-guard"], capsys)
    assert rc == EXIT_CHECK_FAILED
    assert "false" in {r[-1] for r in rows[1:]}


@pytest.mark.parametrize("args", [
    [],
    ["1", "2"],
    ["1", "2", "3", "4"],
    ["1", "2", "3", "4", "5", "6"],
    ["10", "x", "3"],
    ["0", "3", "1"],
    ["10", "2", "1"],
    ["10", "3", "1", "--world-min", "5", "--world-max", "5"],
    ["10", "3", "1", "--epsilon", "-1"],
    ["10", "3", "1", "1", "1", "--jobs", "0"],
])
def test_usage_errors(args, capsys):
    assert main(args) == EXIT_USAGE
    assert "usage" in capsys.readouterr().err


def test_unwritable_output(tmp_path, capsys):
    target = tmp_path / "missing" / "out.svg"
    assert main(["10", "3", "1", "--out", str(target)]) == EXIT_IO
    assert main(["10", "3", "1", "1", "1", "--out", str(target)]) == EXIT_IO


def test_small_world_and_epsilon(tmp_path):
    rc, svg = _svg(tmp_path, 30, 5, 2, "--world-min", "-1", "--world-max", "1", "--epsilon", "1e-9")
    assert rc == EXIT_OK
    assert 'viewBox="-1.04 -1.04 2.08 2.08"' in svg


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "mabravo", "5", "3", "1", "1", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == ",".join(CSV_HEADER)


def test_tolerance_is_restored(tmp_path):
    from mabravo import geometry as geo

    before = geo.current_tolerance()
    main(["10", "3", "1", "--world-min", "-1", "--world-max", "1", "--out", str(tmp_path / "x.svg")])
    main(["10", "3", "1", "--epsilon", "1e-3", "--out", str(tmp_path / "y.svg")])
    assert geo.current_tolerance() == before
