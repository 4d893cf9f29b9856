import csv
import io
import json
import subprocess
import sys

import pytest

from freqformer import cli
from freqformer.paper_tables import DURATIONS, N_GRID, PaperTables


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_sim_flops_over_grid(capsys):
    code, out, _ = run(capsys, "sim", "flops", "--n", "table")
    assert code == 0
    rows = parse(out)
    assert [int(r["n"]) for r in rows] == list(N_GRID)
    tables = PaperTables.default()
    for r in rows:
        assert int(r["dense_flops"]) == tables.cell(1, int(r["n"]), "dense_flops")
    assert "deviation_pct" in rows[0]


def test_sim_duration_matches_dense_column(capsys):
    code, out, _ = run(capsys, "sim", "duration", "--duration", "5,10,20,40,80,120", "--profile", "h100")
    assert code == 0
    rows = parse(out)
    assert [int(r["duration_s"]) for r in rows] == list(DURATIONS)
    tables = PaperTables.default()
    for r in rows:
        published = tables.cell(7, int(r["duration_s"]), "dense_time_ms")
        assert abs(float(r["dense_time_ms"]) - published) <= 1e-3 * published


def test_sim_needs_values(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["sim", "flops"])
    assert exc.value.code not in (0, None)
    with pytest.raises(SystemExit) as exc:
        cli.main(["sim", "flops", "--n", ","])
    assert exc.value.code not in (0, None)


def test_sim_bad_inputs(capsys):
    assert cli.main(["sim", "flops", "--n", "-4"]) == 2
    assert cli.main(["sim", "throughput", "--n", "65536", "--profile", "tpu"]) == 2
    with pytest.raises(SystemExit):
        cli.main(["sim", "flops", "--n", "65536", "--mode", "fastest"])


def test_sim_throughput_separate_columns(capsys):
    code, out, _ = run(capsys, "sim", "throughput", "--n", "65536", "--separate")
    assert code == 0
    assert "freq_separate_time_ms" in parse(out)[0]


def test_sim_csv_is_byte_stable(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert cli.main(["sim", "throughput", "--n", "table", "--out", str(path)]) == 0
    data = a.read_bytes()
    assert data == b.read_bytes()
    assert b"\r" not in data and data.endswith(b"\n")
    first = parse(data.decode())[0]
    assert first["dense_time_ms"] == "2.2295" and first["speedup"].count(".") == 1
    assert len(first["speedup"].split(".")[1]) == 2


def test_sim_svg(tmp_path, capsys):
    out = tmp_path / "flops.csv"
    assert cli.main(["sim", "flops", "--n", "table", "--out", str(out), "--svg"]) == 0
    svg = out.with_suffix(".svg").read_text()
    assert svg.lstrip().startswith("<?xml") and "<svg" in svg
    roof = tmp_path / "roof.csv"
    assert cli.main(["sim", "intensity", "--n", "table", "--out", str(roof), "--svg"]) == 0
    assert roof.with_suffix(".svg").exists()


def compare(capsys, *argv):
    code, out, err = run(capsys, "compare", *argv)
    assert code == 0
    return parse(out), err


def pick(rows, key, column, basis="formula"):
    (row,) = [r for r in rows if (int(r["key"]), r["column"], r["basis"]) == (key, column, basis)]
    return float(row["deviation_pct"])


def test_compare_table1(capsys):
    rows, err = compare(capsys, "--table", "1", "--transform-offset", "4")
    for n in N_GRID:
        assert pick(rows, n, "dense_flops") == 0.0
    zero = [n for n in N_GRID if pick(rows, n, "transform_flops") == 0.0]
    assert zero == [65_536, 131_072, 262_144, 1_048_576]
    assert 0.7 <= pick(rows, 65_536, "freq_attention_flops") <= 1.1
    assert -23.0 <= pick(rows, 1_048_576, "freq_attention_flops") <= -22.0
    assert "9.3-27.3x" in err


def test_compare_table2_dense_bytes(capsys):
    rows, _ = compare(capsys, "--table", "2")
    for n in N_GRID:
        assert pick(rows, n, "dense_bytes") == 0.0


def test_compare_table6_separate_time(capsys):
    rows, _ = compare(capsys, "--table", "6")
    assert abs(pick(rows, 65_536, "separate_time_ms", "anchored")) < 1.0


def test_compare_unknown_table():
    with pytest.raises(SystemExit):
        cli.main(["compare", "--table", "9"])


def test_config_precedence(tmp_path, capsys):
    conf = tmp_path / "cfg.json"
    conf.write_text(json.dumps({"transform_log_offset": 4, "profile": "h20"}))
    _, out, _ = run(capsys, "sim", "flops", "--n", "65536", "--config", str(conf))
    assert int(parse(out)[0]["transform_flops"]) == 603_979_776
    _, out, _ = run(capsys, "sim", "flops", "--n", "65536", "--config", str(conf), "--transform-offset", "0")
    assert int(parse(out)[0]["transform_flops"]) == 805_306_368
    _, out, _ = run(capsys, "sim", "throughput", "--n", "65536", "--config", str(conf))
    assert float(parse(out)[0]["dense_time_ms"]) == pytest.approx(16.8952, rel=1e-3)
    _, out, _ = run(capsys, "sim", "throughput", "--n", "65536", "--config", str(conf), "--profile", "h100")
    assert float(parse(out)[0]["dense_time_ms"]) == pytest.approx(2.2295, rel=1e-3)


def test_profile_from_json(tmp_path, capsys):
    hw = tmp_path / "hw.json"
    hw.write_text(json.dumps({"name": "double", "peak_flops": 2 * 989e12, "peak_bandwidth_bytes_per_s": 3.35e12,
                              "eta_compute": 0.25, "eta_bandwidth": 0.7, "launch_fused_s": 0.0,
                              "launch_unfused_s": 0.0}))
    _, out, _ = run(capsys, "sim", "throughput", "--n", "65536", "--profile", str(hw))
    assert float(parse(out)[0]["dense_time_ms"]) == pytest.approx(549_755_813_888 / (2 * 247.25e12) * 1e3, rel=1e-4)
    assert parse(out)[0]["deviation_pct"] == ""


def test_demo_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert cli.main(["demo", "--T", "8", "--H", "8", "--W", "8", "--d-model", "128",
                         "--n-heads", "2", "--seed", "7", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    metrics = dict(line.split(",") for line in a.read_text().splitlines()[1:])
    assert float(metrics["sum_of_squares_residual"]) <= 1e-10
    out = capsys.readouterr().out
    assert "routing pi=" in out and "error total=" in out


def test_demo_saturated_is_self_consistent():
    summary = cli.demo_summary(8, 8, 8, 128, 2, t=500, seed=7, saturate=True)
    assert summary["total_error"] < 1e-9


def test_demo_token_cap(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["demo", "--T", "16", "--H", "16", "--W", "32"])
    assert "4096" in str(exc.value.code)


def test_check_output(capsys):
    code, out, _ = run(capsys, "check")
    assert code == 0
    lines = out.strip().splitlines()
    assert all(line.startswith("PASS ") for line in lines[:-1])
    assert lines[-1] == f"properties_passed={len(lines) - 1} properties_failed=0"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "freqformer", "sim", "traffic", "--n", "65536"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.splitlines()[1].startswith("65536,8589934592,")
