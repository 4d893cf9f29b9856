import pytest

from freqformer import cli, paper_tables
from freqformer.paper_tables import DURATIONS, N_GRID, PaperTables


def test_every_table_has_its_grid():
    tables = PaperTables.default()
    for table_id in range(1, 7):
        assert tuple(tables.table(table_id)) == N_GRID
    assert tuple(tables.table(7)) == DURATIONS
    with pytest.raises(ValueError):
        tables.table(0)


def test_spot_cells():
    t = PaperTables.default()
    assert t.cell(1, 65_536, "dense_flops") == 549_755_813_888
    assert t.cell(1, 65_536, "freq_total_flops") == 2_229_346_304
    assert t.cell(1, 65_536, "reduction") == 246.59
    assert t.cell(3, 65_536, "freq_total_intensity") == 87.7795
    assert t.cell(3, 1_048_576, "freq_total_intensity") == 70.8834
    assert t.cell(4, 65_536, "dense_time_ms") == 2.2295
    assert t.cell(7, 120, "dense_time_ms") == 1280.6289
    assert t.get(7, 120, "no_such_column") is None


def test_consistency_holds():
    assert PaperTables.default().consistency_failures() == []


def test_default_is_a_private_copy():
    t = PaperTables.default()
    t.tables[1][65_536]["dense_flops"] = 0
    assert PaperTables.default().cell(1, 65_536, "dense_flops") == 549_755_813_888


def test_corrupted_constant_is_caught(monkeypatch, capsys):
    row = dict(paper_tables.TABLE1[131_072], transform_flops=1_308_622_849)
    monkeypatch.setitem(paper_tables.TABLE1, 131_072, row)
    failures = PaperTables.default().consistency_failures()
    assert failures == ["table1 N=131072: total != attention + transform"]
    assert cli.main(["check"]) != 0
    out = capsys.readouterr().out
    assert "FAIL paper_tables_consistent" in out
    assert "properties_failed=1" in out
