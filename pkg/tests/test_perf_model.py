import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from freqformer import perf_model as pm
from freqformer.exceptions import ConfigError
from freqformer.paper_tables import N_GRID, PaperTables

CFG = pm.CostConfig()
OFF4 = CFG.with_overrides(transform_log_offset=4)
H100, H20 = pm.PROFILES["h100"], pm.PROFILES["h20"]


def closed_form(n, cfg=CFG):
    # direct transcription with fractions, independent of the module helpers
    n = Fraction(n)
    low = n * Fraction(1, 8) / 4
    return low ** 2 + n * Fraction(3, 8) * cfg.k_mid + n / 2 * cfg.w


@pytest.mark.parametrize("n,expected", [(65_536, 12_582_912), (1_048_576, 1_207_959_552)])
def test_interactions_freq(n, expected):
    assert pm.interactions_freq(n) == expected == closed_form(n)
    assert isinstance(pm.interactions_freq(n), int)


def test_interactions_polynomial_scaling():
    for n in N_GRID[:-1]:
        low, mid, high = pm.band_sizes(n)
        low2, mid2, high2 = pm.band_sizes(2 * n)
        assert (mid2, high2) == (2 * mid, 2 * high) and low2 ** 2 == 4 * low ** 2
    with pytest.raises(ValueError):
        pm.interactions_freq(0)


@pytest.mark.parametrize("n,expected", [(65_536, 549_755_813_888), (1_048_576, 140_737_488_355_328), (1, 128)])
def test_flops_dense(n, expected):
    assert pm.flops_dense(n) == expected


@pytest.mark.parametrize("n,expected,published", [
    (65_536, 1_610_612_736, 1_625_366_528),
    (1_048_576, 154_618_822_656, 119_789_838_336),
])
def test_flops_freq_attention(n, expected, published):
    assert pm.flops_freq_attention(n) == expected == 128 * closed_form(n)
    assert PaperTables.default().get(1, n, "freq_attention_flops") == published


def test_reduction_increases_over_grid():
    ratios = [pm.flops_dense(n) / pm.flops_freq_attention(n) for n in N_GRID]
    assert all(a < b for a, b in zip(ratios, ratios[1:]))
    totals = [pm.flops_dense(n) / pm.flops_freq_total(n) for n in N_GRID]
    assert all(a < b for a, b in zip(totals, totals[1:]))
    for cfg in (CFG, OFF4):
        totals = [pm.flops_row(n, cfg)["reduction"] for n in N_GRID]
        assert all(a < b for a, b in zip(totals, totals[1:]))


@pytest.mark.parametrize("n,cfg,expected", [
    (65_536, CFG, 805_306_368),
    (65_536, OFF4, 603_979_776),
    (1_048_576, OFF4, 12_884_901_888),
])
def test_flops_transform(n, cfg, expected):
    assert pm.flops_transform(n, cfg) == expected == 12 * n * 64 * (n.bit_length() - 1 - cfg.transform_log_offset)


def test_flops_transform_rejects_large_offset():
    with pytest.raises(ValueError):
        pm.flops_transform(16, CFG.with_overrides(transform_log_offset=4))
    assert pm.flops_transform(32, CFG.with_overrides(transform_log_offset=4)) == 12 * 32 * 64


def test_traffic():
    assert pm.traffic_dense(65_536) == 8_589_934_592 == 8 * 2 ** 30
    assert pm.traffic_freq(65_536) == 25_165_824
    assert pm.traffic_dense(1) == 2


@given(st.integers(min_value=5, max_value=30))
def test_traffic_flops_consistency_chain(e):
    n = 2 ** e
    assert pm.traffic_freq(n) * 2 * 64 == 2 * pm.flops_freq_attention(n)
    assert pm.flops_dense(n) == 128 * n * n


def test_exact_integers_on_grid():
    for n in N_GRID:
        for value in (pm.flops_dense(n), pm.traffic_dense(n), pm.interactions_freq(n),
                      pm.traffic_freq(n), pm.flops_freq_attention(n)):
            assert type(value) is int


def test_intensity():
    for n in N_GRID:
        row = pm.intensity_row(n)
        assert row["dense_intensity"] == 64.0 and row["freq_attention_intensity"] == 64.0
    with pytest.raises(ValueError):
        pm.arithmetic_intensity(1, 0)


def test_roofline_dense_times():
    assert pm.dense_time(65_536, CFG, H100) * 1e3 == pytest.approx(2.2295, rel=1e-3)
    assert pm.dense_time(65_536, CFG, H20) * 1e3 == pytest.approx(16.8952, rel=1e-3)
    expected = 549_755_813_888 / 247.25e12 + 6e-6
    assert pm.dense_time(65_536, CFG, H100) == pytest.approx(expected, rel=1e-15)


def test_roofline_freq_fused_anchor():
    flops = PaperTables.default().get(1, 1_048_576, "freq_total_flops")
    nbytes = PaperTables.default().get(2, 1_048_576, "freq_bytes")
    assert pm.roofline_time(flops, nbytes, H100) * 1e3 == pytest.approx(0.5426, rel=5e-3)


def test_roofline_modes():
    f, b = 1e12, 1e10
    compute, memory = f / (989e12 * 0.25), b / (3.35e12 * 0.70)
    assert pm.roofline_time(f, b, H100, "roofline-max") == pytest.approx(max(compute, memory) + 6e-6)
    assert pm.roofline_time(f, b, H100, "roofline-max", fused=False) == pytest.approx(
        max(compute, 1.35 * memory) + 18e-6)
    assert pm.roofline_time(f, b, H100, fused=False) == pytest.approx(compute + 1.35 * memory + 18e-6)
    with pytest.raises(ValueError):
        pm.roofline_time(f, b, H100, "fastest")


def test_tokens_per_second():
    assert pm.tokens_per_second(65_536, 2.2295e-3) == pytest.approx(29_394_504, rel=1e-3)
    assert pm.tokens_per_second(1, 1.0) == 1
    assert pm.tokens_per_second(1000, 0.5) == 2 * pm.tokens_per_second(1000, 1.0)
    with pytest.raises(ValueError):
        pm.tokens_per_second(1, 0)


@pytest.mark.parametrize("seconds,tokens", [(5, 65_536), (10, 131_072), (120, 1_572_864)])
def test_duration_to_tokens(seconds, tokens):
    assert pm.duration_to_tokens(seconds) == tokens


def test_hardware_profile_json_round_trip(tmp_path):
    doc = H20.to_dict()
    assert set(doc) == {"name", "peak_flops", "peak_bandwidth_bytes_per_s", "eta_compute",
                        "eta_bandwidth", "launch_fused_s", "launch_unfused_s"}
    path = tmp_path / "hw.json"
    path.write_text(json.dumps(doc))
    assert pm.HardwareProfile.from_json(path) == H20
    assert pm.get_profile(str(path)) == H20
    assert H100.to_dict()["peak_flops"] == 989e12 and H100.to_dict()["launch_unfused_s"] == 18e-6


def test_hardware_profile_validation():
    bad = dict(H100.to_dict(), eta_compute=1.5)
    with pytest.raises(ConfigError):
        pm.HardwareProfile.from_dict(bad)
    with pytest.raises(ConfigError):
        pm.HardwareProfile.from_dict({"name": "x"})
    with pytest.raises(ConfigError):
        pm.get_profile("tpu-v9")


def test_cost_config_validation():
    with pytest.raises(ConfigError):
        pm.CostConfig(rho_low=0.5)
    with pytest.raises(ConfigError):
        CFG.with_overrides(warp_size=32)
    assert CFG.with_overrides(k_mid=None) == CFG


def test_table_report_table1():
    rep = pm.table_report(1, OFF4)
    for n in N_GRID:
        assert rep.find(n, "dense_flops").deviation_pct == 0
    assert rep.find(65_536, "freq_attention_flops").deviation_pct == pytest.approx(0.9, abs=0.2)
    assert rep.find(1_048_576, "freq_attention_flops").deviation_pct == pytest.approx(-22.5, abs=0.5)
    assert any("9.3" in note and "27.3" in note for note in rep.notes)
    with pytest.raises(ValueError):
        pm.table_report(8)


def test_table_report_table7_dense_120s():
    row = pm.table_report(7).find(120, "dense_time_ms")
    assert row.computed == pytest.approx(1280.6289, rel=1e-3)


def test_table_report_does_not_mutate_constants():
    tables = PaperTables.default()
    before = json.dumps(tables.tables, sort_keys=True, default=str)
    for table_id in range(1, 8):
        pm.table_report(table_id, paper=tables)
    assert json.dumps(tables.tables, sort_keys=True, default=str) == before


def test_deviation_sign():
    assert pm.deviation_pct(100, 101) == pytest.approx(1.0)
    assert pm.deviation_pct(0, 0) == 0.0
