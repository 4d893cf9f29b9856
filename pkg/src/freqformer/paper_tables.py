"""Published per-layer cost tables, embedded as regression anchors.

Keys are sequence lengths (tables 1-6) or video durations in seconds (table 7).
Values are copied cell for cell, including cells that disagree with the
closed-form cost model; :mod:`freqformer.perf_model` reports those gaps.
"""
import copy
from dataclasses import dataclass

N_GRID = (65_536, 131_072, 262_144, 524_288, 1_048_576)
DURATIONS = (5, 10, 20, 40, 80, 120)

TABLE1 = {
    65_536: dict(dense_flops=549_755_813_888, freq_attention_flops=1_625_366_528,
                 transform_flops=603_979_776, freq_total_flops=2_229_346_304, reduction=246.59),
    131_072: dict(dense_flops=2_199_023_255_552, freq_attention_flops=4_056_154_112,
                  transform_flops=1_308_622_848, freq_total_flops=5_364_776_960, reduction=409.90),
    262_144: dict(dense_flops=8_796_093_022_208, freq_attention_flops=11_314_446_336,
                  transform_flops=2_818_572_288, freq_total_flops=14_133_018_624, reduction=622.37),
    524_288: dict(dense_flops=35_184_372_088_832, freq_attention_flops=35_026_370_560,
                  transform_flops=6_040_797_184, freq_total_flops=41_067_167_744, reduction=856.82),
    1_048_576: dict(dense_flops=140_737_488_355_328, freq_attention_flops=119_789_838_336,
                    transform_flops=12_884_901_888, freq_total_flops=132_674_740_224, reduction=1_060.70),
}

TABLE2 = {
    65_536: dict(dense_bytes=8_589_934_592, dense_gib=8.0, freq_bytes=25_396_352,
                 freq_gib=0.0237, reduction=338.24),
    131_072: dict(dense_bytes=34_359_738_368, dense_gib=32.0, freq_bytes=63_377_408,
                  freq_gib=0.0590, reduction=542.14),
    262_144: dict(dense_bytes=137_438_953_472, dense_gib=128.0, freq_bytes=176_788_224,
                  freq_gib=0.1647, reduction=777.19),
    524_288: dict(dense_bytes=549_755_813_888, dense_gib=512.0, freq_bytes=547_287_040,
                  freq_gib=0.5097, reduction=1_004.51),
    1_048_576: dict(dense_bytes=2_199_023_255_552, dense_gib=2048.0, freq_bytes=1_871_716_224,
                    freq_gib=1.7434, reduction=1_174.87),
}

TABLE3 = {
    65_536: dict(dense_intensity=64.0, freq_attention_intensity=64.0, freq_total_intensity=87.7795),
    131_072: dict(dense_intensity=64.0, freq_attention_intensity=64.0, freq_total_intensity=84.6479),
    262_144: dict(dense_intensity=64.0, freq_attention_intensity=64.0, freq_total_intensity=79.9413),
    524_288: dict(dense_intensity=64.0, freq_attention_intensity=64.0, freq_total_intensity=75.0369),
    1_048_576: dict(dense_intensity=64.0, freq_attention_intensity=64.0, freq_total_intensity=70.8834),
}

# H100
TABLE4 = {
    65_536: dict(dense_time_ms=2.2295, dense_tokens_per_s=29_394_504, freq_fused_time_ms=0.0150,
                 freq_fused_tokens_per_s=4_380_358_757, speedup=148.88),
    131_072: dict(dense_time_ms=8.9010, dense_tokens_per_s=14_725_078, freq_fused_time_ms=0.0277,
                  freq_fused_tokens_per_s=4_731_245_487, speedup=321.32),
    262_144: dict(dense_time_ms=35.5808, dense_tokens_per_s=7_367_735, freq_fused_time_ms=0.0631,
                  freq_fused_tokens_per_s=4_154_190_984, speedup=564.13),
    524_288: dict(dense_time_ms=142.2997, dense_tokens_per_s=3_684_042, freq_fused_time_ms=0.1721,
                  freq_fused_tokens_per_s=3_046_840_209, speedup=826.74),
    1_048_576: dict(dense_time_ms=569.1758, dense_tokens_per_s=1_842_470, freq_fused_time_ms=0.5426,
                    freq_fused_tokens_per_s=1_932_867_888, speedup=1_049.31),
}

# H20
TABLE5 = {
    65_536: dict(dense_time_ms=16.8952, dense_tokens_per_s=3_878_940, freq_fused_time_ms=0.0755,
                 freq_fused_tokens_per_s=867_932_971, speedup=223.76),
    131_072: dict(dense_time_ms=67.5313, dense_tokens_per_s=1_941_019, freq_fused_time_ms=0.1718,
                  freq_fused_tokens_per_s=762_937_288, speedup=393.06),
    262_144: dict(dense_time_ms=270.0756, dense_tokens_per_s=970_624, freq_fused_time_ms=0.4409,
                  freq_fused_tokens_per_s=594_572_465, speedup=612.55),
    524_288: dict(dense_time_ms=1_080.2525, dense_tokens_per_s=485_350, freq_fused_time_ms=1.2679,
                  freq_fused_tokens_per_s=413_507_370, speedup=851.97),
    1_048_576: dict(dense_time_ms=4_320.9607, dense_tokens_per_s=242_668, freq_fused_time_ms=4.0815,
                    freq_fused_tokens_per_s=256_918_161, speedup=1_058.67),
}

# H100, fused vs separate branch kernels
TABLE6 = {
    65_536: dict(fused_time_ms=0.0150, separate_time_ms=0.0418, fused_tokens_per_s=4_380_358_757,
                 separate_tokens_per_s=1_568_832_675, fused_speedup=2.7922),
    131_072: dict(fused_time_ms=0.0277, separate_time_ms=0.0549, fused_tokens_per_s=4_731_245_487,
                  separate_tokens_per_s=2_386_088_877, fused_speedup=1.9828),
    262_144: dict(fused_time_ms=0.0631, separate_time_ms=0.0903, fused_tokens_per_s=4_154_190_984,
                  separate_tokens_per_s=2_904_091_006, fused_speedup=1.4304),
    524_288: dict(fused_time_ms=0.1721, separate_time_ms=0.1993, fused_tokens_per_s=3_046_840_209,
                  separate_tokens_per_s=2_630_809_117, fused_speedup=1.1581),
    1_048_576: dict(fused_time_ms=0.5426, separate_time_ms=0.5698, fused_tokens_per_s=1_932_867_888,
                    separate_tokens_per_s=1_840_580_903, fused_speedup=1.0501),
}

# H100, keyed by video duration in seconds
TABLE7 = {
    5: dict(tokens=65_536, dense_time_ms=2.2295, freq_time_ms=0.0150, speedup=148.88),
    10: dict(tokens=131_072, dense_time_ms=8.9010, freq_time_ms=0.0277, speedup=321.32),
    20: dict(tokens=262_144, dense_time_ms=35.5808, freq_time_ms=0.0631, speedup=564.13),
    40: dict(tokens=524_288, dense_time_ms=142.2997, freq_time_ms=0.1721, speedup=826.74),
    80: dict(tokens=1_048_576, dense_time_ms=569.1758, freq_time_ms=0.5426, speedup=1_049.31),
    120: dict(tokens=1_572_864, dense_time_ms=1_280.6289, freq_time_ms=1.1234, speedup=1_139.90),
}

# published headline reduction ranges; they do not match tables 1-2
HEADLINE_CLAIMS = {
    "flops_reduction": (9.3, 27.3),
    "traffic_reduction": (8.8, 20.9),
}

TABLE_HARDWARE = {4: "h100", 5: "h20", 6: "h100", 7: "h100"}

_MODULE_TABLES = {1: TABLE1, 2: TABLE2, 3: TABLE3, 4: TABLE4, 5: TABLE5, 6: TABLE6, 7: TABLE7}


@dataclass
class PaperTables:
    tables: dict

    @classmethod
    def default(cls):
        """Snapshot of the module-level constants."""
        return cls(copy.deepcopy(_MODULE_TABLES))

    def table(self, table_id):
        if table_id not in self.tables:
            raise ValueError(f"unknown table {table_id!r}; expected one of {sorted(self.tables)}")
        return self.tables[table_id]

    def cell(self, table_id, key, column):
        return self.table(table_id)[key][column]

    def get(self, table_id, key, column):
        return self.table(table_id).get(key, {}).get(column)

    def consistency_failures(self, d_k=64, intensity_rtol=1e-3):
        """Cross-table relations the published cells must satisfy; empty when all hold."""
        t1, t2, t3 = self.table(1), self.table(2), self.table(3)
        failures = []
        for n, row in t1.items():
            if row["freq_total_flops"] != row["freq_attention_flops"] + row["transform_flops"]:
                failures.append(f"table1 N={n}: total != attention + transform")
            if t2[n]["freq_bytes"] * 2 * d_k != 2 * row["freq_attention_flops"]:
                failures.append(f"table2 N={n}: FreqFormer bytes != 2 * attention FLOPs / (2 d_k)")
            ratio = row["freq_total_flops"] / t2[n]["freq_bytes"]
            if abs(ratio - t3[n]["freq_total_intensity"]) > intensity_rtol * ratio:
                failures.append(f"table3 N={n}: total intensity != table1 total / table2 bytes")
        for n, row in self.table(6).items():
            t4 = self.table(4)[n]
            if row["fused_time_ms"] != t4["freq_fused_time_ms"]:
                failures.append(f"table6 N={n}: fused time differs from table4")
        for seconds, row in self.table(7).items():
            t4 = self.table(4).get(row["tokens"])
            if t4 and (row["dense_time_ms"], row["freq_time_ms"]) != (t4["dense_time_ms"], t4["freq_fused_time_ms"]):
                failures.append(f"table7 {seconds}s: times differ from table4 at N={row['tokens']}")
        return failures
