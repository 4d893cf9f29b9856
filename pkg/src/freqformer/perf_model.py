"""Analytic cost model: interactions, FLOPs, score/KV traffic, intensity and roofline time.

Counts are exact integers whenever the configured fractions make them integral
(always the case for power-of-two ``N`` under the default configuration).
Times are in seconds unless a name says otherwise.
"""
import json
import math
from dataclasses import asdict, dataclass, fields, replace
from fractions import Fraction
from pathlib import Path

from .exceptions import ConfigError
from .paper_tables import HEADLINE_CLAIMS, TABLE_HARDWARE, PaperTables

MODES = ("table-match", "roofline-max")
TOKENS_PER_5_SECONDS = 65_536


@dataclass(frozen=True)
class CostConfig:
    d_k: int = 64
    rho_low: float = 0.125
    rho_mid: float = 0.375
    rho_high: float = 0.5
    low_compress: int = 4
    k_mid: int = 256
    w: int = 64
    bytes_per_value: int = 2
    transform_coeff: int = 12
    transform_log_offset: int = 0
    unfused_traffic_multiplier: float = 1.35

    def __post_init__(self):
        if abs(self.rho_low + self.rho_mid + self.rho_high - 1.0) > 1e-12:
            raise ConfigError("band fractions must sum to 1")
        counts = (self.d_k, self.low_compress, self.k_mid, self.w, self.bytes_per_value, self.transform_coeff)
        if min(counts) <= 0 or min(self.rho_low, self.rho_mid, self.rho_high) < 0:
            raise ConfigError("cost-model counts must be positive and fractions nonnegative")

    def with_overrides(self, **overrides):
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise ConfigError(f"unknown cost-config keys: {sorted(unknown)}")
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


@dataclass(frozen=True)
class HardwareProfile:
    name: str
    p_peak: float
    b_peak: float
    eta_c: float
    eta_b: float
    t_launch_fused: float
    t_launch_unfused: float

    _JSON_KEYS = {
        "name": "name",
        "peak_flops": "p_peak",
        "peak_bandwidth_bytes_per_s": "b_peak",
        "eta_compute": "eta_c",
        "eta_bandwidth": "eta_b",
        "launch_fused_s": "t_launch_fused",
        "launch_unfused_s": "t_launch_unfused",
    }

    def __post_init__(self):
        if not (0 < self.eta_c <= 1 and 0 < self.eta_b <= 1):
            raise ConfigError(f"{self.name}: efficiencies must lie in (0, 1]")
        if self.p_peak <= 0 or self.b_peak <= 0:
            raise ConfigError(f"{self.name}: peak compute and bandwidth must be positive")
        if self.t_launch_fused < 0 or self.t_launch_unfused < 0:
            raise ConfigError(f"{self.name}: launch overheads must be nonnegative")

    @classmethod
    def from_dict(cls, doc):
        missing = set(cls._JSON_KEYS) - set(doc)
        if missing:
            raise ConfigError(f"hardware profile is missing keys: {sorted(missing)}")
        return cls(**{attr: doc[key] for key, attr in cls._JSON_KEYS.items()})

    @classmethod
    def from_json(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self):
        values = asdict(self)
        return {key: values[attr] for key, attr in self._JSON_KEYS.items()}


PROFILES = {
    "h100": HardwareProfile("h100", 989e12, 3.35e12, 0.25, 0.70, 6e-6, 18e-6),
    "h20": HardwareProfile("h20", 148e12, 4.0e12, 0.22, 0.68, 7e-6, 21e-6),
}


def get_profile(ref):
    """Built-in profile by name, or a profile loaded from a JSON file path."""
    if isinstance(ref, HardwareProfile):
        return ref
    if ref in PROFILES:
        return PROFILES[ref]
    if Path(ref).is_file():
        return HardwareProfile.from_json(ref)
    raise ConfigError(f"unknown hardware profile {ref!r}; built-ins are {sorted(PROFILES)}")


def _exact(value):
    return int(value) if value.denominator == 1 else float(value)


def band_sizes(n, cfg=CostConfig()):
    """``(compressed low, mid, high)`` token counts as exact fractions."""
    n = Fraction(n)
    return (
        n * Fraction(cfg.rho_low) / cfg.low_compress,
        n * Fraction(cfg.rho_mid),
        n * Fraction(cfg.rho_high),
    )


def _interactions(n, cfg):
    low, mid, high = band_sizes(n, cfg)
    return low * low + mid * cfg.k_mid + high * cfg.w


def interactions_freq(n, cfg=CostConfig()):
    """Compressed-low squared plus mid times ``k_mid`` plus high times ``w``."""
    if n < 1:
        raise ValueError(f"N must be >= 1, got {n}")
    return _exact(_interactions(n, cfg))


def interactions_dense(n):
    return n * n


def flops_dense(n, cfg=CostConfig()):
    return 2 * cfg.d_k * n * n


def flops_freq_attention(n, cfg=CostConfig()):
    return _exact(2 * cfg.d_k * _interactions(n, cfg))


def _log2(n):
    if n & (n - 1) == 0:
        return n.bit_length() - 1
    return math.log2(n)


def flops_transform(n, cfg=CostConfig()):
    """``transform_coeff * N * d_k * (log2 N - transform_log_offset)``; forward and inverse."""
    log_n = _log2(int(n))
    if cfg.transform_log_offset >= log_n:
        raise ValueError(f"transform log offset {cfg.transform_log_offset} >= log2(N) = {log_n}")
    return cfg.transform_coeff * n * cfg.d_k * (log_n - cfg.transform_log_offset)


def flops_freq_total(n, cfg=CostConfig()):
    return flops_freq_attention(n, cfg) + flops_transform(n, cfg)


def traffic_dense(n, cfg=CostConfig()):
    """Bytes of dense score traffic: one stored value per (query, key) pair."""
    return cfg.bytes_per_value * n * n


def traffic_freq(n, cfg=CostConfig()):
    return _exact(cfg.bytes_per_value * _interactions(n, cfg))


def arithmetic_intensity(flops, nbytes):
    if nbytes <= 0:
        raise ValueError("arithmetic intensity needs a positive byte count")
    return flops / nbytes


def roofline_time(flops, nbytes, profile, mode="table-match", fused=True, traffic_multiplier=1.35):
    """Modelled wall-clock seconds for one layer.

    ``roofline-max``: max(compute, memory) plus launch overhead; unfused runs
    scale the traffic by ``traffic_multiplier``.
    ``table-match``: compute time plus the fused launch, or for unfused runs
    compute plus scaled memory time plus the unfused launch.
    """
    profile = get_profile(profile)
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    compute = flops / (profile.p_peak * profile.eta_c)
    memory = nbytes / (profile.b_peak * profile.eta_b)
    if not fused:
        memory *= traffic_multiplier
    launch = profile.t_launch_fused if fused else profile.t_launch_unfused
    if mode == "roofline-max":
        return max(compute, memory) + launch
    return compute + launch if fused else compute + memory + launch


def tokens_per_second(n, seconds):
    if seconds <= 0:
        raise ValueError("time must be positive")
    return n / seconds


def duration_to_tokens(seconds):
    """Latent token count for a clip, at 65,536 tokens per 5 seconds."""
    if seconds <= 0:
        raise ValueError("duration must be positive")
    return round(TOKENS_PER_5_SECONDS * seconds / 5)


def dense_time(n, cfg, profile, mode="table-match"):
    return roofline_time(flops_dense(n, cfg), traffic_dense(n, cfg), profile, mode, fused=True)


def freq_time(n, cfg, profile, mode="table-match", fused=True):
    return roofline_time(
        flops_freq_total(n, cfg), traffic_freq(n, cfg), profile, mode, fused,
        cfg.unfused_traffic_multiplier,
    )


# ---------------------------------------------------------------------------
# rows shaped like the published tables
# ---------------------------------------------------------------------------

def flops_row(n, cfg=CostConfig()):
    total = flops_freq_total(n, cfg)
    return dict(
        dense_flops=flops_dense(n, cfg),
        freq_attention_flops=flops_freq_attention(n, cfg),
        transform_flops=flops_transform(n, cfg),
        freq_total_flops=total,
        reduction=flops_dense(n, cfg) / total,
    )


def traffic_row(n, cfg=CostConfig()):
    dense, freq = traffic_dense(n, cfg), traffic_freq(n, cfg)
    return dict(
        dense_bytes=dense, dense_gib=dense / 2 ** 30,
        freq_bytes=freq, freq_gib=freq / 2 ** 30,
        reduction=dense / freq,
    )


def intensity_row(n, cfg=CostConfig()):
    freq_bytes = traffic_freq(n, cfg)
    return dict(
        dense_intensity=arithmetic_intensity(flops_dense(n, cfg), traffic_dense(n, cfg)),
        freq_attention_intensity=arithmetic_intensity(flops_freq_attention(n, cfg), freq_bytes),
        freq_total_intensity=arithmetic_intensity(flops_freq_total(n, cfg), freq_bytes),
    )


def throughput_row(n, cfg, profile, mode="table-match", fused=True):
    dense = dense_time(n, cfg, profile, mode)
    freq = freq_time(n, cfg, profile, mode, fused)
    return dict(
        dense_time_ms=dense * 1e3,
        dense_tokens_per_s=tokens_per_second(n, dense),
        freq_fused_time_ms=freq * 1e3,
        freq_fused_tokens_per_s=tokens_per_second(n, freq),
        speedup=dense / freq,
    )


def fusion_row(n, cfg, profile, mode="table-match"):
    fused = freq_time(n, cfg, profile, mode, fused=True)
    separate = freq_time(n, cfg, profile, mode, fused=False)
    return _fusion_columns(n, fused, separate)


def _fusion_columns(n, fused, separate):
    return dict(
        fused_time_ms=fused * 1e3,
        separate_time_ms=separate * 1e3,
        fused_tokens_per_s=tokens_per_second(n, fused),
        separate_tokens_per_s=tokens_per_second(n, separate),
        fused_speedup=separate / fused,
    )


def duration_row(seconds, cfg, profile, mode="table-match", fused=True):
    n = duration_to_tokens(seconds)
    dense = dense_time(n, cfg, profile, mode)
    freq = freq_time(n, cfg, profile, mode, fused)
    return dict(tokens=n, dense_time_ms=dense * 1e3, freq_time_ms=freq * 1e3, speedup=dense / freq)


def anchored_row(table_id, key, profile=None, mode="table-match", paper=None, cfg=CostConfig()):
    """FreqFormer columns recomputed from the published FLOP and byte totals.

    This isolates the time and intensity formulas from the disputed FLOP cells.
    Returns an empty dict when the published tables hold no anchor for ``key``.
    """
    paper = paper or PaperTables.default()
    n = paper.get(7, key, "tokens") if table_id == 7 else key
    flops = paper.get(1, n, "freq_total_flops")
    nbytes = paper.get(2, n, "freq_bytes")
    if flops is None:
        return {}
    profile = get_profile(profile or TABLE_HARDWARE.get(table_id, "h100"))
    if table_id == 3:
        return dict(
            freq_attention_intensity=arithmetic_intensity(paper.get(1, n, "freq_attention_flops"), nbytes),
            freq_total_intensity=arithmetic_intensity(flops, nbytes),
        )
    fused = roofline_time(flops, nbytes, profile, mode, fused=True)
    if table_id in (4, 5):
        return dict(freq_fused_time_ms=fused * 1e3, freq_fused_tokens_per_s=tokens_per_second(n, fused))
    if table_id == 6:
        separate = roofline_time(flops, nbytes, profile, mode, False, cfg.unfused_traffic_multiplier)
        return _fusion_columns(n, fused, separate)
    if table_id == 7:
        return dict(freq_time_ms=fused * 1e3)
    return {}


def formula_row(table_id, key, cfg=CostConfig(), profile=None, mode="table-match"):
    profile = get_profile(profile or TABLE_HARDWARE.get(table_id, "h100"))
    if table_id == 1:
        return flops_row(key, cfg)
    if table_id == 2:
        return traffic_row(key, cfg)
    if table_id == 3:
        return intensity_row(key, cfg)
    if table_id in (4, 5):
        return throughput_row(key, cfg, profile, mode)
    if table_id == 6:
        return fusion_row(key, cfg, profile, mode)
    if table_id == 7:
        return duration_row(key, cfg, profile, mode)
    raise ValueError(f"unknown table {table_id!r}; expected 1-7")


# ---------------------------------------------------------------------------
# deviation report
# ---------------------------------------------------------------------------

def deviation_pct(computed, published):
    """Signed departure of the published cell from the computed value, in percent."""
    if computed == 0:
        return 0.0 if published == 0 else math.inf
    return 100.0 * (published - computed) / computed


@dataclass(frozen=True)
class ReportRow:
    table: int
    key: int
    column: str
    basis: str
    computed: float
    published: float

    @property
    def deviation_pct(self):
        return deviation_pct(self.computed, self.published)


@dataclass
class TableReport:
    table: int
    rows: list
    notes: list

    def find(self, key, column, basis="formula"):
        for row in self.rows:
            if (row.key, row.column, row.basis) == (key, column, basis):
                return row
        raise KeyError((key, column, basis))


def _notes(table_id, paper):
    notes = []
    if table_id in (1, 2):
        column = "reduction"
        values = [row[column] for row in paper.table(table_id).values()]
        claim = HEADLINE_CLAIMS["flops_reduction" if table_id == 1 else "traffic_reduction"]
        what = "FLOP" if table_id == 1 else "traffic"
        notes.append(
            f"headline claim of a {claim[0]}-{claim[1]}x {what} reduction conflicts with "
            f"table {table_id}, which reports {min(values):,.2f}-{max(values):,.2f}x (unresolved)"
        )
        notes.append(
            "FreqFormer attention cells do not follow the closed-form interaction model; "
            "deviations are reported, not reverse-engineered"
        )
    if table_id == 1:
        notes.append("transform cells match 12*N*d_k*(log2 N - 4) except where a deviation is shown")
    if table_id == 6:
        notes.append(
            "separate-execution time uses the additive model compute + 1.35*memory + unfused launch; "
            "it matches the smallest N and drifts at larger N"
        )
    if table_id == 7:
        notes.append("the 120 s row has no FLOP anchor in tables 1-2; only formula values are shown")
    notes.append("deviation_pct = 100 * (published - computed) / computed")
    return notes


def table_report(table_id, cfg=CostConfig(), profile=None, mode="table-match", paper=None):
    """Every published cell of a table joined with its recomputed value(s).

    ``basis`` is ``formula`` for the closed-form model under ``cfg`` and
    ``anchored`` for FreqFormer columns recomputed from the published FLOP/byte
    totals. Embedded constants are never modified.
    """
    paper = paper or PaperTables.default()
    published = paper.table(table_id)
    rows = []
    for key, cells in published.items():
        computed = {"formula": formula_row(table_id, key, cfg, profile, mode)}
        anchored = anchored_row(table_id, key, profile, mode, paper, cfg)
        if anchored:
            computed["anchored"] = anchored
        for column, value in cells.items():
            for basis, values in computed.items():
                if column in values:
                    rows.append(ReportRow(table_id, key, column, basis, values[column], value))
    return TableReport(table_id, rows, _notes(table_id, paper))
