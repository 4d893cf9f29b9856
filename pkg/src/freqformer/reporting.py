"""CSV rows and SVG charts for the simulation commands."""
import csv
import io

from . import perf_model as pm
from .paper_tables import N_GRID, TABLE_HARDWARE, PaperTables

KINDS = ("flops", "traffic", "intensity", "throughput", "fusion", "duration")

# column each kind compares against its published table
HEADLINE = {
    "flops": (1, "freq_total_flops"),
    "traffic": (2, "freq_bytes"),
    "intensity": (3, "freq_total_intensity"),
    "throughput": (None, "freq_fused_time_ms"),
    "fusion": (6, "separate_time_ms"),
    "duration": (7, "freq_time_ms"),
}

_FOUR_DECIMALS = ("_ms", "_gib", "_intensity", "fused_speedup", "deviation_pct")


def format_value(column, value):
    """Fixed presentation: integers verbatim, ms/GiB/intensity to 4 places, ratios to 2."""
    if value is None or value == "":
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(value)
    if column.endswith(_FOUR_DECIMALS):
        return f"{value:.4f}"
    if column in ("reduction", "speedup"):
        return f"{value:.2f}"
    if column.endswith("tokens_per_s"):
        return f"{value:.0f}"
    if float(value).is_integer():
        return str(int(value))
    return f"{value:.4f}"


def write_csv(rows, columns, stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(c, row.get(c)) for c in columns])


def csv_text(rows, columns):
    buf = io.StringIO()
    write_csv(rows, columns, buf)
    return buf.getvalue()


def expand_grid(values, default=N_GRID):
    """Parse ``--n``/``--duration`` values: integers, comma lists, or ``table`` for the published grid."""
    out = []
    for item in values or ():
        for token in str(item).split(","):
            token = token.strip()
            if not token:
                continue
            if token == "table":
                out.extend(default)
            else:
                number = float(token)
                if number <= 0:
                    raise ValueError(f"values must be positive, got {token}")
                out.append(int(number) if number.is_integer() else number)
    return out


def sim_rows(kind, keys, cfg, profile, mode="table-match", separate=False, paper=None):
    """One row per ``N`` (or per duration for ``duration``), with a ``deviation_pct`` column."""
    if kind not in KINDS:
        raise ValueError(f"unknown sim kind {kind!r}; expected one of {KINDS}")
    paper = paper or PaperTables.default()
    profile = pm.get_profile(profile)
    table_id, headline = HEADLINE[kind]
    if kind == "throughput":
        table_id = {v: k for k, v in TABLE_HARDWARE.items() if k in (4, 5)}.get(profile.name)
    rows = []
    for key in keys:
        if kind == "duration":
            row = {"duration_s": key, **pm.duration_row(key, cfg, profile, mode, fused=not separate)}
        else:
            n = int(key)
            if n < 1:
                raise ValueError(f"N must be >= 1, got {key}")
            row = {"n": n}
            if kind == "flops":
                row.update(pm.flops_row(n, cfg))
            elif kind == "traffic":
                row.update(pm.traffic_row(n, cfg))
            elif kind == "intensity":
                row.update(pm.intensity_row(n, cfg))
            elif kind == "throughput":
                values = pm.throughput_row(n, cfg, profile, mode, fused=not separate)
                if separate:
                    values = {k.replace("fused", "separate"): v for k, v in values.items()}
                row.update(values)
            elif kind == "fusion":
                row.update(pm.fusion_row(n, cfg, profile, mode))
        anchor = None
        if table_id is not None and headline in row:
            anchor = paper.get(table_id, key, headline)
        row["deviation_pct"] = pm.deviation_pct(row[headline], anchor) if anchor is not None else None
        rows.append(row)
    columns = list(rows[0]) if rows else ["deviation_pct"]
    return rows, columns


def report_rows(report):
    columns = ["table", "key", "column", "basis", "computed", "published", "deviation_pct"]
    rows = []
    for r in report.rows:
        rows.append(dict(
            table=r.table, key=r.key, column=r.column, basis=r.basis,
            computed=format_value(r.column, r.computed),
            published=format_value(r.column, r.published),
            deviation_pct=r.deviation_pct,
        ))
    return rows, columns


def plot_svg(kind, rows, profile, path):
    """Log-log scaling chart, or a roofline chart for ``intensity``."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    profile = pm.get_profile(profile)
    fig, ax = plt.subplots(figsize=(6, 4))
    xkey = "duration_s" if kind == "duration" else "n"
    xs = [r[xkey] for r in rows]
    if kind == "intensity":
        peak = profile.p_peak * profile.eta_c
        bw = profile.b_peak * profile.eta_b
        grid = [2 ** (i / 4) for i in range(-8, 41)]
        ax.loglog(grid, [min(peak, i * bw) for i in grid], "k-", label=f"{profile.name} roof")
        for col, marker in (("dense_intensity", "o"), ("freq_total_intensity", "s")):
            ax.loglog([r[col] for r in rows], [min(peak, r[col] * bw) for r in rows], marker,
                      label=col.replace("_", " "))
        ax.set_xlabel("arithmetic intensity (FLOPs/byte)")
        ax.set_ylabel("attainable FLOP/s")
    else:
        series = {
            "flops": ("dense_flops", "freq_total_flops", "FLOPs"),
            "traffic": ("dense_bytes", "freq_bytes", "bytes"),
            "throughput": ("dense_time_ms", None, "time (ms)"),
            "fusion": ("fused_time_ms", "separate_time_ms", "time (ms)"),
            "duration": ("dense_time_ms", "freq_time_ms", "time (ms)"),
        }[kind]
        first, second, ylabel = series
        if second is None:
            second = next(c for c in rows[0] if c.startswith("freq_") and c.endswith("_time_ms"))
        for col in (first, second):
            ax.loglog(xs, [float(r[col]) for r in rows], "o-", label=col.replace("_", " "))
        ax.set_xlabel("video duration (s)" if kind == "duration" else "sequence length N")
        ax.set_ylabel(ylabel)
    ax.grid(True, which="both", linestyle=":")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
