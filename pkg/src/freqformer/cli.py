"""Command-line front end: ``sim``, ``compare``, ``demo`` and ``check``."""
import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import checks, layer, perf_model as pm, reporting
from .attention import DenseSpec, WindowSpec, count_interactions, make_pattern
from .bands import BANDS, BandSpec
from .core_numerics import derive_seed, seeded_init
from .exceptions import ConfigError
from .paper_tables import DURATIONS

DEMO_MAX_TOKENS = 4096


def _load_config(path):
    if path is None:
        return {}
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict):
        raise ConfigError("config file must hold a JSON object")
    return doc


def _resolve(args):
    """Defaults < JSON config file < command-line flags."""
    doc = _load_config(getattr(args, "config", None))
    profile = args.profile or doc.pop("profile", None)
    mode = args.mode or doc.pop("mode", None) or "table-match"
    overrides = {k: v for k, v in doc.items() if k not in ("profile", "mode")}
    cfg = pm.CostConfig().with_overrides(**overrides)
    if args.transform_offset is not None:
        cfg = cfg.with_overrides(transform_log_offset=args.transform_offset)
    return cfg, profile, mode


def _emit(text, out):
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def cmd_sim(args):
    cfg, profile, mode = _resolve(args)
    profile = pm.get_profile(profile or "h100")
    if args.kind == "duration":
        keys = reporting.expand_grid(args.duration, DURATIONS)
    else:
        keys = reporting.expand_grid(args.n)
    if not keys:
        flag = "--duration" if args.kind == "duration" else "--n"
        raise SystemExit(f"error: sim {args.kind} needs at least one value via {flag}")
    rows, columns = reporting.sim_rows(args.kind, keys, cfg, profile, mode, separate=args.separate)
    _emit(reporting.csv_text(rows, columns), args.out)
    if args.svg:
        if not args.out:
            raise SystemExit("error: --svg needs --out to place the chart next to the CSV")
        reporting.plot_svg(args.kind, rows, profile, Path(args.out).with_suffix(".svg"))
    return 0


def cmd_compare(args):
    cfg, profile, mode = _resolve(args)
    report = pm.table_report(args.table, cfg, profile, mode)
    rows, columns = reporting.report_rows(report)
    _emit(reporting.csv_text(rows, columns), args.out)
    for note in report.notes:
        print(f"note: {note}", file=sys.stderr)
    return 0


def demo_summary(T, H, W, d_model, n_heads, t, seed, saturate=False, exchange=True):
    """Run the layer against its comparator and collect the printed metrics."""
    n = T * H * W
    if n > DEMO_MAX_TOKENS:
        raise ValueError(f"demo is capped at {DEMO_MAX_TOKENS} tokens, got {n}")
    extra = {}
    if saturate:
        extra = dict(band=BandSpec(compression=1), k_mid=n, w=2 * n, exchange=False)
    cfg = layer.LayerConfig(T, H, W, d_model, n_heads, seed=seed, **({"exchange": exchange} | extra))
    weights = layer.init_weights(cfg)
    x = seeded_init((T, H, W, d_model), derive_seed(seed, 0xD3))
    y, trace = layer.forward(cfg, weights, x, t=t, return_trace=True)
    if saturate:
        reference = layer.banded_dense_forward(cfg, weights, x)
    else:
        reference = layer.dense_reference_forward(cfg, weights, x)
    plan, part = layer.geometry(cfg)
    report = layer.approximation_report(reference, y, plan, part)
    summary = {
        "tokens": n,
        "comparator": "banded_dense" if saturate else "dense_reference",
        "total_error": report.total_error,
        "eps_low": report.eps_low,
        "eps_mid": report.eps_mid,
        "eps_high": report.eps_high,
        "sum_of_squares_residual": report.identity_residual(),
    }
    for band, p in zip(BANDS, trace.pi):
        summary[f"pi_{band}"] = float(p)
    heads = trace.heads or ("all",) * 3
    for band, h in zip(BANDS, heads):
        summary[f"heads_{band}"] = h
    for band in BANDS:
        summary[f"interactions_{band}"] = trace.interactions[band]
    summary["exchange_pairs"] = trace.exchange_pairs
    summary["analytic_interactions"] = _analytic_interactions(cfg, part)
    return summary


def _analytic_interactions(cfg, part):
    pattern = make_pattern(part.n_mid, cfg.block, cfg.k_mid) if part.n_mid else None
    return (
        count_interactions(DenseSpec(part.n_low_compressed))
        + (count_interactions(pattern) if pattern else 0)
        + count_interactions(WindowSpec(part.n_high, cfg.w))
    )


def _demo_csv(summary):
    lines = ["metric,value"]
    for key, value in summary.items():
        if isinstance(value, float):
            value = f"{value:.12e}"
        lines.append(f"{key},{value}")
    return "\n".join(lines) + "\n"


def cmd_demo(args):
    try:
        summary = demo_summary(args.T, args.H, args.W, args.d_model, args.n_heads, args.t, args.seed,
                               saturate=args.saturate, exchange=not args.no_exchange)
    except ValueError as exc:
        raise SystemExit(f"error: {exc}")
    print(f"grid {args.T}x{args.H}x{args.W}, d_model={args.d_model}, heads={args.n_heads}, t={args.t}")
    print(f"comparator: {summary['comparator']}")
    print(
        f"error total={summary['total_error']:.6e} low={summary['eps_low']:.6e} "
        f"mid={summary['eps_mid']:.6e} high={summary['eps_high']:.6e}"
    )
    print("routing pi=(" + ", ".join(f"{summary[f'pi_{b}']:.4f}" for b in BANDS) + ")"
          + " heads=(" + ", ".join(str(summary[f"heads_{b}"]) for b in BANDS) + ")")
    print("interactions " + " ".join(f"{b}={summary[f'interactions_{b}']}" for b in BANDS)
          + f" exchange={summary['exchange_pairs']}")
    if args.out:
        _emit(_demo_csv(summary), args.out)
    return 0


def cmd_check(args):
    results = checks.run_all()
    for name, passed, detail in results:
        print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
    n_pass = sum(passed for _, passed, _ in results)
    print(f"properties_passed={n_pass} properties_failed={len(results) - n_pass}")
    return 0 if n_pass == len(results) else 1


def _add_model_flags(p):
    p.add_argument("--profile", help="built-in profile name (h100, h20) or path to a JSON profile")
    p.add_argument("--mode", choices=pm.MODES, help="time model (default table-match)")
    p.add_argument("--transform-offset", type=int, dest="transform_offset",
                   help="subtract from log2 N in the transform cost (4 reproduces the published column)")
    p.add_argument("--config", help="JSON file of cost-config overrides (plus optional profile/mode)")
    p.add_argument("--out", help="write CSV here instead of stdout")


def build_parser():
    parser = argparse.ArgumentParser(prog="freqformer", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("sim", help="analytic simulation tables")
    sim.add_argument("kind", choices=reporting.KINDS)
    sim.add_argument("--n", action="append", help="sequence lengths (repeatable, comma lists, or 'table' for the published grid)")
    sim.add_argument("--duration", action="append", help="durations in seconds (or 'table')")
    sim.add_argument("--separate", action="store_true", help="model unfused branch kernels")
    sim.add_argument("--svg", action="store_true", help="also write an SVG chart next to --out")
    _add_model_flags(sim)
    sim.set_defaults(func=cmd_sim)

    compare = sub.add_parser("compare", help="per-cell deviation report against a published table")
    compare.add_argument("--table", type=int, required=True, choices=range(1, 8), metavar="{1..7}")
    _add_model_flags(compare)
    compare.set_defaults(func=cmd_compare)

    demo = sub.add_parser("demo", help="run the layer on a small seeded input")
    demo.add_argument("--T", type=int, default=8)
    demo.add_argument("--H", type=int, default=8)
    demo.add_argument("--W", type=int, default=8)
    demo.add_argument("--d-model", type=int, default=128, dest="d_model")
    demo.add_argument("--n-heads", type=int, default=2, dest="n_heads")
    demo.add_argument("--t", type=int, default=500, help="diffusion timestep")
    demo.add_argument("--seed", type=int, default=7)
    demo.add_argument("--saturate", action="store_true",
                      help="full mid pattern and window, no compression, no exchange")
    demo.add_argument("--no-exchange", action="store_true", dest="no_exchange")
    demo.add_argument("--out", help="write the CSV summary here")
    demo.set_defaults(func=cmd_demo)

    chk = sub.add_parser("check", help="run the invariant suite")
    chk.set_defaults(func=cmd_check)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
