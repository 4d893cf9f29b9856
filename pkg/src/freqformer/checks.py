"""Cross-module invariant suite run by ``freqformer check``.

Each check returns ``(passed, detail)``. Published-table deviations are not
failures here; only internal invariants are.
"""
import numpy as np

from . import layer, perf_model as pm, router, spectral
from .attention import (
    DenseSpec,
    WindowSpec,
    block_sparse_attention,
    count_interactions,
    dense_attention,
    make_pattern,
    sliding_window_attention,
    window_mask,
)
from .bands import BANDS, BandSpec, build_partition, gather_band, scatter_bands
from .core_numerics import seeded_init, softmax_rows
from .paper_tables import N_GRID, PaperTables

CHECKS = []


def check(fn):
    CHECKS.append(fn)
    return fn


def _rng(seed):
    return np.random.default_rng(seed)


def _masked_oracle(q, k, v, mask, scale):
    out = np.zeros((q.shape[0], v.shape[1]))
    for i in range(q.shape[0]):
        keys = np.flatnonzero(mask[i])
        s = np.array([scale * q[i] @ k[j] for j in keys])
        p = np.exp(s - s.max())
        out[i] = (p / p.sum()) @ v[keys]
    return out


@check
def dct_orthonormality():
    worst = max(spectral.SpectralPlan.build(n, n, n).orthonormality_error() for n in range(1, 17))
    return worst <= 1e-10, f"max |F^T F - I| = {worst:.2e}"


@check
def parseval_and_round_trip():
    rng = _rng(1)
    worst_norm, worst_rt = 0.0, 0.0
    for _ in range(10):
        shape = tuple(rng.integers(1, 7, size=3))
        plan = spectral.SpectralPlan.build(*shape)
        x = rng.normal(size=shape + (3,))
        y = spectral.forward(plan, x)
        worst_norm = max(worst_norm, abs(np.linalg.norm(y) - np.linalg.norm(x)) / np.linalg.norm(x))
        worst_rt = max(worst_rt, np.abs(spectral.inverse(plan, y) - x).max())
    return worst_norm <= 1e-10 and worst_rt <= 1e-8, f"parseval {worst_norm:.1e}, round trip {worst_rt:.1e}"


@check
def band_partition_complete():
    rng = _rng(2)
    for _ in range(20):
        T, H, W = (int(s) for s in rng.integers(1, 17, size=3))
        part = build_partition(T, H, W)
        joined = np.concatenate([part.idx_low, part.idx_mid, part.idx_high])
        if not np.array_equal(np.sort(joined), np.arange(T * H * W)):
            return False, f"partition of {(T, H, W)} is not exact"
        keys = [part.keys[part.indices(b)] for b in BANDS]
        for lower, upper in zip(keys, keys[1:]):
            if len(lower) and len(upper) and lower.max() > upper.min():
                return False, f"band keys of {(T, H, W)} are not monotone"
    return True, "20 random grids"


@check
def gather_scatter_round_trip():
    part = build_partition(4, 5, 6)
    x = _rng(3).normal(size=(4, 5, 6, 2))
    y = scatter_bands(*(gather_band(x, part, b) for b in BANDS), part)
    return bool(np.array_equal(x, y)), "bitwise"


@check
def softmax_rows_normalised():
    m = _rng(4).uniform(-1e4, 1e4, size=(50, 9))
    err = np.abs(softmax_rows(m).sum(axis=1) - 1).max()
    return err <= 1e-12, f"max row-sum error {err:.1e}"


@check
def sparse_operators_match_masked_oracle():
    rng = _rng(5)
    worst = 0.0
    for trial in range(20):
        n = int(rng.integers(2, 97))
        q, k, v = rng.normal(size=(3, n, 8))
        pattern = make_pattern(n, int(rng.integers(1, 17)), int(rng.integers(1, n + 1)))
        w = int(rng.integers(1, n + 1))
        scale = 1 / np.sqrt(8)
        worst = max(
            worst,
            np.abs(block_sparse_attention(q, k, v, pattern) - _masked_oracle(q, k, v, pattern.mask(), scale)).max(),
            np.abs(sliding_window_attention(q, k, v, w) - _masked_oracle(q, k, v, window_mask(n, w), scale)).max(),
        )
    return worst <= 1e-12, f"max deviation {worst:.1e}"


@check
def saturation_reduces_to_dense():
    rng = _rng(6)
    q, k, v = rng.normal(size=(3, 64, 8))
    dense = dense_attention(q, k, v)
    full = make_pattern(64, 16, 64)
    err = max(
        np.abs(block_sparse_attention(q, k, v, full) - dense).max(),
        np.abs(sliding_window_attention(q, k, v, 128) - dense).max(),
    )
    return err <= 1e-12, f"max deviation {err:.1e}"


@check
def router_constants():
    params = router.RouterParams.init(0)
    ok = params.param_count() == 33_283 and router.router_flops() == 66_304
    return ok, f"params={params.param_count()} flops={router.router_flops()}"


@check
def router_simplex_and_loss():
    rng = _rng(7)
    for i in range(200):
        params = router.RouterParams.from_flat(rng.normal(size=router.PARAM_COUNT))
        pi = router.route(params, rng.normal(size=192), router.timestep_embedding(int(rng.integers(0, 1000))))
        if pi.min() < 0 or abs(pi.sum() - 1) > 1e-12:
            return False, f"draw {i} left the simplex"
    uniform = router.load_balance_loss(np.full((4, 3), 1 / 3), 1.0)
    collapsed = router.load_balance_loss(np.tile([1.0, 0.0, 0.0], (4, 1)), 1.0)
    ok = abs(uniform) <= 1e-12 and abs(collapsed - 2 / 3) <= 1e-12
    return ok, f"loss uniform={uniform:.1e} collapsed={collapsed:.6f}"


@check
def router_gradient_matches_finite_differences():
    rng = _rng(8)
    params = router.RouterParams.init(3)
    g, e = rng.normal(size=192), router.timestep_embedding(17)
    x = np.concatenate([g, e])
    pre = x @ params.w1 + params.b1
    params.b1[np.abs(pre) < 1e-3] += 1e-2
    grad = router.router_gradient(params, g, e).flat()
    theta = params.flat()
    worst = 0.0
    for idx in rng.choice(theta.size, size=200, replace=False):
        step = np.zeros_like(theta)
        step[idx] = 1e-5
        plus = router.logits(router.RouterParams.from_flat(theta + step), g, e).sum()
        minus = router.logits(router.RouterParams.from_flat(theta - step), g, e).sum()
        fd = (plus - minus) / 2e-5
        if abs(grad[idx]) > 1e-8:
            worst = max(worst, abs(fd - grad[idx]) / abs(grad[idx]))
    return worst <= 1e-6, f"max relative error {worst:.1e}"


def _small_layer():
    cfg = layer.LayerConfig(4, 4, 4, 128, 2, seed=11)
    return cfg, layer.init_weights(cfg), seeded_init((4, 4, 4, 128), 99)


@check
def layer_determinism_and_parseval_report():
    cfg, weights, x = _small_layer()
    y1 = layer.forward(cfg, weights, x, t=5)
    y2 = layer.forward(cfg, weights, x, t=5)
    plan, part = layer.geometry(cfg)
    report = layer.approximation_report(layer.dense_reference_forward(cfg, weights, x), y1, plan, part)
    ok = np.array_equal(y1, y2) and report.identity_residual() <= 1e-10
    ok = ok and report.total_error <= report.eps_low + report.eps_mid + report.eps_high + 1e-12
    return ok, f"sum-of-squares residual {report.identity_residual():.1e}"


@check
def exchange_pairs_linear():
    cfg = layer.LayerConfig(8, 8, 8, 64, 1)
    weights = layer.init_weights(cfg)
    _, trace = layer.forward(cfg, weights, seeded_init((8, 8, 8, 64), 5), return_trace=True)
    _, part = layer.geometry(cfg)
    expected = (part.n_low_compressed + part.n_mid + part.n_high) * 16
    return trace.exchange_pairs == expected, f"{trace.exchange_pairs} pairs, expected {expected}"


@check
def saturated_layer_matches_banded_dense():
    cfg = layer.LayerConfig(4, 4, 4, 128, 2, band=BandSpec(compression=1), k_mid=64, w=128, exchange=False)
    weights = layer.init_weights(cfg)
    x = seeded_init((4, 4, 4, 128), 6)
    err = np.abs(layer.forward(cfg, weights, x) - layer.banded_dense_forward(cfg, weights, x)).max()
    return err <= 1e-10, f"max deviation {err:.1e}"


@check
def paper_tables_consistent():
    failures = PaperTables.default().consistency_failures()
    return not failures, "; ".join(failures) or "all cross-table relations hold"


@check
def perf_model_exact_and_consistent():
    cfg = pm.CostConfig()
    for n in N_GRID:
        values = (pm.flops_dense(n), pm.traffic_dense(n), pm.interactions_freq(n), pm.flops_freq_attention(n))
        if not all(isinstance(v, int) for v in values):
            return False, f"non-integer count at N={n}"
        if pm.traffic_freq(n) * 2 * cfg.d_k != cfg.bytes_per_value * pm.flops_freq_attention(n):
            return False, f"traffic/FLOP chain broken at N={n}"
        row = pm.intensity_row(n)
        if row["dense_intensity"] != cfg.d_k or row["freq_attention_intensity"] != cfg.d_k:
            return False, f"intensity identity broken at N={n}"
    ratios = [pm.flops_dense(n) / pm.flops_freq_total(n) for n in N_GRID]
    ok = all(a < b for a, b in zip(ratios, ratios[1:]))
    return ok, "exact integers, traffic chain, intensity = d_k, monotone reduction"


@check
def executable_counts_match_analytic():
    n_total, w = 512, 64
    part = build_partition(8, 8, 8, BandSpec())
    pattern = make_pattern(part.n_mid, 16, 256)
    executable = (
        count_interactions(DenseSpec(part.n_low_compressed))
        + count_interactions(pattern)
        + count_interactions(WindowSpec(part.n_high, w))
    )
    cfg = pm.CostConfig(k_mid=int(pattern.average_degree()), w=w)
    gap = pm.interactions_freq(n_total, cfg) - executable
    return 0 <= gap <= w * w / 2, f"analytic - executable = {gap} pairs (edge bound {w * w // 2})"


def run_all(checks=None):
    results = []
    for fn in checks or CHECKS:
        try:
            passed, detail = fn()
        except Exception as exc:  # a crashing check is a failed check
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        results.append((fn.__name__, bool(passed), detail))
    return results
