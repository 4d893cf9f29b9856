"""Full frequency-heterogeneous attention layer.

Per head: project Q/K/V, move them to the DCT domain, split the coefficients
into low/mid/high bands, run dense attention on the 4x-compressed low band,
block-sparse attention on the mid band and sliding-window attention on the high
band, let each band attend to the other bands' summary tokens, expand the low
band back, reassemble and invert the transform. Heads are concatenated and
projected by ``wo``.
"""
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import spectral
from ._validation import check_tensor4
from .attention import (
    DenseSpec,
    WindowSpec,
    block_sparse_attention,
    count_interactions,
    dense_attention,
    make_pattern,
    sliding_window_attention,
)
from .bands import BANDS, BandSpec, build_partition, compress_low, expand_low, gather_band, scatter_bands
from .core_numerics import derive_seed, pool_into_groups, seeded_init
from .exceptions import ConfigError, ShapeError
from .router import STAT_WIDTH, RouterParams, allocate_heads, pooled_stats, route, timestep_embedding


@dataclass(frozen=True)
class LayerConfig:
    T: int
    H: int
    W: int
    d_model: int
    n_h: int
    d_k: int = 64
    band: BandSpec = field(default_factory=BandSpec)
    k_mid: int = 256
    w: int = 64
    m: int = 8
    block: int = 16
    exchange: bool = True
    # exchange the low band on its compressed tokens (before expansion)
    exchange_low_compressed: bool = True
    route_heads: bool = True
    seed: int = 0

    def __post_init__(self):
        if min(self.T, self.H, self.W) < 1:
            raise ConfigError(f"grid sizes must be >= 1, got {(self.T, self.H, self.W)}")
        if self.n_h < 1 or self.n_h * self.d_k != self.d_model:
            raise ConfigError(f"n_h * d_k must equal d_model ({self.n_h} * {self.d_k} != {self.d_model})")
        if self.d_k != STAT_WIDTH:
            raise ConfigError(f"the router pools {STAT_WIDTH}-wide head statistics, so d_k must be {STAT_WIDTH}")
        if self.m < 1 or self.w < 1 or self.k_mid < 1 or self.block < 1:
            raise ConfigError("m, w, k_mid and block must all be >= 1")

    @property
    def grid(self):
        return (self.T, self.H, self.W)

    @property
    def n_tokens(self):
        return self.T * self.H * self.W

    @property
    def routes_heads(self):
        """True when heads are split across bands; needs one head per band at least."""
        return self.route_heads and self.n_h >= 3


@dataclass
class LayerWeights:
    wq: np.ndarray
    wk: np.ndarray
    wv: np.ndarray
    wo: np.ndarray
    d_q: list
    d_k_map: list
    d_v: list
    u_low: np.ndarray
    u_mid: np.ndarray
    u_high: np.ndarray
    u_expand: list
    router: RouterParams

    def summary_map(self, band):
        return {"low": self.u_low, "mid": self.u_mid, "high": self.u_high}[band]

    def validate(self, cfg):
        square = (cfg.d_model, cfg.d_model)
        for name in ("wq", "wk", "wv", "wo"):
            if getattr(self, name).shape != square:
                raise ConfigError(f"{name} must be {square}, got {getattr(self, name).shape}")
        head = (cfg.d_k, cfg.d_k)
        for name in ("d_q", "d_k_map", "d_v", "u_expand"):
            maps = getattr(self, name)
            if len(maps) != cfg.n_h or any(np.shape(a) != head for a in maps):
                raise ConfigError(f"{name} must hold {cfg.n_h} maps of shape {head}")
        for band in BANDS:
            if self.summary_map(band).shape != head:
                raise ConfigError(f"u_{band} must be {head}")
        arrays = [self.wq, self.wk, self.wv, self.wo, self.u_low, self.u_mid, self.u_high]
        arrays += self.d_q + self.d_k_map + self.d_v + self.u_expand
        if not all(np.all(np.isfinite(a)) for a in arrays):
            raise ConfigError("weights contain NaN or Inf")


def init_weights(cfg, seed=None, map_noise=0.01):
    """Seeded weights: scaled-normal projections, identity-plus-noise compression maps."""
    seed = cfg.seed if seed is None else seed
    d, dk = cfg.d_model, cfg.d_k
    stream = iter(range(1, 1 << 20))

    def draw(shape, scale):
        return seeded_init(shape, derive_seed(seed, next(stream)), scale)

    def near_identity():
        return np.eye(dk) + draw((dk, dk), map_noise)

    proj = [draw((d, d), 1.0 / np.sqrt(d)) for _ in range(4)]
    return LayerWeights(
        *proj,
        d_q=[near_identity() for _ in range(cfg.n_h)],
        d_k_map=[near_identity() for _ in range(cfg.n_h)],
        d_v=[near_identity() for _ in range(cfg.n_h)],
        u_low=draw((dk, dk), 1.0 / np.sqrt(dk)),
        u_mid=draw((dk, dk), 1.0 / np.sqrt(dk)),
        u_high=draw((dk, dk), 1.0 / np.sqrt(dk)),
        u_expand=[near_identity() for _ in range(cfg.n_h)],
        router=RouterParams.init(derive_seed(seed, next(stream))),
    )


@lru_cache(maxsize=32)
def _geometry(grid, band):
    return spectral.SpectralPlan.build(*grid), build_partition(*grid, band)


def geometry(cfg):
    """``(SpectralPlan, BandPartition)`` for the configuration's grid."""
    return _geometry(cfg.grid, cfg.band)


@dataclass
class LayerTrace:
    """Diagnostics from one forward pass."""

    pi: np.ndarray
    heads: tuple | None
    pi_per_head: np.ndarray
    head_bands: list
    interactions: dict
    exchange_pairs: int


def _project(cfg, weights, x):
    x = check_tensor4(x, shape=cfg.grid + (cfg.d_model,))
    weights.validate(cfg)
    tokens = x.reshape(cfg.n_tokens, cfg.d_model)
    return tokens @ weights.wq, tokens @ weights.wk, tokens @ weights.wv


def _head_slice(cfg, h):
    return slice(h * cfg.d_k, (h + 1) * cfg.d_k)


def _spectral_bands(cfg, plan, part, flat):
    coeffs = spectral.forward(plan, flat.reshape(cfg.grid + (cfg.d_k,)))
    return {band: gather_band(coeffs, part, band) for band in BANDS}


def _finish(cfg, weights, head_outputs):
    merged = np.concatenate([y.reshape(cfg.n_tokens, cfg.d_k) for y in head_outputs], axis=1)
    return (merged @ weights.wo).reshape(cfg.grid + (cfg.d_model,))


def assign_heads(cfg, pi):
    """Bands processed by each head: contiguous runs per band when routing, else all bands."""
    if not cfg.routes_heads:
        return None, [set(BANDS) for _ in range(cfg.n_h)]
    heads = allocate_heads(pi, cfg.n_h)
    head_bands = []
    for band, count in zip(BANDS, heads):
        head_bands += [{band}] * count
    return heads, head_bands


def _exchange(cfg, weights, outputs, active):
    """Residual attention from each active band's tokens to the other bands' summary tokens."""
    summaries = {
        band: pool_into_groups(outputs[band], cfg.m) @ weights.summary_map(band) for band in BANDS
    }
    pairs = 0
    updated = dict(outputs)
    for band in active:
        foreign = np.concatenate([summaries[b] for b in BANDS if b != band], axis=0)
        rows = outputs[band]
        if rows.shape[0] == 0 or foreign.shape[0] == 0:
            continue
        updated[band] = rows + dense_attention(rows, foreign, foreign)
        pairs += rows.shape[0] * foreign.shape[0]
    return updated, pairs


def forward(cfg, weights, x, t=0, return_trace=False):
    """Layer output for a ``(T, H, W, d_model)`` input at diffusion timestep ``t``."""
    q, k, v = _project(cfg, weights, x)
    plan, part = geometry(cfg)
    factor = cfg.band.compression
    spec_q, spec_k, spec_v = [], [], []
    for h in range(cfg.n_h):
        sl = _head_slice(cfg, h)
        spec_q.append(_spectral_bands(cfg, plan, part, q[:, sl]))
        spec_k.append(_spectral_bands(cfg, plan, part, k[:, sl]))
        spec_v.append(_spectral_bands(cfg, plan, part, v[:, sl]))

    e = timestep_embedding(t)
    stats = [pooled_stats(b["low"], b["mid"], b["high"]) for b in spec_q]
    pi_per_head = np.array([route(weights.router, g, e) for g in stats])
    pi = route(weights.router, np.mean(stats, axis=0), e)
    heads, head_bands = assign_heads(cfg, pi)

    pattern = make_pattern(part.n_mid, cfg.block, cfg.k_mid) if part.n_mid else None
    interactions = dict.fromkeys(BANDS, 0)
    exchange_pairs = 0
    head_outputs = []
    for h in range(cfg.n_h):
        qb, kb, vb = spec_q[h], spec_k[h], spec_v[h]
        active = [band for band in BANDS if band in head_bands[h] and part.count(band)]
        # bands this head does not process pass their value coefficients through
        outputs = dict(vb)
        if "low" in active:
            ql = compress_low(qb["low"], factor, weights.d_q[h])
            kl = compress_low(kb["low"], factor, weights.d_k_map[h])
            vl = compress_low(vb["low"], factor, weights.d_v[h])
            outputs["low"] = dense_attention(ql, kl, vl)
            interactions["low"] += count_interactions(DenseSpec(ql.shape[0]))
        if "mid" in active:
            outputs["mid"] = block_sparse_attention(qb["mid"], kb["mid"], vb["mid"], pattern)
            interactions["mid"] += count_interactions(pattern)
        if "high" in active:
            outputs["high"] = sliding_window_attention(qb["high"], kb["high"], vb["high"], cfg.w)
            interactions["high"] += count_interactions(WindowSpec(part.n_high, cfg.w))
        expand_first = not cfg.exchange_low_compressed
        if "low" in active and expand_first:
            outputs["low"] = expand_low(outputs["low"], part.n_low, factor, weights.u_expand[h])
        if cfg.exchange:
            outputs, pairs = _exchange(cfg, weights, outputs, active)
            exchange_pairs += pairs
        if "low" in active and not expand_first:
            outputs["low"] = expand_low(outputs["low"], part.n_low, factor, weights.u_expand[h])
        coeffs = scatter_bands(outputs["low"], outputs["mid"], outputs["high"], part, cfg.d_k)
        head_outputs.append(spectral.inverse(plan, coeffs))

    y = _finish(cfg, weights, head_outputs)
    if not return_trace:
        return y
    trace = LayerTrace(pi, heads, pi_per_head, head_bands, interactions, exchange_pairs)
    return y, trace


def banded_dense_forward(cfg, weights, x):
    """Every head runs plain dense attention inside each band; no routing, no exchange.

    ``forward`` reduces to this when the mid pattern and the window cover their
    whole bands, the compression factor is 1 and the exchange is off.
    """
    q, k, v = _project(cfg, weights, x)
    plan, part = geometry(cfg)
    factor = cfg.band.compression
    head_outputs = []
    for h in range(cfg.n_h):
        sl = _head_slice(cfg, h)
        qb = _spectral_bands(cfg, plan, part, q[:, sl])
        kb = _spectral_bands(cfg, plan, part, k[:, sl])
        vb = _spectral_bands(cfg, plan, part, v[:, sl])
        out = dict(vb)
        if part.n_low:
            low = dense_attention(
                compress_low(qb["low"], factor, weights.d_q[h]),
                compress_low(kb["low"], factor, weights.d_k_map[h]),
                compress_low(vb["low"], factor, weights.d_v[h]),
            )
            out["low"] = expand_low(low, part.n_low, factor, weights.u_expand[h])
        for band in ("mid", "high"):
            if part.count(band):
                out[band] = dense_attention(qb[band], kb[band], vb[band])
        coeffs = scatter_bands(out["low"], out["mid"], out["high"], part, cfg.d_k)
        head_outputs.append(spectral.inverse(plan, coeffs))
    return _finish(cfg, weights, head_outputs)


def dense_reference_forward(cfg, weights, x):
    """Standard multi-head dense attention over all ``N`` tokens with the same projections."""
    q, k, v = _project(cfg, weights, x)
    heads = []
    for h in range(cfg.n_h):
        sl = _head_slice(cfg, h)
        heads.append(dense_attention(q[:, sl], k[:, sl], v[:, sl]))
    return _finish(cfg, weights, heads)


def exchange_pair_count(part, m, compression=None):
    """Exchange (query, key) pairs for one head processing all three bands.

    Each band contributes ``min(m, rows)`` summary tokens; low-band queries are
    the compressed tokens.
    """
    compression = part.compression if compression is None else compression
    rows = {"low": -(-part.n_low // compression), "mid": part.n_mid, "high": part.n_high}
    n_summaries = {band: min(m, rows[band]) for band in BANDS}
    total = 0
    for band in BANDS:
        foreign = sum(n_summaries[b] for b in BANDS if b != band)
        if rows[band] and foreign:
            total += rows[band] * foreign
    return total


@dataclass(frozen=True)
class ApproxReport:
    total_error: float
    eps_low: float
    eps_mid: float
    eps_high: float

    def identity_residual(self):
        """Relative gap in ``eps_low**2 + eps_mid**2 + eps_high**2 == total_error**2``."""
        lhs = self.eps_low ** 2 + self.eps_mid ** 2 + self.eps_high ** 2
        rhs = self.total_error ** 2
        return abs(lhs - rhs) / rhs if rhs else abs(lhs)


def approximation_report(y_full, y_freq, plan, part):
    """Frobenius error of ``y_full - y_freq`` and its split over the spectral bands."""
    y_full = check_tensor4(y_full, "y_full")
    y_freq = check_tensor4(y_freq, "y_freq")
    if y_full.shape != y_freq.shape:
        raise ShapeError(f"shape mismatch: {y_full.shape} vs {y_freq.shape}")
    delta = y_full - y_freq
    coeffs = spectral.forward(plan, delta)
    eps = [float(np.linalg.norm(gather_band(coeffs, part, band))) for band in BANDS]
    return ApproxReport(float(np.linalg.norm(delta)), *eps)
