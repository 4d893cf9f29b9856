"""Timestep-conditioned band router.

A two-layer ReLU MLP maps pooled band statistics (3 x 64) and a 64-wide
sinusoidal timestep embedding to three band logits. Probabilities are turned
into integer head counts by largest-remainder apportionment.
"""
from dataclasses import dataclass

import numpy as np

from ._validation import check_matrix
from .core_numerics import derive_seed, seeded_init, softmax_rows
from .exceptions import ConfigError, ShapeError

STAT_WIDTH = 64
TIME_WIDTH = 64
HIDDEN = 128
N_BANDS = 3
INPUT_WIDTH = N_BANDS * STAT_WIDTH + TIME_WIDTH
PARAM_COUNT = INPUT_WIDTH * HIDDEN + HIDDEN + HIDDEN * N_BANDS + N_BANDS
ROUTER_FLOPS = 2 * (INPUT_WIDTH * HIDDEN) + 2 * (HIDDEN * N_BANDS)


@dataclass
class RouterParams:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        shapes = {
            "w1": (INPUT_WIDTH, HIDDEN),
            "b1": (HIDDEN,),
            "w2": (HIDDEN, N_BANDS),
            "b2": (N_BANDS,),
        }
        for name, shape in shapes.items():
            value = np.asarray(getattr(self, name), dtype=np.float64)
            if value.shape != shape:
                raise ConfigError(f"router {name} must have shape {shape}, got {value.shape}")
            setattr(self, name, value)
        if self.param_count() != PARAM_COUNT:
            raise ConfigError("router parameter count drifted from the reference layout")

    def param_count(self):
        return self.w1.size + self.b1.size + self.w2.size + self.b2.size

    @classmethod
    def zeros(cls):
        return cls(
            np.zeros((INPUT_WIDTH, HIDDEN)), np.zeros(HIDDEN),
            np.zeros((HIDDEN, N_BANDS)), np.zeros(N_BANDS),
        )

    @classmethod
    def init(cls, seed):
        return cls(
            seeded_init((INPUT_WIDTH, HIDDEN), derive_seed(seed, 1), 1.0 / np.sqrt(INPUT_WIDTH)),
            np.zeros(HIDDEN),
            seeded_init((HIDDEN, N_BANDS), derive_seed(seed, 2), 1.0 / np.sqrt(HIDDEN)),
            np.zeros(N_BANDS),
        )

    def flat(self):
        return np.concatenate([self.w1.ravel(), self.b1, self.w2.ravel(), self.b2])

    @classmethod
    def from_flat(cls, theta):
        theta = np.asarray(theta, dtype=np.float64)
        cuts = np.cumsum([INPUT_WIDTH * HIDDEN, HIDDEN, HIDDEN * N_BANDS])
        w1, b1, w2, b2 = np.split(theta, cuts)
        return cls(w1.reshape(INPUT_WIDTH, HIDDEN), b1, w2.reshape(HIDDEN, N_BANDS), b2)


@dataclass(frozen=True)
class RoutingDecision:
    pi: np.ndarray
    heads: tuple | None


def pooled_stats(q_low, q_mid, q_high):
    """Per-band mean absolute coefficient per channel, concatenated low | mid | high."""
    parts = []
    for name, band in (("low", q_low), ("mid", q_mid), ("high", q_high)):
        band = check_matrix(band, name, cols=STAT_WIDTH)
        parts.append(np.abs(band).mean(axis=0) if band.shape[0] else np.zeros(STAT_WIDTH))
    return np.concatenate(parts)


def timestep_embedding(t, d_t=TIME_WIDTH):
    """Interleaved ``(sin, cos)`` of ``t / 10000**(2i/d_t)`` for ``i < d_t/2``."""
    if t < 0:
        raise ValueError(f"timestep must be >= 0, got {t}")
    freqs = t / 10000.0 ** (2.0 * np.arange(d_t // 2) / d_t)
    out = np.empty(d_t)
    out[0::2] = np.sin(freqs)
    out[1::2] = np.cos(freqs)
    return out


def _router_input(g, e):
    g = np.asarray(g, dtype=np.float64).ravel()
    e = np.asarray(e, dtype=np.float64).ravel()
    if g.size != N_BANDS * STAT_WIDTH or e.size != TIME_WIDTH:
        raise ShapeError(f"router expects {N_BANDS * STAT_WIDTH} stats and {TIME_WIDTH} embedding values")
    return np.concatenate([g, e])


def logits(params, g, e):
    x = _router_input(g, e)
    return np.maximum(x @ params.w1 + params.b1, 0.0) @ params.w2 + params.b2


def route(params, g, e):
    """Band probabilities ``softmax(w2 relu(w1 [g; e] + b1) + b2)``."""
    return softmax_rows(logits(params, g, e)[None, :])[0]


def allocate_heads(pi, n_h):
    """Integer head counts per band summing to ``n_h`` with at least one head each.

    Largest-remainder apportionment of ``n_h * pi`` (ties go to the earlier band),
    then any empty band takes one head from the currently largest band.
    """
    if n_h < N_BANDS:
        raise ValueError(f"need at least {N_BANDS} heads to cover every band, got {n_h}")
    quotas = np.asarray(pi, dtype=np.float64) * n_h
    heads = np.floor(quotas).astype(int)
    remainders = quotas - heads
    for band in sorted(range(N_BANDS), key=lambda b: (-remainders[b], b))[: n_h - heads.sum()]:
        heads[band] += 1
    for band in range(N_BANDS):
        if heads[band] == 0:
            donor = int(np.argmax(heads))
            heads[donor] -= 1
            heads[band] = 1
    return tuple(int(h) for h in heads)


def load_balance_loss(pi_per_head, lam):
    """``lam * sum_band (mean_head pi[h, band] - 1/3)**2``."""
    pi_per_head = check_matrix(pi_per_head, "pi_per_head", cols=N_BANDS)
    if np.any(pi_per_head < -1e-9) or np.any(np.abs(pi_per_head.sum(axis=1) - 1.0) > 1e-9):
        raise ValueError("every row of pi_per_head must lie on the probability simplex")
    return float(lam * np.sum((pi_per_head.mean(axis=0) - 1.0 / N_BANDS) ** 2))


def router_flops():
    """Multiply-add FLOPs of one router evaluation."""
    return ROUTER_FLOPS


def router_gradient(params, g, e):
    """Gradient of ``sum(logits)`` with respect to every router parameter, as a ``RouterParams``."""
    x = _router_input(g, e)
    pre = x @ params.w1 + params.b1
    hidden = np.maximum(pre, 0.0)
    d_b2 = np.ones(N_BANDS)
    d_w2 = np.outer(hidden, d_b2)
    d_pre = (params.w2 @ d_b2) * (pre > 0)
    return RouterParams(np.outer(x, d_pre), d_pre, d_w2, d_b2)
