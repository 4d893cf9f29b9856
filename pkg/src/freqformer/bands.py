"""Low/mid/high partition of the spectral coefficient grid, plus low-band compression.

Coefficients are ranked by the normalised frequency sum
``k_t / T + k_h / H + k_w / W`` (ties broken by ``(k_t, k_h, k_w)``); the first
``floor(rho_low * N)`` go to the low band, the next ``floor(rho_mid * N)`` to the
mid band and the remainder to the high band.
"""
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_matrix, check_tensor4
from .core_numerics import mean_pool_groups
from .exceptions import ShapeError

BANDS = ("low", "mid", "high")


@dataclass(frozen=True)
class BandSpec:
    rho_low: float = 0.125
    rho_mid: float = 0.375
    rho_high: float = 0.5
    compression: int = 4

    def __post_init__(self):
        fractions = (self.rho_low, self.rho_mid, self.rho_high)
        if min(fractions) < 0 or abs(sum(fractions) - 1.0) > 1e-12:
            raise ValueError(f"band fractions must be nonnegative and sum to 1, got {fractions}")
        if int(self.compression) != self.compression or self.compression < 1:
            raise ValueError(f"compression must be an integer >= 1, got {self.compression}")


@dataclass(frozen=True)
class BandPartition:
    grid: tuple
    compression: int
    idx_low: np.ndarray
    idx_mid: np.ndarray
    idx_high: np.ndarray
    keys: np.ndarray = field(repr=False)

    @property
    def n_total(self):
        return int(np.prod(self.grid))

    @property
    def n_low(self):
        return len(self.idx_low)

    @property
    def n_mid(self):
        return len(self.idx_mid)

    @property
    def n_high(self):
        return len(self.idx_high)

    @property
    def n_low_compressed(self):
        return -(-self.n_low // self.compression)

    def indices(self, band):
        return {"low": self.idx_low, "mid": self.idx_mid, "high": self.idx_high}[band]

    def count(self, band):
        return len(self.indices(band))

    def band_of(self, flat_index):
        for band in BANDS:
            if np.any(self.indices(band) == flat_index):
                return band
        raise IndexError(flat_index)


def frequency_keys(T, H, W):
    """Normalised frequency sum for every flat coefficient index (row-major over T, H, W)."""
    kt, kh, kw = np.meshgrid(np.arange(T), np.arange(H), np.arange(W), indexing="ij")
    return (kt / T + kh / H + kw / W).ravel()


def build_partition(T, H, W, spec=None):
    spec = spec or BandSpec()
    if min(T, H, W) < 1:
        raise ValueError(f"grid sizes must be >= 1, got {(T, H, W)}")
    n = T * H * W
    keys = frequency_keys(T, H, W)
    # flat index order is already lexicographic in (k_t, k_h, k_w), so a stable sort breaks ties
    order = np.argsort(keys, kind="stable")
    n_low = int(np.floor(spec.rho_low * n))
    n_mid = int(np.floor(spec.rho_mid * n))
    return BandPartition(
        grid=(T, H, W),
        compression=int(spec.compression),
        idx_low=order[:n_low],
        idx_mid=order[n_low:n_low + n_mid],
        idx_high=order[n_low + n_mid:],
        keys=keys,
    )


def gather_band(x, part, band):
    """Rows of the band's coefficients, in band order, as an ``(N_band, C)`` matrix."""
    x = check_tensor4(x, shape=part.grid + (None,))
    flat = x.reshape(part.n_total, x.shape[3])
    return flat[part.indices(band)]


def scatter_bands(low, mid, high, part, channels=None):
    """Inverse of :func:`gather_band` over all three bands."""
    blocks = {"low": low, "mid": mid, "high": high}
    if channels is None:
        channels = check_matrix(low, "low").shape[1]
    flat = np.zeros((part.n_total, channels))
    for band, rows in blocks.items():
        rows = check_matrix(rows, band, cols=channels)
        if rows.shape[0] != part.count(band):
            raise ShapeError(f"{band} band has {rows.shape[0]} rows, partition expects {part.count(band)}")
        flat[part.indices(band)] = rows
    return flat.reshape(part.grid + (channels,))


def compress_low(tokens, factor, d_map):
    """Mean-pool ``factor`` consecutive low-band rows, then right-multiply by ``d_map``."""
    tokens = check_matrix(tokens, "tokens")
    d_map = check_matrix(d_map, "d_map")
    if d_map.shape != (tokens.shape[1], tokens.shape[1]):
        raise ShapeError(f"d_map must be {tokens.shape[1]}x{tokens.shape[1]}, got {d_map.shape}")
    if tokens.shape[0] == 0:
        return np.zeros((0, tokens.shape[1]))
    return mean_pool_groups(tokens, factor) @ d_map


def expand_low(compressed, n_low, factor, u_map):
    """Replicate each compressed row to its ``factor`` source positions, then right-multiply by ``u_map``."""
    compressed = check_matrix(compressed, "compressed")
    u_map = check_matrix(u_map, "u_map")
    if compressed.shape[0] != -(-n_low // factor):
        raise ShapeError(
            f"{compressed.shape[0]} compressed rows cannot expand to {n_low} with factor {factor}"
        )
    if u_map.shape != (compressed.shape[1], compressed.shape[1]):
        raise ShapeError(f"u_map must be square over {compressed.shape[1]} channels")
    return np.repeat(compressed, factor, axis=0)[:n_low] @ u_map
