"""Separable orthonormal DCT-II over the (T, H, W) token axes of a tensor."""
from dataclasses import dataclass

import numpy as np

from ._validation import check_tensor4


def dct_matrix(n):
    """Orthonormal DCT-II matrix; row ``k`` is frequency ``k``, column ``i`` is position ``i``."""
    if n < 1:
        raise ValueError(f"DCT size must be >= 1, got {n}")
    k = np.arange(n)[:, None]
    i = np.arange(n)[None, :]
    f = np.cos(np.pi * (2 * i + 1) * k / (2 * n))
    f[0] *= np.sqrt(1.0 / n)
    f[1:] *= np.sqrt(2.0 / n)
    return f


@dataclass(frozen=True)
class SpectralPlan:
    """Per-axis DCT-II matrices for a fixed (T, H, W) grid."""

    f_t: np.ndarray
    f_h: np.ndarray
    f_w: np.ndarray

    @classmethod
    def build(cls, T, H, W):
        return cls(dct_matrix(T), dct_matrix(H), dct_matrix(W))

    @property
    def grid(self):
        return (self.f_t.shape[0], self.f_h.shape[0], self.f_w.shape[0])

    def orthonormality_error(self):
        """Largest ``|F^T F - I|`` entry over the three axes."""
        return max(
            float(np.abs(f.T @ f - np.eye(f.shape[0])).max())
            for f in (self.f_t, self.f_h, self.f_w)
        )


def _apply(ft, fh, fw, x):
    y = np.einsum("at,thwc->ahwc", ft, x)
    y = np.einsum("bh,ahwc->abwc", fh, y)
    return np.einsum("dw,abwc->abdc", fw, y)


def forward(plan, x):
    """Spectral coefficients of ``x``; channels are transformed independently."""
    x = check_tensor4(x, shape=plan.grid + (None,))
    return _apply(plan.f_t, plan.f_h, plan.f_w, x)


def inverse(plan, y):
    """Token-space tensor whose coefficients are ``y`` (transposes, since the bases are orthonormal)."""
    y = check_tensor4(y, name="y", shape=plan.grid + (None,))
    return _apply(plan.f_t.T, plan.f_h.T, plan.f_w.T, y)
