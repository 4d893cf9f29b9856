"""scikit-learn style wrapper around the attention layer."""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import layer
from ._validation import check_finite, check_video_batch
from .bands import BandSpec
from .exceptions import ShapeError


class FreqFormerAttention(TransformerMixin, BaseEstimator):
    """Frequency-heterogeneous attention as a fit/transform estimator.

    ``fit`` reads the token grid and channel width from ``X`` and draws seeded
    weights; nothing is learned from the data. ``transform`` maps inputs of shape
    ``(T, H, W, d_model)`` or ``(B, T, H, W, d_model)`` to outputs of the same
    shape.

    Parameters
    ----------
    n_heads : int
        Attention heads; ``d_model`` must equal ``64 * n_heads``.
    rho_low, rho_mid, rho_high : float
        Fractions of spectral coefficients in each band.
    compression : int
        Low-band pooling factor.
    k_mid : int
        Target average keys per query for the mid-band pattern.
    window : int
        High-band sliding-window width.
    n_summary : int
        Summary tokens per band for the cross-band exchange.
    block : int
        Mid-band pattern block size.
    exchange : bool
        Enable the cross-band residual exchange.
    route_heads : bool
        Split heads across bands by the router (needs ``n_heads >= 3``).
    timestep : int
        Diffusion timestep fed to the router.
    seed : int
        Weight seed.
    """

    def __init__(self, n_heads=2, rho_low=0.125, rho_mid=0.375, rho_high=0.5, compression=4,
                 k_mid=256, window=64, n_summary=8, block=16, exchange=True, route_heads=True,
                 timestep=0, seed=0):
        self.n_heads = n_heads
        self.rho_low = rho_low
        self.rho_mid = rho_mid
        self.rho_high = rho_high
        self.compression = compression
        self.k_mid = k_mid
        self.window = window
        self.n_summary = n_summary
        self.block = block
        self.exchange = exchange
        self.route_heads = route_heads
        self.timestep = timestep
        self.seed = seed

    def _make_config(self, shape):
        T, H, W, d_model = shape
        band = BandSpec(self.rho_low, self.rho_mid, self.rho_high, self.compression)
        return layer.LayerConfig(
            T, H, W, d_model, self.n_heads, d_k=d_model // self.n_heads if self.n_heads else 0,
            band=band, k_mid=self.k_mid, w=self.window, m=self.n_summary, block=self.block,
            exchange=self.exchange, route_heads=self.route_heads, seed=self.seed,
        )

    def fit(self, X, y=None):
        Xb, _ = check_video_batch(X)
        check_finite(Xb, "X")
        self.config_ = self._make_config(Xb.shape[1:])
        self.weights_ = layer.init_weights(self.config_)
        self.plan_, self.partition_ = layer.geometry(self.config_)
        self.n_features_in_ = Xb.shape[-1]
        return self

    def _validated(self, X):
        check_is_fitted(self, "config_")
        Xb, batched = check_video_batch(X)
        expected = self.config_.grid + (self.config_.d_model,)
        if Xb.shape[1:] != expected:
            raise ShapeError(f"fitted for samples of shape {expected}, got {Xb.shape[1:]}")
        check_finite(Xb, "X")
        return Xb, batched

    def transform(self, X):
        Xb, batched = self._validated(X)
        out = np.stack([layer.forward(self.config_, self.weights_, x, t=self.timestep) for x in Xb])
        return out if batched else out[0]

    def dense_reference(self, X):
        """Plain multi-head dense attention with the same projections."""
        Xb, batched = self._validated(X)
        out = np.stack([layer.dense_reference_forward(self.config_, self.weights_, x) for x in Xb])
        return out if batched else out[0]

    def trace(self, X):
        """Routing and interaction diagnostics for a single sample."""
        Xb, batched = self._validated(X)
        if batched and len(Xb) != 1:
            raise ShapeError("trace takes a single sample")
        return layer.forward(self.config_, self.weights_, Xb[0], t=self.timestep, return_trace=True)[1]

    def approximation_report(self, X):
        """Per-band error of ``transform(X)`` against :meth:`dense_reference`, for one sample."""
        Xb, batched = self._validated(X)
        if batched and len(Xb) != 1:
            raise ShapeError("approximation_report takes a single sample")
        x = Xb[0]
        return layer.approximation_report(
            layer.dense_reference_forward(self.config_, self.weights_, x),
            layer.forward(self.config_, self.weights_, x, t=self.timestep),
            self.plan_, self.partition_,
        )
