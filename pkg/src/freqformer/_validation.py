"""Input validation helpers shared by the array-level modules and the estimator."""
import numpy as np

from .exceptions import ShapeError


def check_matrix(a, name="matrix", cols=None):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {a.shape}")
    if cols is not None and a.shape[1] != cols:
        raise ShapeError(f"{name} must have {cols} columns, got {a.shape[1]}")
    return a


def check_tensor4(x, name="x", shape=None):
    """Coerce ``x`` to a float64 (T, H, W, C) array, optionally pinning its shape."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 4:
        raise ShapeError(f"{name} must be 4-D (T, H, W, C), got shape {x.shape}")
    if shape is not None:
        for got, want in zip(x.shape, shape):
            if want is not None and got != want:
                raise ShapeError(f"{name} has shape {x.shape}, expected {tuple(shape)}")
    return x


def check_finite(a, name="array"):
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains NaN or Inf")
    return a


def check_positive_int(value, name, minimum=1):
    if int(value) != value or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_video_batch(X, name="X"):
    """Accept ``(T, H, W, C)`` or ``(B, T, H, W, C)``; return the batched array and whether input was batched."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 4:
        return X[None], False
    if X.ndim == 5:
        return X, True
    raise ShapeError(f"{name} must be (T, H, W, C) or (B, T, H, W, C), got shape {X.shape}")
