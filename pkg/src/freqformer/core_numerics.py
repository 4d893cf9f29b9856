"""Dense-array substrate: products, row softmax, pooling and a portable seeded generator.

Matrices are plain 2-D ``float64`` arrays and tensors are 4-D ``(T, H, W, C)``
arrays in row-major order. Every function here is pure.
"""
import numpy as np

from ._validation import check_matrix, check_positive_int
from .exceptions import ShapeError

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def matmul(a, b):
    """Matrix product ``a @ b`` in float64.

    Raises ShapeError when the inner dimensions disagree.
    """
    a = check_matrix(a, "a")
    b = check_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def softmax_rows(m, scale=1.0, mask=None):
    """Row-wise softmax of ``scale * m``.

    Each row is shifted by its maximum before exponentiation. When ``mask`` is
    given, entries where it is False receive exactly zero weight; every row must
    keep at least one allowed entry.
    """
    z = check_matrix(m, "m") * scale
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != z.shape:
            raise ShapeError(f"mask shape {mask.shape} does not match {z.shape}")
        if z.shape[1] and not mask.any(axis=1).all():
            raise ValueError("every row needs at least one allowed entry")
        z = np.where(mask, z, -np.inf)
    if z.shape[1] == 0:
        return z.copy()
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def mean_pool_groups(tokens, group):
    """Average consecutive runs of ``group`` rows; the last run may be shorter."""
    tokens = check_matrix(tokens, "tokens")
    if group == 0:
        raise ValueError("group must be >= 1")
    group = check_positive_int(group, "group")
    n, c = tokens.shape
    n_out = -(-n // group)
    out = np.empty((n_out, c))
    for i in range(n_out):
        out[i] = tokens[i * group:min((i + 1) * group, n)].mean(axis=0)
    return out


def pool_into_groups(tokens, n_groups):
    """Mean-pool ``tokens`` into ``min(n_groups, N)`` contiguous groups of near-equal size.

    Group sizes differ by at most one, larger groups first. When ``N`` is a
    multiple of ``n_groups`` this equals ``mean_pool_groups(tokens, N // n_groups)``.
    """
    tokens = check_matrix(tokens, "tokens")
    n_groups = check_positive_int(n_groups, "n_groups")
    n = tokens.shape[0]
    k = min(n_groups, n)
    if k == 0:
        return np.zeros((0, tokens.shape[1]))
    base, extra = divmod(n, k)
    out = np.empty((k, tokens.shape[1]))
    start = 0
    for i in range(k):
        stop = start + base + (1 if i < extra else 0)
        out[i] = tokens[start:stop].mean(axis=0)
        start = stop
    return out


def _splitmix64(states):
    z = (states + np.uint64(_GOLDEN)) & np.uint64(_MASK64)
    z = ((z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)) & np.uint64(_MASK64)
    z = ((z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)) & np.uint64(_MASK64)
    return z ^ (z >> np.uint64(31))


def derive_seed(seed, *keys):
    """Mix integer ``keys`` into ``seed`` to get an independent 64-bit sub-seed."""
    state = int(seed) & _MASK64
    for key in keys:
        state = int(_splitmix64(np.array([(state ^ (int(key) & _MASK64))], dtype=np.uint64))[0])
    return state


def seeded_uniform(size, seed):
    """``size`` uniforms in the open interval (0, 1) from a SplitMix64 counter stream.

    Draw ``i`` is ``splitmix64(seed + i * 0x9E3779B97F4A7C15)``; its top 53 bits
    plus one half, times 2**-53, give the uniform.
    """
    with np.errstate(over="ignore"):
        counters = np.arange(size, dtype=np.uint64) * np.uint64(_GOLDEN)
        states = counters + np.uint64(int(seed) & _MASK64)
        bits = _splitmix64(states)
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53


def seeded_init(shape, seed, scale=1.0):
    """Normal draws with standard deviation ``scale``, bitwise reproducible from ``seed``.

    Uniform pairs ``(u1, u2)`` from :func:`seeded_uniform` go through Box-Muller:
    ``sqrt(-2 ln u1) * cos(2 pi u2)`` fills even flat positions and the matching
    ``sin`` fills odd ones.
    """
    if isinstance(shape, (int, np.integer)):
        shape = (shape,)
    shape = tuple(int(s) for s in shape)
    size = int(np.prod(shape, dtype=np.int64))
    n_pairs = -(-size // 2)
    u = seeded_uniform(2 * n_pairs, seed)
    r = np.sqrt(-2.0 * np.log(u[0::2]))
    theta = 2.0 * np.pi * u[1::2]
    z = np.empty(2 * n_pairs)
    z[0::2] = r * np.cos(theta)
    z[1::2] = r * np.sin(theta)
    return (scale * z[:size]).reshape(shape)
