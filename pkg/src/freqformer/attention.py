"""Band-specific attention operators and exact (query, key) interaction counting.

* dense attention (low band, on compressed tokens)
* block-sparse attention over a block-local plus strided pattern (mid band)
* sliding-window attention with exactly ``w`` keys in the interior (high band)

Sparse and local operators run the dense kernel with a boolean mask, so
disallowed keys get exactly zero weight.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._validation import check_matrix, check_positive_int
from .core_numerics import softmax_rows
from .exceptions import ShapeError

DEFAULT_BLOCK = 16


def _check_qkv(q, k, v):
    q = check_matrix(q, "q")
    k = check_matrix(k, "k")
    v = check_matrix(v, "v")
    if q.shape[1] != k.shape[1]:
        raise ShapeError(f"query width {q.shape[1]} != key width {k.shape[1]}")
    if k.shape[0] != v.shape[0]:
        raise ShapeError(f"{k.shape[0]} keys but {v.shape[0]} values")
    return q, k, v


def _default_scale(q, scale):
    return 1.0 / np.sqrt(q.shape[1]) if scale is None else scale


def attention_weights(q, k, scale=None, mask=None):
    """The row-stochastic weight matrix ``softmax(scale * q k^T)`` under an optional mask."""
    return softmax_rows(q @ k.T, _default_scale(q, scale), mask=mask)


def dense_attention(q, k, v, scale=None):
    """``softmax(scale * q k^T) v`` with ``scale = 1/sqrt(d_k)`` by default."""
    q, k, v = _check_qkv(q, k, v)
    if k.shape[0] == 0 and q.shape[0]:
        raise ShapeError("dense attention needs at least one key")
    return attention_weights(q, k, scale) @ v


@dataclass(frozen=True)
class SparsePattern:
    """Key blocks visible to each query block.

    ``allowed[qb]`` is the sorted tuple of key-block indices for query block ``qb``.
    """

    n: int
    block: int
    allowed: tuple
    target_degree: float
    stride: int

    @property
    def n_blocks(self):
        return len(self.allowed)

    def block_sizes(self):
        return np.array([min(self.block, self.n - b * self.block) for b in range(self.n_blocks)])

    def interactions(self):
        sizes = self.block_sizes()
        return int(sum(sizes[qb] * sizes[list(kbs)].sum() for qb, kbs in enumerate(self.allowed)))

    def average_degree(self):
        return self.interactions() / self.n

    def is_full(self):
        return all(len(kbs) == self.n_blocks for kbs in self.allowed)

    @cached_property
    def _block_mask(self):
        m = np.zeros((self.n_blocks, self.n_blocks), dtype=bool)
        for qb, kbs in enumerate(self.allowed):
            m[qb, list(kbs)] = True
        return m

    def mask(self):
        """Token-level ``(n, n)`` boolean mask."""
        ids = np.arange(self.n) // self.block
        return self._block_mask[np.ix_(ids, ids)]


def _allowed_blocks(n_blocks, stride):
    strided = set(range(0, n_blocks, stride))
    return tuple(
        tuple(sorted(strided | {b for b in (qb - 1, qb, qb + 1) if 0 <= b < n_blocks}))
        for qb in range(n_blocks)
    )


def make_pattern(n, block=DEFAULT_BLOCK, target_degree=256):
    """Block-local (self and both neighbours) plus strided pattern.

    The stride is the smallest one whose average keys per query does not exceed
    ``target_degree``; stride 1 is the full pattern. If no stride meets the
    budget the sparsest one (stride = number of blocks) is used.
    """
    n = check_positive_int(n, "n")
    block = check_positive_int(block, "block")
    n_blocks = -(-n // block)
    pattern = None
    for stride in range(1, n_blocks + 1):
        pattern = SparsePattern(n, block, _allowed_blocks(n_blocks, stride), target_degree, stride)
        if pattern.average_degree() <= target_degree:
            break
    return pattern


def block_sparse_attention(q, k, v, pattern, scale=None):
    q, k, v = _check_qkv(q, k, v)
    if not (q.shape[0] == k.shape[0] == pattern.n):
        raise ShapeError(f"pattern covers {pattern.n} tokens, got {q.shape[0]} queries and {k.shape[0]} keys")
    return attention_weights(q, k, scale, mask=pattern.mask()) @ v


def window_bounds(n, w):
    """Inclusive ``(lo, hi)`` key range for every query: ``i - floor(w/2) .. i + ceil(w/2) - 1``, clipped."""
    w = check_positive_int(w, "w")
    i = np.arange(n)
    lo = np.maximum(0, i - w // 2)
    hi = np.minimum(n - 1, i + (w + 1) // 2 - 1)
    return lo, hi


def window_mask(n, w):
    lo, hi = window_bounds(n, w)
    j = np.arange(n)[None, :]
    return (j >= lo[:, None]) & (j <= hi[:, None])


def sliding_window_attention(q, k, v, w, scale=None):
    q, k, v = _check_qkv(q, k, v)
    if q.shape[0] != k.shape[0]:
        raise ShapeError("sliding-window attention needs as many queries as keys")
    return attention_weights(q, k, scale, mask=window_mask(q.shape[0], w)) @ v


@dataclass(frozen=True)
class DenseSpec:
    n_queries: int
    n_keys: int | None = None


@dataclass(frozen=True)
class WindowSpec:
    n: int
    w: int


def count_interactions(spec):
    """Exact number of (query, key) pairs an operator evaluates."""
    if isinstance(spec, SparsePattern):
        return spec.interactions()
    if isinstance(spec, WindowSpec):
        if spec.n == 0:
            return 0
        lo, hi = window_bounds(spec.n, spec.w)
        return int((hi - lo + 1).sum())
    if isinstance(spec, DenseSpec):
        n_keys = spec.n_queries if spec.n_keys is None else spec.n_keys
        return spec.n_queries * n_keys
    raise TypeError(f"cannot count interactions for {type(spec).__name__}")
