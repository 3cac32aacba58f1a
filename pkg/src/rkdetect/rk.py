"""Randomized Kaczmarz iteration with squared-row-norm sampling.

All randomness flows through numpy's PCG64 generator seeded via
SeedSequence, so an identical seed reproduces the identical row-index
stream on every platform and run.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import IndexOutOfRangeError, ZeroRowError
from .linalg import as_matrix, as_vector


def make_rng(*seed_keys):
    """PCG64 generator keyed by a tuple of integers.

    Sub-streams for (trial, round) pairs are derived by extending the key
    tuple, which keeps independent runs statistically independent while
    staying reproducible.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(tuple(int(k) for k in seed_keys))))


@dataclass
class RkTrace:
    iterate: np.ndarray
    iterations_done: int
    rows_visited: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))


def row_sampling_cdf(A):
    """Cumulative distribution over rows, proportional to squared row norms."""
    sq = np.einsum("ij,ij->i", A, A)
    total = sq.sum()
    if total <= 0.0:
        raise ZeroRowError(0)
    cdf = np.cumsum(sq)
    cdf /= cdf[-1]
    cdf[-1] = 1.0
    return cdf


def sample_row_index(A, rng):
    """Draw one row index t with P(t) proportional to ||a_t||^2."""
    A = as_matrix(A)
    cdf = row_sampling_cdf(A)
    i = int(np.searchsorted(cdf, rng.random(), side="right"))
    return min(i, A.shape[0] - 1)


def rk_step(A, b, x, i):
    """Project x onto the hyperplane a_i^T x = b_i."""
    A = as_matrix(A)
    b = as_vector(b, A.shape[0])
    x = as_vector(x, A.shape[1])
    if not 0 <= i < A.shape[0]:
        raise IndexOutOfRangeError(f"row index {i} out of range [0, {A.shape[0]})")
    a = A[i]
    nrm_sq = a @ a
    if nrm_sq < 1e-300:
        raise ZeroRowError(i)
    return x + ((b[i] - a @ x) / nrm_sq) * a


def rk_run(A, b, x0, k, rng, record_rows=False):
    """k Kaczmarz steps with row indices sampled by squared row norm.

    The per-row CDF is built once; index draws then cost O(log m) each.
    k=0 returns a copy of x0.
    """
    A = as_matrix(A)
    b = as_vector(b, A.shape[0])
    x = as_vector(x0, A.shape[1]).copy()
    k = int(k)
    if k < 0:
        raise IndexOutOfRangeError("k must be >= 0")
    if k == 0:
        return RkTrace(iterate=x, iterations_done=0)

    m = A.shape[0]
    cdf = row_sampling_cdf(A)
    idx = np.minimum(np.searchsorted(cdf, rng.random(k), side="right"), m - 1)
    inv_sq = 1.0 / np.einsum("ij,ij->i", A, A)
    for i in idx:
        a = A[i]
        x += ((b[i] - a @ x) * inv_sq[i]) * a
    visited = idx.copy() if record_rows else np.empty(0, dtype=int)
    return RkTrace(iterate=x, iterations_done=k, rows_visited=visited)
