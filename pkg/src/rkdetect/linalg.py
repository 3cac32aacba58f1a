"""Dense matrix/vector primitives used by every other module.

Matrices are plain 2-D float64 numpy arrays (row-major), vectors 1-D.
Row indices are 0-based everywhere in code; the file formats and CLI
report 1-based indices.
"""

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    EmptySystemError,
    IndexOutOfRangeError,
    ParseError,
    RankDeficientError,
    ZeroRowError,
)

# Relative gap below which a system is treated as rank deficient.
RANK_TOL = 1e-10
_ZERO_ROW_TOL = 1e-300


def as_matrix(A):
    """Validate and return A as a finite 2-D float64 array."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise DimensionMismatchError(f"expected a nonempty 2-D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DimensionMismatchError("matrix contains non-finite entries")
    return A


def as_vector(v, length=None):
    """Validate and return v as a finite 1-D float64 array."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise DimensionMismatchError(f"expected a 1-D vector, got shape {v.shape}")
    if length is not None and v.shape[0] != length:
        raise DimensionMismatchError(f"expected length {length}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise DimensionMismatchError("vector contains non-finite entries")
    return v


def normalize_rows(A):
    """Return a copy of A with every row scaled to unit Euclidean norm."""
    A = as_matrix(A)
    norms = np.linalg.norm(A, axis=1)
    bad = np.flatnonzero(norms < _ZERO_ROW_TOL)
    if bad.size:
        raise ZeroRowError(int(bad[0]))
    return A / norms[:, None]


def residual(A, x, b):
    """Signed residual Ax - b."""
    A = as_matrix(A)
    x = as_vector(x, A.shape[1])
    b = as_vector(b, A.shape[0])
    return A @ x - b


def subsystem(A, b, drop):
    """Remove the rows of (A, b) indexed by `drop`, preserving order."""
    A = as_matrix(A)
    b = as_vector(b, A.shape[0])
    m = A.shape[0]
    drop = np.asarray(sorted({int(i) for i in list(drop)}), dtype=int)
    if drop.size and (drop[0] < 0 or drop[-1] >= m):
        raise IndexOutOfRangeError(f"drop indices must lie in [0, {m})")
    if drop.size >= m:
        raise EmptySystemError("dropping every row leaves an empty system")
    keep = np.ones(m, dtype=bool)
    keep[drop] = False
    return A[keep].copy(), b[keep].copy()


def least_squares_solve(A, b):
    """Minimizer of ||Ax - b||^2 via QR; raises RankDeficientError when
    the smallest singular value is below RANK_TOL relative to the largest."""
    A = as_matrix(A)
    b = as_vector(b, A.shape[0])
    m, n = A.shape
    if m < n:
        raise RankDeficientError(f"system is underdetermined ({m} rows < {n} cols)")
    Q, R = np.linalg.qr(A)
    sv = np.linalg.svd(R, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] < RANK_TOL * sv[0]:
        raise RankDeficientError(
            f"smallest singular value {sv[-1]:.3e} below {RANK_TOL:g} * largest {sv[0]:.3e}")
    return np.linalg.solve(R, Q.T @ b)


def smallest_singular_value(A):
    """sigma_min(A); computed on the n x n triangular factor of a QR of A."""
    A = as_matrix(A)
    m, n = A.shape
    if m < n:
        raise DimensionMismatchError(f"need m >= n, got {m} x {n}")
    R = np.linalg.qr(A, mode="r")
    return float(np.linalg.svd(R, compute_uv=False)[-1])


# --- text file formats ------------------------------------------------------
# Matrix file: first line "m n", then m lines of n space-separated decimals.
# Vector file: first line "m", then m lines of one decimal each.
# All decimals are written with 17 significant digits so round trips are exact.


def _fmt(v):
    return f"{float(v):.17g}"


def save_matrix(path, A):
    A = as_matrix(A)
    m, n = A.shape
    lines = [f"{m} {n}"]
    lines.extend(" ".join(_fmt(v) for v in row) for row in A)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_matrix(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError(path, 1, "empty matrix file")
    head = lines[0].split()
    if len(head) != 2:
        raise ParseError(path, 1, f"expected 'm n' header, got {lines[0]!r}")
    try:
        m, n = int(head[0]), int(head[1])
    except ValueError:
        raise ParseError(path, 1, f"non-integer header {lines[0]!r}") from None
    if len(lines) < m + 1:
        raise ParseError(path, len(lines) + 1, f"expected {m} data rows, file truncated")
    data = np.empty((m, n))
    for i in range(m):
        parts = lines[1 + i].split()
        if len(parts) != n:
            raise ParseError(path, i + 2, f"expected {n} entries, got {len(parts)}")
        try:
            data[i] = [float(p) for p in parts]
        except ValueError:
            raise ParseError(path, i + 2, "non-numeric entry") from None
    return as_matrix(data)


def save_vector(path, v):
    v = as_vector(v)
    lines = [str(v.shape[0])]
    lines.extend(_fmt(x) for x in v)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_vector(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError(path, 1, "empty vector file")
    try:
        m = int(lines[0])
    except ValueError:
        raise ParseError(path, 1, f"expected integer length, got {lines[0]!r}") from None
    if len(lines) < m + 1:
        raise ParseError(path, len(lines) + 1, f"expected {m} entries, file truncated")
    data = np.empty(m)
    for i in range(m):
        try:
            data[i] = float(lines[1 + i])
        except ValueError:
            raise ParseError(path, i + 2, "non-numeric entry") from None
    return as_vector(data)
