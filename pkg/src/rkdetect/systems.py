"""Ground-truthed corrupted-system construction, the brute-force
smallest-support oracle, and system file round-tripping.

A corrupted system bundles the observed pair (A, b) with the clean
right-hand side, the planted solution, and the corruption support, so
detection metrics can be scored exactly. Systems loaded from bare
matrix/vector files carry no ground truth; solvers still run on them but
truth-dependent predicates raise NoGroundTruthError.
"""

import itertools
import os
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .exceptions import (
    InvalidSpecError,
    NoConsistentSubsystemError,
    NoCorruptionError,
    NoGroundTruthError,
    ParseError,
    RankDeficientError,
    TooLargeError,
)
from .linalg import as_matrix, as_vector
from .rk import make_rng

GAUSSIAN = "gaussian"
CORRELATED = "correlated"

# Correlated family: entries drawn from a normal with mean 1; the spread
# parameter is interpreted as a variance (std = sqrt(0.5)).
CORRELATED_MEAN = 1.0
CORRELATED_VAR = 0.5


@dataclass(frozen=True)
class CorruptionLaw:
    """Either uniform integers on [lo, hi] or a single constant value."""
    kind: str  # "uniform_int" | "constant"
    lo: int = 1
    hi: int = 5
    value: float = 1.0

    @staticmethod
    def uniform_int(lo, hi):
        return CorruptionLaw(kind="uniform_int", lo=int(lo), hi=int(hi))

    @staticmethod
    def constant(value):
        return CorruptionLaw(kind="constant", value=float(value))

    def draw(self, rng, count):
        if self.kind == "constant":
            if self.value == 0.0:
                raise InvalidSpecError("constant corruption value must be nonzero")
            return np.full(count, self.value)
        if self.kind != "uniform_int":
            raise InvalidSpecError(f"unknown corruption law {self.kind!r}")
        vals = rng.integers(self.lo, self.hi + 1, size=count).astype(float)
        # zero corruption would make the row consistent; redraw those entries
        while True:
            zero = vals == 0.0
            if not zero.any():
                return vals
            if self.lo == 0 and self.hi == 0:
                raise InvalidSpecError("corruption range {0} only produces zeros")
            vals[zero] = rng.integers(self.lo, self.hi + 1, size=int(zero.sum())).astype(float)


@dataclass(frozen=True)
class GenSpec:
    m: int
    n: int
    family: str = GAUSSIAN
    s: int = 0
    corruption: CorruptionLaw = field(default_factory=lambda: CorruptionLaw.uniform_int(1, 5))
    seed: int = 0
    correlated_mean: float = CORRELATED_MEAN
    correlated_var: float = CORRELATED_VAR

    def validate(self):
        if self.m <= self.n or self.n < 1:
            raise InvalidSpecError(f"need m > n >= 1, got m={self.m} n={self.n}")
        if not 0 <= self.s <= self.m - self.n:
            raise InvalidSpecError(f"need 0 <= s <= m - n, got s={self.s}")
        if self.family not in (GAUSSIAN, CORRELATED):
            raise InvalidSpecError(f"unknown family {self.family!r}")


@dataclass
class CorruptedSystem:
    A: np.ndarray
    b: np.ndarray
    b_star: np.ndarray = None
    x_star: np.ndarray = None
    support: np.ndarray = None  # sorted corruption indices, 0-based
    eps: np.ndarray = None      # corruption values aligned with support

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def n(self):
        return self.A.shape[1]

    @property
    def s(self):
        return 0 if self.support is None else int(self.support.size)

    @property
    def has_truth(self):
        return self.x_star is not None

    def require_truth(self):
        if not self.has_truth:
            raise NoGroundTruthError("system carries no ground truth")

    @property
    def eps_star(self):
        return epsilon_star(self)


def epsilon_star(sys):
    """Smallest corruption magnitude, min over the support of |eps_i|."""
    if sys.support is None and sys.x_star is None:
        raise NoGroundTruthError("system carries no ground truth")
    if sys.support is None or sys.support.size == 0:
        raise NoCorruptionError("system has no corrupted entries")
    return float(np.min(np.abs(sys.eps)))


def generate(spec):
    """Draw a unit-row-norm system with planted solution and corruption.

    Deterministic under spec.seed: same spec gives a byte-identical
    system.
    """
    spec.validate()
    rng = make_rng(spec.seed)
    if spec.family == GAUSSIAN:
        A = rng.standard_normal((spec.m, spec.n))
    else:
        A = spec.correlated_mean + np.sqrt(spec.correlated_var) * rng.standard_normal((spec.m, spec.n))
    A = linalg.normalize_rows(A)
    x_star = rng.standard_normal(spec.n)
    b_star = A @ x_star
    b = b_star.copy()
    if spec.s > 0:
        support = np.sort(rng.choice(spec.m, size=spec.s, replace=False))
        eps = spec.corruption.draw(rng, spec.s)
        b[support] += eps
    else:
        support = np.empty(0, dtype=int)
        eps = np.empty(0)
    return CorruptedSystem(A=A, b=b, b_star=b_star, x_star=x_star, support=support, eps=eps)


def brute_force_l0_oracle(A, b):
    """Smallest set of rows whose removal leaves a consistent full-rank
    system, found by exhaustive support enumeration (tiny systems only).

    Supports are scanned by increasing cardinality, lexicographically
    within each cardinality, so ties resolve to the smallest support.
    """
    A = as_matrix(A)
    b = as_vector(b, A.shape[0])
    m, n = A.shape
    if m > 20 or n > 4:
        raise TooLargeError(f"oracle limited to m <= 20, n <= 4, got {m} x {n}")
    for size in range(0, m - n + 1):
        for support in itertools.combinations(range(m), size):
            keep = np.ones(m, dtype=bool)
            keep[list(support)] = False
            A_sub, b_sub = A[keep], b[keep]
            try:
                x = linalg.least_squares_solve(A_sub, b_sub)
            except RankDeficientError:
                continue
            if np.linalg.norm(A_sub @ x - b_sub) <= 1e-8 * (1.0 + np.linalg.norm(b_sub)):
                return np.asarray(support, dtype=int), x
    raise NoConsistentSubsystemError("no consistent full-rank subsystem found")


# --- persistence ------------------------------------------------------------
# A system directory holds A.txt and b.txt (formats from rkdetect.linalg)
# plus, when ground truth exists, truth.txt:
#   line 1: s
#   s lines: "<index (1-based)> <epsilon>"
#   line s+2: eps_star ("-" when s = 0)
#   n lines: entries of x_star

_TRUTH = "truth.txt"


def save_system(sys, path):
    os.makedirs(path, exist_ok=True)
    linalg.save_matrix(os.path.join(path, "A.txt"), sys.A)
    linalg.save_vector(os.path.join(path, "b.txt"), sys.b)
    if not sys.has_truth:
        return
    lines = [str(sys.s)]
    for idx, e in zip(sys.support, sys.eps):
        lines.append(f"{int(idx) + 1} {e:.17g}")
    lines.append(f"{epsilon_star(sys):.17g}" if sys.s > 0 else "-")
    lines.extend(f"{v:.17g}" for v in sys.x_star)
    with open(os.path.join(path, _TRUTH), "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_system(path):
    A = linalg.load_matrix(os.path.join(path, "A.txt"))
    b = linalg.load_vector(os.path.join(path, "b.txt"))
    if b.shape[0] != A.shape[0]:
        raise ParseError(os.path.join(path, "b.txt"), 1,
                         f"right-hand side length {b.shape[0]} != row count {A.shape[0]}")
    truth_path = os.path.join(path, _TRUTH)
    if not os.path.exists(truth_path):
        return CorruptedSystem(A=A, b=b)
    with open(truth_path) as fh:
        lines = fh.read().splitlines()
    try:
        s = int(lines[0])
    except (IndexError, ValueError):
        raise ParseError(truth_path, 1, "expected corruption count") from None
    if len(lines) < s + 2 + A.shape[1]:
        raise ParseError(truth_path, len(lines) + 1, "truth file truncated")
    support = np.empty(s, dtype=int)
    eps = np.empty(s)
    for i in range(s):
        parts = lines[1 + i].split()
        if len(parts) != 2:
            raise ParseError(truth_path, i + 2, "expected '<index> <epsilon>'")
        try:
            support[i] = int(parts[0]) - 1
            eps[i] = float(parts[1])
        except ValueError:
            raise ParseError(truth_path, i + 2, "non-numeric corruption entry") from None
    try:
        x_star = np.array([float(v) for v in lines[s + 2: s + 2 + A.shape[1]]])
    except ValueError:
        raise ParseError(truth_path, s + 3, "non-numeric solution entry") from None
    b_star = b.copy()
    b_star[support] -= eps
    return CorruptedSystem(A=A, b=b, b_star=b_star, x_star=x_star, support=support, eps=eps)
