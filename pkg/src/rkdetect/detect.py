"""Multi-round Kaczmarz corruption detection.

Three variants share one round structure (k randomized Kaczmarz steps
from the origin, then pick the d rows of largest absolute residual):

* "wr"    -- picked rows are deleted from the working system each round;
* "wor"   -- rounds run on the full system, picks accumulate as a union;
* "worus" -- like "wor" but each round's argmax skips already-picked rows,
             so exactly d * rounds rows end up selected.

After the last round the surviving subsystem is solved directly.
Round r of a run draws from the sub-stream keyed by (seed, r), so rounds
are mutually independent while the whole run stays reproducible.
"""

from dataclasses import dataclass

import numpy as np

from . import linalg
from .exceptions import InvalidConfigError, NotEnoughRowsError
from .linalg import as_matrix, as_vector
from .rk import make_rng, rk_run

WITH_REMOVAL = "wr"
WITHOUT_REMOVAL = "wor"
WITHOUT_REMOVAL_UNIQUE = "worus"
METHODS = (WITH_REMOVAL, WITHOUT_REMOVAL, WITHOUT_REMOVAL_UNIQUE)


@dataclass(frozen=True)
class DetectionConfig:
    method: str
    k: int          # RK iterations per round
    w: int          # rounds
    d: int          # picks per round
    seed: int = 0

    def validate(self, m=None, n=None):
        if self.method not in METHODS:
            raise InvalidConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.k < 0 or self.w < 1 or self.d < 1:
            raise InvalidConfigError(f"need k >= 0, w >= 1, d >= 1, got k={self.k} w={self.w} d={self.d}")
        if m is not None and self.d * self.w > m - n:
            raise InvalidConfigError(
                f"d * w = {self.d * self.w} exceeds the removable budget m - n = {m - n}")


@dataclass
class DetectionOutcome:
    selected: np.ndarray              # accumulated picks, original numbering, sorted
    per_round: list                   # one sorted index array per round, original numbering
    solution: np.ndarray
    rounds_run: int
    residual_norm: float = 0.0        # ||A_surv x - b_surv|| on the surviving subsystem
    consistent: bool = True           # residual_norm <= 1e-8 * (1 + ||b_surv||)


def top_d_residual_indices(A, b, x, d, exclude=()):
    """Indices (outside `exclude`) of the d largest |Ax - b| entries.

    Ties break toward the smaller index.
    """
    r = np.abs(linalg.residual(A, x, b))
    excl = np.asarray(sorted({int(i) for i in list(exclude)}), dtype=int)
    if excl.size:
        r[excl] = -np.inf
    avail = r.shape[0] - excl.size
    if d > avail:
        raise NotEnoughRowsError(f"asked for {d} rows but only {avail} are admissible")
    # stable sort on negated magnitudes -> ties keep ascending index order
    order = np.argsort(-r, kind="stable")
    return np.sort(order[:d])


def in_detection_horizon(sys, x):
    """Strictly inside the ball around the true solution where the
    largest residual magnitudes are exactly the corrupted rows."""
    sys.require_truth()
    eps_star = sys.eps_star  # raises NoCorruptionError when s = 0
    x = as_vector(x, sys.n)
    return bool(np.linalg.norm(x - sys.x_star) < 0.5 * eps_star)


def _final_solve(A, b):
    x = linalg.least_squares_solve(A, b)
    rnorm = float(np.linalg.norm(A @ x - b))
    return x, rnorm, rnorm <= 1e-8 * (1.0 + float(np.linalg.norm(b)))


def detect(A, b, cfg):
    """Run the configured multi-round method on (A, b)."""
    A = as_matrix(A)
    b = as_vector(b, A.shape[0])
    cfg.validate(*A.shape)
    if cfg.method == WITH_REMOVAL:
        return _mrk_with_removal(A, b, cfg)
    return _mrk_union(A, b, cfg, unique=cfg.method == WITHOUT_REMOVAL_UNIQUE)


def mrk_with_removal(A, b, cfg):
    if cfg.method != WITH_REMOVAL:
        raise InvalidConfigError(f"config method is {cfg.method!r}, expected {WITH_REMOVAL!r}")
    return detect(A, b, cfg)


def mrk_without_removal(A, b, cfg):
    if cfg.method != WITHOUT_REMOVAL:
        raise InvalidConfigError(f"config method is {cfg.method!r}, expected {WITHOUT_REMOVAL!r}")
    return detect(A, b, cfg)


def mrk_without_removal_unique(A, b, cfg):
    if cfg.method != WITHOUT_REMOVAL_UNIQUE:
        raise InvalidConfigError(f"config method is {cfg.method!r}, expected {WITHOUT_REMOVAL_UNIQUE!r}")
    return detect(A, b, cfg)


def _mrk_with_removal(A, b, cfg):
    work_A, work_b = A, b
    orig = np.arange(A.shape[0])  # original index of each surviving row
    x0 = np.zeros(A.shape[1])
    per_round = []
    for r in range(cfg.w):
        rng = make_rng(cfg.seed, r)
        trace = rk_run(work_A, work_b, x0, cfg.k, rng)
        picks = top_d_residual_indices(work_A, work_b, trace.iterate, cfg.d)
        per_round.append(np.sort(orig[picks]))
        keep = np.ones(work_A.shape[0], dtype=bool)
        keep[picks] = False
        work_A, work_b, orig = work_A[keep], work_b[keep], orig[keep]
    selected = np.sort(np.concatenate(per_round)) if per_round else np.empty(0, dtype=int)
    x, rnorm, ok = _final_solve(work_A, work_b)
    return DetectionOutcome(selected=selected, per_round=per_round, solution=x,
                            rounds_run=cfg.w, residual_norm=rnorm, consistent=ok)


def _mrk_union(A, b, cfg, unique):
    x0 = np.zeros(A.shape[1])
    selected = np.empty(0, dtype=int)
    per_round = []
    for r in range(cfg.w):
        rng = make_rng(cfg.seed, r)
        trace = rk_run(A, b, x0, cfg.k, rng)
        exclude = selected if unique else ()
        picks = top_d_residual_indices(A, b, trace.iterate, cfg.d, exclude=exclude)
        per_round.append(picks)
        selected = np.union1d(selected, picks).astype(int)
    keep = np.ones(A.shape[0], dtype=bool)
    keep[selected] = False
    x, rnorm, ok = _final_solve(A[keep], b[keep])
    return DetectionOutcome(selected=selected, per_round=per_round, solution=x,
                            rounds_run=cfg.w, residual_norm=rnorm, consistent=ok)
