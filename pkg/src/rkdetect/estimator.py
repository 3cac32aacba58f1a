"""Scikit-learn style front end for the multi-round detection methods.

Treats (A, b) as a regression problem with sparse gross outliers in y:
fit() detects the corrupted rows, solves the surviving subsystem, and
exposes the result through the usual coef_ / predict() surface so the
estimator composes with sklearn pipelines and model selection.
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, check_random_state, check_X_y

from .bounds import max_rounds
from .detect import DetectionConfig, detect as _run_detect


class KaczmarzCorruptionDetector(RegressorMixin, BaseEstimator):
    """Robust linear solver that flags corrupted right-hand-side entries.

    Parameters
    ----------
    method : {"wr", "wor", "worus"}
        Multi-round variant: remove picks each round, accumulate picks as
        a union, or accumulate with unique per-round picks.
    iters_per_round : int
        Randomized Kaczmarz iterations per round.
    picks_per_round : int
        Rows flagged per round (the user's estimate of the corruption count).
    rounds : int or None
        Number of rounds; None uses the full budget floor((m - n) / d).
    random_state : int, RandomState or None
        Seeds the row-sampling streams; runs are reproducible per seed.

    Attributes
    ----------
    coef_ : ndarray of shape (n_features,)
        Solution of the surviving subsystem.
    outlier_idx_ : ndarray
        Accumulated flagged row indices (original numbering, sorted).
    inlier_mask_ : ndarray of bool, shape (n_samples,)
        False exactly on the flagged rows.
    outcome_ : DetectionOutcome
        Full per-round record of the run.
    """

    def __init__(self, method="wor", iters_per_round=500, picks_per_round=1,
                 rounds=None, random_state=None):
        self.method = method
        self.iters_per_round = iters_per_round
        self.picks_per_round = picks_per_round
        self.rounds = rounds
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        m, n = X.shape
        w = self.rounds if self.rounds is not None else max_rounds(m, n, self.picks_per_round)
        seed = check_random_state(self.random_state).randint(2**31)
        cfg = DetectionConfig(method=self.method, k=self.iters_per_round,
                              w=w, d=self.picks_per_round, seed=seed)
        outcome = _run_detect(X, y, cfg)
        self.n_features_in_ = n
        self.outcome_ = outcome
        self.coef_ = outcome.solution
        self.outlier_idx_ = outcome.selected
        mask = np.ones(m, dtype=bool)
        mask[outcome.selected] = False
        self.inlier_mask_ = mask
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = np.asarray(X, dtype=float)
        return X @ self.coef_
