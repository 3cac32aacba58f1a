import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from rkdetect.estimator import KaczmarzCorruptionDetector
from rkdetect.systems import GenSpec, generate


@pytest.fixture(scope="module")
def corrupted():
    return generate(GenSpec(m=300, n=8, s=5, seed=13))


class TestSklearnSurface:
    def test_get_set_params_round_trip(self):
        est = KaczmarzCorruptionDetector(method="worus", iters_per_round=42,
                                         picks_per_round=3, rounds=7, random_state=1)
        params = est.get_params()
        est2 = KaczmarzCorruptionDetector().set_params(**params)
        assert est2.get_params() == params

    def test_clone(self):
        est = KaczmarzCorruptionDetector(rounds=2, random_state=5)
        assert clone(est).get_params() == est.get_params()

    def test_predict_before_fit_raises(self, corrupted):
        with pytest.raises(NotFittedError):
            KaczmarzCorruptionDetector().predict(corrupted.A)


class TestFit:
    def test_recovers_solution_and_outliers(self, corrupted):
        est = KaczmarzCorruptionDetector(method="wor", iters_per_round=400,
                                         picks_per_round=5, rounds=10, random_state=0)
        est.fit(corrupted.A, corrupted.b)
        assert set(corrupted.support) <= set(est.outlier_idx_)
        assert np.linalg.norm(est.coef_ - corrupted.x_star) < 1e-6
        assert est.inlier_mask_.sum() == corrupted.m - est.outlier_idx_.size
        assert not est.inlier_mask_[est.outlier_idx_].any()

    def test_predict_matches_clean_rhs(self, corrupted):
        est = KaczmarzCorruptionDetector(method="wr", iters_per_round=400,
                                         picks_per_round=5, rounds=5, random_state=2)
        est.fit(corrupted.A, corrupted.b)
        pred = est.predict(corrupted.A)
        np.testing.assert_allclose(pred, corrupted.b_star, atol=1e-5)

    def test_default_round_budget(self, corrupted):
        est = KaczmarzCorruptionDetector(method="worus", iters_per_round=100,
                                         picks_per_round=30, random_state=3)
        est.fit(corrupted.A, corrupted.b)
        # floor((300 - 8) / 30) = 9 rounds of 30 unique picks
        assert est.outlier_idx_.size == 270

    def test_reproducible_under_seed(self, corrupted):
        kwargs = dict(method="wor", iters_per_round=200, picks_per_round=5,
                      rounds=8, random_state=11)
        a = KaczmarzCorruptionDetector(**kwargs).fit(corrupted.A, corrupted.b)
        b = KaczmarzCorruptionDetector(**kwargs).fit(corrupted.A, corrupted.b)
        np.testing.assert_array_equal(a.outlier_idx_, b.outlier_idx_)
        assert a.coef_.tobytes() == b.coef_.tobytes()

    def test_score_is_r2(self, corrupted):
        est = KaczmarzCorruptionDetector(method="wor", iters_per_round=400,
                                         picks_per_round=5, rounds=10, random_state=0)
        est.fit(corrupted.A, corrupted.b)
        assert est.score(corrupted.A, corrupted.b_star) > 0.999
