import numpy as np
import pytest

from rkdetect import linalg
from rkdetect.exceptions import (
    InvalidSpecError,
    NoCorruptionError,
    NoGroundTruthError,
    ParseError,
    TooLargeError,
)
from rkdetect.systems import (
    CorruptedSystem,
    CorruptionLaw,
    GenSpec,
    brute_force_l0_oracle,
    epsilon_star,
    generate,
    load_system,
    save_system,
)


class TestGenerate:
    def test_no_corruption(self):
        sys = generate(GenSpec(m=20, n=3, s=0, seed=1))
        np.testing.assert_array_equal(sys.b, sys.b_star)
        assert sys.support.size == 0
        with pytest.raises(NoCorruptionError):
            epsilon_star(sys)

    def test_uniform_integer_corruption(self):
        sys = generate(GenSpec(m=300, n=5, s=40, seed=2,
                               corruption=CorruptionLaw.uniform_int(1, 5)))
        assert np.all((sys.eps >= 1) & (sys.eps <= 5))
        assert np.all(sys.eps == np.round(sys.eps))
        assert epsilon_star(sys) >= 1.0

    def test_seed_determinism(self):
        spec = GenSpec(m=50, n=4, s=5, seed=77)
        s1, s2 = generate(spec), generate(spec)
        assert s1.A.tobytes() == s2.A.tobytes()
        assert s1.b.tobytes() == s2.b.tobytes()
        np.testing.assert_array_equal(s1.support, s2.support)

    def test_invariants_over_random_specs(self):
        rng = np.random.default_rng(10)
        for _ in range(200):
            n = int(rng.integers(1, 6))
            m = int(rng.integers(n + 3, 40))
            s = int(rng.integers(0, m - n + 1))
            family = "gaussian" if rng.random() < 0.5 else "correlated"
            sys = generate(GenSpec(m=m, n=n, s=s, family=family, seed=int(rng.integers(2**32))))
            assert np.max(np.abs(np.linalg.norm(sys.A, axis=1) - 1.0)) < 1e-12
            assert np.max(np.abs(sys.A @ sys.x_star - sys.b_star)) < 1e-10
            mask = np.zeros(m, dtype=bool)
            mask[sys.support] = True
            np.testing.assert_array_equal(sys.b[~mask], sys.b_star[~mask])
            if s:
                np.testing.assert_array_equal(sys.b[sys.support], sys.b_star[sys.support] + sys.eps)
                assert epsilon_star(sys) > 0

    def test_correlated_worse_conditioned(self):
        gauss, corr = [], []
        for seed in range(20):
            g = generate(GenSpec(m=200, n=20, s=0, family="gaussian", seed=seed))
            c = generate(GenSpec(m=200, n=20, s=0, family="correlated", seed=seed))
            gauss.append(linalg.smallest_singular_value(g.A))
            corr.append(linalg.smallest_singular_value(c.A))
        assert np.median(corr) < np.median(gauss)

    def test_invalid_spec(self):
        with pytest.raises(InvalidSpecError):
            generate(GenSpec(m=5, n=5, s=0, seed=0))
        with pytest.raises(InvalidSpecError):
            generate(GenSpec(m=10, n=2, s=9, seed=0))


class TestEpsilonStar:
    def test_absolute_minimum(self):
        sys = CorruptedSystem(A=np.ones((5, 1)), b=np.zeros(5), b_star=np.zeros(5),
                              x_star=np.zeros(1), support=np.array([0, 2, 4]),
                              eps=np.array([3.0, -1.0, 5.0]))
        assert epsilon_star(sys) == 1.0

    def test_single_negative(self):
        sys = CorruptedSystem(A=np.ones((3, 1)), b=np.zeros(3), b_star=np.zeros(3),
                              x_star=np.zeros(1), support=np.array([1]), eps=np.array([-2.0]))
        assert epsilon_star(sys) == 2.0

    def test_constant_law(self):
        sys = generate(GenSpec(m=40, n=3, s=6, seed=4, corruption=CorruptionLaw.constant(1.0)))
        assert epsilon_star(sys) == 1.0


class TestOracle:
    def test_consistent_system(self):
        rng = np.random.default_rng(20)
        A = linalg.normalize_rows(rng.standard_normal((8, 2)))
        x = rng.standard_normal(2)
        support, sol = brute_force_l0_oracle(A, A @ x)
        assert support.size == 0
        np.testing.assert_allclose(sol, x, atol=1e-10)

    def test_one_d_example(self):
        support, sol = brute_force_l0_oracle([[1.0], [1.0], [1.0]], [2.0, 2.0, 7.0])
        np.testing.assert_array_equal(support, [2])
        assert sol[0] == pytest.approx(2.0)

    def test_needs_two_removals(self):
        # every single-row removal leaves an inconsistent system, dropping
        # rows 2 and 3 works
        A = np.ones((4, 1))
        b = np.array([1.0, 1.0, 3.0, 4.0])
        support, sol = brute_force_l0_oracle(A, b)
        np.testing.assert_array_equal(support, [2, 3])
        assert sol[0] == pytest.approx(1.0)

    def test_size_guard(self):
        with pytest.raises(TooLargeError):
            brute_force_l0_oracle(np.ones((25, 1)), np.ones(25))

    def test_agrees_with_planted_support(self):
        # oracle finds the planted corruption on generic tiny systems
        matches = 0
        trials = 0
        seed = 0
        while trials < 100:
            seed += 1
            rng = np.random.default_rng(seed)
            n = int(rng.integers(1, 4))
            m = int(rng.integers(n + 4, 13))
            s = int(rng.integers(1, 3))
            sys = generate(GenSpec(m=m, n=n, s=s, seed=seed,
                                   corruption=CorruptionLaw.uniform_int(1, 5)))
            trials += 1
            support, sol = brute_force_l0_oracle(sys.A, sys.b)
            if np.array_equal(support, sys.support):
                matches += 1
                np.testing.assert_allclose(sol, sys.x_star, atol=1e-8)
        assert matches >= 95  # general position can fail only rarely


class TestPersistence:
    def test_round_trip(self, tmp_path):
        sys = generate(GenSpec(m=30, n=4, s=5, seed=9))
        save_system(sys, tmp_path / "sys")
        loaded = load_system(tmp_path / "sys")
        assert loaded.A.tobytes() == sys.A.tobytes()
        assert loaded.b.tobytes() == sys.b.tobytes()
        np.testing.assert_array_equal(loaded.support, sys.support)
        np.testing.assert_array_equal(loaded.eps, sys.eps)
        np.testing.assert_array_equal(loaded.x_star, sys.x_star)
        # b_star is reconstructed as b - eps, exact only to rounding
        np.testing.assert_allclose(loaded.b_star, sys.b_star, atol=1e-12)

    def test_load_without_truth(self, tmp_path):
        sys = generate(GenSpec(m=20, n=3, s=2, seed=10))
        linalg.save_matrix(tmp_path / "A.txt", sys.A)
        linalg.save_vector(tmp_path / "b.txt", sys.b)
        loaded = load_system(tmp_path)
        assert not loaded.has_truth
        with pytest.raises(NoGroundTruthError):
            loaded.require_truth()
        # solver path still works
        x = linalg.least_squares_solve(loaded.A, loaded.b)
        assert x.shape == (3,)

    def test_truncated_truth_file(self, tmp_path):
        sys = generate(GenSpec(m=20, n=3, s=2, seed=11))
        save_system(sys, tmp_path / "sys")
        truth = tmp_path / "sys" / "truth.txt"
        truth.write_text("\n".join(truth.read_text().splitlines()[:3]) + "\n")
        with pytest.raises(ParseError):
            load_system(tmp_path / "sys")

    def test_deterministic_bytes(self, tmp_path):
        sys = generate(GenSpec(m=15, n=2, s=3, seed=12))
        save_system(sys, tmp_path / "a")
        save_system(sys, tmp_path / "b")
        for name in ("A.txt", "b.txt", "truth.txt"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
