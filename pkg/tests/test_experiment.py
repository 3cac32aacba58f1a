import math

import numpy as np
import pytest

from rkdetect.exceptions import InvalidSpecError, IoError
from rkdetect.experiment import (
    CSV_HEADER,
    ExperimentSpec,
    bound_overlay,
    emit_csv,
    emit_svg,
    parse_corruption,
    parse_spec_file,
    run_experiment,
)
from rkdetect.systems import CorruptionLaw, GenSpec, generate, save_system


def small_spec(**overrides):
    kwargs = dict(m=120, n=5, method="wor", s_list=(3,), d_list=(None,),
                  k_list=(150,), w_list=(5,), delta_list=(0.5,),
                  trials=8, master_seed=7)
    kwargs.update(overrides)
    return ExperimentSpec(**kwargs)


class TestRunExperiment:
    def test_table_shape(self):
        table = run_experiment(small_spec())
        assert len(table) == 3  # three metrics, one grid point
        assert {row["metric"] for row in table} == {
            "one_round_all", "all_rounds_all", "fraction_detected"}
        for row in table:
            assert row["trials"] == 8
            assert 0.0 <= row["value"] <= 1.0

    def test_s_zero_conventions(self):
        table = run_experiment(small_spec(s_list=(0,), d_list=(1,)))
        values = {row["metric"]: row["value"] for row in table}
        assert values["all_rounds_all"] == 1.0
        assert values["fraction_detected"] == 1.0

    def test_one_round_not_applicable_when_d_lt_s(self):
        table = run_experiment(small_spec(s_list=(3,), d_list=(1,), w_list=(6,)))
        one_round = next(r for r in table if r["metric"] == "one_round_all")
        assert math.isnan(one_round["value"])
        assert one_round["trials"] == 0

    def test_metric_consistency(self):
        # a fully successful round's picks survive the union: one-round
        # success implies all-rounds success for the union methods
        spec = small_spec(trials=20)
        table = run_experiment(spec)
        values = {row["metric"]: row["value"] for row in table}
        assert values["one_round_all"] <= values["all_rounds_all"] + 1e-12

    def test_deterministic_across_worker_counts(self):
        t1 = run_experiment(small_spec(workers=1))
        t2 = run_experiment(small_spec(workers=2))
        assert t1 == t2

    def test_budget_validation(self):
        with pytest.raises(InvalidSpecError):
            run_experiment(small_spec(d_list=(40,), w_list=(5,)))

    def test_file_system_source(self, tmp_path):
        sys = generate(GenSpec(m=100, n=4, s=3, seed=3))
        save_system(sys, tmp_path / "sys")
        spec = small_spec(m=100, n=4, system_path=str(tmp_path / "sys"),
                          s_list=(3,), d_list=(3,), w_list=(4,), trials=5)
        table = run_experiment(spec)
        assert all(0.0 <= r["value"] <= 1.0 for r in table if not math.isnan(r["value"]))


class TestBoundOverlay:
    def test_bounds_next_to_empirical(self):
        table = bound_overlay(small_spec(trials=5))
        metrics = {row["metric"] for row in table}
        assert {"k_star", "bound_single_round", "bound_one_success",
                "bound_cumulative"} <= metrics
        bound = next(r for r in table if r["metric"] == "bound_one_success")
        empirical = next(r for r in table if r["metric"] == "all_rounds_all")
        assert 0.0 <= bound["value"] <= 1.0
        # validity: the empirical rate dominates the bound up to noise
        n = max(1, empirical["trials"])
        phat = empirical["value"]
        margin = 3 * math.sqrt(max(phat * (1 - phat), 1e-12) / n)
        assert phat >= bound["value"] - margin


class TestCsv:
    def test_header_and_determinism(self, tmp_path):
        table = run_experiment(small_spec())
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        emit_csv(table, p1)
        emit_csv(table, p2)
        text = p1.read_text()
        assert text.splitlines()[0] == CSV_HEADER
        assert p1.read_bytes() == p2.read_bytes()

    def test_empty_table_rejected(self, tmp_path):
        with pytest.raises(IoError):
            emit_csv([], tmp_path / "x.csv")
        assert not (tmp_path / "x.csv").exists()

    def test_single_row(self, tmp_path):
        row = {"metric": "all_rounds_all", "s": 2, "d": 2, "k": 10, "W": 3,
               "delta": 0.5, "value": 1.0, "ci_lo": 1.0, "ci_hi": 1.0, "trials": 4}
        emit_csv([row], tmp_path / "one.csv")
        lines = (tmp_path / "one.csv").read_text().splitlines()
        assert len(lines) == 2
        assert lines[1] == "all_rounds_all,2,2,10,3,0.5,1,1,1,4"


class TestSvg:
    def _table(self):
        rows = []
        for s, v in ((5, 0.9), (10, 0.8), (20, 0.55)):
            rows.append({"metric": "all_rounds_all", "s": s, "d": s, "k": 100,
                         "W": 10, "delta": 0.5, "value": v, "ci_lo": v - 0.05,
                         "ci_hi": v + 0.05, "trials": 50})
        return rows

    def test_golden_determinism(self, tmp_path):
        p1, p2 = tmp_path / "a.svg", tmp_path / "b.svg"
        emit_svg(self._table(), p1)
        emit_svg(self._table(), p2)
        content = p1.read_text()
        assert p1.read_bytes() == p2.read_bytes()
        assert content.startswith('<svg xmlns="http://www.w3.org/2000/svg" version="1.1"')
        assert "<polyline" in content and "corrupted rows s" in content

    def test_empty_rejected(self, tmp_path):
        with pytest.raises(IoError):
            emit_svg([], tmp_path / "x.svg")
        assert not (tmp_path / "x.svg").exists()


class TestCoverageSanity:
    def test_interval_covers_bernoulli_rate(self):
        # meta-check of the reported 95% intervals on a known Bernoulli rate
        rng = np.random.default_rng(55)
        p_true = 0.6
        n = 200
        covered = 0
        meta = 200
        z = 1.959963984540054
        for _ in range(meta):
            draws = rng.random(n) < p_true
            mean = draws.mean()
            se = draws.std(ddof=1) / math.sqrt(n)
            if mean - z * se <= p_true <= mean + z * se:
                covered += 1
        assert covered >= 0.9 * meta


class TestSpecFile:
    def test_parse_round_trip(self, tmp_path):
        path = tmp_path / "sweep.spec"
        path.write_text("""
# sweep over two corruption counts
m=120
n=5
method=wor
s=3
s=5
d=auto
k=150
w=5
delta=0.5
trials=4
seed=9
corruption=uniform:1:5
""")
        spec = parse_spec_file(path)
        assert spec.m == 120 and spec.n == 5
        assert spec.s_list == (3, 5)
        assert spec.d_list == (None,)
        assert spec.master_seed == 9
        assert len(spec.grid()) == 2

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.spec"
        path.write_text("m=10\nn=2\nbogus=1\n")
        with pytest.raises(InvalidSpecError):
            parse_spec_file(path)

    def test_parse_corruption(self):
        law = parse_corruption("uniform:1:5")
        assert law.kind == "uniform_int" and (law.lo, law.hi) == (1, 5)
        law = parse_corruption("constant:2.5")
        assert law.kind == "constant" and law.value == 2.5
        with pytest.raises(InvalidSpecError):
            parse_corruption("gamma:1")
