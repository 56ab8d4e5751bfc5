import json

import numpy as np
import pytest

from cohenlab import InputError, is_positive_operator, product_of_symbols
from cohenlab.fuzz import (
    OPEN_QUESTION_NOTE,
    FuzzConfig,
    _trial,
    fuzz_mixed_violation_region,
    fuzz_open_question,
    fuzz_theorem_suite,
    generate_nonnegative_operator,
    generate_positive_diagonal_family,
    replay,
    resolve_workers,
    run_suite,
    trial_rng,
)


def stable(result) -> str:
    d = result.to_dict()
    d.pop("wallTime")
    return json.dumps(d, sort_keys=True)


class TestGenerators:
    def test_dense_entries_in_range(self):
        A = generate_nonnegative_operator(1, 2, density=1.0, scale=3.0)
        assert np.all(A.entries.real > 0) and np.all(A.entries.real <= 3.0)
        assert is_positive_operator(A)

    def test_deterministic(self):
        a = generate_nonnegative_operator(42, 5, 0.5)
        b = generate_nonnegative_operator(42, 5, 0.5)
        np.testing.assert_array_equal(a.entries, b.entries)

    def test_density(self):
        nz = [np.count_nonzero(generate_nonnegative_operator(s, 8, 0.3).entries) for s in range(1000)]
        assert abs(sum(nz) / (1000 * 64) - 0.3) <= 0.05

    def test_product_identity(self):
        for seed in range(20):
            Ds = generate_positive_diagonal_family(seed, 5, 4, constraint="productIdentity")
            assert product_of_symbols(Ds).equals_identity(1e-12)
            assert all(D.is_positive_symbol() for D in Ds)

    def test_product_dominates(self):
        for seed in range(20):
            Ds = generate_positive_diagonal_family(seed, 5, 3, constraint="productDominatesIdentity")
            assert product_of_symbols(Ds).dominates_identity(1e-12)

    def test_single_factor_identity(self):
        (D,) = generate_positive_diagonal_family(7, 4, 1, constraint="productIdentity")
        np.testing.assert_array_equal(D.symbol, np.ones(4))

    def test_log_range(self):
        Ds = generate_positive_diagonal_family(3, 50, 2, log_range=0.5, constraint="unconstrained")
        for D in Ds:
            assert np.all(np.abs(np.log(D.symbol.real)) <= 0.5)

    def test_errors(self):
        with pytest.raises(InputError):
            generate_nonnegative_operator(0, 0)
        with pytest.raises(InputError):
            generate_positive_diagonal_family(0, 3, 0)
        with pytest.raises(InputError):
            generate_positive_diagonal_family(0, 3, 2, constraint="bogus")


class TestConfig:
    def test_round_trip(self):
        c = FuzzConfig(seed=5, trials=17, n_min=3, n_max=7, m=4, m_min=2, p="inf", tolerance=1e-7)
        assert FuzzConfig.from_dict(json.loads(json.dumps(c.to_dict()))) == c

    @pytest.mark.parametrize("kw", [dict(trials=0), dict(n_min=5, n_max=3), dict(density=0.0),
                                    dict(m=0), dict(m=2, m_min=3), dict(p="0.5"),
                                    dict(entry_scale=-1.0), dict(tolerance=-1.0)])
    def test_invalid(self, kw):
        with pytest.raises(InputError):
            FuzzConfig(**kw)

    def test_workers_from_env(self, monkeypatch):
        monkeypatch.setenv("COHENLAB_THREADS", "3")
        assert resolve_workers() == 3
        assert resolve_workers(1) == 1
        monkeypatch.setenv("COHENLAB_THREADS", "many")
        with pytest.raises(InputError):
            resolve_workers()


class TestSeeding:
    def test_trial_streams_are_independent_of_neighbours(self):
        a = trial_rng(9, 5).random(4)
        b = trial_rng(9, 5).random(4)
        c = trial_rng(9, 6).random(4)
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_dropping_trials_does_not_shift_others(self):
        small, large = FuzzConfig(seed=3, trials=10), FuzzConfig(seed=3, trials=40)
        for i in range(10):
            assert _trial(small, "cohenMulti", i)[1].to_dict() == _trial(large, "cohenMulti", i)[1].to_dict()

    def test_negative_and_huge_seeds(self):
        FuzzConfig(seed=-1, trials=1)
        assert trial_rng(2 ** 64 + 3, 0).random() == trial_rng(3, 0).random()


class TestTheoremSuites:
    @pytest.mark.parametrize("target", ["normLeft", "normRight"])
    @pytest.mark.parametrize("p", ["1", "2", "inf"])
    def test_norm(self, target, p):
        res = fuzz_theorem_suite(FuzzConfig(seed=1, trials=100, n_max=6, m=4, m_min=2, p=p), target, 1)
        assert res.violation_count == 0 and res.min_margin_ratio >= 1 - 1e-9
        assert res.outcome_matches_expectation

    @pytest.mark.parametrize("target", ["numradLeft", "numradRight"])
    def test_numrad(self, target):
        res = fuzz_theorem_suite(FuzzConfig(seed=2, trials=40, m=3), target, 1)
        assert res.violation_count == 0 and res.min_margin_ratio >= 1 - 1e-6

    def test_numrad_identity_family(self):
        res = fuzz_theorem_suite(FuzzConfig(seed=2, trials=30, identity_family=True), "numradLeft", 1)
        assert res.min_margin_ratio == pytest.approx(1.0, abs=1e-12)

    def test_cohen_multi(self):
        res = fuzz_theorem_suite(FuzzConfig(seed=3, trials=200, m=3), "cohenMulti", 1)
        assert res.violation_count == 0 and res.outcome_matches_expectation

    def test_unknown_target(self):
        with pytest.raises(InputError):
            fuzz_theorem_suite(FuzzConfig(trials=1), "bogus")


class TestOpenQuestion:
    def test_no_violations_and_labelled(self):
        res = fuzz_open_question(FuzzConfig(seed=7, trials=2000, n_max=8), 1)
        assert res.violation_count == 0 and res.min_margin_ratio >= 1 - 1e-7
        assert res.note == OPEN_QUESTION_NOTE and "finite-dimensional evidence" in res.note
        assert res.cross_checks["perronVsGelfand"]["maxDeviation"] <= 1e-6
        assert res.cross_checks["rankOneClosedForm"]["maxDeviation"] <= 1e-8
        assert res.families["rank-one"]["trials"] == 300

    def test_identity_diagonal_gives_unit_margin(self):
        res = fuzz_open_question(FuzzConfig(seed=7, trials=200, identity_family=True), 1)
        out = [_trial(res.config, "openQuestion", i) for i in range(200)]
        margins = [o.margin for o, _ in out if o.margin is not None]
        assert margins and max(abs(m - 1.0) for m in margins) <= 1e-10

    def test_skips_vanishing_radius(self):
        res = fuzz_open_question(FuzzConfig(seed=1, trials=200), 1)
        # near-nilpotent trials have r(A) ~ eps^(1/n), occasionally below the skip threshold
        assert res.skipped == sum(f["skipped"] for f in res.families.values())
        assert res.trials_run == 200


class TestMixedRegion:
    def test_finds_violations_in_expected_families(self):
        res = fuzz_mixed_violation_region(FuzzConfig(seed=7, trials=300), 1)
        assert res.violation_count > 0 and res.outcome_matches_expectation
        assert res.families["example2"] == {"trials": 30, "violations": 30, "skipped": 0}
        assert res.families["identity"]["violations"] == 0
        assert res.min_margin_ratio < 1 - res.config.tolerance_for("mixedRegion")

    def test_violation_witnesses_replay(self):
        res = fuzz_mixed_violation_region(FuzzConfig(seed=11, trials=100), 1)
        assert res.violations
        for v in res.violations:
            again = replay("mixed-region", v["report"]).to_dict()
            for k in ("lhs", "rhsProduct", "marginRatio"):
                assert again[k] == pytest.approx(v["report"][k], rel=1e-12, abs=1e-300)
            assert again["satisfied"] is False

    def test_witness_cap(self):
        res = fuzz_mixed_violation_region(FuzzConfig(seed=7, trials=100, max_witnesses=2), 1)
        assert len(res.violations) == 2 < res.violation_count


class TestDeterminism:
    @pytest.mark.parametrize("suite", ["norm-right", "cohen-multi", "open-question", "mixed-region"])
    def test_worker_count_invariant(self, suite):
        cfg = FuzzConfig(seed=123, trials=60)
        assert stable(run_suite(suite, cfg, workers=1)) == stable(run_suite(suite, cfg, workers=3))

    def test_argmin_replays(self):
        res = run_suite("cohen-multi", FuzzConfig(seed=5, trials=50, m=3), workers=1)
        rep = res.arg_min["report"]
        assert replay("cohen-multi", rep).margin_ratio == pytest.approx(rep["marginRatio"], rel=1e-12)

    def test_violations_iff_min_below_tolerance(self):
        for suite in ("mixed-region", "norm-left"):
            res = run_suite(suite, FuzzConfig(seed=1, trials=50), workers=1)
            tol = res.config.tolerance_for(res.suite)
            assert bool(res.violations) == (res.min_margin_ratio < 1 - tol)

    def test_unknown_suite(self):
        with pytest.raises(InputError):
            run_suite("nope", FuzzConfig(trials=1))
