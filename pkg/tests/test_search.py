import numpy as np
import pytest

from shadowipw import citest
from shadowipw.data import BINARY, CONTINUOUS, OPTIONAL, Dataset, RoleMap
from shadowipw.search import (C1_FAILED, FOUND, NOT_FOUND, GraphOracleTester,
                              SearchOutcome, enumerate_subsets,
                              find_adjustment_set)
from shadowipw.simulate import (default_config, example_graph,
                                generate, generate_example, scenario_graph)

ALPHA = 0.05


class TestEnumerateSubsets:
    def test_pairs_in_lexicographic_position_order(self):
        out = enumerate_subsets(("a", "b", "c"), 2)
        assert out == [frozenset({"a", "b"}), frozenset({"a", "c"}),
                       frozenset({"b", "c"})]

    def test_size_zero_is_the_empty_set(self):
        assert enumerate_subsets(("a", "b"), 0) == [frozenset()]

    def test_full_size_is_the_whole_set(self):
        assert enumerate_subsets(("a", "b"), 2) == [frozenset({"a", "b"})]

    def test_oversized_request_rejected(self):
        with pytest.raises(ValueError):
            enumerate_subsets(("a",), 2)


class TestLrtSearch:
    def test_base_scenario_finds_the_correct_set(self, base_ds_10k):
        outcome = find_adjustment_set(base_ds_10k, ALPHA)
        assert outcome.status == FOUND
        assert outcome.witness == "W1"
        assert tuple(sorted(outcome.adjustment_set)) == ("W2", "W3", "W4")

    def test_direct_treatment_response_edge_yields_not_found(self):
        ds = generate(default_config(n=10000, seed=4,
                                     scenario="add_a_to_ry"))
        assert find_adjustment_set(ds, ALPHA).status == NOT_FOUND

    def test_hidden_confounder_yields_not_found(self):
        ds = generate(default_config(n=10000, seed=8, scenario="hide_w4"))
        assert find_adjustment_set(ds, ALPHA).status == NOT_FOUND

    def test_example_distribution_lands_on_documented_candidate(self):
        ds = generate_example(20000, seed=0)
        outcome = find_adjustment_set(ds, ALPHA)
        assert outcome.status == FOUND
        assert outcome.witness == "W3"
        assert tuple(sorted(outcome.adjustment_set)) == ("W1", "W2")

    def test_noise_incentive_gates_at_c1(self, base_ds_small):
        rng = np.random.default_rng(0)
        cols = {n: base_ds_small.column(n) for n in base_ds_small.names}
        cols["I"] = rng.normal(size=base_ds_small.n_rows)
        ds = Dataset(cols, {n: base_ds_small.kind(n)
                            for n in base_ds_small.names},
                     base_ds_small.roles, base_ds_small.oracle_names)
        outcome = find_adjustment_set(ds, ALPHA)
        assert outcome.status == C1_FAILED
        assert outcome.tests_run == 1
        assert outcome.witness is None and outcome.adjustment_set is None

    def test_deterministic_including_trail(self, base_ds_small):
        a = find_adjustment_set(base_ds_small, ALPHA)
        b = find_adjustment_set(base_ds_small, ALPHA)
        assert a == b

    def test_trail_is_replayable(self, base_ds_small):
        outcome = find_adjustment_set(base_ds_small, ALPHA)
        runners = {"C1": lambda rec: citest.test_c1(base_ds_small, ALPHA),
                   "C2": lambda rec: citest.test_c2(base_ds_small,
                                                    rec.adjustment, ALPHA),
                   "C3": lambda rec: citest.test_c3(base_ds_small, rec.witness,
                                                    rec.adjustment, ALPHA),
                   "C4": lambda rec: citest.test_c4(base_ds_small, rec.witness,
                                                    rec.adjustment, ALPHA)}
        for rec in outcome.trail:
            if rec.error is not None:
                continue
            replay = runners[rec.condition](rec)
            assert replay.result.p_value == rec.result.p_value

    def test_tests_run_matches_trail_and_bound(self):
        ds = generate(default_config(n=2500, seed=8, scenario="hide_w4"))
        outcome = find_adjustment_set(ds, ALPHA)
        k = len(ds.roles.covariates)
        assert outcome.tests_run == len(outcome.trail)
        assert outcome.tests_run <= k * 2 ** (k - 1) * 3 + 1

    def test_max_subset_size_limits_candidates(self, base_ds_10k):
        outcome = find_adjustment_set(base_ds_10k, ALPHA, max_subset_size=2)
        # the only valid set has size 3, so a size-2 cap cannot find it
        assert outcome.status == NOT_FOUND
        assert all(len(rec.adjustment) <= 2 for rec in outcome.trail
                   if rec.condition != "C1")

    def test_needs_at_least_two_covariates(self):
        n = 40
        rng = np.random.default_rng(1)
        y = (rng.uniform(size=n) < 0.5).astype(float)
        ds = Dataset({"A": (rng.uniform(size=n) < 0.5).astype(float),
                      "Y": y, "R": np.ones(n), "I": rng.normal(size=n),
                      "W1": rng.normal(size=n)},
                     {"A": BINARY, "Y": OPTIONAL, "R": BINARY,
                      "I": CONTINUOUS, "W1": CONTINUOUS},
                     RoleMap("A", "Y", "R", "I", ("W1",)))
        with pytest.raises(ValueError, match="two covariates"):
            find_adjustment_set(ds, ALPHA)


class TestGraphOracleSearch:
    """With d-separation substituted for the tests, the search must decide
    exactly as the graph dictates."""

    def test_base_graph(self, base_ds_small):
        tester = GraphOracleTester(scenario_graph(), base_ds_small.roles)
        outcome = find_adjustment_set(base_ds_small, ALPHA, tester=tester)
        assert outcome.status == FOUND
        assert outcome.witness == "W1"
        assert tuple(sorted(outcome.adjustment_set)) == ("W2", "W3", "W4")

    def test_direct_edge_graph_has_no_valid_candidate(self, base_ds_small):
        tester = GraphOracleTester(scenario_graph("add_a_to_ry"),
                                   base_ds_small.roles)
        outcome = find_adjustment_set(base_ds_small, ALPHA, tester=tester)
        assert outcome.status == NOT_FOUND

    def test_latent_confounder_graph_has_no_valid_candidate(self):
        ds = generate(default_config(n=500, seed=2, scenario="hide_w4"))
        tester = GraphOracleTester(scenario_graph("hide_w4"), ds.roles)
        assert find_adjustment_set(ds, ALPHA, tester=tester).status == NOT_FOUND

    def test_example_graph_reproduces_documented_order(self):
        ds = generate_example(200, seed=0)
        tester = GraphOracleTester(example_graph(), ds.roles)
        outcome = find_adjustment_set(ds, ALPHA, tester=tester)
        assert outcome.status == FOUND
        assert outcome.witness == "W3"
        assert tuple(sorted(outcome.adjustment_set)) == ("W1", "W2")
        # the singleton candidate (W3, {W1}) passed C2/C3 but fell at C4
        seen = [(rec.condition, rec.witness, rec.adjustment)
                for rec in outcome.trail]
        assert ("C4", "W3", ("W1",)) in seen

    def test_oracle_and_lrt_agree_at_scale(self, base_ds_10k):
        tester = GraphOracleTester(scenario_graph(), base_ds_10k.roles)
        oracle = find_adjustment_set(base_ds_10k, ALPHA, tester=tester)
        tested = find_adjustment_set(base_ds_10k, ALPHA)
        assert oracle.status == tested.status == FOUND
        assert oracle.adjustment_set == tested.adjustment_set


class TestSerialization:
    def test_outcome_round_trip_keys(self, base_ds_small):
        outcome = find_adjustment_set(base_ds_small, ALPHA)
        d = outcome.to_dict()
        assert set(d) == {"status", "witness", "adjustment_set", "tests_run",
                          "trail"}
        assert len(d["trail"]) == outcome.tests_run
