import numpy as np
import pytest

from conftest import make_imbalanced_blobs
from desbench.errors import ContractError, UndefinedMetricError
from desbench.fixtures import noisy_border_scene
from desbench.ingestion import Dataset
from desbench.pipeline import (
    SCENARIO_ORDER,
    SCENARIOS,
    ScenarioConfig,
    apply_filter,
    auc,
    classify_query,
    results_from_json,
    results_to_json,
    run_experiment,
)


class TestScenarioConfig:
    def test_eight_named_combinations(self):
        assert len(SCENARIOS) == 8
        assert SCENARIOS["I"] == (False, False, False)
        assert SCENARIOS["IV"] == (False, False, True)
        assert SCENARIOS["VIII"] == (True, True, True)
        seen = {SCENARIOS[s] for s in SCENARIO_ORDER}
        assert len(seen) == 8  # one-to-one onto the switch cube

    def test_roundtrip_names(self):
        for name in SCENARIO_ORDER:
            assert ScenarioConfig.from_scenario(name).scenario_name == name

    def test_unknown_scenario_and_technique(self):
        with pytest.raises(ContractError):
            ScenarioConfig.from_scenario("IX")
        with pytest.raises(ContractError):
            ScenarioConfig.from_scenario("I", technique="NOPE")


class TestClassifyQuery:
    def test_dfp_on_single_class_region_is_noop(self):
        scene = noisy_border_scene()
        # k=2 around a deep spot inside the lower-left of the box cluster
        query = np.array([0.855, 0.50])
        base = ScenarioConfig(use_knne=False, use_enn=False, use_dfp=False,
                              technique="OLA", k=2)
        with_dfp = ScenarioConfig(use_knne=False, use_enn=False, use_dfp=True,
                                  technique="OLA", k=2)
        a = classify_query(query, scene.pool, scene.validation, base)
        b = classify_query(query, scene.pool, scene.validation, with_dfp)
        assert a == b

    def test_filter_switch_controls_validation_set(self):
        scene = noisy_border_scene()
        raw = apply_filter(scene.validation, ScenarioConfig.from_scenario("I"))
        filt = apply_filter(scene.validation, ScenarioConfig.from_scenario("III"))
        assert raw.n_samples == 9 and filt.n_samples == 8


class TestAuc:
    def test_perfect_separation(self):
        assert auc([0.9, 0.8, 0.1, 0.2], [1, 1, 0, 0]) == 1.0

    def test_all_ties_half(self):
        assert auc([0.5, 0.5, 0.5, 0.5], [1, 0, 1, 0]) == 0.5

    def test_pair_counting_example(self):
        assert auc([0.9, 0.4, 0.6, 0.2], [1, 1, 0, 0]) == pytest.approx(0.75)

    def test_single_class_rejected(self):
        with pytest.raises(UndefinedMetricError):
            auc([0.1, 0.9], [1, 1])

    def test_positive_label_selects_direction(self):
        scores = [0.9, 0.1]
        assert auc(scores, [1, 0], positive_label=1) == 1.0
        assert auc(scores, [1, 0], positive_label=0) == 0.0

    def test_matches_exhaustive_pair_counting(self, rng):
        for _ in range(200):
            n = int(rng.integers(4, 30))
            labels = rng.integers(0, 2, n)
            labels[0], labels[1] = 0, 1
            scores = np.round(rng.random(n), 2)  # rounding forces ties
            total = 0.0
            pairs = 0
            for i in np.flatnonzero(labels == 1):
                for j in np.flatnonzero(labels == 0):
                    pairs += 1
                    if scores[i] > scores[j]:
                        total += 1.0
                    elif scores[i] == scores[j]:
                        total += 0.5
            assert auc(scores, labels) == pytest.approx(total / pairs, abs=1e-12)

    def test_invariant_under_strictly_increasing_transforms(self, rng):
        for transform in (np.exp, np.arctan, lambda s: 3.0 * s - 7.0, np.cbrt):
            for _ in range(50):
                n = int(rng.integers(4, 25))
                labels = rng.integers(0, 2, n)
                labels[0], labels[1] = 0, 1
                scores = np.round(rng.random(n), 2)
                assert auc(transform(scores), labels) == pytest.approx(
                    auc(scores, labels), abs=1e-12
                )


def _small_dataset(seed=9):
    return make_imbalanced_blobs("small", 60, 2, 2.0, 0.05, 2.0, seed=seed)


class TestRunExperiment:
    def test_cardinality_one_dataset_all_scenarios(self):
        results, failures = run_experiment(
            [_small_dataset()], list(SCENARIO_ORDER), ["KNU"], seed=4, pool_size=5,
        )
        assert not failures
        assert len(results) == 8 * 20
        key_counts = {}
        for r in results:
            key_counts[(r.dataset, r.scenario, r.technique)] = (
                key_counts.get((r.dataset, r.scenario, r.technique), 0) + 1
            )
        assert set(key_counts.values()) == {20}

    def test_untouched_filter_collapses_scenario_pairs(self):
        # A dataset whose every neighborhood is homogeneous: the filter
        # removes nothing, so scenarios differing only in the editing switch
        # must produce identical results.
        rng = np.random.default_rng(3)
        X = np.vstack([
            rng.normal(0.0, 0.03, (30, 2)),
            rng.normal(1.0, 0.03, (15, 2)),
        ])
        y = np.array([0] * 30 + [1] * 15)
        clean = Dataset.from_arrays("clean", X, y)
        results, _ = run_experiment(
            [clean], list(SCENARIO_ORDER), ["KNE"], seed=11, pool_size=8, k=3,
        )
        by = {}
        for r in results:
            by.setdefault(r.scenario, []).append(r.auc)
        for a, b in (("I", "III"), ("II", "V"), ("IV", "VII"), ("VI", "VIII")):
            assert by[a] == by[b]

    def test_full_determinism_byte_identical_json(self):
        args = ([_small_dataset()], ["I", "VIII"], ["KNE", "OLA"], 21)
        r1, _ = run_experiment(*args, pool_size=6)
        r2, _ = run_experiment(*args, pool_size=6)
        assert results_to_json(r1) == results_to_json(r2)

    def test_failing_dataset_skipped_not_fatal(self):
        bad = Dataset.from_arrays(
            "bad", np.arange(12).reshape(6, 2), [0, 0, 0, 1, 1, 1]
        )  # only 3 per class: stratified folding impossible
        good = _small_dataset()
        results, failures = run_experiment(
            [bad, good], ["I"], ["KNU"], seed=4, pool_size=5
        )
        assert "bad" in failures and "class" in failures["bad"]
        assert {r.dataset for r in results} == {"small"}

    def test_rng_filter_kind_flows_through(self):
        results, failures = run_experiment(
            [_small_dataset()], ["III"], ["KNU"], seed=4,
            pool_size=5, filter_kind="rng",
        )
        assert not failures and len(results) == 20

    def test_results_json_roundtrip(self):
        results, _ = run_experiment([_small_dataset()], ["I"], ["KNU"], seed=4, pool_size=5)
        text = results_to_json(results)
        again = results_from_json(text)
        assert again == results
