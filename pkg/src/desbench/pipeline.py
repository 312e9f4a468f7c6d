"""End-to-end pipeline: scenario wiring, per-query classification, AUC, runs.

A scenario is three independent switches: class-balanced regions (KNNE vs
plain KNN), validation-set editing (on/off), and frienemy pruning (on/off).
The eight on/off combinations are named with the roman numerals I..VIII;
VIII enables everything, I nothing, IV pruning alone.

``run_experiment`` executes the full protocol: 20 stratified replications
per dataset, one shared pool per replication (so scenario differences are
attributable to the switches alone), the validation set filtered once per
replication, every test query classified, and one AUC per (dataset,
scenario, technique, replication).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .des import TECHNIQUES, Decision, DesParams, decide
from .errors import ContractError, DesBenchError, UndefinedMetricError
from .filtering import enn_filter, rng_filter
from .generation import ClassifierPool, generate_pool
from .ingestion import Dataset, make_replications, minmax_fit_apply
from .pruning import dfp_prune
from .region import knn_region, knne_region
from .stats import midranks

SCENARIOS: dict[str, tuple[bool, bool, bool]] = {
    # (use_knne, use_enn, use_dfp)
    "I": (False, False, False),
    "II": (True, False, False),
    "III": (False, True, False),
    "IV": (False, False, True),
    "V": (True, True, False),
    "VI": (True, False, True),
    "VII": (False, True, True),
    "VIII": (True, True, True),
}
SCENARIO_ORDER = tuple(SCENARIOS)
FILTER_KINDS = ("enn", "rng")


@dataclass(frozen=True)
class ScenarioConfig:
    """One pipeline configuration: the three switches plus hyperparameters."""

    use_knne: bool
    use_enn: bool
    use_dfp: bool
    technique: str = "KNE"
    k: int = 7
    filter_kind: str = "enn"
    enn_k: int = 3
    pool_size: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.technique.upper() not in TECHNIQUES:
            raise ContractError(f"unknown technique {self.technique!r}")
        if self.filter_kind not in FILTER_KINDS:
            raise ContractError(f"unknown filter kind {self.filter_kind!r}")

    @classmethod
    def from_scenario(cls, scenario: str, **kwargs) -> "ScenarioConfig":
        key = scenario.strip().upper()
        if key not in SCENARIOS:
            raise ContractError(f"unknown scenario {scenario!r}; expected I..VIII")
        knne, enn, dfp = SCENARIOS[key]
        return cls(use_knne=knne, use_enn=enn, use_dfp=dfp, **kwargs)

    @property
    def scenario_name(self) -> str:
        for name, switches in SCENARIOS.items():
            if switches == (self.use_knne, self.use_enn, self.use_dfp):
                return name
        raise AssertionError("unreachable: all switch combinations are named")


@dataclass(frozen=True)
class RunResult:
    dataset: str
    scenario: str
    technique: str
    replication_id: int
    auc: float


def apply_filter(dsel: Dataset, cfg: ScenarioConfig) -> Dataset:
    """The filtered validation set this scenario classifies against."""
    if not cfg.use_enn:
        return dsel
    if cfg.filter_kind == "rng":
        return rng_filter(dsel)
    return enn_filter(dsel, k=cfg.enn_k)


def classify_query(
    query,
    pool: ClassifierPool,
    dsel_filtered: Dataset,
    cfg: ScenarioConfig,
    params: DesParams | None = None,
) -> Decision:
    """Region definition, optional pruning, then the configured technique.

    ``dsel_filtered`` must already reflect the scenario's filtering switch
    (pass the raw validation set when editing is off).
    """
    params = params or DesParams(positive_label=dsel_filtered.minority_label)
    if cfg.use_knne:
        roc = knne_region(dsel_filtered, query, cfg.k)
    else:
        roc = knn_region(dsel_filtered, query, cfg.k)
    active = None
    if cfg.use_dfp:
        active = dfp_prune(roc, pool).selected
    return decide(cfg.technique, pool, roc, query, params, active=active)


def auc(scores, labels, positive_label: int = 1) -> float:
    """Probability that a random positive outscores a random negative
    (ties count one half); computed from midranks.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = labels == positive_label
    n_pos = int(pos.sum())
    n_neg = int(labels.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError(
            f"AUC needs both classes; got {n_pos} positive and {n_neg} negative"
        )
    ranks = midranks(scores)
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def _scenario_results_for_replication(
    dataset_name, rep, pool, dsel_by_filter, scenarios, techniques, cfg_base
):
    """Classify one replication's test set under every scenario/technique."""
    out = []
    test = rep.test_scaled
    params = DesParams(positive_label=test.minority_label)
    for scen_name in scenarios:
        cfg = replace(cfg_base, **dict(zip(
            ("use_knne", "use_enn", "use_dfp"), SCENARIOS[scen_name]
        )))
        dsel = dsel_by_filter[cfg.use_enn]
        regions = [
            knne_region(dsel, x, cfg.k) if cfg.use_knne else knn_region(dsel, x, cfg.k)
            for x in test.features
        ]
        actives = [
            dfp_prune(roc, pool).selected if cfg.use_dfp else None for roc in regions
        ]
        for tech in techniques:
            scores = np.empty(test.n_samples)
            for qi, (x, roc, act) in enumerate(zip(test.features, regions, actives)):
                scores[qi] = decide(tech, pool, roc, x, params, active=act).positive_score
            out.append(
                RunResult(
                    dataset=dataset_name,
                    scenario=scen_name,
                    technique=tech,
                    replication_id=rep.replication_id,
                    auc=auc(scores, test.labels, positive_label=test.minority_label),
                )
            )
    return out


@dataclass
class _PreparedReplication:
    replication_id: int
    test_scaled: Dataset


def run_experiment(
    datasets,
    scenarios,
    techniques,
    seed: int,
    *,
    k: int = 7,
    pool_size: int = 100,
    filter_kind: str = "enn",
    enn_k: int = 3,
) -> tuple[list[RunResult], dict[str, str]]:
    """Run the full protocol; returns (results, per-dataset failure messages).

    A dataset that cannot be processed is reported in the failure map and
    skipped rather than aborting the run.
    """
    scenarios = [s.strip().upper() for s in scenarios]
    techniques = [t.strip().upper() for t in techniques]
    if not scenarios or not techniques:
        raise ContractError("need at least one scenario and one technique")
    for s in scenarios:
        if s not in SCENARIOS:
            raise ContractError(f"unknown scenario {s!r}")
    for t in techniques:
        if t not in TECHNIQUES:
            raise ContractError(f"unknown technique {t!r}")

    cfg_base = ScenarioConfig(
        use_knne=False, use_enn=False, use_dfp=False,
        technique=techniques[0], k=k, filter_kind=filter_kind,
        enn_k=enn_k, pool_size=pool_size, seed=seed,
    )
    needs_filter = any(SCENARIOS[s][1] for s in scenarios)

    results: list[RunResult] = []
    failures: dict[str, str] = {}
    for data in datasets:
        try:
            reps = make_replications(data, seed)
            for rep in reps:
                train_s, (val_s, test_s) = minmax_fit_apply(
                    rep.train, [rep.validation, rep.test]
                )
                pool = generate_pool(train_s, pool_size, rep.seed)
                dsel_by_filter = {False: val_s}
                if needs_filter:
                    dsel_by_filter[True] = apply_filter(
                        val_s, replace(cfg_base, use_enn=True)
                    )
                prepared = _PreparedReplication(
                    replication_id=rep.replication_id, test_scaled=test_s,
                )
                results.extend(
                    _scenario_results_for_replication(
                        data.name, prepared, pool, dsel_by_filter,
                        scenarios, techniques, cfg_base,
                    )
                )
        except DesBenchError as exc:
            failures[data.name] = str(exc)
            results = [r for r in results if r.dataset != data.name]
    return sort_results(results), failures


def sort_results(results) -> list[RunResult]:
    scen_pos = {s: i for i, s in enumerate(SCENARIO_ORDER)}
    return sorted(
        results,
        key=lambda r: (r.dataset, scen_pos[r.scenario], r.technique, r.replication_id),
    )


def results_to_json(results) -> str:
    doc = {
        "schema": 1,
        "results": [
            {
                "dataset": r.dataset,
                "scenario": r.scenario,
                "technique": r.technique,
                "replication_id": r.replication_id,
                "auc": r.auc,
            }
            for r in sort_results(results)
        ],
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def results_from_json(text: str) -> list[RunResult]:
    doc = json.loads(text)
    if doc.get("schema") != 1:
        raise ContractError(f"unsupported results schema {doc.get('schema')!r}")
    return [
        RunResult(
            dataset=r["dataset"],
            scenario=r["scenario"],
            technique=r["technique"],
            replication_id=int(r["replication_id"]),
            auc=float(r["auc"]),
        )
        for r in doc["results"]
    ]
