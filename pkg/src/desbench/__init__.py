"""Dynamic ensemble selection with validation-set editing, class-balanced
competence regions, frienemy pruning, and a rank-test benchmark harness."""

__version__ = "0.1.0"

from .des import TECHNIQUES, Decision, DesParams, decide
from .errors import (
    ContractError,
    DegenerateBootstrapError,
    DesBenchError,
    InsufficientDataError,
    InsufficientNeighborsError,
    ParseError,
    UndefinedMetricError,
    UnsupportedProblemError,
)
from .filtering import ProximityGraph, build_proximity_graph, enn_filter, rng_filter
from .generation import (
    ClassifierPool,
    Perceptron,
    PerceptronConfig,
    bootstrap,
    generate_pool,
    pool_from_json,
    pool_to_json,
    train_perceptron,
)
from .ingestion import (
    Dataset,
    ReplicationSplit,
    make_replications,
    minmax_fit_apply,
    parse_keel,
    write_keel,
)
from .pipeline import (
    SCENARIO_ORDER,
    SCENARIOS,
    RunResult,
    ScenarioConfig,
    apply_filter,
    auc,
    classify_query,
    results_from_json,
    results_to_json,
    run_experiment,
)
from .pruning import FrienemySet, PrunedPool, dfp_prune, frienemy_pairs
from .region import RegionOfCompetence, knn_region, knne_region
from .stats import (
    RankTable,
    TestReport,
    cd_diagram_svg,
    cd_diagram_text,
    friedman,
    midranks,
    nemenyi_cd,
    paired_t_test,
    rank_cliques,
    sign_test,
    sign_test_critical,
    wilcoxon_signed_rank,
)

__all__ = [
    "__version__",
    "TECHNIQUES", "Decision", "DesParams", "decide",
    "ContractError", "DegenerateBootstrapError", "DesBenchError",
    "InsufficientDataError", "InsufficientNeighborsError", "ParseError",
    "UndefinedMetricError", "UnsupportedProblemError",
    "ProximityGraph", "build_proximity_graph", "enn_filter", "rng_filter",
    "ClassifierPool", "Perceptron", "PerceptronConfig", "bootstrap",
    "generate_pool", "pool_from_json", "pool_to_json", "train_perceptron",
    "Dataset", "ReplicationSplit", "make_replications", "minmax_fit_apply",
    "parse_keel", "write_keel",
    "SCENARIO_ORDER", "SCENARIOS", "RunResult", "ScenarioConfig",
    "apply_filter", "auc", "classify_query", "results_from_json",
    "results_to_json", "run_experiment",
    "FrienemySet", "PrunedPool", "dfp_prune", "frienemy_pairs",
    "RegionOfCompetence", "knn_region", "knne_region",
    "RankTable", "TestReport", "cd_diagram_svg", "cd_diagram_text",
    "friedman", "midranks", "nemenyi_cd", "paired_t_test", "rank_cliques",
    "sign_test", "sign_test_critical", "wilcoxon_signed_rank",
]
