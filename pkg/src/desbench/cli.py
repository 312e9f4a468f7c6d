"""Command-line interface: run experiments, filter datasets, analyse results.

Subcommands
-----------
run     execute the benchmark protocol from a JSON config (plus overrides)
        and write results.json / summary.txt / manifest.json
filter  apply one edition filter to a dataset and report removals as JSON
stats   rank-based analysis of a results file: Friedman, Nemenyi CD diagram,
        pairwise Wilcoxon and sign tests
report  re-print the summary table for an existing results file

Exit codes: 0 success, 2 usage or config error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .des import TECHNIQUES
from .errors import DesBenchError
from .filtering import enn_filter, rng_filter
from .ingestion import parse_keel
from .pipeline import (
    SCENARIO_ORDER,
    SCENARIOS,
    RunResult,
    results_from_json,
    results_to_json,
    run_experiment,
    sort_results,
)
from .stats import (
    RankTable,
    cd_diagram_svg,
    cd_diagram_text,
    friedman,
    nemenyi_cd,
    sign_test,
    sign_test_critical,
    wilcoxon_signed_rank,
)

_CONFIG_KEYS = {
    "datasets", "dataset_dir", "scenarios", "techniques", "k", "pool_size",
    "filter", "enn_k", "seed", "out", "jobs",
}
_STANDARD_ALPHAS = (0.10, 0.05, 0.01)


class ConfigError(DesBenchError):
    pass


def _load_config(path: str, overrides: argparse.Namespace) -> dict:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    cfg = {
        "datasets": raw.get("datasets"),
        "dataset_dir": raw.get("dataset_dir"),
        "scenarios": raw.get("scenarios", "all"),
        "techniques": raw.get("techniques", "all"),
        "k": raw.get("k", 7),
        "pool_size": raw.get("pool_size", 100),
        "filter": raw.get("filter", "enn"),
        "enn_k": raw.get("enn_k", 3),
        "seed": raw.get("seed", 0),
        "out": raw.get("out", "desbench_out"),
        "jobs": raw.get("jobs", 1),
    }
    # Flags win over the file.
    for key in ("seed", "out", "jobs", "k"):
        val = getattr(overrides, key, None)
        if val is not None:
            cfg[key] = val
    if overrides.scenarios:
        cfg["scenarios"] = overrides.scenarios
    if overrides.techniques:
        cfg["techniques"] = overrides.techniques
    if overrides.filter:
        cfg["filter"] = overrides.filter

    for key, universe in (("scenarios", SCENARIO_ORDER), ("techniques", TECHNIQUES)):
        value = cfg[key]
        if value == "all":
            value = list(universe)
        elif isinstance(value, str):
            value = [v.strip() for v in value.split(",") if v.strip()]
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            raise ConfigError(f"{key} must be 'all', a comma list, or a list of names")
        cfg[key] = value

    for s in cfg["scenarios"]:
        if s.upper() not in SCENARIOS:
            raise ConfigError(f"unknown scenario {s!r}")
    for t in cfg["techniques"]:
        if t.upper() not in TECHNIQUES:
            raise ConfigError(f"unknown technique {t!r}")
    if cfg["filter"] not in ("enn", "rng"):
        raise ConfigError(f"unknown filter {cfg['filter']!r}")
    if not isinstance(cfg["seed"], int):
        raise ConfigError("seed must be an integer")

    paths: list[Path] = []
    if cfg["dataset_dir"]:
        root = Path(cfg["dataset_dir"])
        if not root.is_dir():
            raise ConfigError(f"dataset directory not found: {root}")
        paths.extend(sorted(root.glob("*.dat")))
    for entry in cfg["datasets"] or []:
        paths.append(Path(entry))
    if not paths:
        raise ConfigError("config names no datasets")
    missing = [str(p) for p in paths if not p.is_file()]
    if missing:
        raise ConfigError(f"dataset files not found: {missing}")
    cfg["dataset_paths"] = paths
    return cfg


def _run_one_dataset(args):
    """Worker: parse one dataset file and run the protocol on it."""
    path, scenarios, techniques, seed, k, pool_size, filter_kind, enn_k = args
    started = time.perf_counter()
    try:
        data = parse_keel(Path(path).read_text(), name=Path(path).stem)
    except DesBenchError as exc:
        return Path(path).stem, [], str(exc), time.perf_counter() - started
    results, failures = run_experiment(
        [data], scenarios, techniques, seed,
        k=k, pool_size=pool_size, filter_kind=filter_kind, enn_k=enn_k,
    )
    return data.name, results, failures.get(data.name), time.perf_counter() - started


def _summary_lines(results: list[RunResult]) -> list[str]:
    """Mean/std AUC per dataset, scenario and technique over replications."""
    cells: dict[tuple[str, str, str], list[float]] = {}
    for r in results:
        cells.setdefault((r.dataset, r.scenario, r.technique), []).append(r.auc)
    lines = [f"{'dataset':24s} {'scenario':8s} {'technique':9s} {'mean_auc':>8s} {'std':>7s} {'reps':>4s}"]
    scen_pos = {s: i for i, s in enumerate(SCENARIO_ORDER)}
    for (ds, scen, tech) in sorted(cells, key=lambda c: (c[0], scen_pos[c[1]], c[2])):
        vals = np.array(cells[(ds, scen, tech)])
        lines.append(
            f"{ds:24s} {scen:8s} {tech:9s} {vals.mean():8.4f} {vals.std(ddof=0):7.4f} {vals.size:4d}"
        )
    return lines


def cmd_run(args) -> int:
    try:
        cfg = _load_config(args.config, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    out_dir = Path(cfg["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()

    work = [
        (
            str(path), cfg["scenarios"], cfg["techniques"], cfg["seed"],
            cfg["k"], cfg["pool_size"], cfg["filter"], cfg["enn_k"],
        )
        for path in cfg["dataset_paths"]
    ]
    jobs = max(1, int(cfg["jobs"]))
    if jobs == 1 or len(work) == 1:
        outcomes = [_run_one_dataset(w) for w in work]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_one_dataset, work))

    results: list[RunResult] = []
    dataset_records = []
    for (name, res, error, seconds), path in zip(outcomes, cfg["dataset_paths"]):
        results.extend(res)
        dataset_records.append(
            {
                "name": name,
                "path": str(path),
                "status": "ok" if error is None else "failed",
                "error": error,
                "seconds": round(seconds, 3),
            }
        )

    if not results:
        print("error: every dataset failed", file=sys.stderr)
        for rec in dataset_records:
            print(f"  {rec['name']}: {rec['error']}", file=sys.stderr)
        return 3

    (out_dir / "results.json").write_text(results_to_json(results))
    (out_dir / "summary.txt").write_text("\n".join(_summary_lines(results)) + "\n")
    manifest = {
        "schema": 1,
        "package_version": __version__,
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "seed": cfg["seed"],
        "scenarios": [s.upper() for s in cfg["scenarios"]],
        "techniques": [t.upper() for t in cfg["techniques"]],
        "k": cfg["k"],
        "pool_size": cfg["pool_size"],
        "filter": cfg["filter"],
        "enn_k": cfg["enn_k"],
        "jobs": jobs,
        "datasets": dataset_records,
        "elapsed_seconds": round(time.perf_counter() - started, 3),
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")
    n_failed = sum(1 for rec in dataset_records if rec["status"] == "failed")
    print(
        f"wrote {len(results)} results for {len(dataset_records) - n_failed} dataset(s) "
        f"to {out_dir} ({n_failed} failed)"
    )
    return 0


def cmd_filter(args) -> int:
    path = Path(args.dataset)
    if not path.is_file():
        print(f"error: dataset not found: {path}", file=sys.stderr)
        return 2
    try:
        data = parse_keel(path.read_text(), name=path.stem)
        if args.filter == "rng":
            filtered = rng_filter(data)
        else:
            filtered = enn_filter(data, k=args.k if args.k is not None else 3)
    except DesBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    kept = {tuple(row) for row in filtered.features}
    removed = [
        i for i, row in enumerate(data.features) if tuple(row) not in kept
    ]
    report = {
        "dataset": data.name,
        "filter": args.filter,
        "before": data.n_samples,
        "after": filtered.n_samples,
        "removed_indices": removed,
    }
    print(json.dumps(report, sort_keys=True))
    return 0


def _rank_table_from_results(results, methods_axis: str) -> RankTable:
    cells: dict[tuple[str, str], dict[str, list[float]]] = {}
    methods = set()
    for r in results:
        if methods_axis == "scenarios":
            method, block = r.scenario, (r.dataset, r.technique)
        else:
            method, block = r.technique, (r.dataset, r.scenario)
        methods.add(method)
        cells.setdefault(block, {}).setdefault(method, []).append(r.auc)

    if methods_axis == "scenarios":
        pos = {s: i for i, s in enumerate(SCENARIO_ORDER)}
        method_names = sorted(methods, key=lambda m: pos[m])
    else:
        method_names = sorted(methods)
    block_names = sorted(cells)
    matrix = np.empty((len(block_names), len(method_names)))
    for bi, block in enumerate(block_names):
        row = cells[block]
        missing = [m for m in method_names if m not in row]
        if missing:
            raise DesBenchError(
                f"block {block} lacks methods {missing}; method sets must match"
            )
        for mi, m in enumerate(method_names):
            matrix[bi, mi] = float(np.mean(row[m]))
    return RankTable(
        methods=tuple(method_names),
        blocks=tuple("|".join(b) for b in block_names),
        scores=matrix,
    )


def cmd_stats(args) -> int:
    path = Path(args.results)
    if not path.is_file():
        print(f"error: results file not found: {path}", file=sys.stderr)
        return 2
    try:
        results = results_from_json(path.read_text())
        table = _rank_table_from_results(results, args.methods)
        fr = friedman(table, alpha=args.alpha)
        cd = nemenyi_cd(table.n_methods, table.n_blocks, alpha=args.alpha)
    except (DesBenchError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    avg = table.average_ranks

    report: dict = {
        "schema": 1,
        "methods_axis": args.methods,
        "n_blocks": table.n_blocks,
        "methods": list(table.methods),
        "average_ranks": {m: float(r) for m, r in zip(table.methods, avg)},
        "friedman": fr.to_dict(),
        "nemenyi_cd": cd,
        "alpha": args.alpha,
        "pairwise": {},
    }
    print(f"friedman: statistic={fr.statistic:.4f} p={fr.p_value:.3e} "
          f"(log10 p = {fr.log10_p:.2f})")
    print(f"nemenyi CD = {cd:.4f} over {table.n_blocks} blocks, "
          f"{table.n_methods} methods")

    for pair in (args.pairs.split(",") if args.pairs else []):
        pair = pair.strip()
        if not pair:
            continue
        try:
            left, right = [p.strip() for p in pair.split(":")]
            li = table.methods.index(left)
            ri = table.methods.index(right)
        except ValueError:
            print(f"error: bad pair {pair!r}; use LEFT:RIGHT with known methods",
                  file=sys.stderr)
            return 2
        a, b = table.scores[:, li], table.scores[:, ri]
        wil = wilcoxon_signed_rank(a, b, alpha=args.alpha)
        wins = int((a > b).sum())
        ties = int((a == b).sum())
        losses = int((a < b).sum())
        crits = {str(al): sign_test_critical(len(a), al) for al in _STANDARD_ALPHAS}
        signs = {str(al): sign_test(wins, ties, losses, alpha=al).to_dict()
                 for al in _STANDARD_ALPHAS}
        report["pairwise"][pair] = {
            "wilcoxon": wil.to_dict(),
            "wins": wins, "ties": ties, "losses": losses,
            "sign_critical": crits,
            "sign_test": signs,
        }
        crit_str = "/".join(f"{crits[str(al)]:.2f}" for al in _STANDARD_ALPHAS)
        print(
            f"{left} vs {right}: wilcoxon p={wil.p_value:.4f}; "
            f"wins/ties/losses = {wins}/{ties}/{losses}; "
            f"sign-test thresholds {crit_str} at alpha "
            f"{'/'.join(str(al) for al in _STANDARD_ALPHAS)}"
        )

    (out_dir / "cd_diagram.svg").write_text(cd_diagram_svg(table.methods, avg, cd))
    (out_dir / "cd_diagram.txt").write_text(cd_diagram_text(table.methods, avg, cd))
    (out_dir / "stats_report.json").write_text(
        json.dumps(report, indent=1, sort_keys=True) + "\n"
    )
    print(f"wrote cd_diagram.svg, cd_diagram.txt, stats_report.json to {out_dir}")
    return 0


def cmd_report(args) -> int:
    path = Path(args.results)
    if not path.is_file():
        print(f"error: results file not found: {path}", file=sys.stderr)
        return 2
    try:
        results = results_from_json(path.read_text())
    except (DesBenchError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    lines = _summary_lines(sort_results(results))
    print("\n".join(lines))

    # Scenario aggregate view: cross-dataset mean AUC and gain over scenario I.
    by_scenario: dict[str, list[float]] = {}
    for r in results:
        by_scenario.setdefault(r.scenario, []).append(r.auc)
    if by_scenario:
        print()
        base = np.mean(by_scenario["I"]) if "I" in by_scenario else None
        for scen in SCENARIO_ORDER:
            if scen not in by_scenario:
                continue
            mean = float(np.mean(by_scenario[scen]))
            gain = f"  gain over I = {mean - base:+.4f}" if base is not None else ""
            print(f"scenario {scen:4s} mean AUC = {mean:.4f}{gain}")
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "summary.txt").write_text("\n".join(lines) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="desbench",
        description="Dynamic-ensemble-selection benchmark harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the experiment protocol")
    p_run.add_argument("--config", required=True, help="JSON experiment config")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--jobs", type=int, default=None)
    p_run.add_argument("--scenarios", default=None, help="comma list or 'all'")
    p_run.add_argument("--techniques", default=None, help="comma list or 'all'")
    p_run.add_argument("--filter", choices=["enn", "rng"], default=None)
    p_run.add_argument("--k", type=int, default=None)
    p_run.set_defaults(func=cmd_run)

    p_filter = sub.add_parser("filter", help="run one edition filter on a dataset")
    p_filter.add_argument("dataset", help="KEEL .dat file")
    p_filter.add_argument("--filter", choices=["enn", "rng"], default="enn")
    p_filter.add_argument("--k", type=int, default=None, help="ENN neighborhood size")
    p_filter.set_defaults(func=cmd_filter)

    p_stats = sub.add_parser("stats", help="rank tests over a results file")
    p_stats.add_argument("results", help="results.json from 'run'")
    p_stats.add_argument("--methods", choices=["scenarios", "techniques"],
                         default="scenarios")
    p_stats.add_argument("--pairs", default="",
                         help="pairwise comparisons, e.g. 'VIII:I,VIII:IV'")
    p_stats.add_argument("--alpha", type=float, default=0.10)
    p_stats.add_argument("--out", default="desbench_stats")
    p_stats.set_defaults(func=cmd_stats)

    p_report = sub.add_parser("report", help="print the summary table for results")
    p_report.add_argument("results")
    p_report.add_argument("--out", default=None)
    p_report.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DesBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
