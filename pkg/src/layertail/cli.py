"""Command-line front end.

Four subcommands:

* ``simulate`` — one graph draw: weights, degrees, optional edge lists.
* ``replicate`` — a replicated scenario/size grid with CSV reports.
* ``analyze`` — the observed-data pipeline: edge lists -> paired degrees ->
  UTD series, Hill screening, optional price correlation.
* ``truth`` — print a scenario's true upper tail dependence.

Every option can also come from a JSON config file (``--config``); explicit
flags win over the file, which wins over built-in defaults.  The fully
resolved configuration is written into the output directory so a run can be
reproduced exactly.  When ``--seed`` is omitted one is drawn from OS entropy
and echoed to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import secrets
import sys
from pathlib import Path

import numpy as np

from .errors import LayertailError, ParameterError
from .harness import (
    ExperimentPlan,
    run_plan,
    write_mse_csv,
    write_report_csv,
    write_scatter_csvs,
)
from .ingestion import (
    PriceSeries,
    align_series,
    correlate_series,
    parse_edge_list,
    period_degrees,
    tail_index_report,
    utd_series,
    write_combined_csv,
    write_hill_csv,
    write_utd_series_csv,
)
from .mirg import build_graph, degrees, write_degree_csv, write_edge_list, write_weight_csv
from .tailstats import QuantileLevel, TopCount, hill_profile
from .weights import (
    GumbelCopula,
    ParetoTail,
    gumbel_true_utd,
    mrv_true_utd,
    parse_scenario,
    sample_weights,
    scenario_label,
)

__all__ = ["main", "build_parser"]


class _Resolver:
    """Flag > config-file > default resolution with a resolved-value record."""

    def __init__(self, args, defaults):
        self.args = args
        self.defaults = defaults
        self.config = {}
        self.resolved = {}
        cfg_path = getattr(args, "config", None)
        if cfg_path:
            try:
                data = json.loads(Path(cfg_path).read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError) as exc:
                raise ParameterError(f"cannot read config file {cfg_path}: {exc}") from exc
            if not isinstance(data, dict):
                raise ParameterError("config file must contain a JSON object")
            self.config = data

    def get(self, key, required=False):
        value = getattr(self.args, key, None)
        if value is None:
            value = self.config.get(key, self.defaults.get(key))
        if value is None and required:
            raise ParameterError(f"missing required option --{key.replace('_', '-')}")
        self.resolved[key] = value
        return value

    def write(self, out_dir: Path, command: str) -> None:
        payload = dict(self.resolved)
        payload["command"] = command
        path = out_dir / f"{command}_config.json"
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _resolve_seed(resolver) -> int:
    seed = resolver.get("seed")
    if seed is None:
        seed = secrets.randbits(63)
        print(f"seed: {seed}", file=sys.stderr)
    seed = int(seed)
    if seed < 0:
        raise ParameterError("seed must be non-negative")
    resolver.resolved["seed"] = seed
    return seed


def _resolve_threshold(resolver):
    top = resolver.get("top_count")
    q = resolver.get("quantile")
    if top is not None and q is not None:
        raise ParameterError("give either --top-count or --quantile, not both")
    if q is not None:
        return QuantileLevel(float(q))
    return TopCount(int(top) if top is not None else 100)


def _resolve_marginal(resolver) -> ParetoTail:
    return ParetoTail(alpha=float(resolver.get("alpha")), k=float(resolver.get("k")))


def _parse_sizes(value):
    if isinstance(value, str):
        parts = [p for p in value.replace(",", " ").split() if p]
    else:
        parts = list(value)
    try:
        sizes = tuple(int(p) for p in parts)
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"bad sizes {value!r}: {exc}") from exc
    if not sizes:
        raise ParameterError("sizes must not be empty")
    return sizes


def _out_dir(resolver) -> Path:
    out = Path(resolver.get("out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_simulate(args) -> int:
    r = _Resolver(
        args,
        {
            "nodes": 1000,
            "backend": "auto",
            "alpha": 1.1,
            "k": 20.0,
            "edges": False,
            "out": "layertail_simulate",
        },
    )
    scenario_text = r.get("scenario", required=True)
    nodes = int(r.get("nodes"))
    backend = r.get("backend")
    marginal = _resolve_marginal(r)
    seed = _resolve_seed(r)
    write_edges = bool(r.get("edges"))
    out = _out_dir(r)

    scenario = parse_scenario(scenario_text, marginal)
    r.resolved["scenario"] = scenario_label(scenario)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    wm = sample_weights(scenario, nodes, rng)
    graph = build_graph(wm, rng, backend=backend)
    deg = degrees(graph)
    write_weight_csv(wm, out / "weights.csv")
    write_degree_csv(deg, out / "degrees.csv")
    if write_edges:
        for layer in range(graph.n_layers):
            write_edge_list(graph, layer, out / f"edges_layer_{layer + 1}.txt")
    r.write(out, "simulate")
    edge_counts = ", ".join(str(lay.n_edges) for lay in graph.layers)
    print(
        f"simulate: {nodes} nodes, {graph.n_layers} layers, "
        f"backend={graph.source}, edges per layer: {edge_counts}"
    )
    print(f"simulate: outputs in {out}")
    return 0


def _cmd_replicate(args) -> int:
    r = _Resolver(
        args,
        {
            "scenarios": None,
            "sizes": "1000,20000",
            "replications": 200,
            "backend": "auto",
            "alpha": 1.1,
            "k": 20.0,
            "workers": os.cpu_count() or 1,
            "out": "layertail_replicate",
        },
    )
    scenario_texts = getattr(args, "scenario", None) or r.config.get("scenarios")
    if not scenario_texts:
        raise ParameterError("at least one --scenario is required")
    r.resolved["scenarios"] = list(scenario_texts)
    sizes = _parse_sizes(r.get("sizes"))
    r.resolved["sizes"] = list(sizes)
    replications = int(r.get("replications"))
    backend = r.get("backend")
    workers = int(r.get("workers"))
    threshold = _resolve_threshold(r)
    marginal = _resolve_marginal(r)
    seed = _resolve_seed(r)
    out = _out_dir(r)

    scenarios = tuple(parse_scenario(t, marginal) for t in scenario_texts)
    plan = ExperimentPlan(
        scenarios=scenarios,
        sizes=sizes,
        threshold=threshold,
        replications=replications,
        backend=backend,
        master_seed=seed,
    )
    report = run_plan(plan, workers=workers if workers > 1 else None)
    write_report_csv(report, out / "report.csv")
    write_mse_csv(report, out / "mse_curves.csv")
    write_scatter_csvs(report, out / "scatter")
    r.write(out, "replicate")
    for c in report.cells:
        print(
            f"{c.scenario} N={c.n_nodes}: truth={c.truth:.4f} "
            f"mean_w={c.mean_w:.4f} mean_d={c.mean_d:.4f} "
            f"mse_d={c.mse_d:.6f} degenerate={c.degenerate_count}"
        )
    print(f"replicate: outputs in {out}")
    return 0


def _cmd_analyze(args) -> int:
    r = _Resolver(
        args,
        {
            "align": "second",
            "delimiter": None,
            "hill_k": None,
            "hill_profile": False,
            "prices": None,
            "out": "layertail_analyze",
        },
    )
    edge_files = list(getattr(args, "edge_files", []) or r.config.get("edge_files", []))
    if len(edge_files) < 2:
        raise ParameterError("analyze needs at least two edge-list files in period order")
    r.resolved["edge_files"] = [str(p) for p in edge_files]
    threshold = _resolve_threshold(r)
    align = r.get("align")
    delimiter = r.get("delimiter")
    hill_k = r.get("hill_k")
    want_profile = bool(r.get("hill_profile"))
    prices_path = r.get("prices")
    out = _out_dir(r)

    periods = []
    for path in edge_files:
        lst = parse_edge_list(path, delimiter=delimiter)
        if lst.diagnostics:
            print(
                f"notice: {lst.period}: skipped {len(lst.diagnostics)} malformed line(s)",
                file=sys.stderr,
            )
        periods.append(lst)

    entries = utd_series(periods, threshold)
    for e in entries:
        if e.degenerate:
            print(f"notice: pair {e.pair} is degenerate", file=sys.stderr)
    write_utd_series_csv(entries, out / "utd_series.csv")

    hill = tail_index_report(periods, k_top=int(hill_k) if hill_k is not None else None)
    for h in hill:
        if not h.in_range:
            print(
                f"warning: period {h.period}: tail index {h.alpha_hat:.3f} outside "
                "(1, 2); the heavy-tail asymptotics may not apply",
                file=sys.stderr,
            )
    write_hill_csv(hill, out / "hill.csv")

    if want_profile:
        for p in periods:
            deg = np.array(sorted(period_degrees(p).values()), dtype=float)
            top = deg.size - 1
            if top < 2:
                continue
            ks = np.unique(np.linspace(2, top, num=min(50, top - 1), dtype=int))
            profile = hill_profile(deg, ks)
            with open(out / f"hill_profile_{p.period}.csv", "w", encoding="utf-8") as fh:
                fh.write("k,alpha_hat\n")
                for k_val, a in zip(ks, profile):
                    fh.write(f"{k_val},{a:.10g}\n")

    if prices_path is not None:
        prices = PriceSeries.read_csv(prices_path)
        labels, utd_vals, shrink_vals = align_series(entries, prices, align=align)
        corr = correlate_series(utd_vals, shrink_vals)
        write_combined_csv(labels, utd_vals, shrink_vals, out / "combined.csv")
        summary = {"correlation": corr, "align": align, "n_pairs": len(labels)}
        (out / "analyze_summary.json").write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        print(f"correlation(lambda, shrinkage) = {corr:.4f} over {len(labels)} pairs")
    else:
        print("notice: no price table supplied; skipping correlation", file=sys.stderr)

    r.write(out, "analyze")
    print(f"analyze: outputs in {out}")
    return 0


def _cmd_truth(args) -> int:
    r = _Resolver(
        args,
        {
            "alpha": 1.1,
            "k": 20.0,
            "method": "quadrature",
            "tol": 5e-3,
            "draws": 10_000_000,
        },
    )
    scenario_text = r.get("scenario", required=True)
    marginal = _resolve_marginal(r)
    method = r.get("method")
    tol = float(r.get("tol"))
    draws = int(r.get("draws"))
    scenario = parse_scenario(scenario_text, marginal)
    if isinstance(scenario, GumbelCopula):
        value = gumbel_true_utd(scenario.theta)
    else:
        rng = None
        if method == "montecarlo":
            seed = _resolve_seed(r)
            rng = np.random.default_rng(np.random.SeedSequence(seed))
        value = mrv_true_utd(
            scenario.theta_law,
            tail=scenario.marginal,
            tol=tol,
            method=method,
            draws=draws,
            rng=rng,
        )
    print(f"{value:.10g}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_common(p, with_seed=True):
    p.add_argument("--config", help="JSON file with default option values")
    if with_seed:
        p.add_argument("--seed", type=int, help="master seed (drawn from OS entropy if omitted)")


def _add_threshold(p):
    p.add_argument("--top-count", dest="top_count", type=int, help="threshold rule: top t order statistics")
    p.add_argument("--quantile", type=float, help="threshold rule: quantile level q in (0,1)")


def _add_marginal(p):
    p.add_argument("--alpha", type=float, help="Pareto tail index (default 1.1)")
    p.add_argument("--k", type=float, help="Pareto scale / left endpoint (default 20)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="layertail",
        description="Upper tail dependence of large degrees across layers of "
        "multilayer inhomogeneous random graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="draw one multilayer graph and export it")
    p.add_argument("--scenario", help="e.g. gumbel:theta=2 or polar:beta=0.5,0.5")
    p.add_argument("--nodes", "--n", type=int, help="number of nodes (default 1000)")
    p.add_argument("--backend", choices=["auto", "pairwise", "fast"])
    p.add_argument(
        "--edges",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="also write per-layer edge lists",
    )
    p.add_argument("--out", help="output directory")
    _add_marginal(p)
    _add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("replicate", help="run a replicated scenario/size grid")
    p.add_argument(
        "--scenario",
        action="append",
        help="scenario label; repeat the flag for several scenarios",
    )
    p.add_argument("--sizes", help="comma-separated node counts (default 1000,20000)")
    p.add_argument("--replications", type=int, help="replications per cell (default 200)")
    p.add_argument("--backend", choices=["auto", "pairwise", "fast"])
    p.add_argument("--workers", type=int, help="process count; <=1 runs sequentially")
    p.add_argument("--out", help="output directory")
    _add_threshold(p)
    _add_marginal(p)
    _add_common(p)
    p.set_defaults(func=_cmd_replicate)

    p = sub.add_parser("analyze", help="degree/UTD analysis of observed edge lists")
    p.add_argument("edge_files", nargs="*", help="edge-list files in period order")
    p.add_argument("--prices", help="CSV period,initial_price,final_price")
    p.add_argument("--align", choices=["first", "second"],
                   help="attach shrinkage of the earlier or later period (default second)")
    p.add_argument("--delimiter", help="field delimiter (default: whitespace or comma)")
    p.add_argument("--hill-k", dest="hill_k", type=int,
                   help="Hill order-statistic count (default: 5%% of nodes)")
    p.add_argument(
        "--hill-profile",
        dest="hill_profile",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="also write alpha-vs-k profiles per period",
    )
    p.add_argument("--out", help="output directory")
    _add_threshold(p)
    _add_common(p, with_seed=False)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("truth", help="print a scenario's true upper tail dependence")
    p.add_argument("--scenario", help="scenario label")
    p.add_argument("--method", choices=["quadrature", "montecarlo"])
    p.add_argument("--tol", type=float, help="target accuracy (default 5e-3)")
    p.add_argument("--draws", type=int, help="montecarlo draw count (default 1e7)")
    _add_marginal(p)
    _add_common(p)
    p.set_defaults(func=_cmd_truth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except LayertailError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyError as exc:
        print(f"error: missing key {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
