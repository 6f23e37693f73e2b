"""Command-line front end.

Subcommands: ``generate`` (write synthetic graphs/datasets), ``sample``
(selection rules and random-walk traces as JSON), ``experiment`` (coverage
experiments with CSV/JSON output and rendered figures), ``spectral``
(spectrum, eigengap, and mixing diagnostics), and ``verify`` (brute-force
correctness suites).

Every run writes a manifest recording the resolved config, master seed,
package version, and output paths; rerunning with the same config and seed
reproduces the data outputs bit-for-bit. Flags can be supplied via
environment variables with the ``NETCONFORMAL_`` prefix (e.g.
``NETCONFORMAL_SEED``); explicit flags win.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .checks import run_coverage_suite, run_exchangeability_suite, run_invariance_suite
from .generators import GraphonSpec, kernel_by_name, sample_graphon_graph
from .graphs import Graph, read_edge_list, write_edge_list
from .rng import substream
from .selectors import ego_select, k_hop_union, snowball_wave
from .simulation import (
    SnowballExperimentConfig,
    WalkExperimentConfig,
    gen_sar_dataset,
    gen_walk_dataset,
    run_snowball_experiment,
    run_walk_experiment,
)
from .spectral import spectral_report
from .walks import StartPolicy, choose_walk_start, random_walk

MANIFEST_SCHEMA_VERSION = 1
ENV_PREFIX = "NETCONFORMAL_"
DEFAULT_SEED = 20260810


def _env_default(name: str, cast, fallback):
    raw = os.environ.get(ENV_PREFIX + name.upper())
    if raw is None:
        return fallback
    return cast(raw)


def load_config(path: str | Path) -> dict:
    """Load a JSON or TOML config; parse errors surface with line info."""
    path = Path(path)
    text = path.read_bytes()
    if path.suffix.lower() == ".toml":
        try:
            import tomllib  # Python >= 3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        try:
            return tomllib.loads(text.decode())
        except tomllib.TOMLDecodeError as exc:
            raise SystemExit(f"error: {path}: {exc}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SystemExit(f"error: {path}: line {exc.lineno} column {exc.colno}: {exc.msg}")


class _Manifest:
    def __init__(self, subcommand: str, config: dict, seed: int) -> None:
        self.record = {
            "schema_version": MANIFEST_SCHEMA_VERSION,
            "subcommand": subcommand,
            "config": config,
            "seed": seed,
            "package_version": __version__,
            "started": datetime.now(timezone.utc).isoformat(),
            "finished": None,
            "outputs": [],
        }

    def add_output(self, path: Path) -> None:
        self.record["outputs"].append(str(path))

    def write(self, out_dir: Path) -> Path:
        self.record["finished"] = datetime.now(timezone.utc).isoformat()
        path = out_dir / "manifest.json"
        path.write_text(json.dumps(self.record, indent=2) + "\n")
        return path


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_csv(path: Path, rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)


# ---------------------------------------------------------------------------
# generate


def _generate_graph(config: dict, seed: int):
    """Build (graph, nodes_table) from a generate config; nodes_table is a
    (header, columns) pair."""
    kind = config.get("kind")
    n = config.get("n")
    if kind not in ("graphon", "sar", "walk"):
        raise SystemExit(f"error: config field 'kind' must be graphon|sar|walk, got {kind!r}")
    if not isinstance(n, int) or n < 2:
        raise SystemExit(f"error: config field 'n' must be an integer >= 2, got {n!r}")
    rng = substream(seed, 0)
    if kind == "graphon":
        kernel_cfg = dict(config.get("kernel", {"name": "constant"}))
        name = kernel_cfg.pop("name", "constant")
        try:
            kernel = kernel_by_name(name, **kernel_cfg)
        except ValueError as exc:
            raise SystemExit(f"error: config field 'kernel': {exc}")
        rho = float(config.get("rho", 1.0))
        try:
            spec = GraphonSpec(w=kernel, rho=rho)
        except ValueError as exc:
            raise SystemExit(f"error: config field 'rho': {exc}")
        xi = rng.uniform(size=n)
        graph = sample_graphon_graph(spec, xi, rng)
        return graph, (["xi"], [xi])
    if kind == "sar":
        pop = gen_sar_dataset(
            n, rng,
            sparsity_coefficient=float(config.get("sparsity_coefficient", 5.0)),
            sparsity_exponent=float(config.get("sparsity_exponent", -0.25)),
        )
        ds = pop.data
        return ds.graph, (["y", "x0", "xi"], [ds.y, ds.x[:, 0], ds.latent])
    pop = gen_walk_dataset(n, float(config.get("nu", 0.1)), rng)
    return pop.graph, (["y", "x0", "x1", "x2"], [pop.y, pop.x[:, 0], pop.x[:, 1], pop.x[:, 2]])


def cmd_generate(args) -> int:
    config = load_config(args.config)
    seed = args.seed if args.seed is not None else int(config.get("seed", DEFAULT_SEED))
    out = _out_dir(args)
    manifest = _Manifest("generate", config, seed)

    graph, (header, columns) = _generate_graph(config, seed)
    edges_path = out / "edges.csv"
    write_edge_list(graph, edges_path)
    manifest.add_output(edges_path)

    nodes_path = out / "nodes.csv"
    with open(nodes_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in zip(*columns):
            writer.writerow([repr(float(v)) for v in row])
    manifest.add_output(nodes_path)

    manifest_path = manifest.write(out)
    print(f"wrote {edges_path}, {nodes_path}, {manifest_path}")
    return 0


# ---------------------------------------------------------------------------
# sample


def _load_graph(args) -> Graph:
    if args.graph is None:
        raise SystemExit("error: --graph <edges.csv> is required")
    return read_edge_list(args.graph, directed=args.directed, n=args.n)


def cmd_sample(args) -> int:
    graph = _load_graph(args)
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    rng = substream(seed, 0)
    if args.rule == "ego":
        if args.root is None:
            raise SystemExit("error: --rule ego requires --root")
        result = ego_select(graph, args.root).to_json_dict()
    elif args.rule in ("wave", "khop"):
        if not args.seeds:
            raise SystemExit(f"error: --rule {args.rule} requires --seeds")
        seeds = [int(s) for s in args.seeds.split(",")]
        if args.rule == "wave":
            result = snowball_wave(graph, seeds, args.k).to_json_dict()
        else:
            result = k_hop_union(graph, seeds, args.k).to_json_dict()
    elif args.rule == "walk":
        policy = StartPolicy.parse(args.start)
        x0 = choose_walk_start(graph, policy, rng)
        result = random_walk(graph, x0, args.steps, rng, start_rule=policy.describe()).to_json_dict()
    else:
        raise SystemExit(f"error: unknown rule {args.rule!r}")

    payload = json.dumps(result, indent=2)
    if args.out is None:
        print(payload)
        return 0
    out = _out_dir(args)
    manifest = _Manifest("sample", {"rule": args.rule}, seed)
    name = "trace.json" if args.rule == "walk" else "selection.json"
    path = out / name
    path.write_text(payload + "\n")
    manifest.add_output(path)
    manifest.write(out)
    print(f"wrote {path}")
    return 0


# ---------------------------------------------------------------------------
# experiment


def cmd_experiment(args) -> int:
    raw = load_config(args.config) if args.config else {}
    if args.seed is not None:
        raw["seed"] = args.seed
    try:
        if args.kind == "snowball":
            cfg = SnowballExperimentConfig.from_dict(raw)
        else:
            cfg = WalkExperimentConfig.from_dict(raw)
    except (TypeError, ValueError) as exc:
        raise SystemExit(f"error: {exc}")
    if args.paper_scale:
        cfg = cfg.paper_scale()

    out = _out_dir(args)
    manifest = _Manifest(f"experiment:{args.kind}", cfg.to_dict(), cfg.seed)
    runner = run_snowball_experiment if args.kind == "snowball" else run_walk_experiment
    report = runner(cfg, threads=args.threads)

    if args.format == "csv":
        path = out / "coverage.csv"
        _write_csv(path, report.csv_rows())
    else:
        path = out / "coverage.json"
        path.write_text(json.dumps(report.to_json_dict(), indent=2) + "\n")
    manifest.add_output(path)

    if not args.no_figures:
        from .plotting import save_coverage_figure

        fig_path = out / "coverage.png"
        save_coverage_figure(report, fig_path)
        manifest.add_output(fig_path)

    manifest_path = manifest.write(out)
    for cell in report.cells:
        print(
            f"{cell.scheme} {cell.target} {cell.model}: coverage={cell.coverage:.3f} "
            f"width={cell.width:.3f} (n={cell.n_reps}, skipped={cell.n_skipped})"
        )
    print(f"wrote {path}, {manifest_path}")
    return 0


# ---------------------------------------------------------------------------
# spectral


def cmd_spectral(args) -> int:
    if args.graph is not None:
        graph = _load_graph(args)
        config: dict = {"graph": str(args.graph)}
        seed = args.seed if args.seed is not None else DEFAULT_SEED
    elif args.config is not None:
        config = load_config(args.config)
        seed = args.seed if args.seed is not None else int(config.get("seed", DEFAULT_SEED))
        graph, _ = _generate_graph(config, seed)
    else:
        raise SystemExit("error: provide --graph <edges.csv> or --config <generate config>")

    report = spectral_report(graph, T=args.tmax, x0=args.x0)
    if report.n_components > 1:
        print(
            f"note: graph has {report.n_components} components; analyzing the "
            f"largest ({report.component_size} nodes)"
        )
    if report.bipartite:
        print("warning: component is bipartite; the walk is periodic and TV does not converge")

    out = _out_dir(args)
    manifest = _Manifest("spectral", config, seed)

    json_path = out / "spectral.json"
    json_path.write_text(json.dumps(report.to_json_dict(), indent=2) + "\n")
    manifest.add_output(json_path)

    csv_path = out / "tv_curve.csv"
    rows = [["t", "tv", "bound"]]
    for t, (tv, bound) in enumerate(zip(report.tv_curve, report.tv_bound)):
        rows.append([t, repr(float(tv)), repr(float(bound))])
    _write_csv(csv_path, rows)
    manifest.add_output(csv_path)

    if not args.no_figures:
        from .plotting import save_spectral_figure

        fig_path = out / "spectral.png"
        save_spectral_figure(report, fig_path)
        manifest.add_output(fig_path)

    manifest_path = manifest.write(out)
    k_hat, gamma_hat = report.envelope
    print(f"gamma={report.gamma:.4f} (spectral), fitted envelope: K={k_hat:.3g} gamma={gamma_hat:.4f}")
    print(f"wrote {json_path}, {csv_path}, {manifest_path}")
    return 0


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    suites = []
    if args.suite in ("invariance", "all"):
        suites.append(run_invariance_suite(seed=seed, inject_broken=args.inject_broken_selector))
    if args.suite in ("exchangeability", "all"):
        suites.append(run_exchangeability_suite(n=args.exchangeability_n))
    if args.suite in ("coverage", "all"):
        suites.append(run_coverage_suite(replicates=args.coverage_replicates, seed=seed))

    failed = False
    out = Path(args.out) if args.out else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    for result in suites:
        status = "PASS" if result.ok else "FAIL"
        print(f"[{status}] {result.name}: {json.dumps(result.summary)}")
        if not result.ok:
            failed = True
            print(f"        counterexamples: {json.dumps(list(result.failures))}")
        if out is not None:
            path = out / f"verify_{result.name}.json"
            path.write_text(json.dumps(result.to_json_dict(), indent=2) + "\n")
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netconformal",
        description="Conformal prediction for network data under ego, snowball, and random-walk sampling.",
    )
    parser.add_argument("--version", action="version", version=f"netconformal {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, out_default: str | None = ".") -> None:
        p.add_argument("--seed", type=int, default=_env_default("seed", int, None),
                       help="master seed (env NETCONFORMAL_SEED)")
        p.add_argument("--out", default=_env_default("out", str, out_default),
                       help="output directory (env NETCONFORMAL_OUT)")

    p = sub.add_parser("generate", help="write a synthetic graph/dataset to CSV")
    p.add_argument("--config", required=True, help="JSON or TOML generate config")
    common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("sample", help="run a selection rule or random walk, emit JSON")
    p.add_argument("--graph", help="edge-list CSV (src,dst)")
    p.add_argument("--directed", action="store_true", help="treat the edge list as directed")
    p.add_argument("--n", type=int, default=None, help="node count override for isolated tails")
    p.add_argument("--rule", required=True, choices=["ego", "wave", "khop", "walk"])
    p.add_argument("--root", type=int, default=None, help="ego root node")
    p.add_argument("--seeds", default=None, help="comma-separated seed nodes for wave/khop")
    p.add_argument("--k", type=int, default=1, help="wave index or hop radius")
    p.add_argument("--steps", type=int, default=100, help="walk steps")
    p.add_argument("--start", default="uniform",
                   help="walk start policy: uniform|fixed:<i>|max_degree|degree_threshold:<t>")
    common(p, out_default=None)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("experiment", help="run a coverage experiment")
    p.add_argument("kind", choices=["snowball", "walk"])
    p.add_argument("--config", default=None, help="JSON or TOML experiment config")
    p.add_argument("--threads", type=int,
                   default=_env_default("threads", int, os.cpu_count() or 1),
                   help="worker processes (env NETCONFORMAL_THREADS)")
    p.add_argument("--paper-scale", action="store_true",
                   help="use the published experiment size (n=2000, 500 replicates)")
    p.add_argument("--format", choices=["csv", "json"],
                   default=_env_default("format", str, "csv"),
                   help="coverage table format (env NETCONFORMAL_FORMAT)")
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    common(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("spectral", help="spectrum, eigengap, and TV mixing diagnostics")
    p.add_argument("--graph", default=None, help="edge-list CSV (src,dst)")
    p.add_argument("--directed", action="store_true")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--config", default=None, help="generate config to sample a graph from")
    p.add_argument("--tmax", type=int, default=50, help="largest t for the TV curve")
    p.add_argument("--x0", type=int, default=None,
                   help="walk start node; omit for the worst-case curve (O(T n^3))")
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    common(p)
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("verify", help="run brute-force correctness suites")
    p.add_argument("suite", choices=["invariance", "exchangeability", "coverage", "all"])
    p.add_argument("--inject-broken-selector", action="store_true",
                   help="negative control: demand a counterexample for a broken rule")
    p.add_argument("--exchangeability-n", type=int, default=4,
                   help="population size for exact enumeration (acceptance uses 5)")
    p.add_argument("--coverage-replicates", type=int, default=2000)
    common(p, out_default=None)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
