"""Command-line interface: ``edgecons run | verify | report``.

Exit codes: 0 success, 1 a verify check failed, 2 usage error, 3 invalid
scenario or graph, 4 file I/O error, 5 simulation aborted.
"""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from .controller import ConfigError
from .graph import GraphError, load_graph
from .results import atomic_write, format_summary, result_csv, result_json, summarize_csv, summary
from .scenario import (OutputSpec, ScenarioError, dump_scenario, load_scenario_file, resolve,
                       with_overrides)
from .simulator import integrate
from .verify import verify_graph

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_INVALID = 3
EXIT_IO = 4
EXIT_ABORTED = 5


def _edge_list(text: str) -> list[int]:
    try:
        return [int(p) for p in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated edge numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="edgecons", description="Edge-Laplacian consensus toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate a scenario file")
    run.add_argument("scenario", help="scenario file, or a bundled name such as strong_6agent")
    run.add_argument("--seed", type=int, help="noise seed (overrides the file)")
    run.add_argument("--seeds", type=int, metavar="K",
                     help="run K consecutive seeds starting at --seed (or the file's seed)")
    run.add_argument("--dt", type=float, help="integration step")
    run.add_argument("--t-final", type=float, dest="t_final", help="end time")
    run.add_argument("--format", choices=("csv", "json"), help="output format")
    run.add_argument("--output", help="output file; with --seeds, '-seedN' is inserted before the suffix")
    run.add_argument("--quiet", action="store_true", help="suppress the summary")

    ver = sub.add_parser("verify", help="check the graph-algebra identities for a graph file")
    ver.add_argument("graph", help="graph file, or a bundled name such as strong_6agent")
    ver.add_argument("--tree", type=_edge_list, help="spanning tree edges, e.g. 1,2,3,4,7")
    ver.add_argument("--gain", type=float, default=0.9487, help="uniform gain for the small-gain summary")
    ver.add_argument("--quiet", action="store_true", help="print only the check lines")

    rep = sub.add_parser("report", help="summarise an existing result CSV")
    rep.add_argument("csv")
    return p


def _output_path(base: Optional[str], name: str, fmt: str, seed: int, many: bool) -> Path:
    path = Path(base) if base else Path(f"{name or 'run'}.{fmt}")
    if many:
        path = path.with_name(f"{path.stem}-seed{seed}{path.suffix}")
    return path


def cmd_run(args) -> int:
    try:
        sf = load_scenario_file(args.scenario)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ScenarioError, ConfigError, GraphError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    base_seed = args.seed if args.seed is not None else sf.scenario.noise.seed
    count = args.seeds if args.seeds is not None else 1
    if count < 1:
        print("error: --seeds must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    fmt = args.format or sf.output.format
    out_base = args.output or sf.output.path
    try:
        scenarios = [with_overrides(sf.scenario, seed=base_seed + i, dt=args.dt, t_final=args.t_final)
                     for i in range(count)]
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    with ThreadPoolExecutor(max_workers=min(count, 8)) as pool:
        results = list(pool.map(integrate, scenarios))

    status = EXIT_OK
    for sc, res in zip(scenarios, results):
        seed = sc.noise.seed
        path = _output_path(out_base, sc.name, fmt, seed, count > 1)
        text = (result_csv(res) if fmt == "csv"
                else result_json(res, dump_scenario(sc, OutputSpec(str(path), fmt)), seed))
        try:
            atomic_write(path, text)
        except OSError as exc:
            print(f"error: cannot write {path}: {exc}", file=sys.stderr)
            return EXIT_IO
        if not args.quiet:
            print(f"# {sc.name} seed {seed} -> {path}")
            print(format_summary(summary(res)))
        if res.aborted:
            print(f"error: seed {seed}: {res.message}", file=sys.stderr)
            status = EXIT_ABORTED
    return status


def cmd_verify(args) -> int:
    try:
        g = load_graph(resolve(args.graph, ".graph"))
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except GraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        report = verify_graph(g, tree=args.tree, gain=args.gain)
    except (GraphError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print(report.render(matrices=not args.quiet))
    return EXIT_OK if report.ok else EXIT_CHECK_FAILED


def cmd_report(args) -> int:
    try:
        s = summarize_csv(args.csv)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print(f"# {args.csv}: {s.rows} rows, {s.columns} columns, "
          f"{s.node_count} agents x {s.state_dim} states, {s.edge_count} edges")
    print(format_summary(s.metrics))
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return {"run": cmd_run, "verify": cmd_verify, "report": cmd_report}[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
