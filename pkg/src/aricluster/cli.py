"""Command-line interface.

Subcommands: ``build`` (ingest + preprocess + persist), ``query``,
``gamma-map``, ``curve``, ``bench``, and ``serve``.  Report commands write
delimited output and can additionally render a figure with ``--plot``.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .bench import BenchScenario, run_bench, write_bench_csv, BENCH_CSV_COLUMNS
from .errors import InputError, ParseError, PersistError
from .graph_model import grid_to_graph, load_edge_list, load_volume, statistic_to_pvalues
from .pipeline import ARIStructure
from .serve import run_server, threshold_grid


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aricluster",
        description="Adaptive true-discovery-proportion thresholding for cluster inference.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="construct the query structure and save it")
    p.add_argument("--edges", help="edge-list file (one 'u v' per line)")
    p.add_argument("--pvalues", help="p-value file (line i = vertex i)")
    p.add_argument("--volume", help="volume header file (JSON)")
    p.add_argument("--alpha", type=float, default=0.05, help="significance level (default 0.05)")
    p.add_argument("--connectivity", type=int, help="override the volume header connectivity")
    p.add_argument("--out", required=True, help="output structure file")

    p = sub.add_parser("query", help="report maximal clusters for thresholds")
    p.add_argument("structure", help="structure file from 'build'")
    p.add_argument("--gamma", type=float, action="append", required=True,
                   help="TDP threshold in [0,1]; repeatable")
    p.add_argument("--format", choices=("table", "json", "csv"), default="table")
    p.add_argument("--with-members", action="store_true", help="include member vertex ids")
    p.add_argument("--out", help="write here instead of stdout")

    p = sub.add_parser("gamma-map", help="largest qualifying threshold per vertex")
    p.add_argument("structure")
    p.add_argument("--out", required=True,
                   help="raw float32 volume for grid data, CSV otherwise")
    p.add_argument("--plot", help="also render a slice mosaic PNG (grid data only)")

    p = sub.add_parser("curve", help="cluster sizes across a threshold grid")
    p.add_argument("structure")
    p.add_argument("--from", dest="gamma_from", type=float, default=0.0)
    p.add_argument("--to", dest="gamma_to", type=float, default=1.0)
    p.add_argument("--step", dest="gamma_step", type=float, default=0.01)
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.add_argument("--plot", help="also render the log-scale size chart PNG")

    p = sub.add_parser("bench", help="run synthetic scaling benchmarks")
    p.add_argument("--family", choices=("cube", "perfect_binary_tree", "caterpillar"),
                   default="cube")
    p.add_argument("--size", type=int, action="append", required=True,
                   help="cube edge / tree depth / caterpillar order; repeatable")
    p.add_argument("--connectivity", type=int, default=18)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.add_argument("--plot", help="also render the log-log scaling PNG")

    p = sub.add_parser("serve", help="serve the JSON query API over HTTP")
    p.add_argument("structure")
    p.add_argument("--bind", default="127.0.0.1:8080", help="host:port (default 127.0.0.1:8080)")
    p.add_argument("--ui-dir", help="also serve this directory as static files")
    return parser


def _cluster_row(structure: ARIStructure, result, gamma: float) -> dict:
    row = {
        "gamma": gamma,
        "rep_rank": result.rank + 1,
        "rep_vertex": int(structure.perm[result.rank]),
        "size": result.size,
        "d": result.d,
        "q": result.q,
        "label_rank": result.label + 1,
        "label_vertex": int(structure.perm[result.label]),
    }
    if structure.grid is not None and structure.voxel_of_vertex is not None:
        nx, ny, _ = structure.grid.dims
        voxel = int(structure.voxel_of_vertex[row["label_vertex"]])
        row["label_x"] = voxel % nx
        row["label_y"] = (voxel // nx) % ny
        row["label_z"] = voxel // (nx * ny)
    return row


def cmd_build(args) -> int:
    volume_mode = args.volume is not None
    edge_mode = args.edges is not None or args.pvalues is not None
    if volume_mode == edge_mode:
        raise InputError("give exactly one input form: --volume, or --edges with --pvalues")
    if edge_mode and (args.edges is None or args.pvalues is None):
        raise InputError("--edges and --pvalues are both required for edge-list input")

    if volume_mode:
        spec, stats, statistic = load_volume(args.volume)
        if args.connectivity is not None and args.connectivity != spec.connectivity:
            from dataclasses import replace

            spec = replace(spec, connectivity=args.connectivity)
        graph, voxel_of_vertex, _ = grid_to_graph(spec)
        raw = statistic_to_pvalues(stats, statistic)
        structure = ARIStructure.build(
            graph, raw, args.alpha, grid=spec, voxel_of_vertex=voxel_of_vertex
        )
    else:
        graph, raw = load_edge_list(args.edges, args.pvalues)
        structure = ARIStructure.build(graph, raw, args.alpha)

    structure.save(args.out)
    meta = structure.meta()
    print(f"saved structure to {args.out}")
    print(
        f"m={meta['m']} edges={meta['edge_count']} alpha={meta['alpha']} "
        f"h={meta['h']} zeta={meta['zeta']}"
    )
    print(
        f"representatives={meta['n_representatives']} admissible={meta['n_admissible']} "
        f"components={meta['n_components']} sigma={meta['sigma']}"
    )
    t = meta["timings"]
    print(
        "phase seconds: sort={sort:.4f} forest={forest:.4f} bounds={bounds:.4f} "
        "index={index:.4f} total={total:.4f}".format(**t)
    )
    return 0


def _open_out(path):
    return open(path, "w", newline="", encoding="utf-8") if path else sys.stdout


def cmd_query(args) -> int:
    structure = ARIStructure.load(args.structure)
    for gamma in args.gamma:
        if not (0.0 <= gamma <= 1.0):
            raise InputError(f"gamma must lie in [0, 1], got {gamma}")
    session = structure.new_session()
    per_gamma = [(g, structure.query(g, session=session)) for g in args.gamma]

    fh = _open_out(args.out)
    try:
        if args.format == "json":
            payload = []
            for g, results in per_gamma:
                rows = [_cluster_row(structure, r, g) for r in results]
                if args.with_members:
                    for row, r in zip(rows, results):
                        row["members"] = structure.member_vertices(r).tolist()
                payload.append({"gamma": g, "clusters": rows})
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        elif args.format == "csv":
            first = _cluster_row(structure, per_gamma[0][1][0], 0.0) if per_gamma[0][1] else None
            names = list(first.keys()) if first else [
                "gamma", "rep_rank", "rep_vertex", "size", "d", "q",
                "label_rank", "label_vertex",
            ]
            if args.with_members:
                names.append("members")
            writer = csv.DictWriter(fh, fieldnames=names)
            writer.writeheader()
            for g, results in per_gamma:
                for r in results:
                    row = _cluster_row(structure, r, g)
                    if args.with_members:
                        row["members"] = " ".join(map(str, structure.member_vertices(r)))
                    writer.writerow(row)
        else:
            for g, results in per_gamma:
                total = sum(r.size for r in results)
                print(f"gamma={g:g}: {len(results)} cluster(s), {total} vertices", file=fh)
                if results:
                    print(f"  {'size':>8} {'d':>8} {'q':>8} {'label':>8}", file=fh)
                for r in results:
                    print(
                        f"  {r.size:>8} {r.d:>8} {r.q:>8.3f} {r.label + 1:>8}",
                        file=fh,
                    )
                    if args.with_members:
                        members = " ".join(map(str, structure.member_vertices(r)))
                        print(f"    members: {members}", file=fh)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_gamma_map(args) -> int:
    structure = ARIStructure.load(args.structure)
    if structure.grid is not None and structure.voxel_of_vertex is not None:
        volume = structure.gamma_map_volume()
        volume.astype("<f4").tofile(args.out)
        print(f"wrote float32 volume ({'x'.join(map(str, structure.grid.dims))}) to {args.out}")
        if args.plot:
            from .plots import plot_gamma_map_slices

            plot_gamma_map_slices(volume, structure.grid.dims, args.plot)
            print(f"wrote slice mosaic to {args.plot}")
    else:
        if args.plot:
            raise InputError("--plot requires grid metadata")
        values = structure.gamma_map_by_vertex()
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["vertex", "gamma"])
            for vertex, g in enumerate(values):
                writer.writerow([vertex, repr(float(g))])
        print(f"wrote per-vertex CSV to {args.out}")
    return 0


def cmd_curve(args) -> int:
    structure = ARIStructure.load(args.structure)
    grid = threshold_grid(args.gamma_from, args.gamma_to, args.gamma_step)
    rows = structure.size_curve(grid)
    fh = _open_out(args.out)
    try:
        writer = csv.writer(fh)
        writer.writerow(["gamma", "label", "size", "rep", "parent_label"])
        for row in rows:
            parent = "" if row["parent_label"] is None else row["parent_label"] + 1
            writer.writerow([row["gamma"], row["label"] + 1, row["size"], row["rep"] + 1, parent])
    finally:
        if fh is not sys.stdout:
            fh.close()
    if args.plot:
        from .plots import plot_size_curve

        plot_size_curve(rows, args.plot)
        print(f"wrote size curve figure to {args.plot}", file=sys.stderr)
    return 0


def cmd_bench(args) -> int:
    rows = []
    for size in args.size:
        scenario = BenchScenario(
            family=args.family,
            size=size,
            connectivity=args.connectivity,
            seed=args.seed,
            repetitions=args.reps,
            alpha=args.alpha,
        )
        rows.extend(run_bench(scenario))
    if args.out:
        write_bench_csv(rows, args.out)
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        writer = csv.DictWriter(sys.stdout, fieldnames=BENCH_CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    if args.plot:
        from .plots import plot_bench

        plot_bench(rows, args.plot)
        print(f"wrote scaling figure to {args.plot}")
    return 0


def cmd_serve(args) -> int:
    structure = ARIStructure.load(args.structure)
    run_server(structure, args.bind, ui_dir=args.ui_dir)
    return 0


_COMMANDS = {
    "build": cmd_build,
    "query": cmd_query,
    "gamma-map": cmd_gamma_map,
    "curve": cmd_curve,
    "bench": cmd_bench,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (InputError, ParseError, PersistError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
