"""Command-line entry points: generate, convert, compute, verify, report."""
from __future__ import annotations

import argparse
import logging
import sys
from collections import Counter
from pathlib import Path

from .block import make_partition
from .io import (
    FormatError,
    build_cubical,
    generate_image,
    read_image,
    read_matrix,
    read_pairs,
    write_image,
    write_matrix,
    write_pairs,
)
from .io.formats import is_matrix_file
from .matrix import boundary_squared_zero, check
from .oracle import standard_reduce, twist_reduce
from .runtime import dump_report, run_distributed
from .runtime.sockets import parse_peers, run_socket_node

log = logging.getLogger("distpers")


class CommandError(Exception):
    pass


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _load_input(path: Path, mmap: bool = False):
    """Matrix plus filtration values (None for DBND input)."""
    if is_matrix_file(path):
        return read_matrix(path, mmap=mmap), None
    return build_cubical(read_image(path))


def cmd_generate(args) -> int:
    img = generate_image(args.extents, args.seed, args.exponent)
    write_image(img, args.output)
    log.info("wrote %s image to %s", "x".join(map(str, img.extents)), args.output)
    return 0


def cmd_convert(args) -> int:
    m, values = build_cubical(read_image(args.input))
    write_matrix(m, args.output)
    if args.values_out:
        values.astype("<f8").tofile(args.values_out)
    log.info("wrote %d-cell boundary matrix to %s", m.n, args.output)
    return 0


def _write_outputs(args, diagram, values, report) -> None:
    records = diagram.records()
    if args.max_dim is not None:
        records = [r for r in records if r.dim <= args.max_dim]
    write_pairs(args.output, records, binary=args.binary, filtration_values=values)
    if args.metrics_out:
        Path(args.metrics_out).write_text(dump_report(report))


def cmd_compute(args) -> int:
    matrix, values = _load_input(Path(args.input), mmap=args.mode == "dist-sockets")
    if args.mode != "dist-sockets":
        check(matrix)
        if not args.no_clearing and not boundary_squared_zero(matrix):
            raise CommandError("input does not square to zero; clearing is unsound, use --no-clearing")
    if args.mode == "sequential":
        reduce = standard_reduce if args.no_clearing else twist_reduce
        diagram = reduce(matrix).diagram()
        report = {"mode": "sequential", "n": matrix.n, "nodes": 1, "total_messages": 0, "total_bytes": 0}
        _write_outputs(args, diagram, values, report)
        return 0
    if args.mode == "dist":
        run = run_distributed(matrix, args.nodes, clearing=not args.no_clearing)
        report = dict(run.report, mode="dist")
        _write_outputs(args, run.diagram, values, report)
        return 0
    if args.rank is None or not args.peers:
        raise CommandError("dist-sockets needs --rank and --peers")
    peers = parse_peers(args.peers)
    p = args.nodes if args.nodes_given else len(peers)
    if len(peers) != p:
        raise CommandError(f"--nodes {p} but {len(peers)} peer addresses")
    if not 1 <= args.rank <= p:
        raise CommandError(f"--rank must lie in 1..{p}")
    res = run_socket_node(
        args.rank, matrix, make_partition(matrix.n, p), peers,
        clearing=not args.no_clearing, timeout=args.timeout,
    )
    if res is not None:
        _write_outputs(args, res.diagram, values, dict(res.report, mode="dist-sockets"))
    return 0


def cmd_verify(args) -> int:
    a, b = read_pairs(args.pairs_a), read_pairs(args.pairs_b)
    ka, kb = Counter(a.keys(args.verify_mode)), Counter(b.keys(args.verify_mode))
    if ka == kb:
        print("match")
        return 0
    only_a = sorted((ka - kb).elements(), key=str)
    only_b = sorted((kb - ka).elements(), key=str)
    print("mismatch")
    if only_a:
        print(f"first only in {args.pairs_a}: {_fmt(only_a[0])} ({len(only_a)} total)")
    if only_b:
        print(f"first only in {args.pairs_b}: {_fmt(only_b[0])} ({len(only_b)} total)")
    return 1


def _fmt(key) -> str:
    return " ".join(str(x) for x in key)


def cmd_report(args) -> int:
    import json

    rep = json.loads(Path(args.metrics).read_text())
    if "per_node" not in rep:
        print(f"mode={rep.get('mode')} n={rep.get('n')} (no communication)")
        return 0
    print(f"n={rep['n']} nodes={rep['nodes']}")
    print(f"{'node':>4} {'messages':>9} {'bytes':>12} {'max_pkg':>10} {'peak_cols':>10}")
    for row in rep["per_node"]:
        print(
            f"{row['node']:>4} {sum(row['messages'].values()):>9} {sum(row['bytes'].values()):>12}"
            f" {row['max_package_bytes']:>10} {row['peak_columns']:>10}"
        )
    print(f"total bytes {rep['total_bytes']}, max per pair {rep['max_pair_bytes']}, "
          f"max package {rep['max_package_bytes']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="distpers", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="synthesize a power-law random image")
    g.add_argument("--extents", nargs=3, type=_positive, required=True, metavar=("X", "Y", "Z"))
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--exponent", type=float, default=2.0)
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("convert", help="image -> DBND boundary matrix")
    c.add_argument("--input", required=True)
    c.add_argument("--output", required=True)
    c.add_argument("--values-out", help="also write per-index filtration values (f64)")
    c.set_defaults(func=cmd_convert)

    r = sub.add_parser("compute", help="compute persistence pairs")
    r.add_argument("--input", required=True, help="DBND matrix or raw image")
    r.add_argument("--output", required=True)
    r.add_argument("--mode", choices=("sequential", "dist", "dist-sockets"), default="sequential")
    r.add_argument("--nodes", type=_positive, default=None)
    r.add_argument("--rank", type=int)
    r.add_argument("--peers", help="host:port for ranks 1..p, comma-separated")
    r.add_argument("--metrics-out")
    r.add_argument("--binary", action="store_true", help="binary pairs file")
    r.add_argument("--max-dim", type=int, help="drop pairs above this dimension from the output")
    r.add_argument("--no-clearing", action="store_true")
    r.add_argument("--timeout", type=float, default=600.0)
    r.set_defaults(func=cmd_compute)

    v = sub.add_parser("verify", help="compare two pairs files as multisets")
    v.add_argument("pairs_a")
    v.add_argument("pairs_b")
    v.add_argument("--verify-mode", choices=("index", "value"), default="index")
    v.set_defaults(func=cmd_verify)

    rp = sub.add_parser("report", help="print a metrics report as a table")
    rp.add_argument("metrics")
    rp.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if args.command == "compute":
        args.nodes_given = args.nodes is not None
        if args.nodes is None:
            args.nodes = 1
    try:
        return args.func(args)
    except (CommandError, FormatError, OSError, ValueError, RuntimeError) as exc:
        print(f"distpers {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
