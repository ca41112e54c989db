"""Command-line interface: ``corrmetric {matrix,verify,classify,knn}``.

Exit codes: 0 ok, 1 verification failure, 2 usage or parse error, 3 invalid
data, 4 refused non-metric index.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass
from typing import Sequence, TextIO

import numpy as np

from . import __version__
from .correlation import Similarity, as_vector, prepare_rows
from .errors import CorrMetricError
from .index import build
from .mpf import classify_transform, named_function
from .transforms import Transform, distance_matrix
from .verify import DEFAULT_DIMS, triangle_suite

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_INVALID_DATA = 3
EXIT_NON_METRIC = 4

SEED_ENV = "CORRMETRIC_SEED"


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def fmt(v: float) -> str:
    """17 significant digits: lossless round trip for doubles."""
    return format(float(v), ".17g")


def _is_number(field: str) -> bool:
    try:
        float(field)
    except ValueError:
        return False
    return True


@dataclass
class VectorTable:
    labels: list[str]
    rows: np.ndarray
    columns: list[str] | None = None


def parse_table(text: str, source: str = "<input>") -> VectorTable:
    """Parse CSV vectors: optional header row, optional leading label column.

    A first line with a non-numeric field after the first column (or with
    no numeric field at all) is a header.  Rows carry labels when the
    first field of the first data row is non-numeric; unlabeled rows are
    named ``row0``, ``row1``, ...
    """
    lines = [(no, ln.strip()) for no, ln in enumerate(text.splitlines(), start=1)]
    lines = [(no, ln) for no, ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise CliError(f"{source}: no data rows", EXIT_USAGE)

    columns = None
    first = [f.strip() for f in lines[0][1].split(",")]
    if not any(_is_number(f) for f in first) or not all(_is_number(f) for f in first[1:]):
        columns = first
        lines = lines[1:]
        if not lines:
            raise CliError(f"{source}: header but no data rows", EXIT_USAGE)

    labelled = not _is_number(lines[0][1].split(",")[0].strip())
    labels, rows, width = [], [], None
    for no, ln in lines:
        fields = [f.strip() for f in ln.split(",")]
        if labelled:
            label, fields = fields[0], fields[1:]
        else:
            label = f"row{len(rows)}"
        try:
            values = [float(f) for f in fields]
        except ValueError:
            raise CliError(f"{source}: line {no}: non-numeric field", EXIT_USAGE) from None
        if not values:
            raise CliError(f"{source}: line {no}: no values", EXIT_USAGE)
        if width is None:
            width = len(values)
        elif len(values) != width:
            raise CliError(f"{source}: line {no}: {len(values)} values, expected {width}", EXIT_USAGE)
        labels.append(label)
        rows.append(values)
    if len(set(labels)) != len(labels):
        dup = next(lab for lab in labels if labels.count(lab) > 1)
        raise CliError(f"{source}: duplicate row label {dup!r}", EXIT_USAGE)
    return VectorTable(labels, np.array(rows, dtype=np.float64), columns)


def read_table(path: str) -> VectorTable:
    try:
        if path == "-":
            return parse_table(sys.stdin.read(), "<stdin>")
        with open(path, encoding="utf-8") as fh:
            return parse_table(fh.read(), path)
    except OSError as err:
        raise CliError(f"cannot read {path}: {err.strerror}", EXIT_USAGE) from None


def _validate(table: VectorTable, sim: Similarity) -> None:
    """Reject rows that are non-finite or degenerate for ``sim`` (exit 3)."""
    for i, row in enumerate(table.rows):
        try:
            prepare_rows(as_vector(row), sim)
        except CorrMetricError as err:
            raise CliError(f"invalid vector in row {table.labels[i]!r}: {err}", EXIT_INVALID_DATA) from None


def _parse_flags(args) -> tuple[Similarity, Transform]:
    try:
        return Similarity.parse(args.sim), Transform.parse(args.transform)
    except CorrMetricError as err:
        raise CliError(str(err), EXIT_USAGE) from None


def write_matrix(out: TextIO, labels: Sequence[str], entries: np.ndarray, kind: Transform) -> None:
    if not kind.is_metric:
        out.write(f"# WARNING: non-metric transform {kind.label}; triangle inequality does not hold\n")
    out.write("," + ",".join(labels) + "\n")
    for label, row in zip(labels, entries):
        out.write(label + "," + ",".join(fmt(v) for v in row) + "\n")


def cmd_matrix(args, out: TextIO) -> int:
    sim, kind = _parse_flags(args)
    table = read_table(args.input)
    _validate(table, sim)
    dm = distance_matrix(table.rows, sim, kind, labels=table.labels)
    if args.output in (None, "-"):
        write_matrix(out, table.labels, dm.entries, kind)
    else:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            write_matrix(fh, table.labels, dm.entries, kind)
    return EXIT_OK


def _parse_dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(d) for d in text.split(","))
    except ValueError:
        raise CliError(f"bad --dims {text!r}", EXIT_USAGE) from None
    if not dims or min(dims) < 1:
        raise CliError(f"bad --dims {text!r}", EXIT_USAGE)
    return dims


def cmd_verify(args, out: TextIO) -> int:
    sim, kind = _parse_flags(args)
    if args.trials < 1:
        raise CliError(f"--trials must be >= 1, got {args.trials}", EXIT_USAGE)
    dims = _parse_dims(args.dims)
    try:
        report = triangle_suite(sim, kind, dims, args.trials, _seed(args), antipodes=args.antipodes)
    except CorrMetricError as err:
        raise CliError(str(err), EXIT_USAGE) from None
    for line in report.lines():
        out.write(line + "\n")
    out.write(f"result: {'pass' if report.passed else 'FAIL'}\n")
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


def cmd_classify(args, out: TextIO) -> int:
    try:
        probe = named_function(args.function, args.grid, args.tolerance)
    except CorrMetricError as err:
        raise CliError(str(err), EXIT_USAGE) from None
    for line in classify_transform(probe).lines():
        out.write(line + "\n")
    return EXIT_OK


def cmd_knn(args, out: TextIO) -> int:
    sim, kind = _parse_flags(args)
    if not kind.is_metric:
        raise CliError(f"refusing to build index on non-metric transform {kind.label}", EXIT_NON_METRIC)
    table = read_table(args.input)
    _validate(table, sim)
    if args.leaf_size < 1:
        raise CliError(f"--leaf-size must be >= 1, got {args.leaf_size}", EXIT_USAGE)
    if not 1 <= args.k <= len(table.labels):
        raise CliError(f"-k must satisfy 1 <= k <= {len(table.labels)}, got {args.k}", EXIT_USAGE)

    if args.query_file is not None:
        queries = read_table(args.query_file)
        if queries.rows.shape[1] != table.rows.shape[1]:
            raise CliError(
                f"queries have {queries.rows.shape[1]} values, data rows have {table.rows.shape[1]}", EXIT_USAGE
            )
        _validate(queries, sim)
        pending = list(zip(queries.labels, queries.rows))
    else:
        if args.query not in table.labels:
            raise CliError(f"no row labelled {args.query!r}", EXIT_USAGE)
        i = table.labels.index(args.query)
        pending = [(args.query, table.rows[i])]

    tree = build(table.rows, sim, kind, seed=_seed(args), leaf_size=args.leaf_size)
    for label, q in pending:
        hits, stats = tree.knn(q, args.k)
        out.write(f"# query: {label}\n")
        for idx, d in hits:
            out.write(f"{table.labels[idx]},{fmt(d)}\n")
        out.write(f"# distance_evaluations: {stats.distance_evaluations}\n")
        out.write(f"# pruned_subtrees: {stats.pruned_subtrees}\n")
        out.write(f"# visited_leaves: {stats.visited_leaves}\n")
    return EXIT_OK


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 42
    try:
        return int(env)
    except ValueError:
        raise CliError(f"{SEED_ENV} must be an integer, got {env!r}", EXIT_USAGE) from None


def _positive_float(text: str) -> float:
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corrmetric", description="Metric distances from cosine, Pearson and Spearman similarity."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def sim_transform(p, default_transform="angular"):
        p.add_argument("--sim", default="cosine", help="cosine, pearson or spearman (default: cosine)")
        p.add_argument(
            "--transform",
            default=default_transform,
            help="angular, correlation, acute-angular, absolute-correlation, power-sine:p or one-minus",
        )

    def seed(p):
        p.add_argument("--seed", type=int, default=None, help=f"RNG seed (default: ${SEED_ENV} or 42)")

    p = sub.add_parser("matrix", help="pairwise distance matrix of CSV rows")
    p.add_argument("input", help="CSV file, one vector per row ('-' for stdin)")
    p.add_argument("-o", "--output", default=None, help="output CSV (default: stdout)")
    sim_transform(p)
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("verify", help="randomized triangle-inequality check")
    sim_transform(p)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--dims", default=",".join(str(d) for d in DEFAULT_DIMS), help="comma-separated dimensions")
    p.add_argument("--antipodes", action="store_true", help="include sign-reversed duplicates")
    seed(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("classify", help="classify a catalogued transform of the angle")
    p.add_argument("function", help="f1, f2, f3, f4, f5:p or one-minus-cos")
    p.add_argument("--grid", type=int, default=512, help="grid resolution (default: 512)")
    p.add_argument("--tolerance", type=_positive_float, default=1e-9)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("knn", help="k nearest neighbours through a vantage-point tree")
    p.add_argument("input", help="CSV file of dataset rows")
    q = p.add_mutually_exclusive_group(required=True)
    q.add_argument("--query", help="label of a dataset row to use as the query")
    q.add_argument("--query-file", help="CSV file of query rows")
    p.add_argument("-k", type=int, default=1)
    p.add_argument("--leaf-size", type=int, default=16)
    sim_transform(p)
    seed(p)
    p.set_defaults(func=cmd_knn)
    return parser


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except CliError as err:
        print(f"error: {err}", file=sys.stderr)
        return err.code
    except CorrMetricError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID_DATA


if __name__ == "__main__":
    sys.exit(main())
