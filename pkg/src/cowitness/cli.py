"""Command-line front end.

Subcommands: classify, scan, evaluate, simulate, loss-sweep.  Structured
results go to stdout (or ``--output FILE``); diagnostics go to stderr.

Exit codes follow sysexits where applicable:

* 0   success (classify: valid witness; evaluate: entanglement detected)
* 2   classify: the point is not a valid witness
* 3   evaluate: no entanglement detected
* 64  usage error (bad flags, malformed numbers, bad grid or loss list)
* 65  data error (malformed counts document, group with no conclusive events)
* 66  an input file cannot be read
* 74  an output file cannot be written
* 78  configuration error (malformed TOML, unknown or out-of-range field)
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .documents import (
    CountsDocument,
    DocumentError,
    load_bundled_dataset,
    load_counts_document,
    load_link_config,
    save_counts_document,
)
from .operators import InvalidParameterError, WitnessParams
from .simulate import ConfigError, loss_sweep, simulate
from .stats import InsufficientDataError, witness_expectation, x_visibility, zz_correlation
from .validity import classify, region_scan

EX_OK = 0
EX_NOT_A_WITNESS = 2
EX_NOT_ENTANGLED = 3
EX_USAGE = 64
EX_DATA = 65
EX_NOINPUT = 66
EX_IOERR = 74
EX_CONFIG = 78

BUNDLED_ALIAS = "bundled:14db"

_SCAN_HEADER = "a,b,class,branch,lambda_min,separable_min"
_SWEEP_HEADER = "loss_db,zz_corr,x_vis,expectation,entangled"


class _CliFailure(Exception):
    """Internal: carry an exit code and a message to main()."""

    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


def _fmt(value: float) -> str:
    """CSV number format: 9 significant digits."""
    return format(float(value), ".9g")


def _bool_str(value: bool) -> str:
    return "true" if value else "false"


def _emit(text: str, output) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    try:
        Path(output).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise _CliFailure(EX_IOERR, f"cannot write '{output}': {exc}") from exc


def _witness_params(a: float, b: float) -> WitnessParams:
    try:
        return WitnessParams(a, b)
    except InvalidParameterError as exc:
        raise _CliFailure(EX_USAGE, str(exc)) from exc


def _load_document(ref: str) -> CountsDocument:
    if ref == BUNDLED_ALIAS:
        return load_bundled_dataset()
    try:
        return load_counts_document(ref)
    except OSError as exc:
        raise _CliFailure(EX_NOINPUT, f"cannot read '{ref}': {exc}") from exc
    except DocumentError as exc:
        raise _CliFailure(EX_DATA, f"'{ref}': {exc}") from exc


def _load_config(path: str):
    try:
        return load_link_config(path)
    except OSError as exc:
        raise _CliFailure(EX_NOINPUT, f"cannot read '{path}': {exc}") from exc
    except ConfigError as exc:
        raise _CliFailure(EX_CONFIG, f"'{path}': {exc}") from exc


def _table_of(doc: CountsDocument):
    try:
        return doc.to_table()
    except InsufficientDataError as exc:
        raise _CliFailure(EX_DATA, str(exc)) from exc


def cmd_classify(args) -> int:
    params = _witness_params(args.a, args.b)
    result = classify(params)
    record = {
        "a": params.a,
        "b": params.b,
        "kind": result.kind.value,
        "branch": result.branch.value if result.branch is not None else None,
        "lambda_min": result.lambda_min,
        "separable_min": result.separable_min,
    }
    _emit(json.dumps(record) + "\n", args.output)
    return EX_OK if result.is_valid else EX_NOT_A_WITNESS


def cmd_scan(args) -> int:
    table = None
    if args.data is not None:
        table = _table_of(_load_document(args.data))
    try:
        rows = region_scan((args.a_min, args.a_max), (args.b_min, args.b_max), args.steps)
    except ValueError as exc:
        raise _CliFailure(EX_USAGE, str(exc)) from exc

    lines = []
    if table is None:
        lines.append(_SCAN_HEADER)
        for a, b, cls in rows:
            branch = cls.branch.value if cls.branch is not None else ""
            lines.append(
                f"{_fmt(a)},{_fmt(b)},{cls.kind.value},{branch},"
                f"{_fmt(cls.lambda_min)},{_fmt(cls.separable_min)}"
            )
    else:
        zz = zz_correlation(table)
        vis = x_visibility(table)
        lines.append(_SCAN_HEADER + ",expectation,detects")
        for a, b, cls in rows:
            branch = cls.branch.value if cls.branch is not None else ""
            expectation = 1.0 + a * zz + b * vis
            detects = cls.is_valid and expectation < 0.0
            lines.append(
                f"{_fmt(a)},{_fmt(b)},{cls.kind.value},{branch},"
                f"{_fmt(cls.lambda_min)},{_fmt(cls.separable_min)},"
                f"{_fmt(expectation)},{_bool_str(detects)}"
            )
    _emit("\n".join(lines) + "\n", args.output)
    return EX_OK


def cmd_evaluate(args) -> int:
    table = _table_of(_load_document(args.data))
    params = _witness_params(args.a, args.b)
    evaluation = witness_expectation(params, table)
    record = {
        "a": params.a,
        "b": params.b,
        "zz_corr": evaluation.zz_corr,
        "x_vis": evaluation.x_vis,
        "expectation": evaluation.expectation,
        "valid_witness": evaluation.valid_witness,
        "entangled": evaluation.entangled,
    }
    _emit(json.dumps(record) + "\n", args.output)
    return EX_OK if evaluation.entangled else EX_NOT_ENTANGLED


def cmd_simulate(args) -> int:
    if args.output is None:
        raise _CliFailure(EX_USAGE, "simulate requires --output FILE for the counts document")
    link = _load_config(args.config)
    counts = simulate(link.source, link.channel, link.receiver, args.seed, workers=args.threads)
    doc = CountsDocument.from_raw(counts, loss_db=link.channel.loss_db)
    try:
        save_counts_document(doc, args.output)
    except OSError as exc:
        raise _CliFailure(EX_IOERR, f"cannot write '{args.output}': {exc}") from exc
    print(f"rounds: {counts.total_rounds}", file=sys.stderr)
    for name, group in (
        ("sent_alpha0", counts.sent_alpha0),
        ("sent_0alpha", counts.sent_0alpha),
        ("sent_alphaalpha", counts.sent_alphaalpha),
    ):
        print(f"{name}: {group.conclusive} conclusive of {group.total}", file=sys.stderr)
    print(f"wrote: {args.output}", file=sys.stderr)
    return EX_OK


def _parse_losses(text: str) -> list[float]:
    parts = [part.strip() for part in text.split(",")]
    if any(part == "" for part in parts):
        raise _CliFailure(EX_USAGE, f"bad loss list {text!r}: expected comma-separated numbers")
    try:
        return [float(part) for part in parts]
    except ValueError as exc:
        raise _CliFailure(
            EX_USAGE, f"bad loss list {text!r}: expected comma-separated numbers"
        ) from exc


def cmd_loss_sweep(args) -> int:
    losses = _parse_losses(args.losses)
    link = _load_config(args.config)
    params = _witness_params(args.a, args.b)
    try:
        points = loss_sweep(
            losses,
            params,
            link.source,
            link.channel,
            link.receiver,
            args.seed,
            workers=args.threads,
        )
    except InsufficientDataError as exc:
        raise _CliFailure(EX_DATA, str(exc)) from exc
    except ConfigError as exc:
        raise _CliFailure(EX_CONFIG, str(exc)) from exc

    if link.channel.visibility is not None:
        comment = f"# visibility: fixed={_fmt(link.channel.visibility)}"
    else:
        comment = f"# visibility: v0={_fmt(link.channel.v0)} l_c={_fmt(link.channel.l_c)}"
    lines = [comment, _SWEEP_HEADER]
    for loss, evaluation in points:
        lines.append(
            f"{_fmt(loss)},{_fmt(evaluation.zz_corr)},{_fmt(evaluation.x_vis)},"
            f"{_fmt(evaluation.expectation)},{_bool_str(evaluation.entangled)}"
        )
    _emit("\n".join(lines) + "\n", args.output)
    return EX_OK


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 64."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=12345, help="RNG stream key (default 12345)")
    common.add_argument(
        "--threads", type=int, default=1, help="worker threads for simulation (default 1)"
    )
    common.add_argument("--output", metavar="FILE", help="write the result here instead of stdout")

    parser = _Parser(
        prog="cowitness",
        description="Entanglement-witness analysis and link simulation for coherent one-way QKD.",
    )
    parser.add_argument("--version", action="version", version=f"cowitness {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser(
        "classify",
        parents=[common],
        help="classify one (a, b) witness-parameter point",
    )
    p.add_argument("-a", type=float, required=True, help="Z(x)Z coefficient")
    p.add_argument("-b", type=float, required=True, help="|x+><x+|(x)X coefficient")
    p.set_defaults(handler=cmd_classify)

    p = sub.add_parser(
        "scan",
        parents=[common],
        help="classify a full (a, b) grid as CSV",
    )
    p.add_argument("--a-min", type=float, required=True)
    p.add_argument("--a-max", type=float, required=True)
    p.add_argument("--b-min", type=float, required=True)
    p.add_argument("--b-max", type=float, required=True)
    p.add_argument("--steps", type=int, default=101, help="grid points per axis (default 101)")
    p.add_argument(
        "--data",
        metavar="FILE",
        help=f"counts document; adds expectation and detects columns ('{BUNDLED_ALIAS}' for the packaged table)",
    )
    p.set_defaults(handler=cmd_scan)

    p = sub.add_parser(
        "evaluate",
        parents=[common],
        help="evaluate the witness on a counts document",
    )
    p.add_argument(
        "--data",
        metavar="FILE",
        required=True,
        help=f"counts document ('{BUNDLED_ALIAS}' for the packaged table)",
    )
    p.add_argument("-a", type=float, required=True, help="Z(x)Z coefficient")
    p.add_argument("-b", type=float, required=True, help="|x+><x+|(x)X coefficient")
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser(
        "simulate",
        parents=[common],
        help="run the link model and write a raw counts document",
    )
    p.add_argument("--config", metavar="FILE", required=True, help="link configuration (TOML)")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser(
        "loss-sweep",
        parents=[common],
        help="simulate and evaluate across channel losses, as CSV",
    )
    p.add_argument("--config", metavar="FILE", required=True, help="link configuration (TOML)")
    p.add_argument(
        "--losses",
        metavar="LIST",
        required=True,
        help="comma-separated channel losses in dB, e.g. 0,5,10,15",
    )
    p.add_argument("-a", type=float, required=True, help="Z(x)Z coefficient")
    p.add_argument("-b", type=float, required=True, help="|x+><x+|(x)X coefficient")
    p.set_defaults(handler=cmd_loss_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error(f"--threads must be at least 1, got {args.threads}")
    try:
        return args.handler(args)
    except _CliFailure as failure:
        print(f"cowitness: error: {failure.message}", file=sys.stderr)
        return failure.code


def app() -> None:
    sys.exit(main())


if __name__ == "__main__":
    app()
