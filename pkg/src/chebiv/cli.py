"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 build or convergence failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

import numpy as np

from .builder import PRESETS, SurfaceModel, build_surface
from .domain import DEFAULT_DELTA
from .engine import OK
from .errors import ChebIVError, ConvergenceError, DomainError, ModelFormatError
from .laplace import LaplaceSurface, build_laplace_surface, laplace_invert
from .persist import atomic_write_text, load_model, save_model
from .quotes import format_output, invert_rows, parse_quotes
from .reports import DECAY_NS, decay_rows, footprint_table, validate_model

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_BUILD = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(text: str, out: str | None) -> None:
    if out:
        atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelFormatError(f"cannot read {path}: {exc.strerror}") from None
    except UnicodeDecodeError as exc:
        raise ModelFormatError(f"{path}: not UTF-8 text ({exc.reason})") from None


def _load(path: str, kind: type):
    try:
        model = load_model(path)
    except OSError as exc:
        raise ModelFormatError(f"cannot read {path}: {exc.strerror}") from None
    if not isinstance(model, kind):
        raise ModelFormatError(f"{path} holds a {type(model).__name__}, expected {kind.__name__}")
    return model


def cmd_build(args) -> int:
    model = build_surface(args.preset, delta=args.delta)
    print(f"preset {model.preset.name} (tol {model.preset.tol:g}), delta {model.delta:g}")
    print(footprint_table(model))
    if args.out:
        save_model(model, args.out)
        print(f"model written to {args.out}")
    return EXIT_OK


def cmd_invert(args) -> int:
    model = _load(args.model, SurfaceModel)
    header, rows = parse_quotes(_read_text(args.quotes))
    for row in rows:
        if row.message:
            print(row.message, file=sys.stderr)
    _emit(format_output(header, rows, invert_rows(model, rows)), args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    model = _load(args.model, SurfaceModel)
    stats = validate_model(model, args.domain, args.grid, args.seed)
    row = stats.as_row()
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["preset", "domain", *row])
    writer.writerow([model.preset.name, args.domain, *(f"{v:.3e}" if isinstance(v, float) else v
                                                      for v in row.values())])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_decay(args) -> int:
    rows = decay_rows(args.mode, args.n, args.grid)
    text = "N,max_err,mean_err\n" + "".join(f"{n},{mx:.6e},{mn:.6e}\n" for n, mx, mn in rows)
    _emit(text, args.out)
    return EXIT_OK


def cmd_laplace_build(args) -> int:
    surface = build_laplace_surface(args.n)
    print(f"Laplace surface N={args.n}, rank {surface.interp.rank}, residual {surface.meta['residual']:.2e}")
    if args.out:
        save_model(surface, args.out)
        print(f"model written to {args.out}")
    return EXIT_OK


def cmd_laplace_invert(args) -> int:
    surface = _load(args.model, LaplaceSurface)
    reader = csv.DictReader(io.StringIO(_read_text(args.quotes)))
    fields = [f.strip() for f in (reader.fieldnames or [])]
    if "x" not in fields or "c" not in fields:
        raise ModelFormatError("line 1: Laplace quote header needs columns x,c")
    reader.fieldnames = fields
    recs, xs, cs, bad = [], [], [], []
    for rec in reader:
        recs.append(rec)
        try:
            x, c = float(rec["x"]), float(rec["c"])
        except (TypeError, ValueError):
            print(f"line {reader.line_num}: cannot parse x/c", file=sys.stderr)
            x, c = np.nan, np.nan
            bad.append(len(recs) - 1)
        xs.append(x)
        cs.append(c)
    res = laplace_invert(surface, np.array(xs), np.array(cs))
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields + ["v", "status"], lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for i, rec in enumerate(recs):
        status = "malformed-row" if i in bad else str(res.status[i])
        writer.writerow({**rec, "v": repr(float(res.v[i])) if status == OK else "", "status": status})
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="chebiv", description="Chebyshev-interpolated implied volatility")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("build", help="build a Black-Scholes model and print its rank/order table")
    b.add_argument("--preset", choices=sorted(PRESETS), default="medium")
    b.add_argument("--delta", type=float, default=DEFAULT_DELTA, help="low-volatility scaling shift")
    b.add_argument("--out", help="model file to write")
    b.set_defaults(func=cmd_build)

    i = sub.add_parser("invert", help="invert a quote file")
    i.add_argument("model")
    i.add_argument("quotes")
    i.add_argument("--out", help="output CSV (default stdout)")
    i.set_defaults(func=cmd_invert)

    v = sub.add_parser("validate", help="round-trip error report on D1 or D2")
    v.add_argument("model")
    v.add_argument("--grid", type=int, default=200, help="points per axis")
    v.add_argument("--domain", choices=("D1", "D2"), default="D2")
    v.add_argument("--seed", type=int, help="use grid*grid random points from this seed")
    v.add_argument("--out", help="report file (default stdout)")
    v.set_defaults(func=cmd_validate)

    d = sub.add_parser("decay", help="error decay of the single-rectangle interpolants")
    d.add_argument("mode", choices=("simple", "laplace"))
    d.add_argument("--n", type=int, nargs="+", default=list(DECAY_NS), help="polynomial degrees")
    d.add_argument("--grid", type=int, default=100, help="reference points per axis")
    d.add_argument("--out", help="CSV file (default stdout)")
    d.set_defaults(func=cmd_decay)

    lb = sub.add_parser("laplace-build", help="build the Laplace-model surface")
    lb.add_argument("--n", type=int, default=50, help="polynomial degree per variable")
    lb.add_argument("--out", help="model file to write")
    lb.set_defaults(func=cmd_laplace_build)

    li = sub.add_parser("laplace-invert", help="invert normalized Laplace quotes (columns x,c)")
    li.add_argument("model")
    li.add_argument("quotes")
    li.add_argument("--out", help="output CSV (default stdout)")
    li.set_defaults(func=cmd_laplace_invert)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConvergenceError as exc:
        print(f"build failed: {exc}", file=sys.stderr)
        return EXIT_BUILD
    except (ModelFormatError, DomainError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ChebIVError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
