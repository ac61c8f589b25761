"""Command-line driver: ``vgmix fit | predict | simulate``.

Exit codes: 0 on success, 1 on a usage or input error, 2 when fitting fails.
Class labels in CSV files are positive integers (``1 .. G``); an empty label
cell marks an unlabeled row.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _backend
from .api import _discriminant, fit_classify, fit_cluster, load_model, predict, save_model
from .em import EMConfig
from .exceptions import (AllStartsFailed, DegenerateComponent, DimensionMismatch,
                         InvalidLabels, ModelFormatError, TooFewObservations)
from .simulate import make_rng, sample_mixture

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FIT = 2


class UsageError(Exception):
    pass


class CSVFormatError(UsageError):
    pass


@dataclass
class Dataset:
    column_names: list
    rows: np.ndarray
    # Zero-based classes, -1 where the cell was empty; None without a label column.
    labels: np.ndarray | None = None

    @property
    def n(self):
        return self.rows.shape[0]


def ingest_csv(path, label_column=None) -> Dataset:
    """Read a comma-separated file with a header row.

    Every column other than ``label_column`` is a feature and must hold a
    finite real in every row. Label cells are positive integers or empty.
    Errors name the 1-based data row (the header is not counted) and the
    column.
    """
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise CSVFormatError(f"cannot read {path}: {exc.strerror}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise CSVFormatError(f"{path}: missing header row")
        header = [h.strip() for h in header]
        if label_column is not None and label_column not in header:
            raise CSVFormatError(f"{path}: no label column named {label_column!r}")
        label_idx = header.index(label_column) if label_column is not None else None
        feat_idx = [j for j in range(len(header)) if j != label_idx]
        names = [header[j] for j in feat_idx]
        rows = []
        labels = []
        for r, rec in enumerate(reader, start=1):
            if not rec:
                continue
            if len(rec) != len(header):
                raise CSVFormatError(f"{path}: row {r} has {len(rec)} fields, header has {len(header)}")
            vals = []
            for j in feat_idx:
                cell = rec[j].strip()
                try:
                    v = float(cell)
                except ValueError:
                    v = math.nan
                if not math.isfinite(v):
                    raise CSVFormatError(
                        f"{path}: row {r}, column {header[j]!r}: {cell!r} is not a finite number")
                vals.append(v)
            rows.append(vals)
            if label_idx is not None:
                labels.append(_parse_label(rec[label_idx].strip(), path, r, label_column))
    data = np.array(rows, dtype=np.float64).reshape(len(rows), len(names))
    lab = np.array(labels, dtype=np.intp) if label_idx is not None else None
    return Dataset(names, data, lab)


def _parse_label(cell, path, r, column):
    if cell == "":
        return -1
    try:
        v = int(cell)
    except ValueError:
        v = 0
    if v < 1:
        raise CSVFormatError(f"{path}: row {r}, column {column!r}: label {cell!r} is not a positive integer")
    return v - 1


def _fmt(v) -> str:
    return repr(float(v))


def write_assignments(path, resp, labels):
    g = resp.shape[1]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row_id", "label"] + [f"resp_{k + 1}" for k in range(g)])
        for i in range(resp.shape[0]):
            w.writerow([i + 1, int(labels[i]) + 1] + [_fmt(v) for v in resp[i]])


def _prepare_outdir(path: Path, force: bool):
    if path.exists():
        if not path.is_dir():
            raise UsageError(f"output path {path} exists and is not a directory")
        if any(path.iterdir()) and not force:
            raise UsageError(f"output directory {path} is not empty (use --force to overwrite)")
    else:
        path.mkdir(parents=True)


def _write_report(path: Path, result, args, data: Dataset):
    header = {
        "mode": args.mode,
        "seed": args.seed,
        "backend": _backend.NAME,
        "n": data.n,
        "p": data.rows.shape[1],
        "columns": ",".join(data.column_names),
        "selected_G": result.model.n_components,
        "loglik": _fmt(result.loglik),
        "bic": _fmt(result.bic),
        "n_iter": result.n_iter,
        "converged": str(result.converged).lower(),
        "boundary_flags": ",".join(str(f).lower() for f in result.boundary_flags),
        "starts": args.starts,
        "max_iter": args.max_iter,
        "tol": _fmt(args.tol),
    }
    if args.mode == "classify":
        header["G"] = args.G
        header["H"] = args.H if args.H is not None else args.G
    rows = result.candidates or {result.model.n_components: result}
    lines = [f"{k}: {v}" for k, v in header.items()]
    lines += ["", "BIC table", f"{'G':>3}  {'loglik':>22}  {'bic':>22}  {'n_iter':>6}  converged"]
    for g, res in sorted(rows.items()):
        if res is None:
            lines.append(f"{g:>3}  {'failed':>22}  {'failed':>22}  {'-':>6}  -")
        else:
            lines.append(f"{g:>3}  {_fmt(res.loglik):>22}  {_fmt(res.bic):>22}  {res.n_iter:>6}  "
                         f"{str(res.converged).lower()}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def run_fit(args) -> int:
    cfg = EMConfig(max_iter=args.max_iter, aitken_eps=args.tol, n_starts=args.starts, seed=args.seed)
    if args.mode in ("classify", "discriminant") and args.labels is None:
        raise UsageError(f"--mode {args.mode} needs --labels")
    if args.mode == "classify" and args.G is None:
        raise UsageError("--mode classify needs --G")
    data = ingest_csv(args.input, args.labels)
    out = Path(args.out)
    # Checked before fitting so a long run is not wasted on an unusable target.
    _prepare_outdir(out, args.force)
    if args.mode == "cluster":
        if data.labels is not None and np.any(data.labels >= 0):
            print("note: labels are ignored in cluster mode", file=sys.stderr)
        result = fit_cluster(data.rows, args.gmin, args.gmax, cfg)
    elif args.mode == "classify":
        if np.any(data.labels >= args.G):
            raise UsageError(f"labels must lie in 1..{args.G}")
        result = fit_classify(data.rows, data.labels, args.G, args.H, cfg)
    else:
        if np.any(data.labels < 0):
            raise UsageError("--mode discriminant needs every row labeled")
        result = _discriminant(data.rows, data.labels, cfg)
    (out / "model.json").write_text(save_model(result.model), encoding="utf-8")
    write_assignments(out / "assignments.csv", result.responsibilities, result.labels)
    _write_report(out / "report.txt", result, args, data)
    return EXIT_OK


def run_predict(args) -> int:
    model = _read_model(args.model)
    data = ingest_csv(args.input, args.labels)
    if data.rows.shape[1] != model.dim:
        raise DimensionMismatch(
            f"{args.input} has {data.rows.shape[1]} feature columns; the model expects {model.dim}")
    resp, labels = predict(model, data.rows)
    write_assignments(args.out, resp, labels)
    return EXIT_OK


def run_simulate(args) -> int:
    model = _read_model(args.model)
    x, labels = sample_mixture(model, args.n, make_rng(args.seed))
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{j + 1}" for j in range(model.dim)] + ["true_label"])
        for row, lab in zip(x, labels):
            w.writerow([_fmt(v) for v in row] + [int(lab) + 1])
    return EXIT_OK


def _read_model(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read model {path}: {exc.strerror}") from exc
    return load_model(text)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _seed(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be in [0, 2**64)")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be a non-negative integer")
    return v


def _positive_float(text):
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError("must be a positive number")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vgmix", description="Mixtures of variance-gamma distributions.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    fit = sub.add_parser("fit", help="fit a mixture to a CSV file")
    fit.add_argument("--mode", choices=("cluster", "classify", "discriminant"), default="cluster")
    fit.add_argument("--input", required=True, help="CSV file with a header row")
    fit.add_argument("--labels", help="name of the label column (positive integers, empty = unknown)")
    fit.add_argument("--gmin", type=_positive_int, default=1, help="smallest G for cluster mode (default 1)")
    fit.add_argument("--gmax", type=_positive_int, default=4, help="largest G for cluster mode (default 4)")
    fit.add_argument("--G", type=_positive_int, help="number of known classes (classify mode)")
    fit.add_argument("--H", type=_positive_int, help="number of components, H >= G (classify mode)")
    fit.add_argument("--out", required=True, help="output directory (must be new or empty)")
    fit.add_argument("--seed", type=_seed, default=0, help="random seed (default 0)")
    fit.add_argument("--max-iter", type=_positive_int, default=1000)
    fit.add_argument("--tol", type=_positive_float, default=1e-8, help="Aitken tolerance (default 1e-8)")
    fit.add_argument("--starts", type=_positive_int, default=5, help="EM starts per G (default 5)")
    fit.add_argument("--force", action="store_true", help="allow a non-empty output directory")
    fit.set_defaults(func=run_fit)

    pred = sub.add_parser("predict", help="classify rows with a saved model")
    pred.add_argument("--model", required=True)
    pred.add_argument("--input", required=True)
    pred.add_argument("--out", required=True, help="assignments CSV to write")
    pred.add_argument("--labels", help="column to ignore, e.g. a label column in the input")
    pred.set_defaults(func=run_predict)

    sim = sub.add_parser("simulate", help="draw a labeled sample from a saved model")
    sim.add_argument("--model", required=True)
    sim.add_argument("--n", type=_nonneg_int, required=True)
    sim.add_argument("--seed", type=_seed, default=0, help="random seed (default 0)")
    sim.add_argument("--out", required=True, help="CSV file to write")
    sim.set_defaults(func=run_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "fit" and args.gmin > args.gmax:
            raise UsageError("--gmin must not exceed --gmax")
        return args.func(args)
    except (UsageError, DimensionMismatch, InvalidLabels, ModelFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AllStartsFailed, DegenerateComponent, TooFewObservations) as exc:
        print(f"fit failed: {exc}", file=sys.stderr)
        return EXIT_FIT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
