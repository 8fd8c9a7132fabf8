"""Command-line entry point: ``tmrlp <command> [options]``.

Commands
--------
fit     one split, every requested method; prints unlabeled accuracy
bench   repeated paired splits; writes ``report.json`` and traces
grid    fix-one-tune-two parameter search; writes ``grid.csv`` and ``best.json``
ablate  full model against alpha=0, beta=0, gamma=0; writes ``ablation.csv``
dump    fit once and write the decomposed matrices as CSV grids
synth   write a synthetic dataset to CSV or the ``TMR1`` binary format

Config files
------------
``--config FILE`` reads ``key = value`` lines (``#`` starts a comment).  Keys
are the long option names with or without leading dashes, ``-`` and ``_``
interchangeable, e.g.::

    dataset = blobs:c=3,per_class=30,dim=10,separation=30,noise_sigma=3
    method = alptmr,gfhf
    alpha = 0.01
    labeled-per-class = 5

Options given on the command line override the file.

Exit status is 0 on success, 1 for invalid input and 2 when a linear solve
fails.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import alptmr
from .data import save_binary, save_csv
from .exceptions import NumericalError, TmrError, ValidationError
from .harness import (METHODS, ExperimentConfig, ablation, dump_matrices, grid_search,
                      inter_class_mass, parse_dataset, predict_labels, prepare_run,
                      preprocess_features, propagate, run_experiment)

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2

# option name -> (type, default)
OPTIONS = {
    "dataset": (str, None),
    "method": (str, "alptmr"),
    "alpha": (float, 1e-2),
    "beta": (float, 1e-2),
    "gamma": (float, 1e-2),
    "k": (int, 7),
    "tau": (float, 1e-8),
    "labeled_per_class": (int, 5),
    "repeats": (int, 10),
    "corrupt_sigma": (float, 0.0),
    "corrupt_fraction": (float, 0.5),
    "seed": (int, 0),
    "out": (str, None),
    "max_iter": (int, 30),
    "tol": (float, 1e-3),
    "mu": (float, 1e-2),
    "reg": (float, 1e-3),
    "update_order": (str, "labels_first"),
    "preprocess": (str, "none"),
    "grid": (str, None),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def read_config(path):
    """Parse a ``key = value`` file into a dict keyed by option name."""
    values = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from None
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValidationError(f"{path}:{lineno}: expected key = value")
        key = key.strip().lstrip("-").replace("-", "_")
        if key not in OPTIONS:
            raise ValidationError(f"{path}:{lineno}: unknown key {key!r}")
        typ = OPTIONS[key][0]
        try:
            values[key] = typ(value.strip())
        except ValueError:
            raise ValidationError(f"{path}:{lineno}: bad value for {key}: {value.strip()!r}") \
                from None
    return values


def _add_common(p):
    p.add_argument("--config", help="key = value option file")
    p.add_argument("--dataset", help="CSV/TMR1 file or recipe such as "
                   "'blobs:c=3,separation=30' or 'moons:n=200,noise=0.1'")
    p.add_argument("--method", help=f"comma-separated subset of {','.join(METHODS)}")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--k", type=int, help="neighbourhood size")
    p.add_argument("--tau", type=float)
    p.add_argument("--labeled-per-class", type=int)
    p.add_argument("--repeats", type=int)
    p.add_argument("--corrupt-sigma", type=float,
                   help="noise sd as a multiple of each feature's sd (0 = off)")
    p.add_argument("--corrupt-fraction", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--max-iter", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--mu", type=float, help="LLGC fitness weight")
    p.add_argument("--reg", type=float, help="local Gram ridge")
    p.add_argument("--update-order", choices=alptmr.UPDATE_ORDERS)
    p.add_argument("--preprocess", help="none, pca:<d> or rp:<d>")


def build_parser():
    parser = _Parser(prog="tmrlp", description="Robust graph label propagation.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in ("fit", "bench", "grid", "ablate", "dump"):
        p = sub.add_parser(name)
        _add_common(p)
        if name == "grid":
            p.add_argument("--grid", help="comma-separated candidate values for every axis")
    p = sub.add_parser("synth")
    p.add_argument("--dataset", required=True, help="synthetic recipe")
    p.add_argument("--out", required=True, help="output file (.csv, .tmr or .bin)")
    return parser


def resolve(args):
    """Merge defaults, config file and command-line options."""
    opts = {k: default for k, (_, default) in OPTIONS.items()}
    if getattr(args, "config", None):
        opts.update(read_config(args.config))
    for key in OPTIONS:
        value = getattr(args, key, None)
        if value is not None:
            opts[key] = value
    if not opts["dataset"]:
        raise ValidationError("--dataset is required")
    return opts


def experiment_from(opts):
    solver = alptmr.SolverConfig(
        alpha=opts["alpha"], beta=opts["beta"], gamma=opts["gamma"], tau=opts["tau"],
        K=opts["k"], max_iter=opts["max_iter"], tol=opts["tol"], reg=opts["reg"],
        update_order=opts["update_order"], seed=opts["seed"])
    methods = tuple(m.strip() for m in opts["method"].split(",") if m.strip())
    return ExperimentConfig(
        dataset=opts["dataset"], methods=methods, solver=solver,
        labeled_per_class=opts["labeled_per_class"], repeats=opts["repeats"],
        corrupt_sigma=opts["corrupt_sigma"], corrupt_fraction=opts["corrupt_fraction"],
        mu=opts["mu"], preprocess=opts["preprocess"], seed=opts["seed"], out=opts["out"])


def _single(config):
    dataset = parse_dataset(config.dataset)
    X = preprocess_features(dataset, config.preprocess, config.seed)
    _, labeled, unlabeled, Xr, Y = prepare_run(dataset, X, config, 0)
    return dataset, labeled, unlabeled, Xr, Y


def cmd_fit(config):
    dataset, labeled, unlabeled, Xr, Y = _single(config)
    result = {}
    for method in config.methods:
        F, iters, _ = propagate(method, Xr, Y, labeled, config.solver, config.mu)
        pred = predict_labels(F)
        acc = float(np.mean(pred[unlabeled] == dataset.labels[unlabeled]))
        result[method] = {"accuracy": acc, "iterations": int(iters)}
        print(f"{method}: accuracy {acc:.4f} ({iters} iterations)")
        if config.out:
            out = Path(config.out)
            out.mkdir(parents=True, exist_ok=True)
            np.savetxt(out / f"{method}_predictions.csv", pred, fmt="%d")
    if config.out:
        (Path(config.out) / "fit.json").write_text(
            json.dumps(result, sort_keys=True, indent=2) + "\n")


def cmd_bench(config):
    report = run_experiment(config)
    for name, m in report.methods.items():
        print(f"{name}: {100 * m.mean:.2f} +- {100 * m.std:.2f} (best {100 * m.best:.2f})")
    if not config.out:
        print(report.to_json())


def cmd_grid(config, grid):
    param_grid = None
    if grid:
        values = tuple(float(v) for v in grid.split(","))
        param_grid = {"alpha": values, "beta": values, "gamma": values}
    best, table = grid_search(config, param_grid)
    print(f"best: alpha={best.alpha:g} beta={best.beta:g} gamma={best.gamma:g} "
          f"({len(table)} cells)")


def cmd_ablate(config):
    for row in ablation(config):
        print(f"{row['variant']:>8}: {100 * row['mean']:.2f} +- {100 * row['std']:.2f}")


def cmd_dump(config):
    if not config.out:
        raise ValidationError("dump needs --out")
    dataset, labeled, unlabeled, Xr, Y = _single(config)
    model = alptmr.fit(Xr, Y, config.solver)
    paths = dump_matrices(model, dataset.labels, config.out)
    print(f"wrote {len(paths)} files to {config.out}; inter-class mass "
          f"{inter_class_mass(model.W_init, dataset.labels):.4f} -> "
          f"{inter_class_mass(model.W_clean, dataset.labels):.4f}")


def cmd_synth(args):
    dataset = parse_dataset(args.dataset)
    out = Path(args.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    if out.suffix in (".tmr", ".bin"):
        save_binary(dataset, out)
    else:
        save_csv(dataset, out)
    print(f"wrote {dataset.n_samples} samples to {out}")


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "synth":
            cmd_synth(args)
            return EXIT_OK
        opts = resolve(args)
        config = experiment_from(opts)
        if args.command == "fit":
            cmd_fit(config)
        elif args.command == "bench":
            cmd_bench(config)
        elif args.command == "grid":
            cmd_grid(config, opts["grid"])
        elif args.command == "ablate":
            cmd_ablate(config)
        elif args.command == "dump":
            cmd_dump(config)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except TmrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
