"""Repeated-split experiments, grid search, ablations and matrix dumps.

Every run ``r`` of an experiment draws its split, corruption and any random
projection from seeds derived from ``seed ^ r``, so results do not depend on
how runs are scheduled across threads.  All methods in one experiment see
the same splits and the same corrupted data.
"""

import csv
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import alptmr
from .baselines import DEFAULT_MU, gfhf, llgc, predict_labels
from .data import (CorruptionSpec, SplitSpec, corrupt_gaussian, load_dataset, one_hot_Y,
                   pca_reduce, random_projection, split, synth_blobs, synth_two_moons)
from .exceptions import TmrError, ValidationError
from .graph import baseline_graph

logger = logging.getLogger(__name__)

METHODS = ("alptmr", "gfhf", "llgc")
ODD_POWERS = tuple(10.0 ** p for p in range(-8, 9, 2))
TIMING_KEYS = ("wall_time", "wall_times")

_SYNTH = {
    "blobs": (synth_blobs, {"c": int, "per_class": int, "dim": int, "separation": float,
                            "noise_sigma": float, "seed": int}),
    "moons": (synth_two_moons, {"n": int, "noise": float, "seed": int}),
}


def parse_dataset(source):
    """Load a file, or build a synthetic set from ``"blobs:c=3,dim=10,..."``."""
    source = str(source)
    kind, _, args = source.partition(":")
    if kind in _SYNTH and (args or not Path(source).exists()):
        factory, types = _SYNTH[kind]
        kwargs = {}
        for item in filter(None, (a.strip() for a in args.split(","))):
            key, sep, value = item.partition("=")
            if not sep or key not in types:
                raise ValidationError(f"bad {kind} parameter {item!r}; "
                                      f"allowed: {', '.join(types)}")
            try:
                kwargs[key] = types[key](value)
            except ValueError:
                raise ValidationError(f"bad value for {key}: {value!r}") from None
        return factory(**kwargs)
    path = Path(source)
    if not path.exists():
        raise ValidationError(f"dataset {source!r} is neither a file nor a synthetic recipe")
    return load_dataset(path)


@dataclass
class ExperimentConfig:
    """What to run.

    ``corrupt_sigma`` is the noise standard deviation as a multiple of each
    feature's standard deviation; zero disables corruption.  ``preprocess`` is
    ``"none"``, ``"pca:<d>"`` or ``"rp:<d>"``.
    """

    dataset: str
    methods: tuple = ("alptmr",)
    solver: alptmr.SolverConfig = field(default_factory=alptmr.SolverConfig)
    labeled_per_class: int = 5
    repeats: int = 10
    corrupt_sigma: float = 0.0
    corrupt_fraction: float = 0.5
    mu: float = DEFAULT_MU
    preprocess: str = "none"
    seed: int = 0
    out: str = None

    def __post_init__(self):
        if isinstance(self.methods, str):
            self.methods = (self.methods,)
        self.methods = tuple(self.methods)
        if not self.methods:
            raise ValidationError("at least one method is required")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValidationError(f"unknown method(s): {', '.join(sorted(unknown))}")
        if self.repeats < 1:
            raise ValidationError("repeats must be at least 1")
        if self.corrupt_sigma < 0:
            raise ValidationError("corrupt_sigma must be non-negative")


@dataclass
class MethodMetrics:
    accuracies: list
    iterations: list
    wall_times: list

    @property
    def mean(self):
        return float(np.mean(self.accuracies))

    @property
    def std(self):
        return float(np.std(self.accuracies, ddof=1)) if len(self.accuracies) > 1 else 0.0

    @property
    def best(self):
        return float(np.max(self.accuracies))

    def to_dict(self):
        return {
            "mean": self.mean,
            "std": self.std,
            "best": self.best,
            "accuracies": [float(a) for a in self.accuracies],
            "iterations": [int(i) for i in self.iterations],
            "wall_time": float(np.sum(self.wall_times)),
            "wall_times": [float(t) for t in self.wall_times],
        }


@dataclass
class MetricsReport:
    dataset: str
    seeds: list
    methods: dict
    config: dict

    def to_dict(self):
        return {
            "dataset": self.dataset,
            "seeds": [int(s) for s in self.seeds],
            "methods": {k: v.to_dict() for k, v in self.methods.items()},
            "config": self.config,
        }

    def to_json(self, drop_timing=False):
        d = self.to_dict()
        if drop_timing:
            d = strip_timing(d)
        return json.dumps(d, sort_keys=True, indent=2)


def strip_timing(obj):
    """Copy of a report dict without wall-clock fields."""
    if isinstance(obj, dict):
        return {k: strip_timing(v) for k, v in obj.items() if k not in TIMING_KEYS}
    if isinstance(obj, list):
        return [strip_timing(v) for v in obj]
    return obj


def thread_count():
    raw = os.environ.get("TMR_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValidationError(f"TMR_THREADS must be an integer, got {raw!r}") from None


def _derive(seed, stream):
    return int(np.random.SeedSequence([int(seed), stream]).generate_state(1)[0])


def preprocess_features(dataset, spec, seed):
    if spec in (None, "", "none"):
        return dataset.X
    kind, _, arg = spec.partition(":")
    try:
        d = int(arg)
    except ValueError:
        raise ValidationError(f"bad preprocess spec {spec!r}") from None
    if kind == "pca":
        return pca_reduce(dataset.X, d)
    if kind == "rp":
        return random_projection(dataset.X, d, seed=_derive(seed, 2))
    raise ValidationError(f"bad preprocess spec {spec!r}")


def propagate(method, X, Y, labeled_idx, solver=None, mu=DEFAULT_MU):
    """Soft labels from one method; returns ``(F, iterations, model_or_None)``."""
    solver = solver or alptmr.SolverConfig()
    if method == "alptmr":
        model = alptmr.fit(X, Y, solver)
        return model.F_clean, model.n_iter, model
    W = baseline_graph(X, solver.K, solver.reg)
    if method == "gfhf":
        return gfhf(W, Y, labeled_idx), 0, None
    if method == "llgc":
        return llgc(W, Y, mu), 0, None
    raise ValidationError(f"unknown method {method!r}")


def prepare_run(dataset, X, config, run):
    """Split and (optionally) corrupt for run index ``run``."""
    run_seed = config.seed ^ run
    labeled, unlabeled = split(dataset.labels,
                               SplitSpec(config.labeled_per_class, _derive(run_seed, 0)))
    Xr = X
    if config.corrupt_sigma > 0:
        sd = config.corrupt_sigma * X.std(axis=1)
        spec = CorruptionSpec(sd ** 2, config.corrupt_fraction, _derive(run_seed, 1))
        Xr = corrupt_gaussian(X, labeled, spec)
    Y = one_hot_Y(dataset.labels, labeled, dataset.class_count)
    return run_seed, labeled, unlabeled, Xr, Y


def _single_run(dataset, X, config, run):
    run_seed, labeled, unlabeled, Xr, Y = prepare_run(dataset, X, config, run)
    out = {}
    try:
        for method in config.methods:
            t0 = time.perf_counter()
            F, iters, model = propagate(method, Xr, Y, labeled, config.solver, config.mu)
            pred = predict_labels(F[:, unlabeled])
            acc = float(np.mean(pred == dataset.labels[unlabeled]))
            out[method] = (acc, iters, time.perf_counter() - t0, model)
    except TmrError as exc:
        raise type(exc)(f"run {run} (seed {run_seed}) failed: {exc}") from exc
    return run_seed, out


def _write_trace(path, model):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sweep", "objective", "f_delta"])
        w.writerow([0, repr(float(model.initial_objective)), ""])
        for t, (obj, df) in enumerate(zip(model.objective_trace, model.f_delta_trace), 1):
            w.writerow([t, repr(float(obj)), repr(float(df))])


def run_experiment(config, dataset=None, write=True):
    """Evaluate every method on ``config.repeats`` paired random splits.

    Accuracy is measured on the unlabeled samples only.  With ``write`` and
    ``config.out`` set, ``report.json`` and per-run convergence traces are
    written there.
    """
    dataset = dataset if dataset is not None else parse_dataset(config.dataset)
    X = preprocess_features(dataset, config.preprocess, config.seed)
    runs = range(config.repeats)
    workers = min(thread_count(), config.repeats)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda r: _single_run(dataset, X, config, r), runs))
    else:
        results = [_single_run(dataset, X, config, r) for r in runs]

    methods = {}
    for method in config.methods:
        methods[method] = MethodMetrics(
            accuracies=[res[method][0] for _, res in results],
            iterations=[res[method][1] for _, res in results],
            wall_times=[res[method][2] for _, res in results],
        )
    report = MetricsReport(
        dataset=getattr(dataset, "name", str(config.dataset)),
        seeds=[seed for seed, _ in results],
        methods=methods,
        config=config_to_dict(config),
    )
    if write and config.out:
        out = Path(config.out)
        (out / "traces").mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(report.to_json() + "\n")
        for r, (_, res) in enumerate(results):
            model = res.get("alptmr", (None,) * 4)[3]
            if model is not None:
                _write_trace(out / "traces" / f"alptmr_run{r}.csv", model)
    return report


def config_to_dict(config):
    d = asdict(config)
    d["methods"] = list(config.methods)
    d.pop("out", None)
    return d


# ------------------------------------------------------------ grid search

def grid_cells(base, param_grid=None, fixed=None):
    """Cells of the fix-one-tune-two protocol.

    For each of alpha, beta and gamma in turn, that parameter is held at its
    value in ``fixed`` (default: ``base``) while the other two range over
    ``param_grid``.  Duplicates are removed, first occurrence wins.
    """
    names = ("alpha", "beta", "gamma")
    grid = {n: ODD_POWERS for n in names}
    grid.update(param_grid or {})
    fixed = {n: getattr(base, n) for n in names} | dict(fixed or {})
    cells, seen = [], set()
    for pinned in names:
        free = [n for n in names if n != pinned]
        for v0 in grid[free[0]]:
            for v1 in grid[free[1]]:
                cell = {pinned: fixed[pinned], free[0]: v0, free[1]: v1}
                key = tuple(float(cell[n]) for n in names)
                if key not in seen:
                    seen.add(key)
                    cells.append({n: cell[n] for n in names})
    return cells


def grid_search(config, param_grid=None, cells=None, fixed=None, dataset=None):
    """Pick the solver setting with the best mean unlabeled accuracy.

    Parameters
    ----------
    config : ExperimentConfig
        Base experiment; only the ALP-TMR solver is evaluated.
    param_grid : dict, optional
        Candidate values per parameter (default: 1e-8, 1e-6, ..., 1e8).
    cells : list of dict, optional
        Explicit solver overrides to evaluate instead of the protocol grid.
    fixed : dict, optional
        Values to pin each parameter at while the other two are tuned.

    Returns
    -------
    best : SolverConfig
    table : list of dict
        One row per evaluated cell.
    """
    dataset = dataset if dataset is not None else parse_dataset(config.dataset)
    if cells is None:
        cells = grid_cells(config.solver, param_grid, fixed)
    if not cells:
        raise ValidationError("empty grid")
    table = []
    for cell in cells:
        solver = config.solver.replace(**cell)
        sub = ExperimentConfig(**{**_shallow(config), "solver": solver,
                                  "methods": ("alptmr",), "out": None})
        rep = run_experiment(sub, dataset=dataset, write=False)
        m = rep.methods["alptmr"]
        table.append({**{k: cell[k] for k in sorted(cell)},
                      "alpha": solver.alpha, "beta": solver.beta, "gamma": solver.gamma,
                      "mean": m.mean, "std": m.std, "best": m.best})
    # highest mean; ties -> lexicographically smaller (alpha, beta, gamma)
    order = sorted(range(len(table)), key=lambda i: (
        -table[i]["mean"], table[i]["alpha"], table[i]["beta"], table[i]["gamma"]))
    best = config.solver.replace(**cells[order[0]])
    if config.out:
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_rows(out / "grid.csv", table)
        (out / "best.json").write_text(json.dumps(asdict(best), sort_keys=True, indent=2) + "\n")
    return best, table


def _shallow(config):
    return {f: getattr(config, f) for f in config.__dataclass_fields__}


def _write_rows(path, rows):
    keys = list(rows[0])
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        for row in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})


# --------------------------------------------------------------- ablation

ABLATIONS = (("full", {}), ("alpha=0", {"alpha": 0.0}),
             ("beta=0", {"beta": 0.0}), ("gamma=0", {"gamma": 0.0}))


def ablation(config, dataset=None):
    """Full model against alpha=0, beta=0 and gamma=0 on shared splits."""
    dataset = dataset if dataset is not None else parse_dataset(config.dataset)
    rows = []
    for name, change in ABLATIONS:
        solver = config.solver.replace(**change)
        sub = ExperimentConfig(**{**_shallow(config), "solver": solver,
                                  "methods": ("alptmr",), "out": None})
        m = run_experiment(sub, dataset=dataset, write=False).methods["alptmr"]
        rows.append({"variant": name, "alpha": solver.alpha, "beta": solver.beta,
                     "gamma": solver.gamma, "mean": m.mean, "std": m.std,
                     "best": m.best, "accuracies": list(m.accuracies)})
    if config.out:
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_rows(out / "ablation.csv",
                    [{k: v for k, v in r.items() if k != "accuracies"} for r in rows])
    return rows


# ------------------------------------------------------------ inspection

def inter_class_mass(W, labels):
    """Share of off-diagonal ``|W|`` joining samples of different classes."""
    W = np.abs(np.asarray(W, dtype=float))
    labels = np.asarray(labels)
    if W.shape != (labels.size, labels.size):
        raise ValidationError("W and labels disagree in size")
    W = W.copy()
    np.fill_diagonal(W, 0.0)
    total = W.sum()
    if total == 0:
        return 0.0
    cross = labels[:, None] != labels[None, :]
    return float(W[cross].sum() / total)


DUMP_FILES = ("F", "F_clean", "E_F", "W", "W_clean", "E_W")


def _write_matrix(path, M):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for row in np.atleast_2d(M):
            w.writerow([repr(float(v)) for v in row])


def read_matrix(path):
    with open(path, newline="") as fh:
        return np.array([[float(v) for v in row] for row in csv.reader(fh) if row])


def dump_matrices(model, labels, directory):
    """Write the label and weight decompositions as CSV grids plus a summary."""
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        paths = []
        for name in DUMP_FILES:
            p = directory / f"{name}.csv"
            _write_matrix(p, getattr(model, name))
            paths.append(p)
        summary = {
            "inter_class_mass": {
                "W_init": inter_class_mass(model.W_init, labels),
                "W": inter_class_mass(model.W, labels),
                "W_clean": inter_class_mass(model.W_clean, labels),
                "E_W": inter_class_mass(model.E_W, labels),
            },
            "negative_entries": {
                "F": int(np.sum(model.F < 0)),
                "F_clean": int(np.sum(model.F_clean < 0)),
            },
            "shapes": {name: list(np.shape(getattr(model, name))) for name in DUMP_FILES},
            **model.diagnostics(),
        }
        p = directory / "summary.json"
        p.write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")
        paths.append(p)
    except OSError as exc:
        raise OSError(f"cannot write matrices to {directory}: {exc}") from exc
    return paths
