"""Datasets, splits, label encoding, corruption and feature preprocessing.

Data matrices are stored with one sample per column, shape
``(n_features, n_samples)``.  CSV files store one sample per row and are
transposed on load.
"""

import csv
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.datasets import make_moons

from .exceptions import ClassTooSmall, LabelError, ParseError, ValidationError

BINARY_MAGIC = b"TMR1"


@dataclass
class Dataset:
    """Feature matrix plus dense integer labels.

    ``classes`` maps a dense label back to the value found in the source.
    """

    X: np.ndarray
    labels: np.ndarray
    class_count: int
    name: str = "dataset"
    classes: np.ndarray = field(default=None)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.labels = np.asarray(self.labels, dtype=int)
        if self.X.ndim != 2 or self.X.shape[1] == 0:
            raise ValidationError("dataset needs a non-empty 2-D feature matrix")
        if self.labels.shape != (self.X.shape[1],):
            raise ValidationError("one label per sample is required")
        if self.labels.min() < 0 or self.labels.max() >= self.class_count:
            raise ValidationError("labels must lie in [0, class_count)")
        if self.classes is None:
            self.classes = np.arange(self.class_count)

    @property
    def n_features(self):
        return self.X.shape[0]

    @property
    def n_samples(self):
        return self.X.shape[1]


@dataclass(frozen=True)
class SplitSpec:
    labeled_per_class: int
    seed: int = 0


@dataclass(frozen=True)
class CorruptionSpec:
    """Additive Gaussian noise on a random subset of the labeled samples.

    ``variance`` is in absolute feature units; it may also be a per-feature
    vector.
    """

    variance: object
    fraction_of_labeled: float = 0.5
    seed: int = 0


# ---------------------------------------------------------------- file I/O

def load_csv(path, name=None):
    """Read ``feature_0,...,feature_{n-1},label`` rows into a :class:`Dataset`.

    Labels must be integers; they are remapped to ``0..c-1`` in increasing
    order and the original values are kept in ``Dataset.classes``.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file", row=1) from None
        header = [h.strip() for h in header]
        n = len(header) - 1
        expected = [f"feature_{i}" for i in range(n)] + ["label"]
        if n < 1 or header != expected:
            raise ParseError(f"{path}: header must be feature_0..feature_{{n-1}},label",
                             row=1)
        feats, raw_labels = [], []
        for rowno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != n + 1:
                raise ParseError(f"{path}: expected {n + 1} fields, got {len(row)}",
                                 row=rowno)
            values = []
            for col, cell in enumerate(row[:n], start=1):
                try:
                    v = float(cell)
                except ValueError:
                    raise ParseError(f"{path}: not a number: {cell!r}",
                                     row=rowno, column=col) from None
                if not np.isfinite(v):
                    raise ParseError(f"{path}: non-finite value", row=rowno, column=col)
                values.append(v)
            cell = row[n].strip()
            try:
                lab = int(cell)
            except ValueError:
                try:
                    as_float = float(cell)
                except ValueError:
                    as_float = None
                if as_float is None or not as_float.is_integer():
                    raise LabelError(
                        f"{path}: label {cell!r} is not an integer (row {rowno})") from None
                lab = int(as_float)
            feats.append(values)
            raw_labels.append(lab)
    if not feats:
        raise ParseError(f"{path}: no samples", row=2)
    classes, dense = np.unique(np.asarray(raw_labels), return_inverse=True)
    return Dataset(np.asarray(feats).T, dense, len(classes),
                   name=name or path.stem, classes=classes)


def save_csv(dataset, path):
    """Write a dataset in the format read by :func:`load_csv`.

    Floats are written with ``repr`` so a round trip is bit-exact.  Labels are
    written as their original values.
    """
    path = Path(path)
    n = dataset.n_features
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"feature_{i}" for i in range(n)] + ["label"])
        orig = np.asarray(dataset.classes)[dataset.labels]
        for j in range(dataset.n_samples):
            writer.writerow([repr(float(v)) for v in dataset.X[:, j]] + [int(orig[j])])


def save_binary(dataset, path):
    """``TMR1`` container: magic, u32 n, N, c, row-major f64 X, u32 labels."""
    n, N = dataset.X.shape
    with Path(path).open("wb") as fh:
        fh.write(BINARY_MAGIC)
        fh.write(struct.pack("<III", n, N, dataset.class_count))
        fh.write(np.ascontiguousarray(dataset.X, dtype="<f8").tobytes())
        fh.write(np.asarray(dataset.labels, dtype="<u4").tobytes())


def load_binary(path, name=None):
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] != BINARY_MAGIC:
        raise ParseError(f"{path}: bad magic bytes")
    if len(raw) < 16:
        raise ParseError(f"{path}: truncated header")
    n, N, c = struct.unpack("<III", raw[4:16])
    need = 16 + 8 * n * N + 4 * N
    if len(raw) != need:
        raise ParseError(f"{path}: expected {need} bytes, found {len(raw)}")
    X = np.frombuffer(raw, dtype="<f8", count=n * N, offset=16).reshape(n, N)
    labels = np.frombuffer(raw, dtype="<u4", count=N, offset=16 + 8 * n * N)
    return Dataset(X.astype(float), labels.astype(int), int(c), name=name or path.stem)


def load_dataset(path):
    """Dispatch on suffix: ``.tmr``/``.bin`` binary, anything else CSV."""
    path = Path(path)
    if path.suffix in (".tmr", ".bin"):
        return load_binary(path)
    return load_csv(path)


# -------------------------------------------------------------- generators

def synth_blobs(c=3, per_class=30, dim=10, separation=10.0, noise_sigma=1.0, seed=0):
    """Isotropic Gaussian classes centred at ``separation * e_k``."""
    if c < 2:
        raise ValidationError("need at least two classes")
    if dim < c:
        raise ValidationError("dim must be >= c to place orthogonal class means")
    rng = np.random.default_rng(seed)
    means = np.zeros((dim, c))
    means[np.arange(c), np.arange(c)] = separation
    labels = np.repeat(np.arange(c), per_class)
    X = means[:, labels] + noise_sigma * rng.standard_normal((dim, c * per_class))
    return Dataset(X, labels, c, name="blobs")


def synth_two_moons(n=200, noise=0.0, seed=0):
    """Two interleaved unit half-circles, ``n / 2`` points each."""
    if n % 2:
        raise ValidationError("n must be even")
    X, y = make_moons(n_samples=n, shuffle=False, noise=noise or None,
                      random_state=seed)
    return Dataset(X.T, y, 2, name="moons")


# ----------------------------------------------------------- splits/labels

def split(labels, spec):
    """Sample ``labeled_per_class`` labeled indices per class.

    Returns sorted ``(labeled_idx, unlabeled_idx)``.
    """
    labels = np.asarray(labels, dtype=int)
    k = int(spec.labeled_per_class)
    if k < 1:
        raise ValidationError("labeled_per_class must be at least 1")
    rng = np.random.default_rng(spec.seed)
    chosen = []
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        if k >= members.size:
            raise ClassTooSmall(
                f"class {cls} has {members.size} samples, cannot label {k}")
        chosen.append(rng.choice(members, size=k, replace=False))
    labeled = np.sort(np.concatenate(chosen))
    mask = np.ones(labels.size, dtype=bool)
    mask[labeled] = False
    return labeled, np.flatnonzero(mask)


def one_hot_Y(labels, labeled_idx, c):
    labels = np.asarray(labels, dtype=int)
    labeled_idx = np.asarray(labeled_idx, dtype=int)
    Y = np.zeros((c, labels.size))
    Y[labels[labeled_idx], labeled_idx] = 1.0
    return Y


def build_U(labeled_idx, N, u_l=1.0, u_u=0.0):
    """Diagonal of the fitness-weight matrix as a length-``N`` vector."""
    if u_l < 0 or u_u < 0:
        raise ValidationError("fitness weights must be non-negative")
    U = np.full(N, float(u_u))
    U[np.asarray(labeled_idx, dtype=int)] = float(u_l)
    return U


# ------------------------------------------------------------- corruption

def corrupt_gaussian(X, labeled_idx, spec):
    """Add ``N(0, variance)`` noise to a random subset of labeled columns.

    The subset has ``round(fraction_of_labeled * len(labeled_idx))`` columns.
    Every other column is returned bit-identical.
    """
    X = np.array(X, dtype=float)
    labeled_idx = np.asarray(labeled_idx, dtype=int)
    frac = float(spec.fraction_of_labeled)
    if not 0.0 <= frac <= 1.0:
        raise ValidationError("fraction_of_labeled must lie in [0, 1]")
    var = np.asarray(spec.variance, dtype=float)
    if np.any(var < 0):
        raise ValidationError("variance must be non-negative")
    count = int(round(frac * labeled_idx.size))
    if count == 0 or not np.any(var > 0):
        return X
    rng = np.random.default_rng(spec.seed)
    cols = np.sort(rng.choice(labeled_idx, size=count, replace=False))
    sd = np.sqrt(var)
    if sd.ndim == 1:
        sd = sd[:, None]
    X[:, cols] += sd * rng.standard_normal((X.shape[0], count))
    return X


# ------------------------------------------------------------ projections

def random_projection(X, d, seed=0):
    """Project with ``R`` of shape ``(d, n)``, entries i.i.d. ``N(0, 1/d)``."""
    if d < 1:
        raise ValidationError("target dimension must be at least 1")
    X = np.asarray(X, dtype=float)
    rng = np.random.default_rng(seed)
    R = rng.standard_normal((d, X.shape[0])) / np.sqrt(d)
    return R @ X


def pca_reduce(X, d, return_model=False):
    """Project centred data on the top ``d`` covariance eigenvectors.

    Each direction's sign is chosen so its largest-magnitude entry is
    positive.  With ``return_model`` the components ``(n, d)``, the mean
    ``(n, 1)`` and the eigenvalues are returned as well.
    """
    X = np.asarray(X, dtype=float)
    n, N = X.shape
    if not 1 <= d <= min(n, N):
        raise ValidationError(f"d must lie in [1, {min(n, N)}]")
    mean = X.mean(axis=1, keepdims=True)
    Xc = X - mean
    cov = Xc @ Xc.T / N
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals, kind="stable")[::-1][:d]
    evals, comps = evals[order], evecs[:, order]
    pivot = np.argmax(np.abs(comps), axis=0)
    signs = np.sign(comps[pivot, np.arange(d)])
    signs[signs == 0] = 1.0
    comps = comps * signs
    Z = comps.T @ Xc
    if return_model:
        return Z, comps, mean, evals
    return Z
