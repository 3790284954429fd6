"""Datasets, standardization, complementary-label generation and splits.

Every randomized operation takes ``seed`` as an int or a numpy Generator.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import DataError, InvalidInputError


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _features(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise InvalidInputError("features must be a 2-D array")
    if not np.all(np.isfinite(X)):
        raise InvalidInputError("features must be finite")
    return X


def _labels(y, n: int, K: int, what: str) -> np.ndarray:
    y = np.asarray(y)
    if y.shape != (n,):
        raise InvalidInputError(f"{what} must have shape ({n},)")
    if n and not np.issubdtype(y.dtype, np.integer):
        raise InvalidInputError(f"{what} must be integers")
    y = y.astype(np.int64)
    if n and (y.min() < 1 or y.max() > K):
        raise InvalidInputError(f"{what} must lie in 1..{K}")
    return y


@dataclass(frozen=True)
class LabeledDataset:
    X: np.ndarray
    y: np.ndarray
    K: int

    def __post_init__(self):
        X = _features(self.X)
        if self.K < 2:
            raise InvalidInputError("K must be >= 2")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", _labels(self.y, X.shape[0], self.K, "labels"))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def take(self, idx) -> "LabeledDataset":
        return LabeledDataset(self.X[idx], self.y[idx], self.K)

    def with_features(self, X) -> "LabeledDataset":
        return LabeledDataset(X, self.y, self.K)

    def to_csv(self, path, label_col: str = "label") -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([f"x{j + 1}" for j in range(self.d)] + [label_col])
            for row, label in zip(self.X, self.y):
                w.writerow([repr(float(v)) for v in row] + [int(label)])


@dataclass(frozen=True)
class CompDataset:
    X: np.ndarray
    ybar: np.ndarray
    K: int

    def __post_init__(self):
        X = _features(self.X)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "ybar", _labels(self.ybar, X.shape[0], self.K, "complementary labels"))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def take(self, idx) -> "CompDataset":
        return CompDataset(self.X[idx], self.ybar[idx], self.K)

    def with_features(self, X) -> "CompDataset":
        return CompDataset(X, self.ybar, self.K)


def load_csv(path, label_col: str = "label") -> LabeledDataset:
    """Read a header-row CSV with numeric features and integer labels in 1..K.

    K is the largest observed label. Errors name the offending file line.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if label_col not in header:
            raise DataError(f"{path}: no column named {label_col!r} (columns: {', '.join(header)})")
        li = header.index(label_col)
        feat_cols = [i for i in range(len(header)) if i != li]
        X, y = [], []
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataError(f"{path}: line {line}: expected {len(header)} fields, got {len(row)}")
            try:
                label = int(row[li])
            except ValueError:
                raise DataError(f"{path}: line {line}: label {row[li]!r} is not an integer") from None
            if label < 1:
                raise DataError(f"{path}: line {line}: label {label} out of range (labels start at 1)")
            feats = []
            for i in feat_cols:
                try:
                    v = float(row[i])
                except ValueError:
                    raise DataError(f"{path}: line {line}, column {header[i]!r}: "
                                    f"cannot parse {row[i]!r} as a number") from None
                if not math.isfinite(v):
                    raise DataError(f"{path}: line {line}, column {header[i]!r}: non-finite value")
                feats.append(v)
            X.append(feats)
            y.append(label)
    if not y:
        raise DataError(f"{path}: no data rows")
    K = max(y)
    if K < 2:
        raise DataError(f"{path}: need at least two classes")
    return LabeledDataset(np.array(X, dtype=np.float64).reshape(len(y), len(feat_cols)),
                          np.array(y, dtype=np.int64), K)


def select_classes(dataset: LabeledDataset, classes) -> LabeledDataset:
    """Keep rows whose label is in ``classes`` and relabel them 1..len(classes) in that order."""
    classes = [int(c) for c in classes]
    if len(set(classes)) != len(classes) or len(classes) < 2:
        raise InvalidInputError("classes must be at least two distinct labels")
    mapping = np.zeros(max(max(classes), dataset.K) + 1, dtype=np.int64)
    for new, old in enumerate(classes, start=1):
        mapping[old] = new
    keep = np.isin(dataset.y, classes)
    return LabeledDataset(dataset.X[keep], mapping[dataset.y[keep]], len(classes))


def subsample_per_class(dataset: LabeledDataset, n_train: int, n_test: int, seed):
    """Draw ``n_train`` training and ``n_test`` test rows from each class without overlap.

    Classes with fewer rows contribute what they have, train first.
    """
    rng = _rng(seed)
    tr, te = [], []
    for k in range(1, dataset.K + 1):
        idx = rng.permutation(np.flatnonzero(dataset.y == k))
        tr.append(idx[:n_train])
        te.append(idx[n_train:n_train + n_test])
    return dataset.take(np.concatenate(tr)), dataset.take(np.concatenate(te))


@dataclass(frozen=True)
class StandardizationStats:
    mean: np.ndarray
    std: np.ndarray


def standardize_fit(X) -> StandardizationStats:
    """Per-column population mean/std; std below 1e-12 is clamped to 1."""
    X = _features(X)
    if X.shape[0] < 1:
        raise InvalidInputError("cannot standardize an empty feature matrix")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std < 1e-12, 1.0, std)
    return StandardizationStats(mean, std)


def standardize_apply(stats: StandardizationStats, X) -> np.ndarray:
    return (_features(X) - stats.mean) / stats.std


def to_complementary(dataset: LabeledDataset, seed) -> CompDataset:
    """Replace each label with one drawn uniformly from the other K - 1 classes."""
    if dataset.K < 2:
        raise InvalidInputError("K must be >= 2")
    offset = _rng(seed).integers(1, dataset.K, size=dataset.n)
    ybar = (dataset.y - 1 + offset) % dataset.K + 1
    return CompDataset(dataset.X, ybar, dataset.K)


def split_train_val(dataset, fraction: float = 0.25, seed=0):
    """Seeded shuffle, then ceil((1 - fraction) * n) rows for training and the rest for validation."""
    n = dataset.n
    if n < 4:
        raise InvalidInputError("need at least 4 rows to hold out a validation set")
    if not 0.0 < fraction < 1.0:
        raise InvalidInputError("fraction must lie in (0, 1)")
    perm = _rng(seed).permutation(n)
    n_train = math.ceil(round((1.0 - fraction) * n, 9))
    return dataset.take(perm[:n_train]), dataset.take(perm[n_train:])


def split_ol_cl(dataset: LabeledDataset, K: int | None = None, seed=0):
    """Split 1:(K-1) into an ordinarily labeled part and a complementarily labeled part."""
    K = dataset.K if K is None else K
    if dataset.n < K:
        raise InvalidInputError(f"need at least K={K} rows")
    rng = _rng(seed)
    perm = rng.permutation(dataset.n)
    n_ord = dataset.n // K
    return dataset.take(perm[:n_ord]), to_complementary(dataset.take(perm[n_ord:]), rng)


def class_means(K: int, d: int, separation: float) -> np.ndarray:
    """Class centres on a circle of radius ``separation`` in the first two coordinates.

    Class k (1-based) sits at angle 2*pi*(k-1)/K; remaining coordinates are 0.
    """
    angles = 2.0 * np.pi * np.arange(K) / K
    means = np.zeros((K, d))
    means[:, 0] = separation * np.cos(angles)
    means[:, 1] = separation * np.sin(angles)
    return means


def synth_gaussian(K: int, d: int, n_per_class: int, separation: float, seed) -> LabeledDataset:
    """Balanced isotropic unit-variance Gaussian classes centred by :func:`class_means`."""
    if K < 2 or d < 2 or n_per_class < 1:
        raise InvalidInputError("need K >= 2, d >= 2 and n_per_class >= 1")
    if not math.isfinite(separation) or separation < 0:
        raise InvalidInputError("separation must be finite and nonnegative")
    rng = _rng(seed)
    means = class_means(K, d, separation)
    y = np.repeat(np.arange(1, K + 1), n_per_class)
    X = means[y - 1] + rng.standard_normal((y.size, d))
    return LabeledDataset(X, y, K)
