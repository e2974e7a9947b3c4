"""Dataset generation and loading: Gaussian blobs, spirals, CSV, and IDX files.

Synthetic sources are generated from a seed and are balanced across classes;
file sources are read strictly (malformed input raises DataError with enough
context to find the offending line or field). Standardization statistics are
always computed on the training split only.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .core import make_rng
from .errors import ConfigError, DataError

DATA_SOURCES = ("blobs", "spirals", "csv", "idx")


@dataclass(frozen=True)
class DatasetSpec:
    """Where the data comes from and how much of it to use.

    dim is the feature dimension for synthetic sources and is inferred (leave
    it 0) for file sources. n_train / n_test select a prefix of file-backed
    splits, which keeps subset experiments deterministic.
    """

    source: str
    n_classes: int
    n_train: int
    n_test: int
    dim: int = 0
    separation: float = 10.0
    normalize: bool = False
    train_data_path: str | None = None  # csv
    test_data_path: str | None = None
    train_images_path: str | None = None  # idx
    train_labels_path: str | None = None
    test_images_path: str | None = None
    test_labels_path: str | None = None

    def __post_init__(self):
        if self.source not in DATA_SOURCES:
            raise ConfigError(f"unknown data source {self.source!r}")
        if self.n_classes < 2:
            raise ConfigError("need at least 2 classes")
        if self.n_train < self.n_classes or self.n_test < self.n_classes:
            raise ConfigError("n_train and n_test must be at least n_classes")
        if self.source in ("blobs", "spirals"):
            if self.dim < 1:
                raise ConfigError(f"{self.source} needs dim >= 1")
            if self.source == "spirals" and self.dim != 2:
                raise ConfigError("spirals are two-dimensional; set dim = 2")
            if self.source == "blobs" and self.separation <= 0:
                raise ConfigError("separation must be positive")
        if self.source == "csv" and not (self.train_data_path and self.test_data_path):
            raise ConfigError("csv source needs train_data_path and test_data_path")
        if self.source == "idx" and not (
            self.train_images_path
            and self.train_labels_path
            and self.test_images_path
            and self.test_labels_path
        ):
            raise ConfigError("idx source needs images and labels paths for both splits")


@dataclass
class Dataset:
    features: np.ndarray
    labels: np.ndarray

    def __len__(self) -> int:
        return self.labels.size


def _balanced_labels(n: int, k: int) -> np.ndarray:
    counts = np.full(k, n // k)
    counts[: n % k] += 1
    return np.repeat(np.arange(k), counts)


def _blob_centers(k: int, dim: int, separation: float) -> np.ndarray:
    """Deterministic center layout with pairwise distance >= separation.

    Centers sit on a circle in the first two dimensions (on a line for
    dim = 1); the circle radius makes adjacent chords exactly separation long.
    """
    centers = np.zeros((k, dim))
    if dim == 1:
        centers[:, 0] = separation * np.arange(k)
        return centers
    radius = separation / (2.0 * math.sin(math.pi / k))
    angles = 2.0 * math.pi * np.arange(k) / k
    centers[:, 0] = radius * np.cos(angles)
    centers[:, 1] = radius * np.sin(angles)
    return centers


def _sample_blobs(rng: np.random.Generator, centers: np.ndarray, n: int) -> Dataset:
    labels = _balanced_labels(n, centers.shape[0])
    features = centers[labels] + rng.standard_normal((n, centers.shape[1]))
    perm = rng.permutation(n)
    return Dataset(features[perm], labels[perm])


def generate_blobs(spec: DatasetSpec, seed: int) -> tuple[Dataset, Dataset]:
    """Balanced isotropic unit-variance Gaussian clusters; train and test are
    disjoint draws from the same distribution."""
    rng = make_rng(seed)
    centers = _blob_centers(spec.n_classes, spec.dim, spec.separation)
    return _sample_blobs(rng, centers, spec.n_train), _sample_blobs(rng, centers, spec.n_test)


def _sample_spirals(rng: np.random.Generator, k: int, n: int) -> Dataset:
    labels = _balanced_labels(n, k)
    t = np.empty(n)
    for c in range(k):  # evenly spaced arc positions per class
        idx = np.flatnonzero(labels == c)
        t[idx] = (np.arange(idx.size) + 0.5) / idx.size
    radius = 0.5 + 2.5 * t
    theta = 2.0 * math.pi * (1.5 * t + labels / k) + 0.2 * rng.standard_normal(n)
    features = np.column_stack([radius * np.cos(theta), radius * np.sin(theta)])
    perm = rng.permutation(n)
    return Dataset(features[perm], labels[perm])


def generate_spirals(spec: DatasetSpec, seed: int) -> tuple[Dataset, Dataset]:
    """K interleaved planar spiral arms with angular jitter."""
    rng = make_rng(seed)
    return (
        _sample_spirals(rng, spec.n_classes, spec.n_train),
        _sample_spirals(rng, spec.n_classes, spec.n_test),
    )


def load_csv(path: str, n_classes: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Parse rows of comma-separated reals whose last column is an integer label."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise DataError(f"{path}: empty file")
    features, labels = [], []
    width = None
    for lineno, line in enumerate(lines, 1):
        parts = line.split(",")
        if len(parts) < 2:
            raise DataError(f"{path}: line {lineno}: expected at least 2 comma-separated fields")
        try:
            row = [float(s) for s in parts]
        except ValueError:
            raise DataError(f"{path}: line {lineno}: non-numeric field") from None
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise DataError(
                f"{path}: line {lineno}: expected {width} fields, got {len(row)}"
            )
        label = row[-1]
        if not (math.isfinite(label) and label == int(label)) or label < 0:
            raise DataError(f"{path}: line {lineno}: label must be a nonnegative integer")
        features.append(row[:-1])
        labels.append(int(label))
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if n_classes is not None and y.max() >= n_classes:
        raise DataError(f"{path}: label {int(y.max())} out of range for {n_classes} classes")
    return x, y


def _read_idx_header(data: bytes, path: str, expected_magic: int, n_dims: int) -> tuple:
    header_len = 4 * (1 + n_dims)
    if len(data) < header_len:
        raise DataError(f"{path}: truncated header")
    fields = struct.unpack(f">{1 + n_dims}I", data[:header_len])
    if fields[0] != expected_magic:
        raise DataError(f"{path}: bad magic {fields[0]}, expected {expected_magic}")
    return fields[1:]


def load_idx(images_path: str, labels_path: str) -> tuple[np.ndarray, np.ndarray]:
    """Read big-endian IDX image/label files (magic 2051 / 2049).

    Pixels are scaled to [0, 1] and flattened to (count, rows * cols).
    """
    with open(images_path, "rb") as fh:
        img_data = fh.read()
    count, rows, cols = _read_idx_header(img_data, images_path, 2051, 3)
    expected = 16 + count * rows * cols
    if len(img_data) < expected:
        raise DataError(f"{images_path}: truncated: expected {expected} bytes, got {len(img_data)}")
    if len(img_data) > expected:
        raise DataError(f"{images_path}: trailing bytes after {expected}")
    images = (
        np.frombuffer(img_data, dtype=np.uint8, count=count * rows * cols, offset=16)
        .astype(np.float64)
        .reshape(count, rows * cols)
        / 255.0
    )

    with open(labels_path, "rb") as fh:
        lab_data = fh.read()
    (lab_count,) = _read_idx_header(lab_data, labels_path, 2049, 1)
    expected = 8 + lab_count
    if len(lab_data) < expected:
        raise DataError(f"{labels_path}: truncated: expected {expected} bytes, got {len(lab_data)}")
    if len(lab_data) > expected:
        raise DataError(f"{labels_path}: trailing bytes after {expected}")
    if lab_count != count:
        raise DataError(
            f"{labels_path}: {lab_count} labels but {images_path} has {count} images"
        )
    labels = np.frombuffer(lab_data, dtype=np.uint8, offset=8).astype(np.int64)
    return images, labels


def standardize(train_x: np.ndarray, test_x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-feature zero-mean unit-variance using training-split statistics."""
    mean = train_x.mean(axis=0)
    std = train_x.std(axis=0)
    std = np.where(std == 0.0, 1.0, std)
    return (train_x - mean) / std, (test_x - mean) / std


def _subset(x: np.ndarray, y: np.ndarray, n: int, what: str) -> Dataset:
    if n > y.size:
        raise DataError(f"requested {n} {what} samples but only {y.size} available")
    return Dataset(x[:n], y[:n])


def build_dataset(spec: DatasetSpec, seed: int) -> tuple[Dataset, Dataset]:
    """Materialize the train and test splits described by spec."""
    if spec.source == "blobs":
        train, test = generate_blobs(spec, seed)
    elif spec.source == "spirals":
        train, test = generate_spirals(spec, seed)
    elif spec.source == "csv":
        tx, ty = load_csv(spec.train_data_path, spec.n_classes)
        ex, ey = load_csv(spec.test_data_path, spec.n_classes)
        if tx.shape[1] != ex.shape[1]:
            raise DataError(
                f"train has {tx.shape[1]} features but test has {ex.shape[1]}"
            )
        train = _subset(tx, ty, spec.n_train, "train")
        test = _subset(ex, ey, spec.n_test, "test")
    else:
        tx, ty = load_idx(spec.train_images_path, spec.train_labels_path)
        ex, ey = load_idx(spec.test_images_path, spec.test_labels_path)
        for y_arr, name in ((ty, "train"), (ey, "test")):
            if y_arr.max() >= spec.n_classes:
                raise DataError(
                    f"{name} label {int(y_arr.max())} out of range for {spec.n_classes} classes"
                )
        train = _subset(tx, ty, spec.n_train, "train")
        test = _subset(ex, ey, spec.n_test, "test")
    if spec.normalize:
        train_x, test_x = standardize(train.features, test.features)
        train, test = Dataset(train_x, train.labels), Dataset(test_x, test.labels)
    return train, test
