"""Iris and Wine dataset loading, validation, scaling, and splitting.

Input files follow the UCI layouts: Iris rows are four floats and a class
name; Wine rows are a 1-based class index followed by thirteen floats.
Features are min-max scaled per column to [0, pi] so each one drives a
monotone <Z> = cos(angle) response when angle-embedded. Splits are
stratified 80/20.
"""
from __future__ import annotations

import hashlib
import urllib.request
from dataclasses import dataclass
from pathlib import Path

import numpy as np

PI = np.pi

IRIS_CLASS_NAMES = ("Iris-setosa", "Iris-versicolor", "Iris-virginica")
IRIS_EXPECTED_COUNTS = (50, 50, 50)
WINE_CLASS_NAMES = ("class-1", "class-2", "class-3")
WINE_EXPECTED_COUNTS = (59, 71, 48)

SCHEMAS = ("iris", "wine")

UCI_URLS = {
    "iris": "https://archive.ics.uci.edu/ml/machine-learning-databases/iris/iris.data",
    "wine": "https://archive.ics.uci.edu/ml/machine-learning-databases/wine/wine.data",
}


class DatasetIntegrityError(ValueError):
    """Loaded data does not match the declared dataset's shape or class mix."""


@dataclass
class FeatureScaling:
    """Per-column min-max constants mapping raw values onto [0, pi]."""

    col_min: np.ndarray
    col_max: np.ndarray

    def apply(self, features: np.ndarray) -> np.ndarray:
        # divide before multiplying so column min/max land on 0 and pi exactly
        span = self.col_max - self.col_min
        return PI * ((features - self.col_min) / span)


@dataclass
class Dataset:
    name: str
    features: np.ndarray
    labels: np.ndarray
    class_names: tuple[str, ...]
    scaling: FeatureScaling | None = None

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)


@dataclass
class SplitIndices:
    train: np.ndarray
    validation: np.ndarray


def _expected(schema: str):
    if schema == "iris":
        return IRIS_CLASS_NAMES, IRIS_EXPECTED_COUNTS, 4
    if schema == "wine":
        return WINE_CLASS_NAMES, WINE_EXPECTED_COUNTS, 13
    raise ValueError(f"unknown schema {schema!r}; expected one of {SCHEMAS}")


def load_csv(path, schema: str) -> Dataset:
    """Parse and validate a UCI-format CSV file."""
    class_names, expected_counts, n_feat = _expected(schema)
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset file not found: {path}")

    rows: list[list[float]] = []
    labels: list[int] = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        try:
            if schema == "iris":
                if len(parts) != n_feat + 1:
                    raise ValueError(f"expected {n_feat + 1} fields, got {len(parts)}")
                values = [float(x) for x in parts[:n_feat]]
                labels.append(class_names.index(parts[n_feat]))
            else:
                if len(parts) != n_feat + 1:
                    raise ValueError(f"expected {n_feat + 1} fields, got {len(parts)}")
                cls = int(parts[0])
                if not 1 <= cls <= 3:
                    raise ValueError(f"class index {cls} outside 1..3")
                labels.append(cls - 1)
                values = [float(x) for x in parts[1:]]
        except ValueError as exc:
            raise DatasetIntegrityError(f"{path}:{lineno}: malformed row ({exc})")
        rows.append(values)

    dataset = Dataset(
        name=schema,
        features=np.array(rows, dtype=np.float64),
        labels=np.array(labels, dtype=np.int64),
        class_names=class_names,
    )
    _validate(dataset, expected_counts, path)
    return dataset


def _validate(dataset: Dataset, expected_counts, path) -> None:
    total = sum(expected_counts)
    if dataset.n_samples != total:
        raise DatasetIntegrityError(
            f"{path}: expected {total} rows for {dataset.name}, "
            f"found {dataset.n_samples}"
        )
    counts = np.bincount(dataset.labels, minlength=len(expected_counts))
    if tuple(counts) != tuple(expected_counts):
        raise DatasetIntegrityError(
            f"{path}: class counts {tuple(counts)} != expected {expected_counts}"
        )


def save_csv(dataset: Dataset, path) -> None:
    """Write back in the same UCI layout (round-trips exactly via repr)."""
    lines = []
    for row, label in zip(dataset.features, dataset.labels):
        feats = ",".join(repr(float(v)) for v in row)
        if dataset.name == "iris":
            lines.append(f"{feats},{dataset.class_names[label]}")
        else:
            lines.append(f"{int(label) + 1},{feats}")
    Path(path).write_text("\n".join(lines) + "\n")


def scale_features(dataset: Dataset) -> Dataset:
    """Min-max scale each feature column onto [0, pi]."""
    col_min = dataset.features.min(axis=0)
    col_max = dataset.features.max(axis=0)
    degenerate = np.nonzero(col_max <= col_min)[0]
    if degenerate.size:
        raise DatasetIntegrityError(
            f"constant feature column(s) {degenerate.tolist()} cannot be scaled"
        )
    scaling = FeatureScaling(col_min, col_max)
    return Dataset(
        name=dataset.name,
        features=scaling.apply(dataset.features),
        labels=dataset.labels.copy(),
        class_names=dataset.class_names,
        scaling=scaling,
    )


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def stratified_split(
    dataset: Dataset, train_fraction: float = 0.8, seed: int = 0
) -> SplitIndices:
    """Per-class shuffled split at round(train_fraction * class_count)."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    rng = np.random.default_rng(seed)
    train_parts, val_parts = [], []
    for c in range(dataset.n_classes):
        idx = np.nonzero(dataset.labels == c)[0]
        if idx.size < 2:
            raise ValueError(f"class {c} has {idx.size} samples; need >= 2")
        idx = rng.permutation(idx)
        cut = _round_half_up(train_fraction * idx.size)
        train_parts.append(idx[:cut])
        val_parts.append(idx[cut:])
    return SplitIndices(
        train=np.concatenate(train_parts), validation=np.concatenate(val_parts)
    )


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(path, entries: dict) -> None:
    """Plain-text key=value manifest, one entry per line."""
    lines = [f"{key}={value}" for key, value in entries.items()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_manifest(path) -> dict:
    entries = {}
    for line in Path(path).read_text().splitlines():
        if line and "=" in line:
            key, value = line.split("=", 1)
            entries[key] = value
    return entries


def dataset_manifest_entries(
    csv_path, dataset: Dataset, split_seed: int, split: SplitIndices
) -> dict:
    """Checksum, per-column scaling constants, split seed, and index lists."""
    if dataset.scaling is None:
        raise ValueError("dataset must be scaled before writing a manifest")
    entries = {
        "dataset": dataset.name,
        "csv_path": str(csv_path),
        "csv_sha256": sha256_file(csv_path),
    }
    for j in range(dataset.n_features):
        entries[f"scale_min_{j}"] = repr(float(dataset.scaling.col_min[j]))
        entries[f"scale_max_{j}"] = repr(float(dataset.scaling.col_max[j]))
    entries["split_seed"] = split_seed
    entries["train_indices"] = ",".join(str(i) for i in split.train)
    entries["val_indices"] = ",".join(str(i) for i in split.validation)
    return entries


# --- acquisition ----------------------------------------------------------


def dataset_path(data_dir, name: str) -> Path:
    return Path(data_dir) / f"{name}.data"


def _materialize_from_sklearn(name: str, dest: Path) -> None:
    # offline fallback: scikit-learn bundles the canonical UCI tables
    if name == "iris":
        from sklearn.datasets import load_iris

        raw = load_iris()
        ds = Dataset(
            "iris", raw.data.astype(np.float64), raw.target.astype(np.int64),
            IRIS_CLASS_NAMES,
        )
    else:
        from sklearn.datasets import load_wine

        raw = load_wine()
        ds = Dataset(
            "wine", raw.data.astype(np.float64), raw.target.astype(np.int64),
            WINE_CLASS_NAMES,
        )
    save_csv(ds, dest)


def fetch_dataset(name: str, data_dir, timeout: float = 10.0) -> Path:
    """Download the canonical UCI file (or materialize the bundled copy when
    offline), then verify row counts by loading it."""
    if name not in SCHEMAS:
        raise ValueError(f"unknown dataset {name!r}; expected one of {SCHEMAS}")
    data_dir = Path(data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    dest = dataset_path(data_dir, name)
    if not dest.exists():
        try:
            with urllib.request.urlopen(UCI_URLS[name], timeout=timeout) as resp:
                dest.write_bytes(resp.read())
        except Exception:
            _materialize_from_sklearn(name, dest)
    load_csv(dest, name)  # integrity check
    return dest
