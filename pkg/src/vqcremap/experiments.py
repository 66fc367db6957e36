"""Experiment orchestration: multi-seed sweeps over re-mapping functions,
metrics aggregation with confidence intervals, gradient cross-checks, and
validation-curve plotting.
"""
from __future__ import annotations

import multiprocessing
import os
import shutil
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import (
    Dataset,
    dataset_manifest_entries,
    dataset_path,
    load_csv,
    scale_features,
    stratified_split,
    write_manifest,
)
from .gradients import loss_gradient_adjoint, loss_gradient_shift
from .model import ClassifierConfig, ClassifierParams, save_params
from .remap import RemapKind, remap_all
from .statevector import RotationAxis
from .training import (
    MetricsRecord,
    TrainConfig,
    fit,
    read_metrics_csv,
    write_metrics_csv,
)

# Per-dataset training defaults (tuned hyperparameters; see README table)
DATASET_DEFAULTS = {
    "iris": {
        "n_qubits": 4,
        "n_classes": 3,
        "n_layers": 8,
        "embedding_axis": RotationAxis.X,
        "learning_rate": 0.0201,
        "weight_decay": 0.0372,
        "batch_size": 9,
    },
    "wine": {
        "n_qubits": 13,
        "n_classes": 3,
        "n_layers": 9,
        "embedding_axis": RotationAxis.Y,
        "learning_rate": 0.0300,
        "weight_decay": 0.0007,
        "batch_size": 18,
    },
}

DEFAULT_EPOCHS = 30
DEFAULT_SEED_COUNT = {"iris": 20, "wine": 10}
TRAIN_FRACTION = 0.8

OVERRIDE_KEYS = (
    "learning_rate",
    "weight_decay",
    "batch_size",
    "n_epochs",
    "n_layers",
    "embedding_axis",
)


@dataclass
class ExperimentPlan:
    dataset: str
    remap_kinds: list[RemapKind]
    seeds: list[int]
    output_dir: Path
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dataset not in DATASET_DEFAULTS:
            raise ValueError(
                f"unknown dataset {self.dataset!r}; "
                f"expected one of {tuple(DATASET_DEFAULTS)}"
            )
        if not self.remap_kinds:
            raise ValueError("plan needs at least one remap kind")
        if not self.seeds:
            raise ValueError("plan needs at least one seed")
        if any(s < 0 for s in self.seeds):
            raise ValueError("seeds must be non-negative")
        unknown = set(self.overrides) - set(OVERRIDE_KEYS)
        if unknown:
            raise ValueError(f"unknown override(s): {sorted(unknown)}")
        self.output_dir = Path(self.output_dir)


def make_train_config(
    dataset: str, remap: RemapKind, seed: int, overrides: dict | None = None
) -> TrainConfig:
    base = dict(DATASET_DEFAULTS[dataset])
    merged = {**base, "n_epochs": DEFAULT_EPOCHS, **(overrides or {})}
    axis = merged["embedding_axis"]
    if isinstance(axis, str):
        axis = RotationAxis(axis.lower())
    model = ClassifierConfig(
        n_qubits=base["n_qubits"],
        n_layers=int(merged["n_layers"]),
        n_classes=base["n_classes"],
        embedding_axis=axis,
        remap=remap,
    )
    return TrainConfig(
        model=model,
        learning_rate=float(merged["learning_rate"]),
        weight_decay=float(merged["weight_decay"]),
        batch_size=int(merged["batch_size"]),
        n_epochs=int(merged["n_epochs"]),
        seed=seed,
    )


def run_id_for(dataset: str, remap: RemapKind, seed: int) -> str:
    return f"{dataset}-{remap.value}-s{seed:03d}"


def dataset_of_run_id(run_id: str) -> str:
    return run_id.split("-", 1)[0]


@dataclass
class RunResult:
    run_id: str
    ok: bool
    error: str = ""
    final_val_accuracy: float = float("nan")
    run_dir: str = ""


def execute_run(
    dataset: Dataset,
    csv_path,
    remap: RemapKind,
    seed: int,
    overrides: dict,
    output_dir: Path,
) -> RunResult:
    """One (remap, seed) training run; outputs land in their own directory,
    staged under a temp name and renamed on completion."""
    run_id = run_id_for(dataset.name, remap, seed)
    final_dir = Path(output_dir) / run_id
    stage_dir = Path(output_dir) / f".tmp-{run_id}-{os.getpid()}"
    cfg = make_train_config(dataset.name, remap, seed, overrides)
    split = stratified_split(dataset, TRAIN_FRACTION, seed=seed)
    try:
        params, records = fit(
            cfg,
            dataset.features[split.train],
            dataset.labels[split.train],
            dataset.features[split.validation],
            dataset.labels[split.validation],
            run_id=run_id,
        )
    except Exception as exc:
        return RunResult(run_id, ok=False, error=f"{type(exc).__name__}: {exc}")

    if stage_dir.exists():
        shutil.rmtree(stage_dir)
    stage_dir.mkdir(parents=True)
    write_metrics_csv(stage_dir / "metrics.csv", records)
    save_params(stage_dir / "checkpoint.txt", cfg.model, params)
    manifest = dataset_manifest_entries(csv_path, dataset, seed, split)
    manifest.update(
        run_id=run_id,
        remap=remap.value,
        seed=seed,
        learning_rate=repr(cfg.learning_rate),
        weight_decay=repr(cfg.weight_decay),
        batch_size=cfg.batch_size,
        n_epochs=cfg.n_epochs,
        n_layers=cfg.model.n_layers,
        embedding_axis=cfg.model.embedding_axis.value,
    )
    write_manifest(stage_dir / "manifest.txt", manifest)
    if final_dir.exists():
        shutil.rmtree(final_dir)
    os.replace(stage_dir, final_dir)
    return RunResult(
        run_id,
        ok=True,
        final_val_accuracy=records[-1].val_accuracy,
        run_dir=str(final_dir),
    )


def _run_star(args):
    return execute_run(*args)


def load_plan_dataset(plan_dataset: str, data_dir) -> tuple[Dataset, Path]:
    csv_path = dataset_path(data_dir, plan_dataset)
    raw = load_csv(csv_path, plan_dataset)
    return scale_features(raw), csv_path


def run_plan(plan: ExperimentPlan, data_dir, jobs: int = 1) -> list[RunResult]:
    """All (remap, seed) runs of the plan; independent runs, optionally in
    parallel worker processes."""
    dataset, csv_path = load_plan_dataset(plan.dataset, data_dir)
    plan.output_dir.mkdir(parents=True, exist_ok=True)
    tasks = [
        (dataset, csv_path, remap, seed, plan.overrides, plan.output_dir)
        for remap in plan.remap_kinds
        for seed in plan.seeds
    ]
    if jobs > 1 and len(tasks) > 1:
        with multiprocessing.Pool(min(jobs, len(tasks))) as pool:
            results = pool.map(_run_star, tasks)
    else:
        results = [execute_run(*task) for task in tasks]
    return results


# --- aggregation ----------------------------------------------------------


@dataclass
class AggregateRow:
    remap: str
    metric: str
    mean: float
    ci95_halfwidth: float
    n_runs: int


def _mean_ci(values: np.ndarray) -> tuple[float, float]:
    mean = float(values.mean())
    if values.size < 2:
        return mean, float("nan")
    half = 1.96 * float(values.std(ddof=1)) / float(np.sqrt(values.size))
    return mean, half


def aggregate(
    metric_files, at_samples: list[int] | None = None
) -> list[AggregateRow]:
    """Mean and 95% CI of validation accuracy per remap kind, at requested
    samples-seen checkpoints (nearest epoch boundary) and at the final epoch."""
    at_samples = list(at_samples or [])
    by_remap: dict[str, list[list[MetricsRecord]]] = {}
    for path in metric_files:
        records = read_metrics_csv(path)
        if not records:
            raise ValueError(f"{path}: empty metrics file")
        by_remap.setdefault(records[0].remap, []).append(records)

    rows: list[AggregateRow] = []
    for remap in sorted(by_remap):
        runs = by_remap[remap]
        if len(runs) < 2:
            raise ValueError(
                f"remap {remap!r} has {len(runs)} run(s); need >= 2 for a CI"
            )
        for target in at_samples:
            values = []
            for records in runs:
                seen = np.array([r.samples_seen for r in records])
                if target > seen.max():
                    raise ValueError(
                        f"checkpoint {target} beyond training length {seen.max()}"
                    )
                values.append(records[int(np.argmin(np.abs(seen - target)))].val_accuracy)
            mean, half = _mean_ci(np.array(values))
            rows.append(AggregateRow(remap, f"val_accuracy@{target}", mean, half, len(runs)))
        finals = np.array([records[-1].val_accuracy for records in runs])
        mean, half = _mean_ci(finals)
        rows.append(AggregateRow(remap, "final_val_accuracy", mean, half, len(runs)))
    return rows


def format_aggregate_table(rows: list[AggregateRow]) -> str:
    header = f"{'remap':10s} {'metric':24s} {'mean':>8s} {'ci95':>8s} {'runs':>5s}"
    lines = [header, "-" * len(header)]
    for r in rows:
        lines.append(
            f"{r.remap:10s} {r.metric:24s} {r.mean:8.4f} {r.ci95_halfwidth:8.4f} "
            f"{r.n_runs:5d}"
        )
    return "\n".join(lines)


def write_aggregate_csv(path, rows: list[AggregateRow]) -> None:
    lines = ["remap,metric,mean,ci95_halfwidth,n_runs"]
    for r in rows:
        lines.append(
            f"{r.remap},{r.metric},{r.mean!r},{r.ci95_halfwidth!r},{r.n_runs}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


# --- gradient cross-checks -------------------------------------------------


@dataclass
class GradcheckReport:
    engine_max_dev: float
    engine_tolerance: float
    fd_max_rel_dev: float
    fd_tolerance: float
    n_engine_instances: int
    n_fd_instances: int

    @property
    def passed(self) -> bool:
        return (
            self.engine_max_dev < self.engine_tolerance
            and self.fd_max_rel_dev < self.fd_tolerance
        )

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"adjoint vs parameter-shift: max |dev| = {self.engine_max_dev:.3e} "
            f"(tol {self.engine_tolerance:.0e}, {self.n_engine_instances} instances)\n"
            f"adjoint vs finite difference: max rel dev = {self.fd_max_rel_dev:.3e} "
            f"(tol {self.fd_tolerance:.0e}, {self.n_fd_instances} instances)\n"
            f"gradcheck: {status}"
        )


def _random_instance(rng: np.random.Generator, max_qubits: int, max_layers: int):
    n = int(rng.integers(2, max_qubits + 1))
    layers = int(rng.integers(1, max_layers + 1))
    k = int(rng.integers(2, min(n, 3) + 1))
    kind = list(RemapKind)[int(rng.integers(0, len(RemapKind)))]
    axis = RotationAxis.X if rng.integers(0, 2) == 0 else RotationAxis.Y
    config = ClassifierConfig(n, layers, k, axis, kind)
    thetas = rng.uniform(-2.0, 2.0, size=(layers, n, 3))
    # keep clear of the clamp kinks at +-pi and the elu kink at 0
    thetas[np.abs(np.abs(thetas) - np.pi) < 1e-2] += 0.05
    thetas[np.abs(thetas) < 1e-2] += 0.05
    params = ClassifierParams(thetas, rng.uniform(-0.5, 0.5, size=k))
    features = rng.uniform(0.0, np.pi, size=n)
    label = int(rng.integers(0, k))
    return config, params, features, label


def _loss_of(config, params, features, label) -> float:
    from .training import cross_entropy
    from .model import forward

    return cross_entropy(forward(config, params, features), label)


def gradcheck(
    n_instances: int = 50,
    fd_instances: int = 20,
    max_qubits: int = 4,
    max_layers: int = 3,
    seed: int = 12345,
    engine_tolerance: float = 1e-8,
    fd_tolerance: float = 1e-4,
    corrupt: float = 0.0,
) -> GradcheckReport:
    """Adjoint-vs-shift and finite-difference agreement over random small
    instances. `corrupt` injects a deliberate gradient offset (fault hook
    for exit-code tests)."""
    rng = np.random.default_rng(seed)
    engine_dev = 0.0
    for _ in range(n_instances):
        config, params, features, label = _random_instance(rng, max_qubits, max_layers)
        ga = loss_gradient_adjoint(config, params, features, label)
        gs = loss_gradient_shift(config, params, features, label)
        dev = float(
            max(
                np.abs(ga.d_thetas - gs.d_thetas).max(initial=0.0),
                np.abs(ga.d_biases - gs.d_biases).max(initial=0.0),
            )
        )
        engine_dev = max(engine_dev, dev + corrupt)

    # pass criterion: |adjoint - fd| <= max(fd_tolerance * |fd|, abs_floor);
    # expressed as a relative deviation by flooring the denominator
    h = 1e-5
    abs_floor = 1e-7
    fd_dev = 0.0
    for _ in range(fd_instances):
        config, params, features, label = _random_instance(rng, max_qubits, max_layers)
        ga = loss_gradient_adjoint(config, params, features, label)
        flat_ga = ga.flat()
        n_thetas = params.thetas.size
        for idx in range(flat_ga.size):
            if idx < n_thetas:
                plus, minus = params.copy(), params.copy()
                plus.thetas.ravel()[idx] += h
                minus.thetas.ravel()[idx] -= h
            else:
                plus, minus = params.copy(), params.copy()
                plus.biases[idx - n_thetas] += h
                minus.biases[idx - n_thetas] -= h
            fd = (
                _loss_of(config, plus, features, label)
                - _loss_of(config, minus, features, label)
            ) / (2 * h)
            rel = abs(flat_ga[idx] - fd) / max(abs(fd), abs_floor / fd_tolerance)
            fd_dev = max(fd_dev, rel + corrupt)

    return GradcheckReport(
        engine_max_dev=engine_dev,
        engine_tolerance=engine_tolerance,
        fd_max_rel_dev=fd_dev,
        fd_tolerance=fd_tolerance,
        n_engine_instances=n_instances,
        n_fd_instances=fd_instances,
    )


# --- plotting ---------------------------------------------------------------


def curve_data(metric_files) -> tuple[str, dict[str, tuple[np.ndarray, ...]]]:
    """Mean validation-accuracy curves vs samples seen, one per remap kind.

    Returns (dataset_name, {remap: (samples, mean, ci_halfwidth, n_runs)}).
    All metric files must come from the same dataset.
    """
    runs_by_remap: dict[str, list[list[MetricsRecord]]] = {}
    datasets = set()
    for path in metric_files:
        records = read_metrics_csv(path)
        if not records:
            raise ValueError(f"{path}: empty metrics file")
        datasets.add(dataset_of_run_id(records[0].run_id))
        runs_by_remap.setdefault(records[0].remap, []).append(records)
    if not runs_by_remap:
        raise ValueError("no metric files given")
    if len(datasets) > 1:
        raise ValueError(f"curves must share a dataset, got {sorted(datasets)}")

    curves = {}
    for remap, runs in runs_by_remap.items():
        samples = np.array([r.samples_seen for r in runs[0]])
        acc = np.array([[r.val_accuracy for r in records] for records in runs])
        if any(acc.shape[1] != samples.size for _ in runs):
            raise ValueError(f"remap {remap!r}: runs have mismatched epoch counts")
        mean = acc.mean(axis=0)
        if acc.shape[0] >= 2:
            half = 1.96 * acc.std(axis=0, ddof=1) / np.sqrt(acc.shape[0])
        else:
            half = np.zeros_like(mean)
        curves[remap] = (samples, mean, half, acc.shape[0])
    return datasets.pop(), curves


def plot_curves(metric_files, output_dir) -> tuple[Path, Path]:
    """Validation-accuracy curves with CI bands; writes a PNG and the
    underlying CSV so other plotting backends can reuse the data."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    dataset, curves = curve_data(metric_files)
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)

    fig, ax = plt.subplots(figsize=(7, 4.5))
    csv_lines = ["remap,samples_seen,mean_val_accuracy,ci95_halfwidth,n_runs"]
    for remap in sorted(curves):
        samples, mean, half, n_runs = curves[remap]
        ax.plot(samples, mean, label=remap)
        if n_runs >= 2:
            ax.fill_between(samples, mean - half, mean + half, alpha=0.2)
        for s, m_val, h_val in zip(samples, mean, half):
            csv_lines.append(f"{remap},{s},{m_val!r},{h_val!r},{n_runs}")
    ax.set_xlabel("training samples processed")
    ax.set_ylabel("validation accuracy")
    ax.set_title(f"{dataset}: validation accuracy by re-mapping")
    ax.legend()
    fig.tight_layout()

    png_path = output_dir / f"{dataset}_validation_curves.png"
    csv_path = output_dir / f"{dataset}_validation_curves.csv"
    fig.savefig(png_path, dpi=150)
    plt.close(fig)
    csv_path.write_text("\n".join(csv_lines) + "\n")
    return png_path, csv_path
