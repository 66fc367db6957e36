"""Cross-entropy training loop: Adam with coupled L2 weight decay over the
raw parameter vector, mini-batch gradients from the adjoint engine.

Raw parameters are updated unbounded; re-mapping happens only inside the
forward/gradient evaluation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .gradients import PROB_FLOOR, Gradient, batch_loss_gradient
from .model import (
    ClassifierConfig,
    ClassifierParams,
    check_params,
    forward_batch,
    param_count,
)
from .remap import RemapKind

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

INIT_RANGE = 0.01  # thetas start uniform in [-INIT_RANGE, INIT_RANGE]

METRICS_HEADER = "run_id,seed,remap,epoch,samples_seen,train_loss,val_loss,val_accuracy"


class NonFiniteGradientError(RuntimeError):
    pass


class NonFiniteLossError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    model: ClassifierConfig
    learning_rate: float
    weight_decay: float
    batch_size: int
    n_epochs: int
    seed: int

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.weight_decay < 0:
            raise ValueError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.n_epochs < 1:
            raise ValueError(f"n_epochs must be >= 1, got {self.n_epochs}")
        if self.seed < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed}")

    @property
    def remap(self) -> RemapKind:
        return self.model.remap


@dataclass
class AdamState:
    first_moment: np.ndarray
    second_moment: np.ndarray
    step_count: int = 0


def init_adam(n_params: int) -> AdamState:
    return AdamState(np.zeros(n_params), np.zeros(n_params), 0)


@dataclass
class MetricsRecord:
    run_id: str
    seed: int
    remap: str
    epoch: int
    samples_seen: int
    train_loss: float
    val_loss: float
    val_accuracy: float

    def to_csv_row(self) -> str:
        return (
            f"{self.run_id},{self.seed},{self.remap},{self.epoch},"
            f"{self.samples_seen},{self.train_loss!r},{self.val_loss!r},"
            f"{self.val_accuracy!r}"
        )


def cross_entropy(probs, label: int) -> float:
    """-log(probs[label]), with the probability clamped at 1e-12."""
    p = np.asarray(probs, dtype=np.float64)
    label = int(label)
    if not 0 <= label < p.shape[-1]:
        raise ValueError(f"label {label} outside [0, {p.shape[-1]})")
    return float(-np.log(max(p[label], PROB_FLOOR)))


def init_params(rng: np.random.Generator, config: ClassifierConfig) -> ClassifierParams:
    """Thetas i.i.d. uniform on [-0.01, 0.01]; biases zero."""
    thetas = rng.uniform(
        -INIT_RANGE, INIT_RANGE, size=(config.n_layers, config.n_qubits, 3)
    )
    return ClassifierParams(thetas, np.zeros(config.n_classes))


def adam_step(
    params: ClassifierParams,
    grads: Gradient,
    state: AdamState,
    cfg: TrainConfig,
) -> tuple[ClassifierParams, AdamState]:
    """One bias-corrected Adam update on the raw parameter vector, with the
    L2 decay term folded into the gradient before the moment updates."""
    p = np.concatenate([params.thetas.ravel(), params.biases])
    g = grads.flat()
    if g.shape != p.shape:
        raise ValueError(f"gradient size {g.shape} != parameter size {p.shape}")
    if not np.all(np.isfinite(g)):
        bad = int(np.count_nonzero(~np.isfinite(g)))
        raise NonFiniteGradientError(
            f"{bad} non-finite gradient entries at step {state.step_count + 1}"
        )
    g = g + cfg.weight_decay * p

    t = state.step_count + 1
    m = ADAM_BETA1 * state.first_moment + (1 - ADAM_BETA1) * g
    v = ADAM_BETA2 * state.second_moment + (1 - ADAM_BETA2) * g * g
    m_hat = m / (1 - ADAM_BETA1**t)
    v_hat = v / (1 - ADAM_BETA2**t)
    p = p - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + ADAM_EPS)

    n_thetas = params.thetas.size
    new_params = ClassifierParams(
        p[:n_thetas].reshape(params.thetas.shape), p[n_thetas:]
    )
    return new_params, AdamState(m, v, t)


def evaluate(
    config: ClassifierConfig, params: ClassifierParams, features, labels
) -> tuple[float, float]:
    """(mean cross-entropy, accuracy) on a labeled set."""
    labs = np.asarray(labels, dtype=np.int64)
    probs = forward_batch(config, params, features)
    picked = np.maximum(probs[np.arange(labs.size), labs], PROB_FLOOR)
    loss = float(-np.log(picked).mean())
    accuracy = float(np.mean(probs.argmax(axis=1) == labs))
    return loss, accuracy


def fit(
    cfg: TrainConfig,
    train_features,
    train_labels,
    val_features,
    val_labels,
    run_id: str = "run",
    on_epoch: Callable[[MetricsRecord], None] | None = None,
) -> tuple[ClassifierParams, list[MetricsRecord]]:
    """Train for cfg.n_epochs, one metrics record per epoch.

    Deterministic given the config seed: the same rng drives the weight
    init and the per-epoch shuffles. Mini-batches are consecutive slices
    of the shuffled order; the final partial batch is included.
    """
    train_x = np.atleast_2d(np.asarray(train_features, dtype=np.float64))
    train_y = np.asarray(train_labels, dtype=np.int64)
    val_x = np.atleast_2d(np.asarray(val_features, dtype=np.float64))
    val_y = np.asarray(val_labels, dtype=np.int64)
    n_train = train_x.shape[0]
    if n_train == 0 or val_x.shape[0] == 0:
        raise ValueError("training and validation splits must be non-empty")
    if train_y.shape[0] != n_train or val_y.shape[0] != val_x.shape[0]:
        raise ValueError("feature/label length mismatch")

    rng = np.random.default_rng(cfg.seed)
    params = init_params(rng, cfg.model)
    state = init_adam(param_count(cfg.model))

    records: list[MetricsRecord] = []
    for epoch in range(1, cfg.n_epochs + 1):
        order = rng.permutation(n_train)
        loss_sum = 0.0
        for start in range(0, n_train, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            loss, grad = batch_loss_gradient(
                cfg.model, params, train_x[batch], train_y[batch]
            )
            if not math.isfinite(loss):
                raise NonFiniteLossError(
                    f"non-finite training loss in epoch {epoch}, "
                    f"batch starting at {start}"
                )
            loss_sum += loss * batch.size
            params, state = adam_step(params, grad, state, cfg)

        val_loss, val_accuracy = evaluate(cfg.model, params, val_x, val_y)
        record = MetricsRecord(
            run_id=run_id,
            seed=cfg.seed,
            remap=cfg.model.remap.value,
            epoch=epoch,
            samples_seen=epoch * n_train,
            train_loss=loss_sum / n_train,
            val_loss=val_loss,
            val_accuracy=val_accuracy,
        )
        records.append(record)
        if on_epoch is not None:
            on_epoch(record)
    return params, records


def write_metrics_csv(path, records: list[MetricsRecord]) -> None:
    lines = [METRICS_HEADER] + [r.to_csv_row() for r in records]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_metrics_csv(path) -> list[MetricsRecord]:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != METRICS_HEADER:
        raise ValueError(f"{path}: missing or unexpected metrics header")
    records = []
    for ln in lines[1:]:
        run_id, seed, remap, epoch, seen, tl, vl, va = ln.split(",")
        records.append(
            MetricsRecord(
                run_id=run_id,
                seed=int(seed),
                remap=remap,
                epoch=int(epoch),
                samples_seen=int(seen),
                train_loss=float(tl),
                val_loss=float(vl),
                val_accuracy=float(va),
            )
        )
    return records
