import numpy as np
import pytest

from vqcremap.data import read_manifest
from vqcremap.experiments import (
    DATASET_DEFAULTS,
    ExperimentPlan,
    aggregate,
    curve_data,
    format_aggregate_table,
    gradcheck,
    make_train_config,
    run_id_for,
    run_plan,
    write_aggregate_csv,
)
from vqcremap.model import load_params
from vqcremap.remap import RemapKind
from vqcremap.statevector import RotationAxis
from vqcremap.training import MetricsRecord, read_metrics_csv, write_metrics_csv


# --- table-driven defaults ----------------------------------------------------


def test_iris_defaults():
    cfg = make_train_config("iris", RemapKind.ARCTAN, seed=0)
    assert cfg.learning_rate == 0.0201
    assert cfg.weight_decay == 0.0372
    assert cfg.batch_size == 9
    assert cfg.model.n_layers == 8
    assert cfg.model.n_qubits == 4
    assert cfg.model.embedding_axis is RotationAxis.X
    assert cfg.n_epochs == 30


def test_wine_defaults():
    cfg = make_train_config("wine", RemapKind.TANH, seed=3)
    assert cfg.learning_rate == 0.0300
    assert cfg.weight_decay == 0.0007
    assert cfg.batch_size == 18
    assert cfg.model.n_layers == 9
    assert cfg.model.n_qubits == 13
    assert cfg.model.embedding_axis is RotationAxis.Y
    assert cfg.seed == 3


def test_overrides_apply():
    cfg = make_train_config(
        "iris",
        RemapKind.IDENTITY,
        seed=0,
        overrides={"n_epochs": 2, "learning_rate": 0.1, "embedding_axis": "y"},
    )
    assert cfg.n_epochs == 2
    assert cfg.learning_rate == 0.1
    assert cfg.model.embedding_axis is RotationAxis.Y


# --- plan validation --------------------------------------------------------------


def test_plan_validation(tmp_path):
    with pytest.raises(ValueError):
        ExperimentPlan("iris", [], [0], tmp_path)
    with pytest.raises(ValueError):
        ExperimentPlan("iris", [RemapKind.TANH], [], tmp_path)
    with pytest.raises(ValueError):
        ExperimentPlan("mnist", [RemapKind.TANH], [0], tmp_path)
    with pytest.raises(ValueError):
        ExperimentPlan("iris", [RemapKind.TANH], [0], tmp_path, {"momentum": 0.9})


# --- plan execution ------------------------------------------------------------------


@pytest.fixture(scope="module")
def small_plan_results(data_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("runs")
    plan = ExperimentPlan(
        dataset="iris",
        remap_kinds=[RemapKind.TANH, RemapKind.IDENTITY],
        seeds=[0, 1],
        output_dir=out,
        overrides={"n_epochs": 3},
    )
    results = run_plan(plan, data_dir, jobs=1)
    return out, results


def test_run_plan_outputs(small_plan_results):
    out, results = small_plan_results
    assert len(results) == 4
    assert all(r.ok for r in results)
    for r in results:
        run_dir = out / r.run_id
        assert (run_dir / "metrics.csv").exists()
        assert (run_dir / "checkpoint.txt").exists()
        assert (run_dir / "manifest.txt").exists()
        records = read_metrics_csv(run_dir / "metrics.csv")
        assert len(records) == 3
        assert records[0].samples_seen == 120
        assert records[0].run_id == r.run_id
    assert not list(out.glob(".tmp-*"))


def test_run_manifest_contents(small_plan_results):
    out, results = small_plan_results
    manifest = read_manifest(out / results[0].run_id / "manifest.txt")
    assert manifest["dataset"] == "iris"
    assert manifest["remap"] == results[0].run_id.split("-")[1]
    assert manifest["n_epochs"] == "3"
    assert float(manifest["learning_rate"]) == 0.0201
    assert len(manifest["train_indices"].split(",")) == 120


def test_run_checkpoint_loadable(small_plan_results):
    out, results = small_plan_results
    n_qubits, n_layers, n_classes, params = load_params(
        out / results[0].run_id / "checkpoint.txt"
    )
    assert (n_qubits, n_layers, n_classes) == (4, 8, 3)
    assert params.thetas.shape == (8, 4, 3)


def test_run_id_naming():
    assert run_id_for("iris", RemapKind.IDENTITY, 7) == "iris-none-s007"


def test_failed_run_reported_not_raised(data_dir, tmp_path, monkeypatch):
    # inject a failing fit; the plan must carry on and report the failure
    import vqcremap.experiments as exp

    class SyntheticError(RuntimeError):
        pass

    def failing_fit(*args, **kwargs):
        raise SyntheticError("synthetic failure")

    monkeypatch.setattr(exp, "fit", failing_fit)
    plan = ExperimentPlan("iris", [RemapKind.TANH], [0], tmp_path)
    results = run_plan(plan, data_dir, jobs=1)
    assert len(results) == 1
    assert not results[0].ok
    assert "synthetic failure" in results[0].error
    assert not (tmp_path / results[0].run_id).exists()


# --- aggregation -----------------------------------------------------------------------


def fake_metrics(tmp_path, run_id, remap, seed, accs, samples_per_epoch=120):
    records = [
        MetricsRecord(
            run_id, seed, remap, e + 1, (e + 1) * samples_per_epoch,
            1.0, 1.0, acc,
        )
        for e, acc in enumerate(accs)
    ]
    path = tmp_path / f"{run_id}.csv"
    write_metrics_csv(path, records)
    return path


def test_aggregate_matches_independent_recomputation(tmp_path):
    files = [
        fake_metrics(tmp_path, "iris-tanh-s000", "tanh", 0, [0.5, 0.7, 0.9]),
        fake_metrics(tmp_path, "iris-tanh-s001", "tanh", 1, [0.4, 0.6, 0.8]),
        fake_metrics(tmp_path, "iris-tanh-s002", "tanh", 2, [0.6, 0.8, 1.0]),
    ]
    rows = aggregate(files, at_samples=[120, 360])
    by_metric = {r.metric: r for r in rows}

    first = np.array([0.5, 0.4, 0.6])
    final = np.array([0.9, 0.8, 1.0])
    row = by_metric["val_accuracy@120"]
    assert row.mean == pytest.approx(first.mean(), abs=1e-12)
    assert row.ci95_halfwidth == pytest.approx(
        1.96 * first.std(ddof=1) / np.sqrt(3), abs=1e-12
    )
    assert row.n_runs == 3
    assert by_metric["final_val_accuracy"].mean == pytest.approx(
        final.mean(), abs=1e-12
    )
    assert by_metric["val_accuracy@360"].mean == pytest.approx(final.mean(), abs=1e-12)


def test_aggregate_zero_variance_ci(tmp_path):
    files = [
        fake_metrics(tmp_path, "iris-elu-s000", "elu", 0, [0.5, 0.5]),
        fake_metrics(tmp_path, "iris-elu-s001", "elu", 1, [0.5, 0.5]),
    ]
    rows = aggregate(files, at_samples=[240])
    assert all(r.ci95_halfwidth == 0.0 for r in rows)


def test_aggregate_requires_two_runs(tmp_path):
    files = [fake_metrics(tmp_path, "iris-tanh-s000", "tanh", 0, [0.5])]
    with pytest.raises(ValueError, match="need >= 2"):
        aggregate(files)


def test_aggregate_checkpoint_beyond_training_length(tmp_path):
    files = [
        fake_metrics(tmp_path, "iris-tanh-s000", "tanh", 0, [0.5, 0.6]),
        fake_metrics(tmp_path, "iris-tanh-s001", "tanh", 1, [0.5, 0.6]),
    ]
    with pytest.raises(ValueError, match="beyond"):
        aggregate(files, at_samples=[480])


def test_aggregate_nearest_epoch_boundary(tmp_path):
    # wine-style epochs: 142 samples each; 568 = epoch 4 exactly
    files = [
        fake_metrics(
            tmp_path, "wine-tanh-s000", "tanh", 0,
            [0.1, 0.2, 0.3, 0.4, 0.5], samples_per_epoch=142,
        ),
        fake_metrics(
            tmp_path, "wine-tanh-s001", "tanh", 1,
            [0.1, 0.2, 0.3, 0.4, 0.5], samples_per_epoch=142,
        ),
    ]
    rows = aggregate(files, at_samples=[568])
    assert rows[0].metric == "val_accuracy@568"
    assert rows[0].mean == pytest.approx(0.4)  # epoch 4 of 5


def test_aggregate_table_and_csv(tmp_path):
    files = [
        fake_metrics(tmp_path, "iris-tanh-s000", "tanh", 0, [0.5, 0.7]),
        fake_metrics(tmp_path, "iris-tanh-s001", "tanh", 1, [0.4, 0.6]),
    ]
    rows = aggregate(files, at_samples=[120])
    table = format_aggregate_table(rows)
    assert "val_accuracy@120" in table and "tanh" in table
    out = tmp_path / "table.csv"
    write_aggregate_csv(out, rows)
    lines = out.read_text().splitlines()
    assert lines[0] == "remap,metric,mean,ci95_halfwidth,n_runs"
    assert len(lines) == 1 + len(rows)


# --- curves ---------------------------------------------------------------------------


def test_curve_data_rejects_mixed_datasets(tmp_path):
    files = [
        fake_metrics(tmp_path, "iris-tanh-s000", "tanh", 0, [0.5]),
        fake_metrics(tmp_path, "wine-tanh-s000", "tanh", 0, [0.5]),
    ]
    with pytest.raises(ValueError, match="share a dataset"):
        curve_data(files)


def test_curve_data_single_run_has_zero_band(tmp_path):
    files = [fake_metrics(tmp_path, "iris-tanh-s000", "tanh", 0, [0.5, 0.7])]
    dataset, curves = curve_data(files)
    assert dataset == "iris"
    samples, mean, half, n_runs = curves["tanh"]
    np.testing.assert_array_equal(samples, [120, 240])
    np.testing.assert_array_equal(mean, [0.5, 0.7])
    np.testing.assert_array_equal(half, [0.0, 0.0])
    assert n_runs == 1


def test_plot_writes_png_and_csv(tmp_path):
    from vqcremap.experiments import plot_curves

    files = [
        fake_metrics(tmp_path, "iris-tanh-s000", "tanh", 0, [0.5, 0.7]),
        fake_metrics(tmp_path, "iris-tanh-s001", "tanh", 1, [0.6, 0.8]),
        fake_metrics(tmp_path, "iris-none-s000", "none", 0, [0.3, 0.5]),
    ]
    png, csv = plot_curves(files, tmp_path / "plots")
    assert png.exists() and png.stat().st_size > 0
    assert csv.read_text().splitlines()[0] == (
        "remap,samples_seen,mean_val_accuracy,ci95_halfwidth,n_runs"
    )


def test_plot_requires_input():
    from vqcremap.experiments import plot_curves

    with pytest.raises(ValueError):
        plot_curves([], "/tmp/nowhere")


# --- gradcheck -----------------------------------------------------------------------


def test_gradcheck_passes_at_default_tolerances():
    report = gradcheck(n_instances=6, fd_instances=2, seed=7)
    assert report.passed
    assert report.engine_max_dev < 1e-8
    assert report.fd_max_rel_dev < 1e-4
    assert "PASS" in report.summary()


def test_gradcheck_corruption_hook_fails():
    report = gradcheck(n_instances=2, fd_instances=1, seed=7, corrupt=1e-3)
    assert not report.passed
    assert "FAIL" in report.summary()
