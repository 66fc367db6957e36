import json

import numpy as np
import pytest

from vqcremap.cli import main, parse_remaps, parse_seeds
from vqcremap.remap import RemapKind


def test_parse_seeds_range_and_list():
    assert parse_seeds("0..3") == [0, 1, 2, 3]
    assert parse_seeds("4,7,9") == [4, 7, 9]
    assert parse_seeds("5") == [5]
    with pytest.raises(ValueError):
        parse_seeds("9..3")


def test_parse_remaps():
    assert parse_remaps("all") == list(RemapKind)
    assert parse_remaps("tanh,none") == [RemapKind.TANH, RemapKind.IDENTITY]
    with pytest.raises(ValueError):
        parse_remaps("bogus")


def test_usage_error_exit_code(capsys):
    assert main(["run", "--dataset", "mnist"]) == 1
    assert main(["bogus-command"]) == 1


def test_fetch_data_command(tmp_path, capsys):
    code = main(["fetch-data", "--dataset", "iris", "--data-dir", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "iris.data").exists()
    assert "iris" in capsys.readouterr().out


def test_env_var_data_dir(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("VQCREMAP_DATA_DIR", str(tmp_path))
    assert main(["fetch-data", "--dataset", "iris"]) == 0
    assert (tmp_path / "iris.data").exists()


def test_run_aggregate_plot_pipeline(data_dir, tmp_path, capsys):
    out = tmp_path / "runs"
    code = main(
        [
            "run",
            "--dataset", "iris",
            "--remap", "tanh,none",
            "--seeds", "0..1",
            "--epochs", "2",
            "--out", str(out),
            "--jobs", "1",
            "--data-dir", str(data_dir),
        ]
    )
    assert code == 0
    captured = capsys.readouterr()
    assert "4/4 runs completed" in captured.out

    metric_files = sorted(str(p) for p in out.glob("*/metrics.csv"))
    assert len(metric_files) == 4

    agg_csv = tmp_path / "table.csv"
    code = main(
        ["aggregate", *metric_files, "--at-samples", "120", "--out", str(agg_csv)]
    )
    assert code == 0
    assert "val_accuracy@120" in capsys.readouterr().out
    assert agg_csv.exists()

    code = main(["plot", *metric_files, "--out", str(tmp_path / "plots")])
    assert code == 0
    assert (tmp_path / "plots" / "iris_validation_curves.png").exists()
    assert (tmp_path / "plots" / "iris_validation_curves.csv").exists()


def test_run_rejects_empty_seed_list(data_dir, tmp_path):
    code = main(
        [
            "run",
            "--dataset", "iris",
            "--seeds", "",
            "--out", str(tmp_path),
            "--data-dir", str(data_dir),
        ]
    )
    assert code == 1


def test_config_file_precedence(data_dir, tmp_path, capsys):
    # config file sets epochs 1; the flag overrides the file's learning rate
    config = tmp_path / "overrides.json"
    config.write_text(json.dumps({"n_epochs": 1, "learning_rate": 0.5}))
    out = tmp_path / "runs"
    code = main(
        [
            "run",
            "--dataset", "iris",
            "--remap", "tanh",
            "--seeds", "0",
            "--config", str(config),
            "--lr", "0.0201",
            "--out", str(out),
            "--jobs", "1",
            "--data-dir", str(data_dir),
        ]
    )
    assert code == 0
    from vqcremap.data import read_manifest

    manifest = read_manifest(out / "iris-tanh-s000" / "manifest.txt")
    assert manifest["n_epochs"] == "1"  # from config file
    assert float(manifest["learning_rate"]) == 0.0201  # flag wins over file


def test_gradcheck_exit_codes(capsys):
    assert main(["gradcheck", "--instances", "3", "--fd-instances", "1"]) == 0
    assert "PASS" in capsys.readouterr().out
    code = main(
        ["gradcheck", "--instances", "2", "--fd-instances", "1", "--corrupt", "0.01"]
    )
    assert code == 2
    assert "FAIL" in capsys.readouterr().out


def test_plan_reruns_are_byte_identical(data_dir, tmp_path):
    args = [
        "run",
        "--dataset", "iris",
        "--remap", "arctan",
        "--seeds", "0..1",
        "--epochs", "2",
        "--jobs", "1",
        "--data-dir", str(data_dir),
    ]
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(args + ["--out", str(out_a)]) == 0
    assert main(args + ["--out", str(out_b)]) == 0
    for sub in ("iris-arctan-s000", "iris-arctan-s001"):
        a = (out_a / sub / "metrics.csv").read_bytes()
        b = (out_b / sub / "metrics.csv").read_bytes()
        assert a == b
