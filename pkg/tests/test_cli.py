"""End-to-end command-line tests driven through in-process main() calls."""

from __future__ import annotations

import csv
import json

import numpy as np
import pytest

from eigu.classifiers import TrainSpec, model_from_json, predict
from eigu.cli import main
from eigu.dataio import make_folds, read_bundle
from eigu.evaluation import run_cv

from conftest import TOY_SEGMENT


@pytest.fixture(scope="session")
def toy_bundle(bonn_tree, tmp_path_factory):
    out = tmp_path_factory.mktemp("bundles") / "o_vs_s"
    rc = main(
        [
            "ingest",
            "--task",
            "o_vs_s",
            "--data-root",
            str(bonn_tree),
            "--output-dir",
            str(out),
            "--universum-size",
            "6",
            "--segment-length",
            str(TOY_SEGMENT),
            "--seed",
            "1",
        ]
    )
    assert rc == 0
    return out


def _toy_manifest_payload(bonn_tree):
    return {
        "tasks": ["o_vs_s"],
        "features": ["dwt_db2"],
        "classifiers": ["gepsvm", "iugepsvm"],
        "grids": {
            "gepsvm": {"delta": [1e-4]},
            "iugepsvm": {"delta": [1e-4], "gamma": [0.1], "psi": [0.01]},
        },
        "data_root": str(bonn_tree),
        "seed": 1,
        "folds": 2,
        "universum_pool": 6,
        "segment_length": TOY_SEGMENT,
        "n_components": 4,
    }


def test_help_lists_commands_but_hides_the_selftest(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["--help"])
    assert excinfo.value.code == 0
    out = capsys.readouterr().out
    for command in ("ingest", "features", "cv", "bench", "stats", "sweep"):
        assert command in out
    assert "eig-selftest" not in out


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["--version"])
    assert excinfo.value.code == 0
    assert capsys.readouterr().out.startswith("eigu ")


def test_unknown_command_is_a_usage_error(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["frobnicate"])
    assert excinfo.value.code == 2


def test_ingest_writes_a_reloadable_bundle(toy_bundle, bonn_tree, tmp_path):
    dataset, manifest = read_bundle(toy_bundle)
    assert manifest["task"] == "o_vs_s"
    assert (dataset.m1, dataset.m2, dataset.p) == (12, 12, 6)
    assert dataset.n == TOY_SEGMENT
    assert (toy_bundle / "runinfo.json").exists()

    again = tmp_path / "again"
    rc = main(
        [
            "ingest",
            "--task",
            "o_vs_s",
            "--data-root",
            str(bonn_tree),
            "--output-dir",
            str(again),
            "--universum-size",
            "6",
            "--segment-length",
            str(TOY_SEGMENT),
            "--seed",
            "1",
        ]
    )
    assert rc == 0
    for name in ("X1.csv", "X2.csv", "U.csv", "manifest.json"):
        assert (again / name).read_bytes() == (toy_bundle / name).read_bytes()


def test_ingest_without_a_data_root_is_a_usage_error(tmp_path, capsys):
    rc = main(
        [
            "ingest",
            "--task",
            "o_vs_s",
            "--data-root",
            str(tmp_path / "nowhere"),
            "--output-dir",
            str(tmp_path / "out"),
        ]
    )
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_env_variable_fills_in_the_data_root(bonn_tree, tmp_path, monkeypatch):
    monkeypatch.setenv("EIGU_DATA_ROOT", str(bonn_tree))
    rc = main(
        [
            "ingest",
            "--task",
            "z_vs_s",
            "--output-dir",
            str(tmp_path / "bundle"),
            "--universum-size",
            "4",
            "--segment-length",
            str(TOY_SEGMENT),
        ]
    )
    assert rc == 0


def test_features_command_writes_a_transformed_bundle(toy_bundle, tmp_path, capsys):
    out = tmp_path / "pca4"
    rc = main(
        [
            "features",
            "--bundle",
            str(toy_bundle),
            "--output-dir",
            str(out),
            "--feature",
            "pca",
            "--n-components",
            "4",
        ]
    )
    assert rc == 0
    dataset, manifest = read_bundle(out)
    assert dataset.n == 4
    assert manifest["feature"] == "pca"
    sidecar = json.loads((out / "features.json").read_text())
    assert sidecar["config"]["method"] == "pca"
    components = np.asarray(sidecar["pca"]["components"])
    assert components.shape == (TOY_SEGMENT, 4)


def test_cv_emits_a_json_report(toy_bundle, capsys):
    rc = main(
        [
            "cv",
            "--bundle",
            str(toy_bundle),
            "--classifier",
            "iugepsvm",
            "--folds",
            "2",
            "--gamma",
            "0.1",
            "--psi",
            "0.01",
        ]
    )
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    assert report["classifier"] == "iugepsvm"
    assert report["k"] == 2
    assert len(report["fold_accuracies"]) == 2
    assert report["params"]["gamma1"] == 0.1


def test_cv_saves_a_loadable_model(toy_bundle, tmp_path, capsys):
    model_path = tmp_path / "model.json"
    report_path = tmp_path / "report.json"
    rc = main(
        [
            "cv",
            "--bundle",
            str(toy_bundle),
            "--classifier",
            "gepsvm",
            "--folds",
            "2",
            "--output",
            str(report_path),
            "--save-model",
            str(model_path),
        ]
    )
    assert rc == 0
    assert json.loads(report_path.read_text())["classifier"] == "gepsvm"
    model = model_from_json(model_path.read_text())
    dataset, _ = read_bundle(toy_bundle)
    labels = predict(model, np.vstack([dataset.X1, dataset.X2]))
    assert set(np.unique(labels)) <= {-1.0, 1.0}


def test_cv_rejects_invalid_hyperparameters(toy_bundle, capsys):
    rc = main(
        [
            "cv",
            "--bundle",
            str(toy_bundle),
            "--classifier",
            "gepsvm",
            "--delta",
            "-1.0",
        ]
    )
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_bench_runs_a_manifest_and_summarizes(bonn_tree, tmp_path, capsys):
    manifest_path = tmp_path / "manifest.json"
    manifest_path.write_text(json.dumps(_toy_manifest_payload(bonn_tree)))
    out = tmp_path / "results"
    rc = main(["bench", "--manifest", str(manifest_path), "--output-dir", str(out)])
    assert rc == 0
    assert "2 cells, 0 with errors" in capsys.readouterr().out
    lines = (out / "results.csv").read_text().splitlines()
    assert len(lines) == 3
    assert lines[0].startswith("task,feature,classifier,mean_acc")
    summary = json.loads((out / "summary.json").read_text())
    assert summary["n_cells"] == 2
    runinfo = json.loads((out / "runinfo.json").read_text())
    assert runinfo["command"] == "bench"
    assert "host" in runinfo and "duration_seconds" in runinfo


def test_bench_filters_restrict_the_grid(bonn_tree, tmp_path):
    manifest_path = tmp_path / "manifest.json"
    manifest_path.write_text(json.dumps(_toy_manifest_payload(bonn_tree)))
    out = tmp_path / "one"
    rc = main(
        [
            "bench",
            "--manifest",
            str(manifest_path),
            "--output-dir",
            str(out),
            "--classifiers",
            "gepsvm",
        ]
    )
    assert rc == 0
    lines = (out / "results.csv").read_text().splitlines()
    assert len(lines) == 2
    assert ",gepsvm," in lines[1]

    rc = main(
        [
            "bench",
            "--manifest",
            str(manifest_path),
            "--output-dir",
            str(tmp_path / "two"),
            "--classifiers",
            "svm",
        ]
    )
    assert rc == 2


def test_bench_worker_count_does_not_change_results(bonn_tree, tmp_path):
    manifest_path = tmp_path / "manifest.json"
    manifest_path.write_text(json.dumps(_toy_manifest_payload(bonn_tree)))
    outputs = {}
    for workers in ("1", "2"):
        out = tmp_path / f"w{workers}"
        rc = main(
            [
                "bench",
                "--manifest",
                str(manifest_path),
                "--output-dir",
                str(out),
                "--workers",
                workers,
            ]
        )
        assert rc == 0
        with open(out / "results.csv", newline="") as handle:
            rows = list(csv.reader(handle))
        # timing is the one column allowed to differ between runs
        outputs[workers] = [
            [v for i, v in enumerate(row) if i != 6] for row in rows
        ]
        outputs[workers + "_summary"] = (out / "summary.json").read_bytes()
    assert outputs["1"] == outputs["2"]
    assert outputs["1_summary"] == outputs["2_summary"]


def test_bench_usage_errors(bonn_tree, tmp_path, capsys):
    rc = main(
        [
            "bench",
            "--manifest",
            str(tmp_path / "missing.json"),
            "--output-dir",
            str(tmp_path / "a"),
        ]
    )
    assert rc == 2

    bad = tmp_path / "list.json"
    bad.write_text("[1, 2]")
    rc = main(["bench", "--manifest", str(bad), "--output-dir", str(tmp_path / "b")])
    assert rc == 2

    payload = _toy_manifest_payload(bonn_tree)
    del payload["grids"]
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps(payload))
    rc = main(["bench", "--manifest", str(broken), "--output-dir", str(tmp_path / "c")])
    assert rc == 2

    payload = _toy_manifest_payload(bonn_tree)
    payload["data_root"] = str(tmp_path / "nonexistent")
    gone = tmp_path / "gone.json"
    gone.write_text(json.dumps(payload))
    rc = main(["bench", "--manifest", str(gone), "--output-dir", str(tmp_path / "d")])
    assert rc == 1


def test_bench_reports_cell_errors_but_exits_zero(bonn_tree, tmp_path, capsys):
    payload = _toy_manifest_payload(bonn_tree)
    payload["grids"]["iugepsvm"]["universum_size"] = [50]  # pool only holds 6
    manifest_path = tmp_path / "manifest.json"
    manifest_path.write_text(json.dumps(payload))
    out = tmp_path / "results"
    rc = main(["bench", "--manifest", str(manifest_path), "--output-dir", str(out)])
    assert rc == 0
    assert "1 with errors" in capsys.readouterr().out


def test_stats_reads_a_results_csv(tmp_path, capsys):
    rows = [
        "task,feature,classifier,mean_acc,fold_accs,params_json,test_time_s,n_runs,error",
        'o_vs_s,dwt_db1,gepsvm,70.0,"","{}",0.0,1,""',
        'o_vs_s,dwt_db1,igepsvm,75.0,"","{}",0.0,1,""',
        'o_vs_s,dwt_db1,iugepsvm,80.0,"","{}",0.0,1,""',
        'o_vs_s,dwt_db2,gepsvm,72.0,"","{}",0.0,1,""',
        'o_vs_s,dwt_db2,igepsvm,74.0,"","{}",0.0,1,""',
        'o_vs_s,dwt_db2,iugepsvm,81.0,"","{}",0.0,1,""',
    ]
    path = tmp_path / "results.csv"
    path.write_text("\n".join(rows) + "\n")
    rc = main(["stats", "--results", str(path)])
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    assert report["champion"] == "iugepsvm"
    entry = report["tasks"]["o_vs_s"]
    assert entry["friedman"]["n_models"] == 3
    assert len(entry["wilcoxon"]) == 3
    assert entry["win_tie_loss"]["gepsvm"]["wins"] == 2

    empty = tmp_path / "empty.csv"
    empty.write_text(rows[0] + "\n")
    assert main(["stats", "--results", str(empty)]) == 2

    assert main(["stats", "--results", str(path), "--task", "z_vs_s"]) == 2
    assert main(["stats", "--results", str(path), "--champion", "svm"]) == 2


def test_stats_from_bundled_tables(capsys):
    rc = main(["stats", "--from-paper-tables", "--task", "o_vs_s"])
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    assert report["champion"] == "IU-GEPSVM"
    assert list(report["tasks"]) == ["o_vs_s"]
    assert report["tasks"]["o_vs_s"]["friedman"]["chi2"] == pytest.approx(
        20.796, abs=0.01
    )


def test_sweep_writes_the_grid_csv(toy_bundle, tmp_path, capsys):
    out = tmp_path / "sweep"
    rc = main(
        [
            "sweep",
            "--bundle",
            str(toy_bundle),
            "--folds",
            "2",
            "--gamma-grid",
            "0.1,1",
            "--psi-grid",
            "0.01",
            "--output-dir",
            str(out),
        ]
    )
    assert rc == 0
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0] == "log10_gamma,log10_psi,mean_accuracy"
    assert len(lines) == 3
    first = [float(v) for v in lines[1].split(",")]
    second = [float(v) for v in lines[2].split(",")]
    assert first[:2] == [-1.0, -2.0]
    assert second[:2] == [0.0, -2.0]

    dataset, _ = read_bundle(toy_bundle)
    folds = make_folds(dataset, 2, seed=0)
    spec = TrainSpec(classifier="iugepsvm", delta=1e-5, gamma1=0.1, psi1=0.01)
    assert first[2] == run_cv(dataset, folds, spec).mean_accuracy


def test_sweep_default_grid_has_121_cells(toy_bundle, tmp_path):
    out = tmp_path / "sweep"
    rc = main(
        [
            "sweep",
            "--bundle",
            str(toy_bundle),
            "--folds",
            "2",
            "--output-dir",
            str(out),
        ]
    )
    assert rc == 0
    lines = (out / "sweep.csv").read_text().splitlines()
    assert len(lines) == 122
    gammas = sorted({float(line.split(",")[0]) for line in lines[1:]})
    assert gammas == [float(e) for e in range(-5, 6)]


def test_sweep_rejects_classifiers_without_the_axes(toy_bundle, tmp_path, capsys):
    rc = main(
        [
            "sweep",
            "--bundle",
            str(toy_bundle),
            "--classifier",
            "gepsvm",
            "--output-dir",
            str(tmp_path / "s"),
        ]
    )
    assert rc == 2
    assert "gamma and psi" in capsys.readouterr().err


def test_eig_selftest_passes_quickly(capsys):
    rc = main(["eig-selftest", "--trials", "3", "--size", "10", "--probes", "200"])
    assert rc == 0
    assert "max residual" in capsys.readouterr().out
