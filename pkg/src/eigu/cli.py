"""Command-line front end wiring ingestion, features, training, and reports.

Every command follows one contract: exit 0 on success, 1 on runtime
failures, 2 on validation or usage errors.  Outputs are CSV and JSON only,
and anything time- or host-dependent goes into a separate ``runinfo.json``
so the result files themselves stay byte-identical across repeated runs.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import math
import os
import platform
import socket
import sys
import time
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .classifiers import (
    CLASSIFIER_NAMES,
    DEFAULT_GRAM_CAP,
    TrainSpec,
    model_to_json,
    train,
)
from .dataio import (
    SEGMENT_LENGTH,
    TASKS,
    UNIVERSUM_SET,
    LabeledDataset,
    assemble_task,
    load_bonn_set,
    make_folds,
    read_bundle,
    subset_universum,
    truncate_recordings,
    write_bundle,
)
from .eigsolve import smallest_eigpair_generalized, smallest_eigpair_standard
from .evaluation import (
    DECADE_GRID,
    BlockCache,
    results_csv,
    run_benchmark,
    run_cv,
)
from .features import feature_config_from_id, fit_features
from .kernels import KernelSpec
from .stats import build_stat_report, load_published_tables

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

FEATURE_IDS = ("dwt_haar", "dwt_db1", "dwt_db2", "dwt_db4", "dwt_db6", "pca", "ica")
KERNEL_CHOICES = ("linear", "rbf")


class UsageError(Exception):
    """Bad arguments or unusable inputs; maps to exit code 2."""


# ---------------------------------------------------------------------------
# shared plumbing


def _resolve_data_root(flag_value: str | None) -> Path:
    value = flag_value or os.environ.get("EIGU_DATA_ROOT")
    if not value:
        raise UsageError("no data root: pass --data-root or set EIGU_DATA_ROOT")
    root = Path(value)
    if not root.is_dir():
        raise UsageError(f"data root is not a directory: {root}")
    return root


def _write_runinfo(directory: Path, command: str, argv: list[str], started: float) -> None:
    """Host and timestamp details, quarantined away from the result files."""
    finished = time.time()
    info = {
        "command": command,
        "argv": list(argv),
        "package_version": __version__,
        "python": platform.python_version(),
        "platform": platform.platform(),
        "host": socket.gethostname(),
        "started_utc": datetime.fromtimestamp(started, tz=timezone.utc).isoformat(
            timespec="seconds"
        ),
        "finished_utc": datetime.fromtimestamp(finished, tz=timezone.utc).isoformat(
            timespec="seconds"
        ),
        "duration_seconds": round(finished - started, 3),
    }
    with open(directory / "runinfo.json", "w", encoding="utf-8") as handle:
        json.dump(info, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _jsonable(obj):
    """Recursively convert dataclasses/numpy values into JSON-ready types."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(key): _jsonable(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(value) for value in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(value) for value in obj.tolist()]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def _emit_json(payload: dict, output: str | None) -> None:
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"
    if output:
        path = Path(output)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _assemble_from_root(
    root: Path, task: str, universum_size: int, segment_length: int, seed: int
) -> LabeledDataset:
    labels = set(TASKS[task])
    if universum_size > 0:
        labels.add(UNIVERSUM_SET)
    rows_by_set: dict[str, np.ndarray] = {}
    try:
        for label in sorted(labels):
            recordings = load_bonn_set(root / label, label)
            rows_by_set[label] = truncate_recordings(recordings, segment_length)
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    return assemble_task(task, rows_by_set, universum_size, seed)


def _load_dataset(args) -> tuple[LabeledDataset, str]:
    """Dataset plus task name, from --bundle or from --task/--data-root."""
    if args.bundle:
        try:
            dataset, manifest = read_bundle(args.bundle)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read bundle {args.bundle}: {exc}") from exc
        task = str(manifest.get("task", ""))
    else:
        root = _resolve_data_root(args.data_root)
        task = args.task.lower()
        dataset = _assemble_from_root(
            root, task, args.universum_pool, args.segment_length, args.seed
        )
    if args.universum_size is not None:
        dataset = subset_universum(dataset, args.universum_size, args.seed)
    return dataset, task


def _prepare_features(dataset: LabeledDataset, args):
    """(dataset, extractor, feature_id): wavelets applied up front, pca/ica per fold."""
    if args.feature is None:
        return dataset, None, "raw"
    config = feature_config_from_id(
        args.feature, n_components=args.n_components, seed=args.seed
    )
    if config.method == "dwt":
        fitted = fit_features(config, dataset.X1)
        dataset = LabeledDataset(
            X1=fitted.transform(dataset.X1),
            X2=fitted.transform(dataset.X2),
            U=fitted.transform(dataset.U),
        )
        return dataset, None, config.feature_id
    return dataset, config, config.feature_id


def _build_kernel(args) -> KernelSpec | None:
    if args.kernel is None:
        if args.sigma is not None:
            raise UsageError("--sigma needs --kernel rbf")
        return None
    return KernelSpec(family=args.kernel, sigma=args.sigma)


def _train_spec(args) -> TrainSpec:
    return TrainSpec(
        classifier=args.classifier,
        delta=args.delta,
        nu=args.nu,
        gamma1=args.gamma,
        psi1=args.psi,
        gamma2=args.gamma2,
        psi2=args.psi2,
        kernel=_build_kernel(args),
    )


def _parse_grid_values(text: str, name: str) -> list[float]:
    try:
        values = [float(item) for item in text.split(",") if item.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --{name}: {exc}") from exc
    if not values:
        raise UsageError(f"--{name} is empty")
    if any(not np.isfinite(value) or value <= 0 for value in values):
        raise UsageError(f"--{name} values must be positive and finite (log10 axes)")
    return values


def _filtered(current: list, requested: str | None, kind: str) -> list:
    if requested is None:
        return list(current)
    wanted = [item.strip() for item in requested.split(",") if item.strip()]
    if not wanted:
        raise UsageError(f"empty {kind} filter")
    unknown = sorted(set(wanted) - set(current))
    if unknown:
        raise UsageError(f"unknown {kind} filter values {unknown}; manifest has {list(current)}")
    return [item for item in current if item in wanted]


# ---------------------------------------------------------------------------
# commands


def cmd_ingest(args) -> int:
    started = time.time()
    root = _resolve_data_root(args.data_root)
    task = args.task.lower()
    dataset = _assemble_from_root(
        root, task, args.universum_size, args.segment_length, args.seed
    )
    out = Path(args.output_dir)
    write_bundle(
        dataset,
        out,
        task=task,
        seed=args.seed,
        extra={"segment_length": int(args.segment_length)},
    )
    _write_runinfo(out, "ingest", args.raw_argv, started)
    print(
        f"wrote bundle m1={dataset.m1} m2={dataset.m2} p={dataset.p} "
        f"n={dataset.n} -> {out}"
    )
    return EXIT_OK


def cmd_features(args) -> int:
    started = time.time()
    try:
        dataset, manifest = read_bundle(args.bundle)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read bundle {args.bundle}: {exc}") from exc
    overrides: dict = {"n_components": args.n_components, "seed": args.seed}
    if args.top_k is not None:
        overrides["top_k"] = args.top_k
    config = feature_config_from_id(args.feature, **overrides)
    labeled = np.vstack([dataset.X1, dataset.X2])
    labels = np.concatenate([np.ones(dataset.m1), -np.ones(dataset.m2)])
    fitted = fit_features(config, labeled, labels)
    transformed = LabeledDataset(
        X1=fitted.transform(dataset.X1),
        X2=fitted.transform(dataset.X2),
        U=fitted.transform(dataset.U),
    )
    out = Path(args.output_dir)
    write_bundle(
        transformed,
        out,
        task=str(manifest.get("task", "")),
        seed=args.seed,
        extra={"feature": config.feature_id, "source_n": dataset.n},
    )
    sidecar: dict = {
        "config": {
            "method": config.method,
            "wavelet": config.wavelet,
            "level": config.level,
            "n_components": config.n_components,
            "top_k": config.top_k,
            "seed": config.seed,
            "feature_id": config.feature_id,
        },
        "n_fit_rows": fitted.n_fit_rows,
    }
    if fitted.keep is not None:
        sidecar["component_order"] = list(fitted.keep)
    if fitted.pca is not None:
        sidecar["pca"] = {
            "mean": fitted.pca.mean,
            "components": fitted.pca.components,
            "explained_variance": fitted.pca.explained_variance,
            "rank_deficient": fitted.pca.rank_deficient,
        }
    if fitted.ica is not None:
        sidecar["ica"] = {
            "mean": fitted.ica.mean,
            "whitening": fitted.ica.whitening,
            "unmixing": fitted.ica.unmixing,
            "converged": fitted.ica.converged,
            "n_iterations": fitted.ica.n_iterations,
        }
    _emit_json(sidecar, str(out / "features.json"))
    _write_runinfo(out, "features", args.raw_argv, started)
    print(f"wrote {config.feature_id} bundle n={transformed.n} -> {out}")
    return EXIT_OK


def cmd_cv(args) -> int:
    dataset, task = _load_dataset(args)
    dataset, extractor, feature_id = _prepare_features(dataset, args)
    spec = _train_spec(args)
    folds = make_folds(dataset, args.folds, args.seed)
    report = run_cv(
        dataset,
        folds,
        spec,
        extractor=extractor,
        gram_cap=args.gram_cap,
        task=task,
        feature_id=feature_id,
    )
    _emit_json(dataclasses.asdict(report), args.output)
    if args.save_model:
        full = dataset
        if extractor is not None:
            labeled = np.vstack([dataset.X1, dataset.X2])
            labels = np.concatenate([np.ones(dataset.m1), -np.ones(dataset.m2)])
            fitted = fit_features(extractor, labeled, labels)
            full = LabeledDataset(
                X1=fitted.transform(dataset.X1),
                X2=fitted.transform(dataset.X2),
                U=fitted.transform(dataset.U),
            )
        model = train(full, spec, gram_cap=args.gram_cap)
        path = Path(args.save_model)
        path.parent.mkdir(parents=True, exist_ok=True)
        text = model_to_json(model)
        path.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
        log.info("saved model to %s", path)
    return EXIT_OK


def _load_manifest(args) -> dict:
    if args.smoke or args.full:
        name = "smoke_manifest.json" if args.smoke else "full_manifest.json"
        text = resources.files("eigu").joinpath(f"data/{name}").read_text("ascii")
    else:
        try:
            text = Path(args.manifest).read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read manifest {args.manifest}: {exc}") from exc
    payload = json.loads(text)
    if not isinstance(payload, dict):
        raise UsageError("manifest must be a JSON object")
    return payload


def cmd_bench(args) -> int:
    started = time.time()
    manifest = _load_manifest(args)
    if args.data_root:
        manifest["data_root"] = args.data_root
    elif manifest.get("data_root") in (None, ""):
        env_root = os.environ.get("EIGU_DATA_ROOT")
        if not env_root:
            raise UsageError(
                "manifest has no data_root; pass --data-root or set EIGU_DATA_ROOT"
            )
        manifest["data_root"] = env_root
    for key, flag in (("tasks", args.tasks), ("features", args.features), ("classifiers", args.classifiers)):
        if key not in manifest:
            raise UsageError(f"manifest is missing {key!r}")
        manifest[key] = _filtered(manifest[key], flag, key.rstrip("s"))
    if args.seed is not None:
        manifest["seed"] = args.seed
    if args.workers is not None and args.workers < 1:
        raise UsageError(f"--workers must be >= 1, got {args.workers}")
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = run_benchmark(manifest, workers=args.workers)
    (out / "results.csv").write_text(results_csv(result.rows), encoding="utf-8")
    (out / "summary.json").write_text(
        json.dumps(_jsonable(result.summary), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    _write_runinfo(out, "bench", args.raw_argv, started)
    n_errors = sum(1 for row in result.rows if row.error)
    print(f"{len(result.rows)} cells, {n_errors} with errors -> {out / 'results.csv'}")
    return EXIT_OK


def _tables_from_results(path: Path) -> dict:
    """Rebuild the per-task accuracy tables from a benchmark results CSV."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read results: {exc}") from exc
    reader = csv.DictReader(io.StringIO(text))
    required = {"task", "feature", "classifier", "mean_acc"}
    if reader.fieldnames is None or not required.issubset(reader.fieldnames):
        raise UsageError(f"results CSV needs columns {sorted(required)}")
    cells: dict[str, dict[tuple[str, str], float]] = {}
    features: list[str] = []
    models: list[str] = []
    for row in reader:
        task, feature, model = row["task"], row["feature"], row["classifier"]
        if row.get("error"):
            raise UsageError(f"cell {task}/{feature}/{model} failed: {row['error']}")
        try:
            accuracy = float(row["mean_acc"])
        except (TypeError, ValueError) as exc:
            raise UsageError(
                f"bad mean_acc for {task}/{feature}/{model}: {row['mean_acc']!r}"
            ) from exc
        if feature not in features:
            features.append(feature)
        if model not in models:
            models.append(model)
        cells.setdefault(task, {})[(feature, model)] = accuracy
    if not cells:
        raise UsageError("results CSV has no data rows")
    tasks = {}
    for task, table in cells.items():
        matrix = []
        for feature in features:
            row_values = []
            for model in models:
                if (feature, model) not in table:
                    raise UsageError(f"results CSV is missing cell {task}/{feature}/{model}")
                row_values.append(table[(feature, model)])
            matrix.append(row_values)
        tasks[task] = matrix
    return {"models": models, "features": features, "tasks": tasks}


def cmd_stats(args) -> int:
    if args.from_paper_tables:
        tables = load_published_tables()
    else:
        tables = _tables_from_results(Path(args.results))
    champion = args.champion
    if champion is None:
        for candidate in ("IU-GEPSVM", "iugepsvm"):
            if candidate in tables["models"]:
                champion = candidate
                break
        else:
            raise UsageError(
                f"pass --champion; the tables carry models {list(tables['models'])}"
            )
    report = build_stat_report(
        tables, champion=champion, alpha=args.alpha, tolerance=args.tolerance
    )
    if args.task is not None:
        if args.task not in report["tasks"]:
            raise UsageError(
                f"unknown task {args.task!r}; the report has {sorted(report['tasks'])}"
            )
        report["tasks"] = {args.task: report["tasks"][args.task]}
    _emit_json(report, args.output)
    return EXIT_OK


def cmd_sweep(args) -> int:
    started = time.time()
    if args.classifier != "iugepsvm":
        raise UsageError(
            f"sweep needs a classifier with gamma and psi axes; "
            f"{args.classifier!r} has none"
        )
    gammas = (
        _parse_grid_values(args.gamma_grid, "gamma-grid")
        if args.gamma_grid
        else list(DECADE_GRID)
    )
    psis = (
        _parse_grid_values(args.psi_grid, "psi-grid")
        if args.psi_grid
        else list(DECADE_GRID)
    )
    kernel = _build_kernel(args)
    dataset, task = _load_dataset(args)
    dataset, extractor, feature_id = _prepare_features(dataset, args)
    folds = make_folds(dataset, args.folds, args.seed)
    cache = BlockCache()
    lines = ["log10_gamma,log10_psi,mean_accuracy"]
    best: tuple[float, float, float] | None = None
    for gamma in sorted(gammas):
        for psi in sorted(psis):
            spec = TrainSpec(
                classifier="iugepsvm",
                delta=args.delta,
                gamma1=gamma,
                psi1=psi,
                kernel=kernel,
            )
            report = run_cv(
                dataset,
                folds,
                spec,
                extractor=extractor,
                gram_cap=args.gram_cap,
                task=task,
                feature_id=feature_id,
                cache=cache,
                cache_tag="sweep",
            )
            lines.append(
                f"{math.log10(gamma)!r},{math.log10(psi)!r},{report.mean_accuracy!r}"
            )
            if best is None or report.mean_accuracy > best[2]:
                best = (gamma, psi, report.mean_accuracy)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    _write_runinfo(out, "sweep", args.raw_argv, started)
    print(
        f"{len(lines) - 1} cells -> {out / 'sweep.csv'}; best mean accuracy "
        f"{best[2]:.2f} at gamma={best[0]:g} psi={best[1]:g}"
    )
    return EXIT_OK


def cmd_eig_selftest(args) -> int:
    rng = np.random.default_rng(args.seed)
    failures: list[str] = []
    max_residual = 0.0
    ridge_escalations = 0
    for trial in range(args.trials):
        q = int(rng.integers(2, args.size + 1))
        probes = rng.standard_normal((args.probes, q))
        probes /= np.linalg.norm(probes, axis=1, keepdims=True)

        basis = rng.standard_normal((q, q))
        A = (basis + basis.T) / 2.0
        solution = smallest_eigpair_standard(A)
        max_residual = max(max_residual, solution.residual)
        probe_values = np.einsum("ij,jk,ik->i", probes, A, probes)
        slack = 1e-9 * (1.0 + abs(solution.eigenvalue))
        if probe_values.min() < solution.eigenvalue - slack:
            failures.append(
                f"trial {trial}: standard probe beat the eigenvalue by "
                f"{solution.eigenvalue - probe_values.min():.3e}"
            )

        factor = rng.standard_normal((q, q))
        B = factor @ factor.T + q * np.eye(q)
        numerator = rng.standard_normal((q, q))
        A2 = (numerator + numerator.T) / 2.0
        solution = smallest_eigpair_generalized(A2, B, context="selftest spd pencil")
        max_residual = max(max_residual, solution.residual)
        ridge_escalations += solution.used_ridge > 0
        B_eff = B + solution.used_ridge * np.eye(q)
        quotients = np.einsum("ij,jk,ik->i", probes, A2, probes) / np.einsum(
            "ij,jk,ik->i", probes, B_eff, probes
        )
        slack = 1e-9 * (1.0 + abs(solution.eigenvalue))
        if quotients.min() < solution.eigenvalue - slack:
            failures.append(
                f"trial {trial}: spd-pencil probe beat the eigenvalue by "
                f"{solution.eigenvalue - quotients.min():.3e}"
            )

        low_rank = rng.standard_normal((q, max(1, q // 2)))
        B_singular = low_rank @ low_rank.T
        psd = rng.standard_normal((q, q))
        A3 = psd @ psd.T / q + 1e-3 * np.eye(q)
        solution = smallest_eigpair_generalized(
            A3, B_singular, context="selftest rank-deficient pencil"
        )
        max_residual = max(max_residual, solution.residual)
        ridge_escalations += solution.used_ridge > 0
        B_eff = B_singular + solution.used_ridge * np.eye(q)
        quotients = np.einsum("ij,jk,ik->i", probes, A3, probes) / np.einsum(
            "ij,jk,ik->i", probes, B_eff, probes
        )
        slack = 1e-9 * (1.0 + abs(solution.eigenvalue))
        if quotients.min() < solution.eigenvalue - slack:
            failures.append(
                f"trial {trial}: rank-deficient probe beat the eigenvalue by "
                f"{solution.eigenvalue - quotients.min():.3e}"
            )
    print(
        f"{args.trials} trials x 3 pencils: max residual {max_residual:.3e}, "
        f"{ridge_escalations} ridge escalations, {len(failures)} failures"
    )
    for line in failures:
        print(f"  {line}", file=sys.stderr)
    return EXIT_OK if not failures else EXIT_RUNTIME


# ---------------------------------------------------------------------------
# parser


def _add_input_arguments(p: argparse.ArgumentParser) -> None:
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument(
        "--bundle", default=None, help="dataset bundle directory (from ingest/features)"
    )
    source.add_argument(
        "--task",
        choices=sorted(TASKS),
        default=None,
        help="assemble this task from --data-root instead of reading a bundle",
    )
    p.add_argument(
        "--data-root",
        default=None,
        help="set directories for --task mode (fallback: EIGU_DATA_ROOT)",
    )
    p.add_argument(
        "--universum-pool",
        type=int,
        default=100,
        help="rows drawn from the Universum set in --task mode",
    )
    p.add_argument(
        "--universum-size",
        type=int,
        default=None,
        help="subset the Universum to this many rows for the run (default: keep all)",
    )
    p.add_argument(
        "--segment-length",
        type=int,
        default=SEGMENT_LENGTH,
        help="samples kept per recording in --task mode",
    )
    p.add_argument(
        "--feature",
        choices=FEATURE_IDS,
        default=None,
        help="feature extraction applied before training (default: raw rows)",
    )
    p.add_argument(
        "--n-components", type=int, default=32, help="components for pca/ica features"
    )
    p.add_argument("--folds", type=int, default=5, help="cross-validation folds")
    p.add_argument("--seed", type=int, default=0, help="fold/shuffle seed")
    p.add_argument(
        "--gram-cap",
        type=int,
        default=DEFAULT_GRAM_CAP,
        help="largest kernel matrix edge allowed",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eigu",
        description=(
            "Eigenvalue twin-plane classifiers: data ingestion, feature "
            "extraction, cross-validation, benchmarks, statistics, and "
            "sensitivity sweeps."
        ),
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    def add_command(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(
            name,
            help=help_text,
            description=help_text,
            formatter_class=argparse.ArgumentDefaultsHelpFormatter,
        )
        p.add_argument(
            "-v",
            "--verbose",
            action="count",
            default=0,
            help="increase log verbosity (repeatable)",
        )
        return p

    p = add_command("ingest", "Assemble a labeled task bundle from raw set directories.")
    p.add_argument("--task", required=True, choices=sorted(TASKS), help="binary task")
    p.add_argument(
        "--data-root",
        default=None,
        help="directory holding the set folders (fallback: EIGU_DATA_ROOT)",
    )
    p.add_argument("--output-dir", required=True, help="bundle destination directory")
    p.add_argument(
        "--universum-size",
        type=int,
        default=100,
        help="rows drawn from the Universum set",
    )
    p.add_argument(
        "--segment-length",
        type=int,
        default=SEGMENT_LENGTH,
        help="samples kept per recording",
    )
    p.add_argument("--seed", type=int, default=0, help="Universum shuffle seed")
    p.set_defaults(func=cmd_ingest)

    p = add_command("features", "Extract features from a bundle into a new bundle.")
    p.add_argument("--bundle", required=True, help="input bundle directory")
    p.add_argument("--output-dir", required=True, help="transformed bundle destination")
    p.add_argument("--feature", required=True, choices=FEATURE_IDS, help="feature id")
    p.add_argument(
        "--n-components", type=int, default=32, help="components for pca/ica"
    )
    p.add_argument(
        "--top-k",
        type=int,
        default=None,
        help="keep only this many top-ranked components (default: all)",
    )
    p.add_argument("--seed", type=int, default=0, help="component-estimation seed")
    p.set_defaults(func=cmd_features)

    p = add_command("cv", "Cross-validate one hyperparameter setting.")
    _add_input_arguments(p)
    p.add_argument("--classifier", required=True, choices=CLASSIFIER_NAMES)
    p.add_argument("--delta", type=float, default=1e-4, help="Tikhonov weight")
    p.add_argument(
        "--nu", type=float, default=0.1, help="subtracted class weight (igepsvm)"
    )
    p.add_argument(
        "--gamma", type=float, default=0.1, help="class weight, plane 1 (iugepsvm)"
    )
    p.add_argument(
        "--psi", type=float, default=0.01, help="Universum weight, plane 1 (iugepsvm)"
    )
    p.add_argument(
        "--gamma2",
        type=float,
        default=None,
        help="class weight, plane 2 (default: --gamma)",
    )
    p.add_argument(
        "--psi2",
        type=float,
        default=None,
        help="Universum weight, plane 2 (default: --psi)",
    )
    p.add_argument(
        "--kernel",
        choices=KERNEL_CHOICES,
        default=None,
        help="kernel mode (default: linear primal)",
    )
    p.add_argument(
        "--sigma",
        type=float,
        default=None,
        help="rbf bandwidth (default: mean pairwise-distance heuristic)",
    )
    p.add_argument(
        "--output", default=None, help="CV report JSON path (default: stdout)"
    )
    p.add_argument(
        "--save-model",
        default=None,
        help="also train on all rows and save the model JSON here",
    )
    p.set_defaults(func=cmd_cv)

    p = add_command("bench", "Run a (task x feature x classifier) benchmark manifest.")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--manifest", default=None, help="manifest JSON path")
    source.add_argument(
        "--smoke", action="store_true", help="use the bundled reduced-grid manifest"
    )
    source.add_argument(
        "--full", action="store_true", help="use the bundled full-grid manifest"
    )
    p.add_argument(
        "--data-root",
        default=None,
        help="overrides the manifest data_root (EIGU_DATA_ROOT fills a null value)",
    )
    p.add_argument("--output-dir", required=True, help="results destination directory")
    p.add_argument("--tasks", default=None, help="comma-separated task filter")
    p.add_argument("--features", default=None, help="comma-separated feature filter")
    p.add_argument(
        "--classifiers", default=None, help="comma-separated classifier filter"
    )
    p.add_argument(
        "--workers",
        type=int,
        default=None,
        help="worker process count (default: manifest value or 1)",
    )
    p.add_argument(
        "--seed", type=int, default=None, help="overrides the manifest seed"
    )
    p.set_defaults(func=cmd_bench)

    p = add_command("stats", "Friedman, pairwise Wilcoxon, and win-tie-loss report.")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--results", default=None, help="benchmark results CSV path")
    source.add_argument(
        "--from-paper-tables",
        action="store_true",
        help="use the bundled published accuracy tables",
    )
    p.add_argument("--task", default=None, help="restrict the report to one task")
    p.add_argument("--alpha", type=float, default=0.05, help="significance level")
    p.add_argument(
        "--champion",
        default=None,
        help="reference model for win-tie-loss (default: the Universum "
        "difference-form model when present)",
    )
    p.add_argument(
        "--tolerance",
        type=float,
        default=0.0,
        help="absolute accuracy difference counted as a tie",
    )
    p.add_argument(
        "--output", default=None, help="report JSON path (default: stdout)"
    )
    p.set_defaults(func=cmd_stats)

    p = add_command("sweep", "Sweep the gamma/psi axes; emits plot-ready CSV.")
    _add_input_arguments(p)
    p.add_argument(
        "--classifier",
        default="iugepsvm",
        choices=CLASSIFIER_NAMES,
        help="must expose gamma and psi axes",
    )
    p.add_argument("--delta", type=float, default=1e-5, help="Tikhonov weight")
    p.add_argument(
        "--gamma-grid",
        default=None,
        help="comma-separated gamma values (default: the 1e-5..1e5 decades)",
    )
    p.add_argument(
        "--psi-grid",
        default=None,
        help="comma-separated psi values (default: the 1e-5..1e5 decades)",
    )
    p.add_argument("--kernel", choices=KERNEL_CHOICES, default=None, help="kernel mode")
    p.add_argument("--sigma", type=float, default=None, help="rbf bandwidth")
    p.add_argument("--output-dir", required=True, help="sweep CSV destination")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser(
        "eig-selftest",
        description="Randomized eigensolver battery: residual and minimality checks.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p.add_argument(
        "-v", "--verbose", action="count", default=0, help="increase log verbosity"
    )
    p.add_argument("--trials", type=int, default=20, help="random pencils per family")
    p.add_argument("--size", type=int, default=24, help="largest matrix edge")
    p.add_argument(
        "--probes", type=int, default=2000, help="random unit probes per check"
    )
    p.add_argument("--seed", type=int, default=0, help="battery seed")
    p.set_defaults(func=cmd_eig_selftest)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING
    if args.verbose == 1:
        level = logging.INFO
    elif args.verbose >= 2:
        level = logging.DEBUG
    logging.basicConfig(
        level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )
    args.raw_argv = argv
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:
        log.debug("runtime failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
