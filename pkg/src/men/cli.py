"""Command-line front end: fit, project, evaluate, export-bases, export-paths.

A key=value config file ('#' comments) carries the hyperparameters; a
few override flags (--d, --K, --seed) support sweeps. Exit codes: 0
success, 1 user/data error, 2 internal numerical failure. Errors are a
single machine-parsable line on stderr: ``error: stage=... reason=...``.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import MenConfig, config_from_mapping, parse_kv_lines
from .datasets import ingest
from .errors import DataError, MenError, NumericalError
from .evaluation import (
    SplitSpec,
    evaluate,
    export_bases,
    export_paths,
    write_boxplot_csv,
    write_results_csv,
)
from .model_io import load_model, model_to_text, save_model
from .pipeline import fit, project

__all__ = ["main", "main_entry"]

_EVAL_KEYS = ("seed", "repeats", "per_class_train", "dim_grid")

_EVAL_DEFAULTS = {
    "seed": "0",
    "repeats": "5",
    "per_class_train": "5",
    "dim_grid": "1,2",
}

_CONFIG_KEYS = (
    "alpha",
    "beta",
    "kappa",
    "lambda2",
    "lambda1",
    "k1",
    "k2",
    "d",
    "K",
    "pca_retain",
    "eig_floor",
    "double_shrinkage_correction",
    "center_class_means",
) + _EVAL_KEYS


def _load_config_file(path: str | None) -> dict[str, str]:
    if path is None:
        return {}
    config_path = Path(path)
    if not config_path.is_file():
        raise DataError(f"config file not found: {config_path}", stage="config")
    mapping = parse_kv_lines(config_path.read_text(encoding="utf-8").splitlines())
    for key in mapping:
        if key not in _CONFIG_KEYS:
            raise DataError(f"unknown config key: {key}", stage="config")
    return mapping


def _split_config(mapping: dict[str, str], args) -> tuple[MenConfig, dict[str, str]]:
    eval_map = dict(_EVAL_DEFAULTS)
    model_map = {}
    for key, value in mapping.items():
        if key in _EVAL_KEYS:
            eval_map[key] = value
        else:
            model_map[key] = value
    cfg = config_from_mapping(model_map)
    if getattr(args, "d", None) is not None:
        cfg = cfg.with_overrides(d=args.d)
    if getattr(args, "K", None) is not None:
        cfg = cfg.with_overrides(K=args.K)
    if getattr(args, "seed", None) is not None:
        eval_map["seed"] = str(args.seed)
    return cfg, eval_map


def _ingest_auto(path: str):
    data_path = Path(path)
    if data_path.is_dir():
        return ingest(data_path, "raw-gray-images")
    if data_path.suffix.lower() == ".csv":
        return ingest(data_path, "csv-matrix")
    return ingest(data_path, "raw-gray-images")  # manifest file


def _write_report(report, model, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    export_paths(report, out_dir)
    trace_lines = ["column,loop,objective"]
    for t, trace in enumerate(report.objective_traces):
        for loop, value in enumerate(trace):
            trace_lines.append(f"{t},{loop},{repr(float(value))}")
    (out_dir / "objective_trace.csv").write_text(
        "\n".join(trace_lines) + "\n", encoding="utf-8"
    )
    cos = report.column_cosines
    angle_lines = ["col_i,col_j,cosine,angle_degrees"]
    for i in range(cos.shape[0]):
        for j in range(i + 1, cos.shape[1]):
            c = float(np.clip(abs(cos[i, j]), 0.0, 1.0))
            angle_lines.append(
                f"{i},{j},{repr(float(cos[i, j]))},{repr(float(np.degrees(np.arccos(c))))}"
            )
    (out_dir / "column_angles.csv").write_text(
        "\n".join(angle_lines) + "\n", encoding="utf-8"
    )
    (out_dir / "model.txt").write_text(model_to_text(model), encoding="utf-8")


def _cmd_fit(args) -> int:
    cfg, _ = _split_config(_load_config_file(args.config), args)
    samples = _ingest_auto(args.data)
    model, report = fit(samples, cfg, threads=args.threads)
    model_path = Path(args.model)
    if model_path.parent != Path(""):
        model_path.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, model_path)
    report_dir = Path(args.out) if args.out else model_path.with_suffix(
        model_path.suffix + ".report"
    )
    _write_report(report, model, report_dir)
    print(f"model={model_path} columns={model.values.shape[1]} "
          f"nonzeros={','.join(str(s) for s in model.sparsity)}")
    return 0


def _cmd_project(args) -> int:
    model = load_model(args.model)
    samples = _ingest_auto(args.data)
    embedding = project(model, samples)
    lines = [",".join(repr(float(v)) for v in row) for row in embedding]
    out_path = Path(args.out)
    if out_path.parent != Path(""):
        out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"embedding={out_path} shape={embedding.shape[0]}x{embedding.shape[1]}")
    return 0


def _cmd_evaluate(args) -> int:
    cfg, eval_map = _split_config(_load_config_file(args.config), args)
    samples = _ingest_auto(args.data)
    try:
        seed = int(eval_map["seed"])
        repeats = int(eval_map["repeats"])
        per_class_train = int(eval_map["per_class_train"])
        dim_grid = [int(v) for v in eval_map["dim_grid"].split(",") if v.strip() != ""]
    except ValueError as exc:
        raise DataError(f"bad evaluation config value ({exc})", stage="config") from exc
    split = SplitSpec(per_class_train=per_class_train, seed=seed, repeats=repeats)
    result = evaluate(samples, cfg, split, dim_grid, threads=args.threads)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_results_csv(result, out_dir / "results.csv")
    write_boxplot_csv(result, out_dir / "boxplot.csv")
    summary = f"best={result.best_rate:.4f}@dim={result.best_dim}"
    (out_dir / "summary.txt").write_text(summary + "\n", encoding="utf-8")
    print(summary)
    return 0


def _parse_shape(text: str | None, p: int) -> tuple[int, int]:
    if text:
        parts = text.lower().split("x")
        if len(parts) != 2:
            raise DataError(f"--shape must be ROWSxCOLS, got {text!r}")
        try:
            shape = (int(parts[0]), int(parts[1]))
        except ValueError as exc:
            raise DataError(f"--shape must be ROWSxCOLS, got {text!r}") from exc
        return shape
    side = int(round(np.sqrt(p)))
    if side * side != p:
        raise DataError(
            f"raw dimension {p} is not square; pass --shape ROWSxCOLS explicitly"
        )
    return side, side


def _cmd_export_bases(args) -> int:
    model = load_model(args.model)
    raw_dim = model.raw_columns().shape[0]
    shape = _parse_shape(args.shape, raw_dim)
    paths = export_bases(model, shape, args.out)
    print(f"bases={len(paths)} dir={args.out}")
    return 0


def _cmd_export_paths(args) -> int:
    cfg, _ = _split_config(_load_config_file(args.config), args)
    samples = _ingest_auto(args.data)
    _, report = fit(samples, cfg, threads=args.threads)
    paths = export_paths(report, args.out)
    print(f"paths={len(paths)} dir={args.out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="men",
        description="Sparse discriminative dimensionality reduction "
        "(fit / project / evaluate / export-bases / export-paths)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, config=False, data=False, model=False, out=False, out_required=False):
        if config:
            p.add_argument("--config", help="key=value config file")
        if data:
            p.add_argument("--data", required=True, help="dataset path (csv, image dir, or manifest)")
        if model:
            p.add_argument("--model", required=True, help="model file path")
        if out:
            p.add_argument("--out", required=out_required, help="output path or directory")
        p.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")
        p.add_argument("--d", type=int, help="override projection dimension d")
        p.add_argument("--K", type=int, help="override per-column entry budget K")
        p.add_argument("--seed", type=int, help="override evaluation seed")

    p_fit = sub.add_parser("fit", help="fit a model and write it with a report directory")
    common(p_fit, config=True, data=True, model=True, out=True)
    p_fit.set_defaults(func=_cmd_fit)

    p_project = sub.add_parser("project", help="embed a dataset with a fitted model")
    common(p_project, data=True, model=True, out=True, out_required=True)
    p_project.set_defaults(func=_cmd_project)

    p_eval = sub.add_parser("evaluate", help="run the repeated split/fit/score protocol")
    common(p_eval, config=True, data=True, out=True, out_required=True)
    p_eval.set_defaults(func=_cmd_evaluate)

    p_bases = sub.add_parser("export-bases", help="write projection columns as graymap images")
    common(p_bases, model=True, out=True, out_required=True)
    p_bases.add_argument("--shape", help="image shape ROWSxCOLS (default: square)")
    p_bases.set_defaults(func=_cmd_export_bases)

    p_paths = sub.add_parser("export-paths", help="write coefficient-path CSVs for a fit")
    common(p_paths, config=True, data=True, out=True, out_required=True)
    p_paths.set_defaults(func=_cmd_export_paths)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: stage={exc.stage or 'input'} reason={exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"error: stage={exc.stage or 'numerical'} reason={exc}", file=sys.stderr)
        return 2
    except MenError as exc:
        print(f"error: stage={exc.stage or 'internal'} reason={exc}", file=sys.stderr)
        return 2


def main_entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    main_entry()
