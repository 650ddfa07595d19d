"""Command-line front end.

    qsanfis cluster      --config configs/mpg.cfg --out out/cluster
    qsanfis train        --config configs/mpg.cfg --out out/train
    qsanfis predict      --model out/train/model.json --data out/train/test.csv --out pred.csv
    qsanfis sweep-sigma  --config configs/mpg.cfg --sigmas 0.1,0.2,0.3 --out out/sweep
    qsanfis sweep-ra     --config configs/mpg.cfg --ras 0.27,0.28,0.29 --out out/ra
    qsanfis compare      --config configs/mpg.cfg --out out/compare

Flags override config-file values, which override built-in defaults.
"""

from __future__ import annotations

import argparse
import csv
import logging
import shutil
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from .anfis import AnfisModel, predict_batch
from .dataset import NormParams, load_csv, write_csv
from .pipeline import (METHODS, PipelineConfig, Prepared, TrainRun, prepare, read_config_file,
                       run_cluster, run_train)

logger = logging.getLogger("qsanfis")

DEFAULT_SIGMAS = tuple(np.round(np.arange(0.10, 0.501, 0.05), 2).tolist())

# config key -> parser for its string form
_COERCE = {
    "data": str, "target": str, "missing_token": str, "out": str, "order": str, "centers": str,
    "inputs": lambda s: tuple(c.strip() for c in s.split(",") if c.strip()) or None,
    "sigma": float, "ra": float, "rb": float, "min_separation": float, "lr": float,
    "ridge": float, "gd_eta": float, "epochs": int, "gd_steps": int,
    "swap_split": lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
}


class Outputs:
    """Files and directories created by one command, removed if it fails."""

    def __init__(self):
        self.paths: list[Path] = []

    def file(self, path: Path) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        self.paths.append(path)
        return path

    def directory(self, path: Path) -> Path:
        if not path.exists():
            self.paths.append(path)
        path.mkdir(parents=True, exist_ok=True)
        return path

    def discard(self):
        for p in reversed(self.paths):
            if p.is_dir():
                shutil.rmtree(p, ignore_errors=True)
            elif p.exists():
                p.unlink()


@contextmanager
def outputs():
    out = Outputs()
    try:
        yield out
    except BaseException:
        out.discard()
        raise


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("pipeline")
    g.add_argument("--config", help="flat key = value file; keys mirror flag names")
    g.add_argument("--data")
    g.add_argument("--target")
    g.add_argument("--inputs", help="comma-separated input columns (default: the six MPG inputs)")
    g.add_argument("--missing-token")
    g.add_argument("--sigma", type=float, help="quantum kernel width")
    g.add_argument("--ra", type=float, help="subtractive neighbourhood radius")
    g.add_argument("--rb", type=float, help="subtractive revision radius (default 1.5 * ra)")
    g.add_argument("--min-separation", type=float)
    g.add_argument("--order", choices=["zero", "first"])
    g.add_argument("--epochs", type=int)
    g.add_argument("--lr", type=float)
    g.add_argument("--ridge", type=float)
    g.add_argument("--swap-split", action="store_true", default=None)
    g.add_argument("--centers", choices=METHODS)
    g.add_argument("--gd-steps", type=int)
    g.add_argument("--gd-eta", type=float)
    g.add_argument("--out")


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    values: dict = {}
    if getattr(args, "config", None):
        for key, raw in read_config_file(args.config).items():
            if key not in _COERCE:
                raise ValueError(f"{args.config}: unknown key {key!r}")
            values[key] = _COERCE[key](raw)
    for key in _COERCE:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = _COERCE["inputs"](v) if key == "inputs" else v
    return PipelineConfig(**values)


def _write_config(out: Outputs, directory: Path, cfg: PipelineConfig) -> None:
    out.file(directory / "config.txt").write_text("\n".join(cfg.as_lines()) + "\n")


def _write_cluster_files(out: Outputs, directory: Path, run) -> None:
    names = list(run.prepared.train.input_names)
    run.clusters.save(out.file(directory / "clusters.json"))
    run.field.write_table(out.file(directory / "potential.csv"), names)
    run.subtractive.write_trace(out.file(directory / "subtractive_trace.tsv"))


def _summary(run: TrainRun) -> str:
    r = run.report
    return (f"rules={r.rule_count} avg_test_rmse={r.avg_test_rmse!r} "
            f"final_test_rmse={r.final_test_rmse!r} final_train_rmse={r.train_rmse[-1]!r}")


def _train_into(out: Outputs, directory: Path, cfg: PipelineConfig,
                prepared: Prepared | None = None) -> TrainRun:
    out.directory(directory)
    run = run_train(cfg, prepared)
    _write_config(out, directory, cfg)
    _write_cluster_files(out, directory, run.cluster)
    p = run.cluster.prepared
    write_csv(out.file(directory / "train.csv"), p.train)
    write_csv(out.file(directory / "test.csv"), p.test)
    run.model.save(out.file(directory / "model.json"))
    run.report.write_epochs_csv(out.file(directory / "epochs.csv"))
    run.report.write_predictions_csv(out.file(directory / "predictions.csv"))
    out.file(directory / "summary.txt").write_text(_summary(run) + "\n")
    return run


def cmd_cluster(args) -> int:
    cfg = resolve_config(args)
    directory = Path(cfg.out)
    with outputs() as out:
        out.directory(directory)
        run = run_cluster(cfg)
        _write_config(out, directory, cfg)
        _write_cluster_files(out, directory, run)
    print(f"k={run.clusters.k} centers={run.clusters.center_indices}")
    return 0


def cmd_train(args) -> int:
    cfg = resolve_config(args)
    with outputs() as out:
        run = _train_into(out, Path(cfg.out), cfg)
    print(_summary(run))
    return 0


def _read_inputs(path: Path, model: AnfisModel, missing_token: str) -> tuple[np.ndarray, np.ndarray | None]:
    names = model.meta.get("input_names") or [f"x{j}" for j in range(model.input_dim)]
    target = model.meta.get("target_name")
    with path.open(newline="") as fh:
        header = [h.strip() for h in next(csv.reader(fh), [])]
    missing = [n for n in names if n not in header]
    if missing or len(names) != model.input_dim:
        raise ValueError(f"{path}: columns {missing} required by the model are absent")
    if target in header:
        d = load_csv(path, target, missing_token, names, allow_empty=True)
        return d.X, d.y
    # no target column: read the inputs alone
    proxy = names[0]
    d = load_csv(path, proxy, missing_token, names[1:], allow_empty=True)
    return np.column_stack([d.y, d.X]) if len(d) else np.zeros((0, len(names))), None


def cmd_predict(args) -> int:
    model = AnfisModel.load(args.model)
    norm = NormParams.from_dict(model.meta["norm"]) if "norm" in model.meta else None
    if (args.normalize_inputs or args.denormalize) and norm is None:
        raise ValueError(f"{args.model}: no normalisation parameters stored with the model")
    X, y = _read_inputs(Path(args.data), model, args.missing_token)
    if args.normalize_inputs:
        span = norm.span[:-1]
        X = np.where(norm.constant[:-1], 0.0, (X - norm.mins[:-1]) / span)
        if y is not None:
            y = 0.0 * y if norm.constant[-1] else (y - norm.mins[-1]) / norm.span[-1]
    pred = predict_batch(model, X)
    if args.denormalize:
        pred = norm.denormalize_target(pred)
        if y is not None:
            y = norm.denormalize_target(y)
    with outputs() as out:
        with out.file(Path(args.out)).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if y is None:
                w.writerow(["index", "predicted"])
                w.writerows([i, repr(float(p))] for i, p in enumerate(pred))
            else:
                w.writerow(["index", "actual", "predicted"])
                w.writerows([i, repr(float(a)), repr(float(p))] for i, (a, p) in enumerate(zip(y, pred)))
    print(f"wrote {len(pred)} predictions to {args.out}")
    return 0


def _float_list(text: str) -> list[float]:
    return [float(s) for s in text.split(",") if s.strip()]


def cmd_sweep_sigma(args) -> int:
    cfg = resolve_config(args)
    sigmas = _float_list(args.sigmas) if args.sigmas else list(DEFAULT_SIGMAS)
    base = Path(cfg.out)
    rows = []
    with outputs() as out:
        out.directory(base)
        prepared = prepare(cfg)
        for i, s in enumerate(sigmas):
            sub = cfg.replace(sigma=s, out=str(base / f"{i:02d}_sigma_{s!r}"))
            run = _train_into(out, Path(sub.out), sub, prepared)
            rows.append((s, run.report.rule_count, run.report.avg_test_rmse, run.report.final_test_rmse))
        with out.file(base / "sweep_sigma.csv").open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["sigma", "k", "avg_test_rmse", "final_test_rmse"])
            w.writerows([repr(s), k, repr(a), repr(f)] for s, k, a, f in rows)
    best = min(rows, key=lambda r: (r[2], r[0]))
    for s, k, a, f in rows:
        print(f"sigma={s!r} k={k} avg_test_rmse={a:.6f} final_test_rmse={f:.6f}"
              + ("  <- best" if (s, k, a, f) == best else ""))
    return 0


def cmd_sweep_ra(args) -> int:
    from .subtractive import SubtractiveConfig, select_center_count

    cfg = resolve_config(args)
    if args.ras:
        ras = _float_list(args.ras)
    else:
        ras = np.round(np.arange(args.ra_min, args.ra_max + args.ra_step / 2, args.ra_step), 6).tolist()
    X = prepare(cfg).train.X
    rows = [(ra, select_center_count(X, SubtractiveConfig(r_a=ra, r_b=None)).k) for ra in ras]
    with outputs() as out:
        out.directory(Path(cfg.out))
        with out.file(Path(cfg.out) / "sweep_ra.csv").open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["r_a", "k"])
            w.writerows([repr(ra), k] for ra, k in rows)
    for ra, k in rows:
        print(f"r_a={ra!r} k={k}")
    return 0


def cmd_compare(args) -> int:
    cfg = resolve_config(args)
    base = Path(cfg.out)
    rows = []
    with outputs() as out:
        out.directory(base)
        prepared = prepare(cfg)
        for method in METHODS:
            sub = cfg.replace(centers=method, out=str(base / method))
            run = _train_into(out, Path(sub.out), sub, prepared)
            rows.append((method, run.report.rule_count, run.report.avg_test_rmse, run.report.final_test_rmse))
        with out.file(base / "comparison.csv").open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["centers", "k", "avg_test_rmse", "final_test_rmse"])
            w.writerows([m, k, repr(a), repr(f)] for m, k, a, f in rows)
    for m, k, a, f in rows:
        print(f"{m}: k={k} avg_test_rmse={a:.6f} final_test_rmse={f:.6f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsanfis", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="select centres and write clusters + potential table")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("train", help="cluster, build and train; write model and report CSVs")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="run a saved model over a CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--missing-token", default="?")
    p.add_argument("--normalize-inputs", action="store_true",
                   help="input CSV is in raw units; apply the model's stored min/max")
    p.add_argument("--denormalize", action="store_true", help="report predictions in raw target units")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("sweep-sigma", help="train once per sigma and tabulate test RMSE")
    _add_pipeline_flags(p)
    p.add_argument("--sigmas", help=f"comma-separated list (default {','.join(map(str, DEFAULT_SIGMAS))})")
    p.set_defaults(func=cmd_sweep_sigma)

    p = sub.add_parser("sweep-ra", help="tabulate subtractive cluster count against r_a")
    _add_pipeline_flags(p)
    p.add_argument("--ras", help="comma-separated list")
    p.add_argument("--ra-min", type=float, default=0.2)
    p.add_argument("--ra-max", type=float, default=0.8)
    p.add_argument("--ra-step", type=float, default=0.0025)
    p.set_defaults(func=cmd_sweep_ra)

    p = sub.add_parser("compare", help="train with both centre-selection methods")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"qsanfis {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
