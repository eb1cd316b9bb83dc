"""Command-line front end for the label/eval/regression pipeline.

Subcommands: ``synth | labels | train | predict | evrc | aoc | oracle``.
Every run writes its primary artifacts plus a reproducibility manifest
(full config including defaulted seeds, sha256 of each output, tool
version). Outputs are byte-identical across reruns and thread counts;
only the manifest timestamp varies.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from scipy.stats import spearmanr

from . import __version__
from .dataset import SamplingConfig, load_dataset, save_dataset
from .errors import SddqError
from .labels import generate_labels, read_labels, write_labels
from .recognition_eval import (
    aoc_from_arrays,
    evrc,
    fmr_grid_linear,
    fmr_grid_log,
    fnmr_diff_oracle_all,
    read_curve,
    write_curve,
)
from .regressor import TrainConfig, load_model, predict, save_model, train
from .synth import SynthConfig, generate, write_truth

DATASET_BASENAMES = ("dataset.sddq", "dataset.csv")


class _Parser(argparse.ArgumentParser):
    # Single-line machine-parsable failures instead of argparse's usage dump.
    def error(self, message):
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(2)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (SddqError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> _Parser:
    parser = _Parser(prog="sddq", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"sddq {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic clustered dataset")
    p.add_argument("--ids", type=int, required=True, help="number of identities")
    p.add_argument("--per-id", type=int, required=True, help="samples per identity")
    p.add_argument("--dim", type=int, required=True, help="embedding dimension")
    p.add_argument("--noise", default="0.1:1.5", help="noise range MIN:MAX")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("binary", "csv"), default="binary")
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.set_defaults(handler=_cmd_synth)

    p = sub.add_parser("labels", help="compute quality pseudo-labels")
    p.add_argument("data", help="dataset file or directory")
    p.add_argument("--mode", choices=("exact", "sampled"), default="sampled")
    p.add_argument("--m", type=int, default=24, help="pairs per side (sampled mode)")
    p.add_argument("--K", type=int, default=12, help="repeat count (sampled mode)")
    p.add_argument("--seed", type=int, default=0, help="master seed (sampled mode)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("-o", "--out", default="labels.csv")
    p.set_defaults(handler=_cmd_labels)

    p = sub.add_parser("train", help="train the quality regressor on pseudo-labels")
    p.add_argument("data", help="dataset file or directory")
    p.add_argument("--labels", required=True, help="labels CSV from the labels command")
    p.add_argument("--zeta", type=float, default=TrainConfig.zeta)
    p.add_argument("--lr", type=float, default=TrainConfig.learning_rate)
    p.add_argument("--epochs", type=int, default=TrainConfig.epochs)
    p.add_argument("--batch-size", type=int, default=TrainConfig.batch_size)
    p.add_argument("--hidden", type=int, default=TrainConfig.hidden_width)
    p.add_argument("--seed", type=int, default=TrainConfig.seed)
    p.add_argument("-o", "--out", default="model.json")
    p.set_defaults(handler=_cmd_train)

    p = sub.add_parser("predict", help="score samples with a trained regressor")
    p.add_argument("data", help="dataset file or directory")
    p.add_argument("--model", required=True)
    p.add_argument("-o", "--out", default="predictions.csv")
    p.set_defaults(handler=_cmd_predict)

    p = sub.add_parser("evrc", help="error-versus-reject curves for a scorer")
    p.add_argument("data", help="dataset file or directory")
    p.add_argument("--labels", required=True, help="scores CSV (labels or predictions)")
    p.add_argument("--fmr", default="1e-2,1e-3,1e-4", help="fixed FMRs, comma separated")
    p.add_argument("--phi-grid", default="0:0.95:0.01", help="START:STOP:STEP")
    p.add_argument("--a", type=float, default=0.0, help="AOC lower bound")
    p.add_argument("--b", type=float, default=0.95, help="AOC upper bound")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.set_defaults(handler=_cmd_evrc)

    p = sub.add_parser("aoc", help="area over a curve file")
    p.add_argument("curve", help="curve CSV from the evrc command")
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=0.95)
    p.add_argument("-o", "--out", default=None, help="optional JSON output path")
    p.set_defaults(handler=_cmd_aoc)

    p = sub.add_parser("oracle", help="leave-one-out FNMR-difference reference scores")
    p.add_argument("data", help="dataset file or directory")
    p.add_argument("--labels", required=True, help="labels CSV to correlate against")
    p.add_argument("--fmr-grid", default="log:1e-3:1:20", help="log|lin:LO:HI:COUNT")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.set_defaults(handler=_cmd_oracle)

    return parser


def _cmd_synth(args) -> int:
    noise_min, noise_max = _parse_noise(args.noise)
    cfg = SynthConfig(
        num_identities=args.ids,
        samples_per_identity=args.per_id,
        dim=args.dim,
        noise_min=noise_min,
        noise_max=noise_max,
        seed=args.seed,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ds, truth = generate(cfg)
    data_path = out / ("dataset.sddq" if args.format == "binary" else "dataset.csv")
    save_dataset(ds, data_path, fmt=args.format)
    truth_path = out / "truth.csv"
    write_truth(truth, ds, truth_path)
    _write_manifest(
        out / "manifest.json",
        command="synth",
        config={
            "ids": args.ids,
            "per_id": args.per_id,
            "dim": args.dim,
            "noise": args.noise,
            "seed": args.seed,
            "format": args.format,
            "out": str(out),
        },
        outputs=[data_path, truth_path],
    )
    return 0


def _cmd_labels(args) -> int:
    ds = load_dataset(_resolve_dataset(args.data))
    cfg = SamplingConfig(m=args.m, K=args.K, master_seed=args.seed)
    labels = generate_labels(ds, mode=args.mode, cfg=cfg, threads=args.threads)
    out = Path(args.out)
    sidecar = write_labels(labels, ds, out)
    _write_manifest(
        out.parent / f"{out.stem}.manifest.json",
        command="labels",
        config={
            "data": str(args.data),
            "mode": args.mode,
            "m": args.m,
            "K": args.K,
            "seed": args.seed,
            "threads": args.threads,
            "out": str(out),
        },
        outputs=[out, sidecar],
    )
    return 0


def _cmd_train(args) -> int:
    ds = load_dataset(_resolve_dataset(args.data))
    indices, _, scores = read_labels(args.labels)
    cfg = TrainConfig(
        zeta=args.zeta,
        learning_rate=args.lr,
        epochs=args.epochs,
        batch_size=args.batch_size,
        seed=args.seed,
        hidden_width=args.hidden,
    )
    model, history = train(ds.embeddings[indices], scores, cfg)
    out = Path(args.out)
    save_model(model, out, config=cfg)
    log_path = out.parent / f"{out.stem}.training_log.csv"
    with open(log_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "mean_loss"])
        for epoch, loss in enumerate(history):
            writer.writerow([epoch, f"{loss:.17g}"])
    _write_manifest(
        out.parent / f"{out.stem}.manifest.json",
        command="train",
        config={
            "data": str(args.data),
            "labels": str(args.labels),
            "zeta": args.zeta,
            "lr": args.lr,
            "epochs": args.epochs,
            "batch_size": args.batch_size,
            "hidden": args.hidden,
            "seed": args.seed,
            "out": str(out),
        },
        outputs=[out, log_path],
    )
    return 0


def _cmd_predict(args) -> int:
    ds = load_dataset(_resolve_dataset(args.data))
    model = load_model(args.model)
    scores = predict(model, ds.embeddings)
    out = Path(args.out)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "score"])
        for i, s in enumerate(scores):
            writer.writerow([i, f"{s:.17g}"])
    _write_manifest(
        out.parent / f"{out.stem}.manifest.json",
        command="predict",
        config={"data": str(args.data), "model": str(args.model), "out": str(out)},
        outputs=[out],
    )
    return 0


def _cmd_evrc(args) -> int:
    ds = load_dataset(_resolve_dataset(args.data))
    indices, _, scores = read_labels(args.labels)
    fmrs = _parse_float_list(args.fmr)
    phi_grid = _parse_phi_grid(args.phi_grid)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    outputs = []
    for fixed in fmrs:
        curve = evrc(
            ds,
            indices,
            scores,
            fixed_fmr=fixed,
            phi_grid=phi_grid,
            quality_source=Path(args.labels).name,
            threads=args.threads,
        )
        value = aoc_from_arrays(curve.phis, curve.fnmrs, a=args.a, b=args.b)
        path = out / f"evrc_fmr{fixed:g}.csv"
        sidecar = write_curve(curve, path, a=args.a, b=args.b, aoc_value=value)
        outputs += [path, sidecar]
    _write_manifest(
        out / "manifest.json",
        command="evrc",
        config={
            "data": str(args.data),
            "labels": str(args.labels),
            "fmr": args.fmr,
            "phi_grid": args.phi_grid,
            "a": args.a,
            "b": args.b,
            "threads": args.threads,
            "out": str(out),
        },
        outputs=outputs,
    )
    return 0


def _cmd_aoc(args) -> int:
    curve = read_curve(args.curve)
    value = aoc_from_arrays(curve.phis, curve.fnmrs, a=args.a, b=args.b)
    print(value)
    if args.out:
        out = Path(args.out)
        with open(out, "w") as fh:
            json.dump({"a": args.a, "b": args.b, "aoc": value}, fh, sort_keys=True)
            fh.write("\n")
        _write_manifest(
            out.parent / f"{out.stem}.manifest.json",
            command="aoc",
            config={"curve": str(args.curve), "a": args.a, "b": args.b, "out": str(out)},
            outputs=[out],
        )
    return 0


def _cmd_oracle(args) -> int:
    ds = load_dataset(_resolve_dataset(args.data))
    indices, raw, scores = read_labels(args.labels)
    grid = _parse_grid_spec(args.fmr_grid)
    values = fnmr_diff_oracle_all(ds, grid, indices=indices, threads=args.threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "oracle.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "identity", "oracle_value"])
        for i, v in zip(indices, values):
            writer.writerow([int(i), int(ds.identities[i]), f"{v:.17g}"])
    report = {
        "n_samples": int(indices.size),
        "fmr_grid": args.fmr_grid,
        "spearman_vs_raw_wd": float(spearmanr(values, raw).statistic),
        "spearman_vs_score": float(spearmanr(values, scores).statistic),
    }
    report_path = out / "oracle_report.json"
    with open(report_path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_manifest(
        out / "manifest.json",
        command="oracle",
        config={
            "data": str(args.data),
            "labels": str(args.labels),
            "fmr_grid": args.fmr_grid,
            "threads": args.threads,
            "out": str(out),
        },
        outputs=[csv_path, report_path],
    )
    return 0


def _resolve_dataset(path: str) -> Path:
    p = Path(path)
    if p.is_dir():
        for name in DATASET_BASENAMES:
            if (p / name).exists():
                return p / name
        raise FileNotFoundError(f"no {' or '.join(DATASET_BASENAMES)} in {p}")
    if not p.exists():
        raise FileNotFoundError(p)
    return p


def _parse_noise(spec: str) -> tuple[float, float]:
    parts = spec.split(":")
    if len(parts) != 2:
        raise ValueError(f"noise spec must be MIN:MAX, got {spec!r}")
    return float(parts[0]), float(parts[1])


def _parse_float_list(spec: str) -> list[float]:
    try:
        values = [float(v) for v in spec.split(",") if v]
    except ValueError:
        raise ValueError(f"bad float list {spec!r}") from None
    if not values:
        raise ValueError(f"empty float list {spec!r}")
    return values


def _parse_phi_grid(spec: str) -> np.ndarray:
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"phi grid spec must be START:STOP:STEP, got {spec!r}")
    start, stop, step = (float(v) for v in parts)
    if step <= 0 or stop < start:
        raise ValueError(f"bad phi grid spec {spec!r}")
    count = int(round((stop - start) / step))
    # rounding lands multiples like 95*0.01 exactly on 0.95
    grid = np.round(start + step * np.arange(count + 1), 12)
    return grid[grid < 1.0]


def _parse_grid_spec(spec: str) -> np.ndarray:
    parts = spec.split(":")
    if len(parts) != 4 or parts[0] not in ("log", "lin"):
        raise ValueError(f"fmr grid spec must be log|lin:LO:HI:COUNT, got {spec!r}")
    lo, hi, count = float(parts[1]), float(parts[2]), int(parts[3])
    builder = fmr_grid_log if parts[0] == "log" else fmr_grid_linear
    return builder(lo, hi, count)


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    digest.update(path.read_bytes())
    return digest.hexdigest()


def _write_manifest(path: Path, command: str, config: dict, outputs: list[Path]) -> None:
    manifest = {
        "command": command,
        "version": __version__,
        "config": config,
        "outputs": {p.name: f"sha256:{_sha256(p)}" for p in outputs},
        "created_utc": datetime.now(timezone.utc).isoformat(),
    }
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


if __name__ == "__main__":
    raise SystemExit(main())
