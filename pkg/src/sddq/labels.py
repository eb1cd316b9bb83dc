"""Quality pseudo-labels from similarity-distribution distance.

A sample's raw quality is the Wasserstein-1 distance between its
within-identity and cross-identity cosine-similarity distributions: large
separation means the sample is easy to recognize. Raw values are min-max
normalized to [0, 100] over the whole dataset (100 = best).

Two modes: ``exact`` uses every pair (quadratic in n), ``sampled`` draws m
partners per side, K times, and averages the raw distance over the repeats
(linear in n for fixed m, K) before the single dataset-wide normalization.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import (
    EmbeddingDataset,
    SamplingConfig,
    derive_seed,
    sample_profile,
    similarity_profile,
)
from .errors import PairingError, ValidationError
from .transport import wasserstein_1d


@dataclass
class QualityLabels:
    """Per-sample raw distances and normalized scores for the eligible samples.

    ``indices`` lists the scored sample indices ascending; singleton-identity
    samples carry no score and appear in ``skipped`` instead.
    """

    indices: np.ndarray  # (k,) int64, ascending
    raw: np.ndarray  # (k,) float64, nonnegative
    normalized: np.ndarray  # (k,) float64 in [0, 100]
    skipped: list[int]
    mode: str  # "exact" | "sampled"
    sampling: SamplingConfig | None

    def score_map(self) -> dict[int, float]:
        return {int(i): float(s) for i, s in zip(self.indices, self.normalized)}


def exact_raw_quality(ds: EmbeddingDataset, i: int) -> float:
    """W1 between sample i's exhaustive positive and negative similarity sets."""
    prof = similarity_profile(ds, i)
    return wasserstein_1d(prof.pos, prof.neg)


def sampled_raw_quality(ds: EmbeddingDataset, i: int, cfg: SamplingConfig) -> float:
    """Subsampled raw quality: mean over K repeats of W1 between m-pair draws.

    Repeat k uses the seed derived from (master_seed, i, k), so the value is
    independent of evaluation order.
    """
    total = 0.0
    for k in range(cfg.K):
        prof = sample_profile(ds, i, cfg.m, derive_seed(cfg.master_seed, i, k))
        total += wasserstein_1d(prof.pos, prof.neg)
    return total / cfg.K


def normalize_scores(raw) -> np.ndarray:
    """Min-max map onto [0, 100]; a zero range maps everything to 50."""
    arr = np.asarray(raw, dtype=np.float64)
    if arr.size == 0:
        raise ValidationError("normalize_scores: empty input")
    lo, hi = float(arr.min()), float(arr.max())
    if hi == lo:
        return np.full(arr.shape, 50.0)
    # divide before scaling: the ratio is exactly within [0, 1], so the
    # scaled score can never escape [0, 100] by a rounding ulp
    return 100.0 * ((arr - lo) / (hi - lo))


def generate_labels(
    ds: EmbeddingDataset,
    mode: str = "sampled",
    cfg: SamplingConfig | None = None,
    threads: int = 1,
) -> QualityLabels:
    """Score every sample with at least one positive partner.

    The per-sample loop is a deterministic parallel map (seeds derived per
    sample and repeat), followed by one normalization pass over all raw
    values. ``threads`` bounds the worker pool and never changes the result.
    """
    if mode not in ("exact", "sampled"):
        raise ValueError(f"mode must be 'exact' or 'sampled', got {mode!r}")
    if len(ds.identity_index) < 2:
        raise PairingError("dataset has a single identity; no negative pairs exist")
    if cfg is None:
        cfg = SamplingConfig()
    class_sizes = {ident: len(rows) for ident, rows in ds.identity_index.items()}
    eligible = [i for i in range(ds.n) if class_sizes[int(ds.identities[i])] >= 2]
    skipped = [i for i in range(ds.n) if class_sizes[int(ds.identities[i])] < 2]
    if not eligible:
        raise PairingError("no sample has a positive partner")

    if mode == "exact":
        def worker(i: int) -> float:
            return exact_raw_quality(ds, i)
    else:
        def worker(i: int) -> float:
            return sampled_raw_quality(ds, i, cfg)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            raw = np.fromiter(pool.map(worker, eligible), dtype=np.float64)
    else:
        raw = np.fromiter((worker(i) for i in eligible), dtype=np.float64)

    return QualityLabels(
        indices=np.asarray(eligible, dtype=np.int64),
        raw=raw,
        normalized=normalize_scores(raw),
        skipped=skipped,
        mode=mode,
        sampling=cfg if mode == "sampled" else None,
    )


def write_labels(labels: QualityLabels, ds: EmbeddingDataset, path: str | Path) -> Path:
    """Write ``index,identity,raw_wd,score`` rows plus a JSON config sidecar.

    Returns the sidecar path.
    """
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "identity", "raw_wd", "score"])
        for i, raw, score in zip(labels.indices, labels.raw, labels.normalized):
            writer.writerow(
                [int(i), int(ds.identities[i]), f"{raw:.17g}", f"{score:.17g}"]
            )
    sidecar = path.with_suffix(".json")
    meta = {
        "mode": labels.mode,
        "m": labels.sampling.m if labels.sampling else None,
        "K": labels.sampling.K if labels.sampling else None,
        "master_seed": labels.sampling.master_seed if labels.sampling else None,
        "skipped": labels.skipped,
        "raw_min": float(labels.raw.min()),
        "raw_max": float(labels.raw.max()),
    }
    with open(sidecar, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return sidecar


def read_labels(path: str | Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Read a labels CSV; returns (indices, raw, scores)."""
    path = Path(path)
    indices: list[int] = []
    raw: list[float] = []
    scores: list[float] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["index", "identity", "raw_wd", "score"]:
            raise ValidationError(f"{path.name}: unexpected label header {header!r}")
        for row in reader:
            if not row:
                continue
            indices.append(int(row[0]))
            raw.append(float(row[2]))
            scores.append(float(row[3]))
    return (
        np.asarray(indices, dtype=np.int64),
        np.asarray(raw, dtype=np.float64),
        np.asarray(scores, dtype=np.float64),
    )
