"""Synthetic identity-clustered data with known per-sample corruption.

Identity centers are drawn uniformly on the unit sphere; each sample adds a
noise vector of controlled length to its center and renormalizes. The noise
length is an exactly controllable, dimension-independent corruption knob,
so the negated noise level serves as ground-truth quality for every
property test and desk-scale experiment.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import EmbeddingDataset
from .errors import ValidationError


@dataclass(frozen=True)
class SynthConfig:
    num_identities: int
    samples_per_identity: int
    dim: int
    noise_min: float
    noise_max: float
    seed: int

    def __post_init__(self) -> None:
        if self.num_identities < 2:
            raise ValidationError("need at least 2 identities")
        if self.samples_per_identity < 2:
            raise ValidationError("need at least 2 samples per identity")
        if self.dim < 2:
            raise ValidationError("need dim >= 2")
        if not 0.0 <= self.noise_min <= self.noise_max:
            raise ValidationError(
                f"need 0 <= noise_min <= noise_max, got [{self.noise_min}, {self.noise_max}]"
            )


@dataclass
class SynthTruth:
    """Injected corruption per sample; quality ground truth is its negation."""

    noise_level: np.ndarray
    truth_quality: np.ndarray


def generate(cfg: SynthConfig) -> tuple[EmbeddingDataset, SynthTruth]:
    """Deterministically generate a dataset and its corruption ground truth.

    Each sample is normalize(center + sigma * u) with u a uniformly random
    unit direction and sigma drawn uniformly from the configured noise
    range, so sigma is exactly the noise-to-signal length ratio.
    """
    rng = np.random.default_rng(cfg.seed)
    centers = rng.standard_normal((cfg.num_identities, cfg.dim))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    n = cfg.num_identities * cfg.samples_per_identity
    identities = np.repeat(np.arange(cfg.num_identities, dtype=np.int64),
                           cfg.samples_per_identity)
    sigma = rng.uniform(cfg.noise_min, cfg.noise_max, size=n)
    directions = rng.standard_normal((n, cfg.dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    emb = centers[identities] + sigma[:, None] * directions
    ds = EmbeddingDataset.from_arrays(emb, identities)
    truth = SynthTruth(noise_level=sigma, truth_quality=-sigma)
    return ds, truth


def write_truth(truth: SynthTruth, ds: EmbeddingDataset, path: str | Path) -> None:
    """Write ``index,identity,noise,truth_quality`` rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "identity", "noise", "truth_quality"])
        for i in range(ds.n):
            writer.writerow(
                [
                    i,
                    int(ds.identities[i]),
                    f"{truth.noise_level[i]:.17g}",
                    f"{truth.truth_quality[i]:.17g}",
                ]
            )
