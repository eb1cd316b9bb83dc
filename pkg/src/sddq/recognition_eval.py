"""Biometric error metrics and error-versus-reject evaluation.

False match rate (FMR) and false no-match rate (FNMR) use strict
inequalities against the decision threshold. Threshold inversion picks the
smallest candidate similarity whose FMR does not exceed the target, with no
interpolation between observed values, so results are bit-reproducible.

The error-versus-reject curve (EVRC) reports FNMR at a fixed FMR while the
lowest-scoring fraction phi of samples is rejected; the area-over-curve
summary (AOC) is 1 minus the trapezoidal integral of the curve. The
FNMR-difference oracle scores one sample by how much the remaining set's
FNMR rises when that sample is excluded, averaged over a grid of target
FMRs: an expensive leave-one-out quality measure used to validate cheaper
scorers.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset import EmbeddingDataset
from .errors import PairingError, ValidationError


@dataclass
class PairPool:
    """All genuine-pair and impostor-pair similarities over a sample set."""

    pos_sims: np.ndarray
    neg_sims: np.ndarray
    provenance: str = ""


@dataclass(frozen=True)
class EvrcPoint:
    phi: float
    threshold: float
    fnmr: float


@dataclass
class EvrcCurve:
    """FNMR as a function of rejection ratio at a fixed FMR."""

    fixed_fmr: float | None
    points: list[EvrcPoint]
    quality_source: str = ""
    warnings: list[str] = field(default_factory=list)

    @property
    def phis(self) -> np.ndarray:
        return np.asarray([p.phi for p in self.points], dtype=np.float64)

    @property
    def fnmrs(self) -> np.ndarray:
        return np.asarray([p.fnmr for p in self.points], dtype=np.float64)


def fmr(pool: PairPool, xi: float) -> float:
    """Fraction of impostor similarities strictly above the threshold."""
    neg = np.asarray(pool.neg_sims, dtype=np.float64)
    if neg.size == 0:
        raise ValidationError("fmr: empty negative pool")
    return float(np.count_nonzero(neg > xi)) / neg.size


def fnmr(pool: PairPool, xi: float) -> float:
    """Fraction of genuine similarities strictly below the threshold."""
    pos = np.asarray(pool.pos_sims, dtype=np.float64)
    if pos.size == 0:
        raise ValidationError("fnmr: empty positive pool")
    return float(np.count_nonzero(pos < xi)) / pos.size


def threshold_at_fmr(pool: PairPool, target_fmr: float) -> float:
    """Smallest candidate threshold whose FMR does not exceed the target.

    Candidates are the observed negative similarities plus 1.0 (where FMR
    is always 0), so a feasible answer always exists.
    """
    neg = np.sort(np.asarray(pool.neg_sims, dtype=np.float64))
    if neg.size == 0:
        raise ValidationError("threshold_at_fmr: empty negative pool")
    if not 0.0 < target_fmr <= 1.0:
        raise ValidationError(f"target_fmr must lie in (0, 1], got {target_fmr}")
    return _threshold_sorted(neg, target_fmr)


def _threshold_sorted(neg_sorted: np.ndarray, target: float) -> float:
    n = neg_sorted.size
    candidates = np.concatenate([neg_sorted, [1.0]])
    # count strictly above candidate = n - rank of last element <= candidate
    above = n - np.searchsorted(neg_sorted, candidates, side="right")
    ok = np.nonzero(above <= target * n)[0]
    return float(candidates[ok[0]])


def pair_pool(
    ds: EmbeddingDataset, subset: np.ndarray | None = None, provenance: str = ""
) -> PairPool:
    """Similarities of every unordered pair within ``subset`` (default: all)."""
    if subset is None:
        subset = np.arange(ds.n)
    subset = np.asarray(subset, dtype=np.int64)
    emb = ds.embeddings[subset]
    ids = ds.identities[subset]
    gram = np.clip(emb @ emb.T, -1.0, 1.0)
    iu, ju = np.triu_indices(len(subset), k=1)
    sims = gram[iu, ju]
    same = ids[iu] == ids[ju]
    return PairPool(pos_sims=sims[same], neg_sims=sims[~same], provenance=provenance)


def evrc(
    ds: EmbeddingDataset,
    sample_indices: np.ndarray,
    scores: np.ndarray,
    fixed_fmr: float,
    phi_grid,
    quality_source: str = "",
    threads: int = 1,
) -> EvrcCurve:
    """Error-versus-reject curve over the scored samples.

    At each rejection ratio phi the ceil((1-phi)*n) highest-scoring samples
    are kept; score ties are resolved by rejecting ascending sample index
    first. Pairs with either endpoint rejected leave the pool, the threshold
    is re-inverted at the fixed FMR, and the FNMR of the kept pool is
    recorded. Ratios whose kept subset has fewer than 2 samples or no
    positive (or negative) pair are omitted with a warning.
    """
    sample_indices = np.asarray(sample_indices, dtype=np.int64)
    scores = np.asarray(scores, dtype=np.float64)
    if sample_indices.shape != scores.shape:
        raise ValidationError("sample_indices and scores must align")
    if not 0.0 < fixed_fmr <= 1.0:
        raise ValidationError(f"fixed_fmr must lie in (0, 1], got {fixed_fmr}")
    phis = np.asarray(list(phi_grid), dtype=np.float64)
    if np.any((phis < 0.0) | (phis >= 1.0)):
        raise ValidationError("phi grid values must lie in [0, 1)")
    phis = np.unique(phis)
    n_eval = sample_indices.size

    emb = ds.embeddings[sample_indices]
    ids = ds.identities[sample_indices]
    gram = np.clip(emb @ emb.T, -1.0, 1.0)
    same = ids[:, None] == ids[None, :]
    # rejection order: lowest score first, ties by ascending sample index
    order = np.lexsort((sample_indices, scores))

    def point_at(phi: float) -> tuple[EvrcPoint | None, str | None]:
        keep = math.ceil((1.0 - phi) * n_eval)
        kept = np.sort(order[n_eval - keep :])
        if keep < 2:
            return None, f"phi={phi:g}: fewer than 2 samples kept"
        sub = gram[np.ix_(kept, kept)]
        sub_same = same[np.ix_(kept, kept)]
        iu, ju = np.triu_indices(keep, k=1)
        sims = sub[iu, ju]
        pos = sims[sub_same[iu, ju]]
        neg = sims[~sub_same[iu, ju]]
        if pos.size == 0:
            return None, f"phi={phi:g}: kept subset has no positive pairs"
        if neg.size == 0:
            return None, f"phi={phi:g}: kept subset has no negative pairs"
        xi = _threshold_sorted(np.sort(neg), fixed_fmr)
        value = float(np.count_nonzero(pos < xi)) / pos.size
        return EvrcPoint(phi=float(phi), threshold=xi, fnmr=value), None

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(point_at, phis))
    else:
        results = [point_at(phi) for phi in phis]

    points = [pt for pt, _ in results if pt is not None]
    warnings = [msg for _, msg in results if msg is not None]
    return EvrcCurve(
        fixed_fmr=fixed_fmr,
        points=points,
        quality_source=quality_source,
        warnings=warnings,
    )


def aoc(curve: EvrcCurve, a: float = 0.0, b: float = 0.95) -> float:
    """Area over the curve: 1 minus the trapezoidal integral of FNMR on [a, b]."""
    return aoc_from_arrays(curve.phis, curve.fnmrs, a=a, b=b)


def aoc_from_arrays(phis: np.ndarray, fnmrs: np.ndarray, a: float, b: float) -> float:
    """Trapezoidal AOC over curve points restricted to [a, b].

    Endpoint values are linearly interpolated when the curve brackets them;
    when the curve stops short of a bound, integration is clipped to the
    covered subrange rather than extrapolated.
    """
    if a >= b:
        raise ValidationError(f"need a < b, got a={a}, b={b}")
    phis = np.asarray(phis, dtype=np.float64)
    fnmrs = np.asarray(fnmrs, dtype=np.float64)
    if phis.size != fnmrs.size:
        raise ValidationError("phi and fnmr arrays must align")
    order = np.argsort(phis)
    phis, fnmrs = phis[order], fnmrs[order]
    inside = (phis >= a) & (phis <= b)
    if np.count_nonzero(inside) < 2:
        raise ValidationError(f"fewer than 2 curve points inside [{a}, {b}]")
    lo = max(a, float(phis[0]))
    hi = min(b, float(phis[-1]))
    grid = np.concatenate([[lo], phis[(phis > lo) & (phis < hi)], [hi]])
    values = np.interp(grid, phis, fnmrs)
    return 1.0 - float(np.trapezoid(values, grid))


def fmr_grid_log(lo: float = 1e-3, hi: float = 1.0, count: int = 20) -> np.ndarray:
    """Log-spaced target-FMR grid (default 20 points on [1e-3, 1])."""
    if not 0.0 < lo < hi <= 1.0:
        raise ValidationError(f"need 0 < lo < hi <= 1, got lo={lo}, hi={hi}")
    return np.logspace(np.log10(lo), np.log10(hi), count)


def fmr_grid_linear(lo: float = 1e-3, hi: float = 1.0, count: int = 20) -> np.ndarray:
    if not 0.0 < lo < hi <= 1.0:
        raise ValidationError(f"need 0 < lo < hi <= 1, got lo={lo}, hi={hi}")
    return np.linspace(lo, hi, count)


def fnmr_diff_oracle(ds: EmbeddingDataset, i: int, fmr_grid) -> float:
    """Leave-one-out quality of sample i from FNMR differences.

    For each target FMR, both the full pool and the pool without sample i
    are thresholded at their own inverted FMR; the oracle averages the
    excluded-set FNMR minus the full-set FNMR over the grid. Higher values
    mean the sample's presence was helping recognition, making this a
    brute-force quality reference for cheap per-sample scorers.
    """
    return float(fnmr_diff_oracle_all(ds, fmr_grid, indices=[i])[0])


def fnmr_diff_oracle_all(
    ds: EmbeddingDataset, fmr_grid, indices=None, threads: int = 1
) -> np.ndarray:
    """Vector of leave-one-out oracle values; shares pair precomputation."""
    grid = np.asarray(list(fmr_grid), dtype=np.float64)
    if grid.size == 0:
        raise ValidationError("empty FMR grid")
    if np.any((grid <= 0.0) | (grid > 1.0)):
        raise ValidationError("FMR grid values must lie in (0, 1]")
    if indices is None:
        indices = np.arange(ds.n)
    indices = np.asarray(indices, dtype=np.int64)

    gram = np.clip(ds.embeddings @ ds.embeddings.T, -1.0, 1.0)
    iu, ju = np.triu_indices(ds.n, k=1)
    sims = gram[iu, ju]
    is_pos = ds.identities[iu] == ds.identities[ju]
    pos_all = np.sort(sims[is_pos])
    neg_all = np.sort(sims[~is_pos])
    if pos_all.size == 0:
        raise PairingError("dataset has no positive pairs")
    if neg_all.size == 0:
        raise PairingError("dataset has a single identity; no negative pairs")
    full = np.array(
        [_fnmr_sorted(pos_all, _threshold_sorted(neg_all, t)) for t in grid]
    )

    def value_for(i: int) -> float:
        if ds.class_size(i) < 2:
            raise PairingError(f"sample {i} has a singleton identity")
        keep = (iu != i) & (ju != i)
        pos = np.sort(sims[keep & is_pos])
        neg = np.sort(sims[keep & ~is_pos])
        if pos.size == 0:
            raise PairingError(f"removing sample {i} leaves no positive pairs")
        sub = np.array([_fnmr_sorted(pos, _threshold_sorted(neg, t)) for t in grid])
        return float(np.mean(sub - full))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(value_for, indices))
    else:
        out = [value_for(int(i)) for i in indices]
    return np.asarray(out, dtype=np.float64)


def _fnmr_sorted(pos_sorted: np.ndarray, xi: float) -> float:
    return float(np.searchsorted(pos_sorted, xi, side="left")) / pos_sorted.size


def write_curve(
    curve: EvrcCurve,
    path: str | Path,
    a: float | None = None,
    b: float | None = None,
    aoc_value: float | None = None,
) -> Path:
    """Write ``phi,threshold,fnmr`` rows plus a JSON sidecar; returns the sidecar."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["phi", "threshold", "fnmr"])
        for pt in curve.points:
            writer.writerow([f"{pt.phi:.17g}", f"{pt.threshold:.17g}", f"{pt.fnmr:.17g}"])
    sidecar = path.with_suffix(".json")
    meta = {
        "fixed_fmr": curve.fixed_fmr,
        "a": a,
        "b": b,
        "aoc": aoc_value,
        "quality_source": curve.quality_source,
        "warnings": curve.warnings,
    }
    with open(sidecar, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return sidecar


def read_curve(path: str | Path) -> EvrcCurve:
    """Read a curve CSV (sidecar optional; fixed_fmr is None without it)."""
    path = Path(path)
    points: list[EvrcPoint] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["phi", "threshold", "fnmr"]:
            raise ValidationError(f"{path.name}: unexpected curve header {header!r}")
        for row in reader:
            if not row:
                continue
            points.append(
                EvrcPoint(phi=float(row[0]), threshold=float(row[1]), fnmr=float(row[2]))
            )
    fixed = None
    source = ""
    sidecar = path.with_suffix(".json")
    if sidecar.exists():
        meta = json.loads(sidecar.read_text())
        fixed = meta.get("fixed_fmr")
        source = meta.get("quality_source", "")
    return EvrcCurve(fixed_fmr=fixed, points=points, quality_source=source)
