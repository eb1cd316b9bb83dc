"""Identity-labeled embedding datasets and per-sample similarity profiles.

Two on-disk formats are supported:

* binary: magic ``SDDQ`` | version u32 LE (=1) | n u64 LE | d u32 LE |
  n*d float32 LE values row-major | n identity ids as u64 LE
* csv: header ``id,e0,...,e{d-1}``, one row per sample

Rows are L2-normalized on load; the original norms are discarded. All
in-memory arithmetic is double precision regardless of storage precision.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateInputError, FormatError, PairingError, ValidationError

MAGIC = b"SDDQ"
BINARY_VERSION = 1

_MASK64 = 0xFFFFFFFFFFFFFFFF


def derive_seed(master_seed: int, *indices: int) -> int:
    """Mix a master seed with position indices into an independent 64-bit seed.

    Splitmix64 chaining; the result depends only on the inputs, so parallel
    execution order cannot change any derived stream.
    """
    acc = master_seed & _MASK64
    for v in indices:
        acc ^= int(v) & _MASK64
        acc = (acc + 0x9E3779B97F4A7C15) & _MASK64
        z = acc
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        acc = (z ^ (z >> 31)) & _MASK64
    return acc


@dataclass(frozen=True)
class SamplingConfig:
    """Pair-count and repeat settings for the subsampled quality estimator."""

    m: int = 24
    K: int = 12
    master_seed: int = 0

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValidationError(f"m must be >= 1, got {self.m}")
        if self.K < 1:
            raise ValidationError(f"K must be >= 1, got {self.K}")
        if not 0 <= self.master_seed <= _MASK64:
            raise ValidationError("master_seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class SimilarityProfile:
    """One sample's cosine similarities to same-identity and other-identity samples."""

    pos: np.ndarray
    neg: np.ndarray
    owner: int


@dataclass
class EmbeddingDataset:
    """n unit-norm embedding rows with integer identity labels.

    Immutable after construction; all operations on it are pure and safe to
    call concurrently.
    """

    embeddings: np.ndarray  # (n, d) float64, every row unit L2 norm
    identities: np.ndarray  # (n,) int64
    identity_index: dict[int, np.ndarray] = field(repr=False)

    @property
    def n(self) -> int:
        return self.embeddings.shape[0]

    @property
    def d(self) -> int:
        return self.embeddings.shape[1]

    def class_rows(self, identity: int) -> np.ndarray:
        """Row indices carrying the given identity, ascending."""
        return self.identity_index[identity]

    def class_size(self, i: int) -> int:
        """Number of samples sharing sample i's identity (including i)."""
        return len(self.identity_index[int(self.identities[i])])

    @classmethod
    def from_arrays(
        cls, embeddings: np.ndarray, identities: np.ndarray | list[int]
    ) -> "EmbeddingDataset":
        """Validate, L2-normalize, and index raw arrays."""
        emb = np.asarray(embeddings, dtype=np.float64)
        ids = np.asarray(identities, dtype=np.int64)
        if emb.ndim != 2:
            raise ValidationError(f"embeddings must be 2-D, got shape {emb.shape}")
        n, d = emb.shape
        if n < 2 or d < 2:
            raise ValidationError(f"need n >= 2 and d >= 2, got n={n}, d={d}")
        if ids.shape != (n,):
            raise ValidationError(
                f"identities length {ids.shape} does not match {n} embedding rows"
            )
        if not np.isfinite(emb).all():
            bad = int(np.argwhere(~np.isfinite(emb).all(axis=1))[0][0])
            raise ValidationError(f"non-finite value in embedding row {bad}")
        norms = np.linalg.norm(emb, axis=1)
        zero = np.nonzero(norms == 0.0)[0]
        if zero.size:
            raise DegenerateInputError(f"embedding row {int(zero[0])} has zero norm")
        emb = emb / norms[:, None]
        index = {
            int(v): np.nonzero(ids == v)[0] for v in np.unique(ids)
        }
        emb.setflags(write=False)
        ids.setflags(write=False)
        return cls(embeddings=emb, identities=ids, identity_index=index)


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Dot product of two unit vectors, clamped to [-1, 1]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValidationError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.clip(np.dot(a, b), -1.0, 1.0))


def similarity_profile(ds: EmbeddingDataset, i: int) -> SimilarityProfile:
    """Exhaustive similarity profile of sample i.

    ``pos`` holds similarities to every same-identity sample j != i, ``neg``
    to every other-identity sample, both in ascending j order.
    """
    _check_index(ds, i)
    if ds.class_size(i) < 2:
        raise PairingError(f"sample {i} has a singleton identity; no positive pairs")
    sims = np.clip(ds.embeddings @ ds.embeddings[i], -1.0, 1.0)
    same = ds.identities == ds.identities[i]
    pos = sims[same & (np.arange(ds.n) != i)]
    neg = sims[~same]
    return SimilarityProfile(pos=pos, neg=neg, owner=i)


def sample_profile(
    ds: EmbeddingDataset, i: int, m: int, rng_seed: int
) -> SimilarityProfile:
    """Profile of sample i from m positive and m negative partners.

    Partners are drawn uniformly with replacement over eligible rows, so the
    profile always holds exactly m values per side even for tiny classes.
    Fully determined by ``rng_seed``.
    """
    _check_index(ds, i)
    if m < 1:
        raise ValidationError(f"m must be >= 1, got {m}")
    rows = ds.class_rows(int(ds.identities[i]))
    c = len(rows)
    if c < 2:
        raise PairingError(f"sample {i} has a singleton identity; no positive pairs")
    if c == ds.n:
        raise PairingError(f"sample {i} has no eligible negative partner")
    rng = np.random.default_rng(rng_seed)
    partners = rows[rows != i]
    pos_rows = partners[rng.integers(0, c - 1, size=m)]
    # Uniform draw over the complement of the class: draw ranks in the
    # complement, then shift past each class row in ascending order.
    neg_rows = rng.integers(0, ds.n - c, size=m)
    for r in rows:
        neg_rows[neg_rows >= r] += 1
    pos = np.clip(ds.embeddings[pos_rows] @ ds.embeddings[i], -1.0, 1.0)
    neg = np.clip(ds.embeddings[neg_rows] @ ds.embeddings[i], -1.0, 1.0)
    return SimilarityProfile(pos=pos, neg=neg, owner=i)


def load_dataset(path: str | Path, fmt: str | None = None) -> EmbeddingDataset:
    """Load a dataset file; ``fmt`` is "binary", "csv", or None to sniff."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    if fmt is None:
        with open(path, "rb") as fh:
            fmt = "binary" if fh.read(4) == MAGIC else "csv"
    if fmt == "binary":
        emb, ids = _read_binary(path)
    elif fmt == "csv":
        emb, ids = _read_csv(path)
    else:
        raise ValueError(f"unknown dataset format {fmt!r}")
    return EmbeddingDataset.from_arrays(emb, ids)


def save_dataset(ds: EmbeddingDataset, path: str | Path, fmt: str = "binary") -> None:
    path = Path(path)
    if fmt == "binary":
        if int(ds.identities.min()) < 0:
            raise ValidationError(
                "binary format stores identity ids as unsigned 64-bit; "
                "negative ids need the csv format"
            )
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<IQI", BINARY_VERSION, ds.n, ds.d))
            fh.write(ds.embeddings.astype("<f4").tobytes(order="C"))
            fh.write(ds.identities.astype("<u8").tobytes())
    elif fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["id"] + [f"e{k}" for k in range(ds.d)])
            for i in range(ds.n):
                writer.writerow(
                    [int(ds.identities[i])]
                    + [f"{v:.10g}" for v in ds.embeddings[i]]
                )
    else:
        raise ValueError(f"unknown dataset format {fmt!r}")


def _read_binary(path: Path) -> tuple[np.ndarray, np.ndarray]:
    raw = path.read_bytes()
    header = struct.calcsize("<4sIQI")
    if len(raw) < header:
        raise FormatError(f"{path.name}: truncated header")
    magic, version, n, d = struct.unpack_from("<4sIQI", raw)
    if magic != MAGIC:
        raise FormatError(f"{path.name}: bad magic {magic!r}")
    if version != BINARY_VERSION:
        raise FormatError(f"{path.name}: unsupported version {version}")
    need = header + n * d * 4 + n * 8
    if len(raw) != need:
        raise FormatError(
            f"{path.name}: expected {need} bytes for n={n}, d={d}, found {len(raw)}"
        )
    emb = np.frombuffer(raw, dtype="<f4", count=n * d, offset=header)
    ids_u64 = np.frombuffer(raw, dtype="<u8", count=n, offset=header + n * d * 4)
    if ids_u64.size and int(ids_u64.max()) > np.iinfo(np.int64).max:
        raise FormatError(f"{path.name}: identity id exceeds signed 64-bit range")
    return emb.reshape(n, d).astype(np.float64), ids_u64.astype(np.int64)


def _read_csv(path: Path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path.name}: empty file") from None
        d = len(header) - 1
        if d < 1 or header != ["id"] + [f"e{k}" for k in range(d)]:
            raise FormatError(f"{path.name}: malformed header {header!r}")
        ids: list[int] = []
        rows: list[list[float]] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != d + 1:
                raise FormatError(
                    f"{path.name}:{lineno}: expected {d + 1} fields, got {len(row)}"
                )
            try:
                ids.append(int(row[0]))
                rows.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise FormatError(f"{path.name}:{lineno}: {exc}") from None
    if not rows:
        raise FormatError(f"{path.name}: no data rows")
    return np.asarray(rows, dtype=np.float64), np.asarray(ids, dtype=np.int64)


def _check_index(ds: EmbeddingDataset, i: int) -> None:
    if not 0 <= i < ds.n:
        raise IndexError(f"sample index {i} out of range for n={ds.n}")
