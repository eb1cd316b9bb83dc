import numpy as np
import pytest

from sddq import (
    DegenerateInputError,
    EmbeddingDataset,
    FormatError,
    PairingError,
    SamplingConfig,
    ValidationError,
    cosine_similarity,
    derive_seed,
    load_dataset,
    sample_profile,
    save_dataset,
    similarity_profile,
)


def write_csv(path, text):
    path.write_text(text)
    return path


class TestLoad:
    def test_csv_basic(self, tmp_path):
        p = write_csv(
            tmp_path / "d.csv",
            "id,e0,e1,e2\n7,1,0,0\n7,0,1,0\n9,0,0,1\n9,1,1,0\n",
        )
        ds = load_dataset(p)
        assert ds.n == 4 and ds.d == 3
        assert list(ds.identity_index[7]) == [0, 1]
        assert list(ds.identity_index[9]) == [2, 3]

    def test_zero_row_rejected(self, tmp_path):
        p = write_csv(tmp_path / "d.csv", "id,e0,e1\n1,1,0\n1,0,0\n")
        with pytest.raises(DegenerateInputError, match="row 1"):
            load_dataset(p)

    def test_rows_renormalized(self, tmp_path):
        p = write_csv(tmp_path / "d.csv", "id,e0,e1\n1,3,4\n2,0,1\n")
        ds = load_dataset(p)
        assert np.allclose(ds.embeddings[0], [0.6, 0.8])

    def test_nan_rejected(self, tmp_path):
        p = write_csv(tmp_path / "d.csv", "id,e0,e1\n1,nan,1\n2,0,1\n")
        with pytest.raises(ValidationError, match="non-finite"):
            load_dataset(p)

    def test_bad_header(self, tmp_path):
        p = write_csv(tmp_path / "d.csv", "id,x0,x1\n1,1,0\n2,0,1\n")
        with pytest.raises(FormatError, match="header"):
            load_dataset(p)

    def test_row_width_mismatch(self, tmp_path):
        p = write_csv(tmp_path / "d.csv", "id,e0,e1\n1,1,0\n2,0\n")
        with pytest.raises(FormatError, match="expected 3 fields"):
            load_dataset(p)

    def test_binary_round_trip(self, tmp_path, benchmark_ds):
        p = tmp_path / "d.sddq"
        save_dataset(benchmark_ds, p, fmt="binary")
        back = load_dataset(p)
        assert back.n == benchmark_ds.n and back.d == benchmark_ds.d
        assert np.array_equal(back.identities, benchmark_ds.identities)
        assert np.abs(back.embeddings - benchmark_ds.embeddings).max() < 1e-6

    def test_binary_truncated(self, tmp_path, benchmark_ds):
        p = tmp_path / "d.sddq"
        save_dataset(benchmark_ds, p, fmt="binary")
        p.write_bytes(p.read_bytes()[:-5])
        with pytest.raises(FormatError, match="expected"):
            load_dataset(p)

    def test_binary_bad_magic(self, tmp_path):
        p = tmp_path / "d.sddq"
        p.write_bytes(b"NOPE" + bytes(16))
        with pytest.raises(FormatError, match="magic"):
            load_dataset(p, fmt="binary")

    def test_load_normalize_idempotent(self, tmp_path, benchmark_ds):
        # the stored rows are already normalized; a save/load cycle moves
        # nothing by more than storage precision
        p1 = tmp_path / "a.csv"
        save_dataset(benchmark_ds, p1, fmt="csv")
        once = load_dataset(p1)
        p2 = tmp_path / "b.csv"
        save_dataset(once, p2, fmt="csv")
        twice = load_dataset(p2)
        assert np.abs(once.embeddings - twice.embeddings).max() <= 1e-6

    def test_identity_index_round_trip(self, benchmark_ds):
        for i in range(benchmark_ds.n):
            assert i in benchmark_ds.identity_index[int(benchmark_ds.identities[i])]
        all_rows = np.concatenate(list(benchmark_ds.identity_index.values()))
        assert sorted(all_rows) == list(range(benchmark_ds.n))

    def test_too_small(self):
        with pytest.raises(ValidationError):
            EmbeddingDataset.from_arrays(np.eye(1), [0])
        with pytest.raises(ValidationError):
            EmbeddingDataset.from_arrays(np.ones((3, 1)), [0, 1, 2])

    def test_negative_ids_need_csv(self, tmp_path):
        ds = EmbeddingDataset.from_arrays(np.eye(4), [-1, -1, 2, 2])
        with pytest.raises(ValidationError, match="unsigned"):
            save_dataset(ds, tmp_path / "d.sddq", fmt="binary")
        save_dataset(ds, tmp_path / "d.csv", fmt="csv")
        back = load_dataset(tmp_path / "d.csv")
        assert list(back.identities) == [-1, -1, 2, 2]


class TestCosine:
    def test_identical(self):
        assert cosine_similarity([1.0, 0.0], [1.0, 0.0]) == 1.0

    def test_antipodal(self):
        assert cosine_similarity([1.0, 0.0], [-1.0, 0.0]) == -1.0

    def test_plain_dot(self):
        assert cosine_similarity([1.0, 0.0], [0.6, 0.8]) == pytest.approx(0.6)

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError):
            cosine_similarity([1.0, 0.0], [1.0, 0.0, 0.0])


class TestProfiles:
    def test_counts(self, tiny_ds):
        prof = similarity_profile(tiny_ds, 0)
        assert prof.pos.shape == (1,) and prof.neg.shape == (2,)
        assert prof.owner == 0

    def test_identical_vectors(self):
        emb = np.tile([1.0, 0.0], (4, 1))
        ds = EmbeddingDataset.from_arrays(emb, [0, 0, 1, 1])
        prof = similarity_profile(ds, 0)
        assert np.allclose(prof.pos, 1.0) and np.allclose(prof.neg, 1.0)

    def test_singleton_identity(self):
        ds = EmbeddingDataset.from_arrays(np.eye(3), [0, 0, 1])
        with pytest.raises(PairingError, match="singleton"):
            similarity_profile(ds, 2)

    def test_profile_partition(self, benchmark_ds):
        for i in (0, 17, 119):
            prof = similarity_profile(benchmark_ds, i)
            assert len(prof.pos) + len(prof.neg) == benchmark_ds.n - 1
            assert len(prof.pos) == benchmark_ds.class_size(i) - 1

    def test_values_in_range(self, benchmark_ds):
        prof = similarity_profile(benchmark_ds, 3)
        for v in np.concatenate([prof.pos, prof.neg]):
            assert -1.0 <= v <= 1.0


class TestSampleProfile:
    def test_replacement_fills_m(self):
        ds = EmbeddingDataset.from_arrays(np.eye(6)[:5], [0, 0, 0, 1, 1])
        prof = sample_profile(ds, 0, m=24, rng_seed=11)
        assert prof.pos.shape == (24,) and prof.neg.shape == (24,)
        # only two positive partners exist, so values repeat
        assert len(np.unique(prof.pos)) <= 2

    def test_deterministic(self, benchmark_ds):
        a = sample_profile(benchmark_ds, 5, m=24, rng_seed=123)
        b = sample_profile(benchmark_ds, 5, m=24, rng_seed=123)
        assert np.array_equal(a.pos, b.pos) and np.array_equal(a.neg, b.neg)

    def test_single_candidate(self, tiny_ds):
        prof = sample_profile(tiny_ds, 0, m=1, rng_seed=0)
        expected = cosine_similarity(tiny_ds.embeddings[0], tiny_ds.embeddings[1])
        assert prof.pos[0] == pytest.approx(expected)

    def test_multiset_subset_of_exhaustive(self, benchmark_ds):
        i = 40
        full = similarity_profile(benchmark_ds, i)
        samp = sample_profile(benchmark_ds, i, m=50, rng_seed=9)
        assert set(np.round(samp.pos, 12)) <= set(np.round(full.pos, 12))
        assert set(np.round(samp.neg, 12)) <= set(np.round(full.neg, 12))

    def test_no_negative_partner(self):
        ds = EmbeddingDataset.from_arrays(np.eye(3), [4, 4, 4])
        with pytest.raises(PairingError, match="negative"):
            sample_profile(ds, 0, m=4, rng_seed=0)

    def test_negative_draws_cover_exactly_the_complement(self):
        # rows have pairwise-distinct similarities to row 0, so the partner
        # of every drawn value is identifiable
        base = np.array([[1.0, 0.0]] * 6)
        base[:, 1] = [0.0, 0.1, 0.9, 1.4, 2.2, 3.0]
        ds = EmbeddingDataset.from_arrays(base, [0, 0, 1, 1, 2, 2])
        allowed = {round(float(ds.embeddings[j] @ ds.embeddings[0]), 12) for j in (2, 3, 4, 5)}
        seen = set()
        for seed in range(40):
            prof = sample_profile(ds, 0, m=8, rng_seed=seed)
            seen |= {round(float(v), 12) for v in prof.neg}
        assert seen == allowed


class TestSeedMixing:
    def test_distinct_streams(self):
        seeds = {derive_seed(0, i, k) for i in range(10) for k in range(10)}
        assert len(seeds) == 100

    def test_order_sensitivity(self):
        assert derive_seed(1, 2, 3) != derive_seed(1, 3, 2)

    def test_stable(self):
        assert derive_seed(42, 7, 3) == derive_seed(42, 7, 3)


class TestSamplingConfig:
    def test_defaults(self):
        cfg = SamplingConfig()
        assert cfg.m == 24 and cfg.K == 12

    def test_validation(self):
        with pytest.raises(ValidationError):
            SamplingConfig(m=0)
        with pytest.raises(ValidationError):
            SamplingConfig(K=0)
