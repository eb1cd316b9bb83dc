import numpy as np
import pytest

from sddq import EmbeddingDataset, SynthConfig, generate, generate_labels

# Desk-scale benchmark used across the suite: 10 identities x 12 samples in
# 32 dims with corruption lengths drawn uniformly from [0.1, 1.5].
BENCHMARK = SynthConfig(
    num_identities=10,
    samples_per_identity=12,
    dim=32,
    noise_min=0.1,
    noise_max=1.5,
    seed=7,
)


@pytest.fixture(scope="session")
def benchmark():
    return generate(BENCHMARK)


@pytest.fixture(scope="session")
def benchmark_ds(benchmark):
    return benchmark[0]


@pytest.fixture(scope="session")
def benchmark_truth(benchmark):
    return benchmark[1]


@pytest.fixture(scope="session")
def benchmark_exact_labels(benchmark_ds):
    return generate_labels(benchmark_ds, mode="exact")


@pytest.fixture()
def tiny_ds():
    # 2 identities, 2 samples each, d=3; rows already unit norm
    emb = np.array(
        [
            [1.0, 0.0, 0.0],
            [0.8, 0.6, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.8, 0.6],
        ]
    )
    return EmbeddingDataset.from_arrays(emb, [0, 0, 1, 1])
