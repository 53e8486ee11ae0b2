import logging

import numpy as np
from _check_utils import CHECK, CHECK_RAISES, main, mandatory_testcase
from pydantic import ValidationError

from rapid_svdd import (
    IndexSet,
    KernelSpec,
    MixtureConfig,
    bandwidth_scott,
    empirical_density,
    generate_mixture,
    gram_matrix,
)

_logger = logging.getLogger("verify_synthetic")


@mandatory_testcase(max_runtime_s=30)
def test_shape_without_outliers():
    data, labels = generate_mixture(MixtureConfig(n=400, m=2, components=2, seed=1))
    CHECK(data.n == 400 and data.m == 2, f"Shape {data.n}x{data.m}.")
    CHECK(labels.n_outliers == 0, "No outliers were requested.")


@mandatory_testcase(max_runtime_s=30)
def test_outlier_count():
    _, labels = generate_mixture(MixtureConfig(n=100, m=3, outlier_ratio=0.1, seed=2))
    CHECK(labels.n_outliers == 10, f"Expected 10 outliers, got {labels.n_outliers}.")
    _, labels = generate_mixture(MixtureConfig(n=100, m=3, outlier_ratio=0.29, seed=2))
    CHECK(labels.n_outliers == 29, "floor(0.29 * 100) = 29.")


@mandatory_testcase(max_runtime_s=30)
def test_same_seed_same_bytes():
    config = MixtureConfig(n=50, m=4, components=3, outlier_ratio=0.2, seed=9)
    first, first_labels = generate_mixture(config)
    second, second_labels = generate_mixture(config)
    CHECK(first.observations.tobytes() == second.observations.tobytes(), "Identical data.")
    CHECK(first_labels == second_labels, "Identical labels.")
    other, _ = generate_mixture(config.model_copy(update={"seed": 10}))
    CHECK(not np.array_equal(other.observations, first.observations), "Seeds matter.")


@mandatory_testcase(max_runtime_s=30)
def test_invalid_configurations():
    CHECK_RAISES(ValidationError, MixtureConfig, n=2, m=1, components=3)
    CHECK_RAISES(ValidationError, MixtureConfig, n=0, m=1)
    CHECK_RAISES(ValidationError, MixtureConfig, n=10, m=1, outlier_ratio=1.0)


@mandatory_testcase(max_runtime_s=60)
def test_inliers_are_denser_than_outliers():
    seeds = range(20)
    denser = 0
    for seed in seeds:
        data, labels = generate_mixture(
            MixtureConfig(n=200, m=5, components=2, outlier_ratio=0.1, seed=seed)
        )
        gram = gram_matrix(data, KernelSpec(gamma=bandwidth_scott(data)))
        d = empirical_density(gram, IndexSet.full(data.n)).values
        if d[~labels.outlier].mean() > d[labels.outlier].mean():
            denser += 1
        else:
            _logger.warning("Seed %d: outliers are as dense as inliers.", seed)
    CHECK(denser >= 0.95 * len(seeds), f"Inliers denser on {denser} of {len(seeds)} seeds.")


if __name__ == "__main__":
    main()
