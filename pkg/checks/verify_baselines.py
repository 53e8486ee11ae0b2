import numpy as np
from _check_utils import CHECK, CHECK_RAISES, main, mandatory_testcase
from pydantic import ValidationError

from rapid_svdd import (
    Dataset,
    IndexSet,
    KernelSpec,
    RandomSampleConfig,
    gram_matrix,
    prefilter,
    random_sample,
    random_sample_indices,
)
from rapid_svdd.sampling_strategy import make_sampling_strategy, sampling_methods


@mandatory_testcase(max_runtime_s=30)
def test_full_ratio_takes_every_inlier():
    inliers = IndexSet(indices=[1, 3, 4, 8], n=10)
    sample = random_sample_indices(inliers, RandomSampleConfig(ratio=1.0, seed=3))
    CHECK(sample == inliers, "r = 1 takes all inliers.")


@mandatory_testcase(max_runtime_s=30)
def test_half_of_ten():
    inliers = IndexSet.full(10)
    sample = random_sample_indices(inliers, RandomSampleConfig(ratio=0.5, seed=0))
    CHECK(len(sample) == 5, f"Expected 5 distinct positions, got {sample}.")
    CHECK(sample.issubset(inliers), "Only inliers are drawn.")


@mandatory_testcase(max_runtime_s=30)
def test_seeds():
    inliers = IndexSet.full(100)

    def draw(seed):
        return random_sample_indices(inliers, RandomSampleConfig(ratio=0.1, seed=seed))

    CHECK(draw(7) == draw(7), "The same seed gives the same sample.")
    CHECK(draw(7) != draw(8), "Different seeds give different samples.")


@mandatory_testcase(max_runtime_s=30)
def test_sample_sizes():
    def config(r):
        return RandomSampleConfig(ratio=r)

    CHECK(config(0.01).sample_size(10) == 1, "At least one observation.")
    CHECK(config(0.05).sample_size(10) == 1, "0.5 rounds up.")
    CHECK(config(0.25).sample_size(10) == 3, "2.5 rounds up.")
    CHECK(config(0.2).sample_size(1000) == 200, "Exact products.")
    for r in (0.01, 0.1, 0.33, 0.5, 1.0):
        for n in (1, 7, 50):
            size = config(r).sample_size(n)
            CHECK(1 <= size <= n, f"Size {size} for r={r}, |I|={n}.")
    CHECK_RAISES(ValidationError, RandomSampleConfig, ratio=0.0)
    CHECK_RAISES(ValidationError, RandomSampleConfig, ratio=1.5)


@mandatory_testcase(max_runtime_s=60)
def test_draws_are_uniform():
    inliers = IndexSet.full(10)
    counts = np.zeros(10, dtype=int)
    for seed in range(10_000):
        sample = random_sample_indices(inliers, RandomSampleConfig(ratio=0.1, seed=seed))
        counts[sample.indices] += 1
    CHECK(counts.min() >= 800 and counts.max() <= 1200, f"Counts far from uniform: {counts}.")


@mandatory_testcase(max_runtime_s=30)
def test_random_selection_of_prefiltered_data():
    X = np.random.default_rng(51).normal(size=(40, 2))
    prefiltered = prefilter(gram_matrix(Dataset(observations=X), KernelSpec(gamma=1.0)), 0.1)
    selection = random_sample(prefiltered, RandomSampleConfig(ratio=0.2, seed=5))
    CHECK(selection.method == "rand" and selection.seed == 5, "Provenance of the selection.")
    CHECK(selection.sample.issubset(prefiltered.inliers), "Only inliers are drawn.")
    CHECK(selection.size == RandomSampleConfig(ratio=0.2).sample_size(len(prefiltered.inliers)), "Size.")


@mandatory_testcase(max_runtime_s=30)
def test_sampling_methods():
    CHECK(sampling_methods() == ["full", "rand", "rapid"], f"Methods {sampling_methods()}.")
    CHECK_RAISES(ValueError, make_sampling_strategy, "rand")
    CHECK_RAISES(ValueError, make_sampling_strategy, "uniform")
    CHECK(make_sampling_strategy("rapid", ratio=0.5).deterministic, "A ratio is ignored by RAPID.")
    gram = gram_matrix(Dataset(observations=[[0.0], [1.0], [4.0]]), KernelSpec(gamma=1.0))
    prefiltered = prefilter(gram, 0.0)
    full = make_sampling_strategy("full").select(gram, prefiltered)
    CHECK(full.sample == prefiltered.inliers, "'full' samples every inlier.")
    rand = random_sample(prefiltered, RandomSampleConfig(ratio=0.5, seed=1))
    CHECK(rand.method == "rand" and rand.seed == 1, "Provenance of the selection.")
    CHECK(0 <= rand.t_samp < 1, f"Sampling took {rand.t_samp} s.")


if __name__ == "__main__":
    main()
