import numpy as np
from _check_utils import CHECK, CHECK_RAISES, main, mandatory_testcase

from rapid_svdd import (
    Dataset,
    IndexSet,
    KernelSpec,
    PrefilterError,
    empirical_density,
    gram_matrix,
    prefilter,
)
from rapid_svdd.density import floor_share
from rapid_svdd.prefilter import Prefilter


def _gram(X, gamma=1.0):
    return gram_matrix(Dataset(observations=X), KernelSpec(gamma=gamma))


@mandatory_testcase(max_runtime_s=30)
def test_no_prefiltering():
    gram = _gram(np.random.default_rng(0).normal(size=(10, 2)))
    result = prefilter(gram, 0.0)
    CHECK(len(result.outliers) == 0, "p_out = 0 keeps every observation.")
    CHECK(result.inliers == IndexSet.full(10), "All observations are inliers.")
    CHECK(
        np.array_equal(result.adjusted_density.values, result.density.values),
        "Without outliers the adjusted density is the original one.",
    )
    CHECK(result.theta_pre == result.density.d_min, "theta_pre is the minimal density.")


@mandatory_testcase(max_runtime_s=30)
def test_half_of_four_points():
    # densities ascending: x=5, x=0, x=1.5, x=1
    gram = _gram([[0.0], [1.0], [1.5], [5.0]])
    result = prefilter(gram, 0.5)
    CHECK(result.inliers.indices.tolist() == [0, 1, 2], f"Inliers {result.inliers}.")
    CHECK(result.outliers.indices.tolist() == [3], f"Outliers {result.outliers}.")
    CHECK(result.theta_pre == result.density.values[0], "theta_pre is the second smallest.")
    expected = result.density.values - gram.values[:, 3]
    CHECK(
        np.allclose(result.adjusted_density.values, expected, rtol=0, atol=1e-12),
        "The outlier column is subtracted.",
    )
    CHECK(result.realized_outlier_ratio == 0.25, "One of four observations is removed.")


@mandatory_testcase(max_runtime_s=30)
def test_identical_points_are_never_removed():
    gram = _gram(np.ones((6, 2)))
    for p_out in (0.0, 0.3, 0.9):
        CHECK(len(prefilter(gram, p_out).outliers) == 0, f"Ties at p_out={p_out} are 'in'.")


@mandatory_testcase(max_runtime_s=30)
def test_invalid_shares():
    gram = _gram([[0.0], [1.0]])
    CHECK_RAISES(PrefilterError, prefilter, gram, 1.0)
    CHECK_RAISES(PrefilterError, prefilter, gram, -0.01)
    CHECK_RAISES(ValueError, Prefilter, 1.5)


@mandatory_testcase(max_runtime_s=60)
def test_outlier_count_and_adjusted_density():
    rng = np.random.default_rng(11)
    for trial in range(20):
        n = int(rng.integers(5, 60))
        gram = _gram(rng.normal(size=(n, 3)), gamma=float(rng.uniform(0.1, 2.0)))
        p_out = float(rng.uniform(0.0, 0.6))
        result = prefilter(gram, p_out)
        CHECK(
            len(result.outliers) <= floor_share(p_out, n),
            f"Trial {trial}: {len(result.outliers)} outliers for p_out={p_out}, N={n}.",
        )
        CHECK(len(result.inliers) >= 1, "There is at least one inlier.")
        CHECK(
            np.all(result.density.values[result.inliers.indices] >= result.theta_pre),
            "Inliers reach theta_pre.",
        )
        CHECK(
            np.all(result.density.values[result.outliers.indices] < result.theta_pre),
            "Outliers fall below theta_pre.",
        )
        reference = empirical_density(gram, result.inliers).values
        CHECK(
            np.array_equal(result.adjusted_density.values, reference),
            "The adjusted density is the density over the inliers.",
        )


@mandatory_testcase(max_runtime_s=30)
def test_prefiltering_the_inliers_again_keeps_them():
    X = np.random.default_rng(4).normal(size=(30, 2))
    result = prefilter(_gram(X), 0.2)
    again = prefilter(_gram(X[result.inliers.indices]), 0.0)
    CHECK(len(again.outliers) == 0, "p_out = 0 on the inliers removes nothing.")


if __name__ == "__main__":
    main()
