import math

import numpy as np
from _check_utils import CHECK, CHECK_CLOSE, CHECK_RAISES, main, mandatory_testcase

from rapid_svdd import (
    Dataset,
    DensityVector,
    IndexSet,
    KernelSpec,
    boundary_points,
    density_quantile_threshold,
    empirical_density,
    gram_matrix,
    level_set_classify,
    level_set_predict,
)
from rapid_svdd.density import default_boundary_delta, floor_share


def _densities(values) -> DensityVector:
    values = np.asarray(values, dtype=float)
    return DensityVector(values=values, source=IndexSet.full(values.size))


def _gram(X, gamma=1.0):
    return gram_matrix(Dataset(observations=X), KernelSpec(gamma=gamma))


@mandatory_testcase(max_runtime_s=30)
def test_density_of_small_sets():
    d = empirical_density(_gram([[3.0]]), IndexSet.full(1))
    CHECK(d.values.tolist() == [1.0], "A single observation has density 1.")
    d = empirical_density(_gram([[1.0], [1.0]]), IndexSet.full(2))
    CHECK(d.values.tolist() == [2.0, 2.0], "Two identical observations have density 2.")
    d = empirical_density(_gram([[0.0], [1.0], [2.0]]), IndexSet.full(3))
    e1, e4 = math.exp(-1.0), math.exp(-4.0)
    for actual, expected in zip(d.values, (1 + e1 + e4, 1 + 2 * e1, 1 + e1 + e4)):
        CHECK_CLOSE(actual, expected, 1e-12, "Collinear points.")


@mandatory_testcase(max_runtime_s=30)
def test_density_outside_of_the_source():
    gram = _gram([[0.0], [1.0], [5.0]])
    d = empirical_density(gram, IndexSet(indices=[0], n=3))
    CHECK_CLOSE(d.values[1], math.exp(-1.0), 1e-12, "Observations outside the source have a density.")
    CHECK(d.on_source().tolist() == [1.0], "The source observation has density 1.")
    CHECK_RAISES(ValueError, empirical_density, gram, IndexSet(indices=[], n=3))
    CHECK_RAISES(ValueError, empirical_density, gram, IndexSet.full(4))


@mandatory_testcase(max_runtime_s=30)
def test_density_is_additive_over_disjoint_sources():
    rng = np.random.default_rng(5)
    gram = _gram(rng.normal(size=(15, 2)), gamma=0.8)
    a = IndexSet(indices=[0, 3, 7], n=15)
    b = IndexSet(indices=[1, 2, 10, 14], n=15)
    union = IndexSet(indices=np.concatenate([a.indices, b.indices]), n=15)
    total = empirical_density(gram, a).values + empirical_density(gram, b).values
    CHECK(
        np.allclose(total, empirical_density(gram, union).values, rtol=0, atol=1e-12),
        "Densities add up over disjoint sources.",
    )


@mandatory_testcase(max_runtime_s=30)
def test_level_set_classify():
    d = _densities([1.0, 2.0, 3.0])
    CHECK(level_set_classify(d, -math.inf).n_outliers == 0, "theta = -inf labels all 'in'.")
    CHECK(level_set_classify(d, 4.0).n_inliers == 0, "theta above max labels all 'out'.")
    CHECK(
        level_set_classify(d, 2.0).outlier.tolist() == [True, False, False],
        "The threshold itself is 'in'.",
    )


@mandatory_testcase(max_runtime_s=30)
def test_quantile_threshold():
    d = _densities([4.0, 1.0, 3.0, 2.0])
    CHECK(density_quantile_threshold(d, 0.0) == 1.0, "p_out = 0 gives the minimum.")
    theta = density_quantile_threshold(d, 0.5)
    CHECK(theta == 2.0, f"p_out = 0.5 gives the second smallest density, got {theta}.")
    CHECK(level_set_classify(d, theta).n_inliers == 3, "Three observations reach theta.")
    CHECK(density_quantile_threshold(d, 1.0) == 4.0, "p_out = 1 gives the maximum.")
    CHECK(level_set_classify(d, 4.0).n_inliers >= 1, "The maximum is always 'in'.")
    tied = _densities([2.0, 2.0, 2.0, 2.0])
    CHECK(
        level_set_classify(tied, density_quantile_threshold(tied, 0.5)).n_outliers == 0,
        "Ties at the threshold are 'in'.",
    )
    CHECK_RAISES(ValueError, density_quantile_threshold, d, 1.5)
    CHECK_RAISES(ValueError, density_quantile_threshold, d, -0.1)


@mandatory_testcase(max_runtime_s=30)
def test_floor_share():
    CHECK(floor_share(0.29, 100) == 29, "0.29 * 100 is 29, not 28.")
    CHECK(floor_share(0.05, 10) == 0, "floor(0.5) = 0.")
    CHECK(floor_share(1.0, 7) == 7, "The full share.")


@mandatory_testcase(max_runtime_s=30)
def test_boundary_points():
    CHECK(
        boundary_points(_densities([1.0, 1.05, 2.0]), 0.1).indices.indices.tolist() == [0, 1],
        "Both densities within 0.1 of the minimum.",
    )
    uniform = _densities([3.0, 3.0, 3.0])
    CHECK(len(boundary_points(uniform, 0.01).indices) == 3, "Equal densities are all boundary.")
    CHECK(len(boundary_points(_densities([1.0]), 0.5).indices) == 1, "N = 1.")
    CHECK_RAISES(ValueError, boundary_points, uniform, 0.0)


@mandatory_testcase(max_runtime_s=30)
def test_boundary_points_grow_with_delta():
    rng = np.random.default_rng(8)
    d = _densities(rng.uniform(1.0, 5.0, size=50))
    previous = None
    for delta in (0.01, 0.1, 0.5, 1.0, 5.0):
        current = boundary_points(d, delta).indices
        if previous is not None:
            CHECK(previous.issubset(current), f"The boundary set shrank at delta={delta}.")
        previous = current
    CHECK(len(previous) == 50, "A delta beyond the range covers everything.")


@mandatory_testcase(max_runtime_s=30)
def test_boundary_points_only_on_source():
    d = DensityVector(values=np.array([0.1, 2.0, 2.05, 0.2]), source=IndexSet(indices=[1, 2], n=4))
    CHECK(
        boundary_points(d, 0.1).indices.indices.tolist() == [1, 2],
        "Observations outside of the source are never boundary points.",
    )
    CHECK_CLOSE(default_boundary_delta(d), 0.05 * 0.05, 1e-15, "5% of the density range.")
    CHECK_CLOSE(default_boundary_delta(_densities([2.0, 2.0])), 0.1, 1e-15, "Zero range.")


@mandatory_testcase(max_runtime_s=30)
def test_level_set_predict_matches_classify():
    rng = np.random.default_rng(9)
    X = rng.normal(size=(20, 2))
    gram = _gram(X, gamma=0.5)
    sample = IndexSet(indices=[0, 4, 9, 13], n=20)
    d = empirical_density(gram, sample)
    theta = d.d_min
    predicted = level_set_predict(gram.kernel, X[sample.indices], X, theta)
    # the summation order of the two paths differs, so exclude near-ties
    clear = np.abs(d.values - theta) > 1e-9
    CHECK(
        np.array_equal(predicted.outlier[clear], level_set_classify(d, theta).outlier[clear]),
        "Predictions on training points match the level-set classifier.",
    )


if __name__ == "__main__":
    main()
