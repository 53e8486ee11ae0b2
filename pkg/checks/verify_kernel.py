import math

import numpy as np
from _check_utils import CHECK, CHECK_CLOSE, CHECK_RAISES, main, mandatory_testcase
from pydantic import ValidationError

from rapid_svdd import (
    DEFAULT_SETTINGS,
    Dataset,
    DegenerateDataError,
    GammaRule,
    GramMatrixTooLargeError,
    KernelSpec,
    bandwidth_modified_mean,
    bandwidth_scott,
    gaussian_kernel,
    gram_matrix,
)
from rapid_svdd.kernel import ModifiedMeanCriterion


@mandatory_testcase(max_runtime_s=30)
def test_kernel_values():
    CHECK(gaussian_kernel((1.0, 2.0), (1.0, 2.0), 3.0) == 1.0, "k(x, x) = 1.")
    CHECK(gaussian_kernel((0.0,), (5.0,), 0.0) == 1.0, "gamma = 0 gives 1 everywhere.")
    CHECK_CLOSE(gaussian_kernel((0.0, 0.0), (1.0, 0.0), 1.0), math.exp(-1.0), 1e-12)
    CHECK_CLOSE(KernelSpec(gamma=0.5)((0.0,), (2.0,)), math.exp(-2.0), 1e-12)
    CHECK_RAISES(ValueError, gaussian_kernel, (0.0, 0.0), (1.0,), 1.0)
    CHECK_RAISES(ValueError, gaussian_kernel, (0.0,), (1.0,), -1.0)
    CHECK_RAISES(ValidationError, KernelSpec, gamma=-0.1)
    CHECK_RAISES(ValidationError, KernelSpec, gamma=float("inf"))


@mandatory_testcase(max_runtime_s=30)
def test_kernel_decreases_with_gamma():
    x, y = (0.3, -1.0), (1.2, 0.4)
    values = [gaussian_kernel(x, y, g) for g in (0.0, 0.1, 1.0, 10.0)]
    CHECK(all(a > b for a, b in zip(values, values[1:])), f"Not decreasing: {values}.")
    CHECK(all(0.0 < v <= 1.0 for v in values), "Kernel values lie in (0, 1].")


@mandatory_testcase(max_runtime_s=30)
def test_gram_matrix_of_one_and_of_duplicates():
    single = gram_matrix(Dataset(observations=[[4.0, 2.0]]), KernelSpec(gamma=1.0))
    CHECK(np.array_equal(single.values, [[1.0]]), "A single observation gives [[1]].")
    same = gram_matrix(Dataset(observations=[[1.0], [1.0], [1.0]]), KernelSpec(gamma=2.0))
    CHECK(np.array_equal(same.values, np.ones((3, 3))), "Identical rows give an all-ones matrix.")


@mandatory_testcase(max_runtime_s=30)
def test_gram_matrix_matches_pairwise_kernel():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(12, 3))
    gram = gram_matrix(Dataset(observations=X), KernelSpec(gamma=0.7))
    CHECK(np.array_equal(gram.values, gram.values.T), "The Gram matrix is exactly symmetric.")
    CHECK(np.all(np.diag(gram.values) == 1.0), "The diagonal is 1.")
    for i in range(12):
        for j in range(12):
            CHECK_CLOSE(gram.values[i, j], gaussian_kernel(X[i], X[j], 0.7), 1e-12, f"K[{i}][{j}]")
    cross = gram.kernel.cross(X[:4], X)
    CHECK(np.allclose(cross, gram.values[:4], rtol=0, atol=1e-12), "cross() matches the rows.")
    CHECK_RAISES(ValueError, gram.kernel.cross, X, X[:, :2])


@mandatory_testcase(max_runtime_s=30)
def test_gram_matrix_size_limit():
    settings = DEFAULT_SETTINGS.model_copy(update={"gram_max_n": 2})
    data = Dataset(observations=[[0.0], [1.0], [2.0]])
    CHECK_RAISES(GramMatrixTooLargeError, gram_matrix, data, KernelSpec(gamma=1.0), settings)
    CHECK(gram_matrix(data, KernelSpec(gamma=1.0)).n == 3, "The default limit is far larger.")


@mandatory_testcase(max_runtime_s=30)
def test_scott_two_points():
    gamma = bandwidth_scott(Dataset(observations=[[0.0], [2.0]]))
    h = math.sqrt(2.0) * 2.0 ** (-1.0 / 5.0)
    CHECK_CLOSE(gamma, 1.0 / (2.0 * h * h), 1e-12)
    CHECK_CLOSE(gamma, 0.330, 5e-4, "Two points at distance 2.")


@mandatory_testcase(max_runtime_s=30)
def test_scott_scaling_and_permutation():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(40, 3))
    gamma = bandwidth_scott(Dataset(observations=X))
    doubled = bandwidth_scott(Dataset(observations=2.0 * X))
    CHECK_CLOSE(doubled / gamma, 0.25, 1e-12, "Doubling the scale quarters gamma.")
    shuffled = bandwidth_scott(Dataset(observations=X[rng.permutation(40)]))
    CHECK_CLOSE(shuffled, gamma, 1e-12 * gamma, "The row order does not matter.")


@mandatory_testcase(max_runtime_s=30)
def test_degenerate_bandwidths():
    constant = Dataset(observations=np.full((5, 2), 3.0))
    single = Dataset(observations=[[1.0, 2.0]])
    for rule in (bandwidth_scott, bandwidth_modified_mean):
        CHECK_RAISES(DegenerateDataError, rule, constant)
        CHECK_RAISES(DegenerateDataError, rule, single)


@mandatory_testcase(max_runtime_s=30)
def test_modified_mean_criterion():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(25, 2)) * [1.0, 3.0]
    n = X.shape[0]
    # written out independently of the implementation
    phi = 1.0 / math.log(n - 1)
    delta = (
        -0.14818008 * phi**4
        + 0.2846623624 * phi**3
        - 0.252853808 * phi**2
        + 0.159059498 * phi
        - 0.001381145
    )
    variance = X.var(axis=0, ddof=1).sum()
    s_sq = 2.0 * n / (n - 1) * variance / math.log((n - 1) / delta**2)
    gamma = bandwidth_modified_mean(Dataset(observations=X))
    CHECK(gamma > 0, "gamma is positive.")
    CHECK_CLOSE(gamma, 1.0 / (2.0 * s_sq), 1e-12 * gamma)
    CHECK_CLOSE(ModifiedMeanCriterion.delta(n), delta, 1e-14)
    shuffled = bandwidth_modified_mean(Dataset(observations=X[::-1]))
    CHECK_CLOSE(shuffled, gamma, 1e-12 * gamma, "The row order does not matter.")
    two = bandwidth_modified_mean(Dataset(observations=[[0.0], [1.0]]))
    CHECK(math.isfinite(two) and two > 0, "Two observations give a finite gamma.")


@mandatory_testcase(max_runtime_s=30)
def test_gamma_rules():
    data = Dataset(observations=[[0.0], [2.0], [3.0]])
    CHECK(GammaRule.from_str("modified-mean") == GammaRule.MODIFIED_MEAN, "Dashes are accepted.")
    CHECK(GammaRule.SCOTT.strategy().gamma(data) == bandwidth_scott(data), "Scott's rule.")
    CHECK(GammaRule.FIXED.strategy(0.25).gamma(data) == 0.25, "A fixed gamma ignores the data.")
    CHECK(GammaRule.FIXED.strategy(0.25).kernel(data) == KernelSpec(gamma=0.25), "Kernel.")
    CHECK_RAISES(ValueError, GammaRule.FIXED.strategy)
    CHECK_RAISES(ValueError, GammaRule.SCOTT.strategy, 1.0)
    CHECK_RAISES(ValueError, GammaRule.from_str, "silverman")


if __name__ == "__main__":
    main()
