import logging
import math

import numpy as np
from _check_utils import CHECK, CHECK_CLOSE, CHECK_RAISES, main, mandatory_testcase
from _reference_solvers import dual_value, svdd_dual_by_projected_gradient

from rapid_svdd import (
    DEFAULT_SETTINGS,
    ConvergenceError,
    Dataset,
    IndexSet,
    KernelSpec,
    Label,
    MixtureConfig,
    SvddTrainer,
    bandwidth_scott,
    boundary_points,
    empirical_density,
    generate_mixture,
    gram_matrix,
    predict,
    predict_batch,
    train_svdd,
)
from rapid_svdd.svdd import SmoSolver

_logger = logging.getLogger("verify_svdd")


@mandatory_testcase(max_runtime_s=30)
def test_single_training_point():
    model = train_svdd(Dataset(observations=[[1.0, -1.0]]), KernelSpec(gamma=1.0))
    CHECK(model.alpha.tolist() == [1.0], "The only weight is 1.")
    CHECK_CLOSE(model.radius_sq, 0.0, 1e-12, "The ball has radius 0.")
    prediction = predict(model, [1.0, -1.0])
    CHECK(prediction.label == Label.IN, "The training point is inside.")
    CHECK_CLOSE(prediction.squared_distance, 0.0, 1e-12)


@mandatory_testcase(max_runtime_s=30)
def test_two_points_analytic():
    model = train_svdd(Dataset(observations=[[0.0], [1.0]]), KernelSpec(gamma=1.0))
    kappa = math.exp(-1.0)
    CHECK_CLOSE(model.alpha[0], 0.5, 1e-6)
    CHECK_CLOSE(model.alpha[1], 0.5, 1e-6)
    CHECK_CLOSE(model.radius_sq, (1.0 - kappa) / 2.0, 1e-6)
    CHECK(len(model.support_vectors) == 2, "Both points are support vectors.")


@mandatory_testcase(max_runtime_s=60)
def test_dual_matches_projected_gradient():
    rng = np.random.default_rng(41)
    for trial in range(10):
        X = rng.normal(size=(8, 2))
        gamma = float(rng.choice([0.3, 1.0, 3.0]))
        K = gram_matrix(Dataset(observations=X), KernelSpec(gamma=gamma)).values
        reference = dual_value(K, svdd_dual_by_projected_gradient(K))
        model = train_svdd(Dataset(observations=X), KernelSpec(gamma=gamma))
        CHECK_CLOSE(model.dual_objective, reference, 1e-5, f"Trial {trial}:")
        CHECK(model.converged, "SMO converges on eight points.")


@mandatory_testcase(max_runtime_s=60)
def test_dual_feasibility_and_enclosure():
    rng = np.random.default_rng(42)
    for _ in range(10):
        n = int(rng.integers(2, 120))
        data = Dataset(observations=rng.normal(size=(n, 3)))
        model = train_svdd(data, KernelSpec(gamma=float(rng.uniform(0.1, 2.0))))
        CHECK_CLOSE(float(model.alpha.sum()), 1.0, 1e-9, "The weights sum up to 1.")
        CHECK(np.all((model.alpha >= -1e-9) & (model.alpha <= 1 + 1e-9)), "Weights in [0, 1].")
        margins = model.radius_sq - model.squared_distances(data.observations)
        CHECK(margins.min() >= -1e-6, f"A training point lies outside: {margins.min()}.")
        labels, _ = predict_batch(model, data)
        CHECK(labels.n_outliers == 0, "The hard margin encloses the training data.")


@mandatory_testcase(max_runtime_s=30)
def test_support_vectors_lie_on_the_sphere():
    rng = np.random.default_rng(43)
    data = Dataset(observations=rng.normal(size=(40, 2)))
    model = train_svdd(data, KernelSpec(gamma=0.5))
    distances = model.squared_distances(model.support_points)
    CHECK(
        np.allclose(distances, model.radius_sq, rtol=0, atol=1e-5),
        "Unconstrained support vectors have distance R.",
    )
    far = predict(model, [100.0, 100.0])
    CHECK(far.label == Label.OUT, "A far point is outside.")
    CHECK_CLOSE(far.squared_distance, 1.0 + model.center_norm_sq, 1e-12, "k(far, x) = 0.")
    CHECK(far.margin < 0, "Outside points have a negative margin.")


@mandatory_testcase(max_runtime_s=30)
def test_only_support_vectors_matter():
    rng = np.random.default_rng(44)
    X = rng.normal(size=(60, 2))
    kernel = KernelSpec(gamma=0.8)
    model = train_svdd(Dataset(observations=X), kernel)
    CHECK(len(model.support_vectors) < 60, "Not every point is a support vector.")
    queries = rng.normal(size=(30, 2)) * 2
    full = 1.0 - 2.0 * kernel.cross(queries, X) @ model.alpha + model.center_norm_sq
    CHECK(
        np.allclose(model.squared_distances(queries), full, rtol=0, atol=1e-12),
        "Dropping zero weights leaves every distance unchanged.",
    )


@mandatory_testcase(max_runtime_s=30)
def test_batch_prediction():
    rng = np.random.default_rng(45)
    model = train_svdd(Dataset(observations=rng.normal(size=(30, 2))), KernelSpec(gamma=1.0))
    empty, t_inf = predict_batch(model, np.zeros((0, 2)))
    CHECK(len(empty) == 0 and t_inf == 0.0, "An empty batch.")
    query = [0.7, -2.1]
    labels, _ = predict_batch(model, np.array([query] * 5))
    single = predict(model, query).label
    CHECK(all(label == single for label in labels.labels()), "Repeated queries agree.")
    CHECK_RAISES(ValueError, predict, model, [1.0, 2.0, 3.0])


@mandatory_testcase(max_runtime_s=30)
def test_training_on_a_sample():
    rng = np.random.default_rng(46)
    data = Dataset(observations=rng.normal(size=(50, 2)))
    sample = IndexSet(indices=[0, 5, 10, 20, 40], n=50)
    model = train_svdd(data, KernelSpec(gamma=1.0), sample)
    CHECK(model.alpha.size == 5, "One weight per sampled observation.")
    CHECK(model.training_indices == sample, "The sample is recorded.")
    labels, _ = predict_batch(model, data.observations[sample.indices])
    CHECK(labels.n_outliers == 0, "The sample is enclosed.")


@mandatory_testcase(max_runtime_s=30)
def test_update_limit():
    rng = np.random.default_rng(47)
    data = Dataset(observations=rng.normal(size=(20, 2)))
    settings = DEFAULT_SETTINGS.model_copy(update={"smo_max_updates": 1})
    e = CHECK_RAISES(
        ConvergenceError,
        SvddTrainer(KernelSpec(gamma=1.0), settings=settings, strict=True).train,
        data,
    )
    CHECK(e.diagnostics["updates"] == 1.0, f"Diagnostics {e.diagnostics}.")
    model = SvddTrainer(KernelSpec(gamma=1.0), settings=settings).train(data)
    CHECK(not model.converged, "The lenient trainer returns the unconverged model.")


@mandatory_testcase(max_runtime_s=30)
def test_box_constraint():
    rng = np.random.default_rng(48)
    K = gram_matrix(Dataset(observations=rng.normal(size=(6, 2))), KernelSpec(gamma=0.2)).values
    result = SmoSolver(2.0 * K, -np.diag(K), C=0.25).solve()
    CHECK(result.converged, "SMO converges with a box.")
    CHECK(np.all(result.alpha <= 0.25 + 1e-12), f"Weights exceed C: {result.alpha}.")
    CHECK_CLOSE(float(result.alpha.sum()), 1.0, 1e-12)
    CHECK_RAISES(ValueError, SmoSolver, 2.0 * K, -np.diag(K), 0.1)


@mandatory_testcase(max_runtime_s=60)
def test_support_vectors_have_low_density():
    for seed in range(10):
        data, _ = generate_mixture(MixtureConfig(n=200, m=2, components=1, seed=seed))
        kernel = KernelSpec(gamma=bandwidth_scott(data))
        model = train_svdd(data, kernel)
        density = empirical_density(gram_matrix(data, kernel), IndexSet.full(data.n))
        band = boundary_points(density, 0.25 * (density.d_max - density.d_min)).indices
        support = model.support_vectors.mask()
        in_band = sum(1 for i in model.support_vectors if i in band)
        _logger.info(
            "Seed %d: %d support vectors, %d of them in the lowest quarter of the density range.",
            seed,
            len(model.support_vectors),
            in_band,
        )
        # Narrow kernels also make interior points support vectors, so only
        # the tendency towards low density is stable.
        CHECK(
            np.median(density.values[support]) < np.median(density.values[~support]),
            f"Seed {seed}: support vectors are not sparser than the other observations.",
        )


if __name__ == "__main__":
    main()
