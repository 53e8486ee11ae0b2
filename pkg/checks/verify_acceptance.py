"""
End-to-end properties of RAPID on randomized and synthetic instances. These
checks take longer than the unit checks of the single modules.
"""

import itertools
import logging
import statistics

import numpy as np
from _check_utils import CHECK, CHECK_CLOSE, main, mandatory_testcase

from rapid_svdd import (
    Dataset,
    IndexSet,
    KernelSpec,
    MixtureConfig,
    Pipeline,
    PipelineConfig,
    RapidSampler,
    SopSolution,
    bandwidth_scott,
    boundary_points,
    check_feasible,
    empirical_density,
    generate_mixture,
    gram_matrix,
    level_set_predict,
    prefilter,
    rapid_sample,
    solve_sop_exact,
)
from rapid_svdd._timer import Timer
from rapid_svdd.density import default_boundary_delta

_logger = logging.getLogger("verify_acceptance")


@mandatory_testcase(max_runtime_s=60)
def test_rapid_against_exhaustive_optimum():
    rng = np.random.default_rng(2024)
    for instance in range(200):
        n = int(rng.integers(4, 13))
        m = int(rng.integers(1, 4))
        gamma = float(rng.choice([0.1, 1.0, 10.0]))
        p_out = float(rng.choice([0.0, 0.25]))
        gram = gram_matrix(Dataset(observations=rng.normal(size=(n, m))), KernelSpec(gamma=gamma))
        selection = rapid_sample(gram, p_out)
        inliers = selection.prefilter.inliers
        feasible, violation = check_feasible(gram, inliers, selection.sample, 1e-9)
        CHECK(feasible, f"Instance {instance} (N={n}, gamma={gamma}): {violation}")
        exact = solve_sop_exact(gram, inliers)
        optimum_feasible, _ = check_feasible(gram, inliers, exact.sample, 1e-9)
        CHECK(optimum_feasible, f"Instance {instance}: the optimum is infeasible.")
        rapid = SopSolution.evaluate(gram, selection.sample)
        CHECK(
            rapid.objective >= exact.objective - 1e-9,
            f"Instance {instance}: RAPID {rapid.objective} beats the optimum {exact.objective}.",
        )


@mandatory_testcase(max_runtime_s=10)
def test_simplex_vertices_have_uniform_density():
    vertices = Dataset(observations=np.eye(5))
    flat = gram_matrix(vertices, KernelSpec(gamma=0.0))
    everything = IndexSet.full(5)
    rng = np.random.default_rng(3)
    for _ in range(10):
        subset = IndexSet.from_mask(rng.random(5) < 0.5)
        if len(subset) == 0:
            continue
        d = empirical_density(flat, subset).values
        CHECK(np.ptp(d) <= 1e-12, f"Density over {subset} is not uniform: {d}.")
    exact = solve_sop_exact(flat, everything)
    CHECK(exact.objective == 0.0, "A uniform density has no gap.")
    CHECK(exact.sample.indices.tolist() == [0], f"The smallest tie is a singleton, got {exact.sample}.")

    for gamma in (0.1, 1.0, 10.0):
        gram = gram_matrix(vertices, KernelSpec(gamma=gamma))
        for size in range(1, 6):
            subset = IndexSet(indices=list(range(size)), n=5)
            on_subset = empirical_density(gram, subset).on_source()
            CHECK(np.ptp(on_subset) <= 1e-12, f"gamma={gamma}: non-uniform on {subset}.")
        exact = solve_sop_exact(gram, everything)
        CHECK_CLOSE(exact.objective, 0.0, 1e-12, f"gamma={gamma}:")
        CHECK(rapid_sample(gram, 0.0).sample == exact.sample, "RAPID keeps every vertex.")
        labels = level_set_predict(gram.kernel, np.eye(5), np.eye(5), exact.theta_min - 1e-12)
        CHECK(labels.n_outliers == 0, "Every vertex reaches the level of the sample.")


@mandatory_testcase(max_runtime_s=120)
def test_boundary_points_are_retained():
    seeds = range(100)
    retained, separated_runs = 0, 0
    for seed in seeds:
        data, _ = generate_mixture(MixtureConfig(n=200, m=2, components=2, seed=seed))
        gram = gram_matrix(data, KernelSpec(gamma=bandwidth_scott(data)))
        prefiltered = prefilter(gram, 0.0)
        density = prefiltered.adjusted_density
        band = boundary_points(density, default_boundary_delta(density))
        band_top = density.d_min + band.delta
        selection, trace = RapidSampler().sample_traced(gram, prefiltered)
        removals = [r for r in trace.records if r.violator is None]
        # Densities only decrease, so a boundary point can become the densest
        # sample point only after theta_max has dropped into the band. Until
        # then, the densest and the sparsest sample points are apart.
        separated = list(itertools.takewhile(lambda r: r.theta_max >= band_top, removals))
        lost = [r.removed + 1 for r in separated if r.removed in band.indices]
        CHECK(not lost, f"Seed {seed}: boundary points {lost} removed above the band.")
        missing = [i + 1 for i in band.indices if i not in selection.sample]
        if len(separated) == len(removals):
            separated_runs += 1
            CHECK(not missing, f"Seed {seed}: boundary points {missing} are not sampled.")
        if not missing:
            retained += 1
            continue
        first = next(r for r in removals if r.removed in band.indices)
        in_sample = prefiltered.inliers.mask()
        in_sample[[r.removed for r in removals if r.iteration < first.iteration]] = False
        d = gram.column_sum(np.flatnonzero(in_sample))
        sparsest = int(np.argmin(np.where(in_sample, d, np.inf)))
        _logger.warning(
            "Seed %d: boundary points %s of %d are not sampled. The first left at iteration %d of "
            "%d with theta_max %.4g below the band top %.4g (entered at iteration %d), "
            "kernel value %.3g to the sparsest sample point.",
            seed,
            missing,
            len(band.indices),
            first.iteration + 1,
            len(trace),
            first.theta_max,
            band_top,
            removals[len(separated)].iteration + 1,
            gram.values[first.removed, sparsest],
        )
    _logger.info(
        "Boundary retained on %d of %d instances; theta_max stayed above the band on %d.",
        retained,
        len(seeds),
        separated_runs,
    )
    CHECK(retained >= 0.85 * len(seeds), f"Boundary retained on {retained} of {len(seeds)}.")


@mandatory_testcase(max_runtime_s=60)
def test_rapid_model_agrees_with_full_model():
    agreements, rapid_scores, full_scores = [], [], []
    for seed in range(5):
        data, truth = generate_mixture(
            MixtureConfig(n=400, m=2, components=2, outlier_ratio=0.05, seed=seed)
        )
        kernel = KernelSpec(gamma=bandwidth_scott(data))
        gram = gram_matrix(data, kernel)
        selection = rapid_sample(gram, 0.05)
        inliers = selection.prefilter.inliers
        theta_min = SopSolution.evaluate(gram, selection.sample).theta_min
        level_set = level_set_predict(
            kernel,
            data.observations[selection.sample.indices],
            data.observations[inliers.indices],
            theta_min - 1e-9,
        )
        CHECK(level_set.n_outliers == 0, f"Seed {seed}: the level set of S drops inliers.")

        # At Scott's gamma the hard-margin boundary on the thinned sample runs
        # through almost every sample point and cuts the inliers between them.
        wide = 0.1 * kernel.gamma
        rapid = Pipeline(PipelineConfig(method="rapid", gamma=wide, p_out=0.05)).run(data, truth)
        full = Pipeline(PipelineConfig(method="full", gamma=wide, p_out=0.05)).run(data, truth)
        agreements.append(float(np.mean(rapid.predicted.outlier == full.predicted.outlier)))
        rapid_scores.append(rapid.report.mcc)
        full_scores.append(full.report.mcc)
        _logger.info(
            "Seed %d: |S|=%d, agreement %.3f, MCC %.3f (full %.3f).",
            seed,
            rapid.report.sample_size,
            agreements[-1],
            rapid_scores[-1],
            full_scores[-1],
        )
    CHECK(statistics.median(agreements) >= 0.95, f"Agreement {agreements}.")
    CHECK(
        statistics.median(rapid_scores) >= statistics.median(full_scores) - 0.1,
        f"MCC {rapid_scores}, full {full_scores}.",
    )


@mandatory_testcase(max_runtime_s=300)
def test_quality_and_sample_size_with_growing_n():
    ratios = {}
    for n in (200, 500, 1000, 2000):
        scores, samples = [], []
        for seed in range(3):
            data, truth = generate_mixture(
                MixtureConfig(n=n, m=5, components=5, outlier_ratio=0.05, seed=seed)
            )
            report = Pipeline(PipelineConfig(p_out=0.05)).run(data, truth).report
            scores.append(report.mcc)
            samples.append(report.sample_size)
        _logger.info("N=%d: MCC %s, |S| %s.", n, scores, samples)
        CHECK(statistics.median(scores) >= 0.1, f"N={n}: MCC {scores}.")
        ratios[n] = statistics.median(samples) / n
    # Scott's kernel narrows as N^(-1/(M+4)), so |S| grows like N^(M/(M+4)).
    CHECK(ratios[2000] <= ratios[500], f"The sample ratio grows with N: {ratios}.")


@mandatory_testcase(max_runtime_s=600)
def test_sampling_time_is_quadratic():
    def sampling_time(n: int) -> float:
        durations = []
        for seed in range(3):
            data, _ = generate_mixture(MixtureConfig(n=n, m=5, components=5, seed=seed))
            kernel = KernelSpec(gamma=bandwidth_scott(data))
            timer = Timer()
            RapidSampler(0.05).sample(gram_matrix(data, kernel))
            durations.append(timer.time())
        return statistics.median(durations)

    sampling_time(500)
    times = {n: sampling_time(n) for n in (1000, 2000, 4000)}
    _logger.info("Sampling times: %s", times)
    CHECK(times[2000] / times[1000] <= 5, f"Doubling N from 1000: {times}.")
    CHECK(times[4000] / times[2000] <= 5, f"Doubling N from 2000: {times}.")


if __name__ == "__main__":
    main()
