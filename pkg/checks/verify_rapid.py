import logging
import math

import numpy as np
from _check_utils import CHECK, CHECK_CLOSE, main, mandatory_testcase

from rapid_svdd import (
    DEFAULT_SETTINGS,
    Dataset,
    IndexSet,
    KernelSpec,
    MixtureConfig,
    RapidSampler,
    SopSolution,
    ThetaMinScope,
    bandwidth_scott,
    check_feasible,
    empirical_density,
    generate_mixture,
    gram_matrix,
    rapid_sample,
    rapid_sample_traced,
)

_logger = logging.getLogger("verify_rapid")


def _gram(X, gamma=1.0):
    return gram_matrix(Dataset(observations=X), KernelSpec(gamma=gamma))


def _random_gram(rng, n, m=2):
    return _gram(rng.normal(size=(n, m)), gamma=float(rng.uniform(0.2, 2.0)))


@mandatory_testcase(max_runtime_s=30)
def test_single_observation():
    selection, trace = rapid_sample_traced(_gram([[1.0, 1.0]]), 0.0)
    CHECK(selection.sample.indices.tolist() == [0], "S = {1} for N = 1.")
    CHECK(len(trace) == 0, "No iteration is possible.")


@mandatory_testcase(max_runtime_s=30)
def test_two_identical_points():
    selection, trace = rapid_sample_traced(_gram([[2.0], [2.0]]), 0.0)
    CHECK(len(trace) == 1, f"Exactly one iteration, got {len(trace)}.")
    record = trace.records[0]
    CHECK(record.removed == 0, "The lowest position wins the tie.")
    CHECK(record.theta_min == 1.0 and record.violator is None, f"Unexpected record {record}.")
    CHECK(selection.sample.indices.tolist() == [1], f"S = {{2}}, got {selection.sample}.")


@mandatory_testcase(max_runtime_s=30)
def test_collinear_points_keep_the_endpoints():
    gram = _gram([[0.0], [1.0], [2.0], [3.0]])
    selection, trace = RapidSampler(0.0, ThetaMinScope.CANDIDATE).sample_traced(gram)
    CHECK(trace.records[0].removed in (1, 2), "A middle point is removed first.")
    CHECK(0 in selection.sample and 3 in selection.sample, "Endpoints are kept.")
    # The literal reading removes both middle points, then one endpoint. In
    # exact arithmetic the endpoints tie at 1 + e^-9 and the lowest position
    # goes, leaving S = {4}; rounding of the density sums may flip that tie.
    literal, trace = RapidSampler(0.0, ThetaMinScope.PSEUDOCODE).sample_traced(gram)
    CHECK(trace.records[0].removed in (1, 2), "A middle point is removed first.")
    CHECK(trace.removals == 3, f"Three removals, got {trace.records}.")
    CHECK(literal.sample.indices.tolist() in ([0], [3]), f"One endpoint is left, got {literal.sample}.")


@mandatory_testcase(max_runtime_s=30)
def test_theta_min_scopes_differ_on_two_far_points():
    gram = _gram([[0.0], [3.0]])
    kappa = math.exp(-9.0)
    candidate, trace = RapidSampler(0.0, ThetaMinScope.CANDIDATE).sample_traced(gram)
    CHECK(candidate.sample == IndexSet.full(2), "Removing either point violates feasibility.")
    CHECK(trace.terminated_by_violation and trace.removals == 0, "Stopped by the violation.")
    CHECK_CLOSE(trace.records[0].theta_min, 1.0, 1e-12)
    literal, trace = RapidSampler(0.0, ThetaMinScope.PSEUDOCODE).sample_traced(gram)
    CHECK_CLOSE(trace.records[0].theta_min, kappa, 1e-15, "The candidate's own density counts.")
    CHECK(literal.sample.indices.tolist() == [1], "The literal reading removes a point.")
    feasible, violation = check_feasible(gram, IndexSet.full(2), literal.sample)
    CHECK(not feasible and "Inlier 1" in violation, f"Expected a violation, got {violation}.")
    CHECK(literal.parameters["theta_min_scope"] == "pseudocode", "The scope is recorded.")


@mandatory_testcase(max_runtime_s=60)
def test_trace_replays_from_scratch():
    rng = np.random.default_rng(21)
    for _ in range(20):
        gram = _random_gram(rng, int(rng.integers(3, 80)))
        selection, trace = rapid_sample_traced(gram, float(rng.choice([0.0, 0.1])))
        inliers = selection.prefilter.inliers
        CHECK(len(trace) <= len(inliers) - 1, "At most |I| - 1 iterations.")
        CHECK(
            len(inliers) - trace.removals == selection.size,
            "Every non-violating iteration removes exactly one observation.",
        )
        current = inliers.mask()
        previous_total = gram.values[:, current].sum()
        for record in trace.records:
            CHECK(current[record.removed], "Only sample members are removed.")
            d = gram.values[:, current].sum(axis=1)
            CHECK(
                d[record.removed] >= d[current].max() - 1e-9,
                "The removal candidate has maximal density.",
            )
            CHECK_CLOSE(record.theta_max, d[current].max(), 1e-9, "theta_max from scratch.")
            current[record.removed] = False
            d = gram.values[:, current].sum(axis=1)
            CHECK_CLOSE(record.theta_min, d[current].min(), 1e-9, "theta_min from scratch.")
            if record.violator is not None:
                current[record.removed] = True
                break
            total = d.sum()
            CHECK(total < previous_total, "The total density strictly decreases.")
            previous_total = total
        CHECK(np.array_equal(current, selection.sample.mask()), "The replay ends with S.")


@mandatory_testcase(max_runtime_s=60)
def test_output_is_feasible():
    rng = np.random.default_rng(22)
    for trial in range(50):
        gram = _random_gram(rng, int(rng.integers(2, 60)), m=int(rng.integers(1, 4)))
        p_out = float(rng.choice([0.0, 0.05, 0.25]))
        selection = rapid_sample(gram, p_out)
        feasible, violation = check_feasible(
            gram, selection.prefilter.inliers, selection.sample, DEFAULT_SETTINGS.feasibility_tolerance
        )
        CHECK(feasible, f"Trial {trial}: {violation}")
        CHECK(selection.sample.issubset(selection.prefilter.inliers), "S is a subset of I.")


@mandatory_testcase(max_runtime_s=60)
def test_incremental_densities_match_recomputation():
    rng = np.random.default_rng(23)
    every_step = DEFAULT_SETTINGS.model_copy(update={"recompute_interval": 1})
    never = DEFAULT_SETTINGS.model_copy(update={"recompute_interval": 10**9})
    for _ in range(5):
        X = rng.normal(size=(300, 3))
        gram = _gram(X, gamma=bandwidth_scott(Dataset(observations=X)))
        fresh, fresh_trace = RapidSampler(0.05, settings=every_step).sample_traced(gram)
        drift, drift_trace = RapidSampler(0.05, settings=never).sample_traced(gram)
        CHECK(fresh.sample == drift.sample, "Recomputation does not change the sample.")
        CHECK(len(fresh_trace) == len(drift_trace), "Same number of iterations.")
        for a, b in zip(fresh_trace.records, drift_trace.records):
            CHECK(a.removed == b.removed, "Same removal order.")
            CHECK_CLOSE(a.theta_min, b.theta_min, 1e-9, "Accumulated error.")


@mandatory_testcase(max_runtime_s=60)
def test_density_gap_shrinks():
    passed = 0
    seeds = range(20)
    for seed in seeds:
        data, _ = generate_mixture(MixtureConfig(n=150, m=2, components=2, seed=seed))
        gram = _gram(data.observations, gamma=bandwidth_scott(data))
        selection = rapid_sample(gram, 0.05)
        before = SopSolution.evaluate(gram, selection.prefilter.inliers).objective
        after = SopSolution.evaluate(gram, selection.sample).objective
        if after <= before + 1e-12:
            passed += 1
        else:
            _logger.warning("Seed %d: density gap grew from %.6g to %.6g.", seed, before, after)
    CHECK(passed >= 0.9 * len(seeds), f"The density gap shrank on only {passed} of {len(seeds)} seeds.")


@mandatory_testcase(max_runtime_s=30)
def test_deterministic_and_sampling_rate():
    rng = np.random.default_rng(24)
    gram = _random_gram(rng, 100)
    first, second = rapid_sample(gram, 0.05), rapid_sample(gram, 0.05)
    CHECK(first.sample == second.sample, "Identical inputs, identical samples.")
    CHECK(first.method == "rapid" and first.seed is None, "Provenance of the selection.")
    CHECK(first.ratio == first.size / 100, "The ratio relates to N.")
    CHECK(first.t_samp > 0, f"Sampling took {first.t_samp} s.")
    full_density = empirical_density(gram, first.prefilter.inliers)
    CHECK(full_density.d_min > 0, "Densities are positive.")


if __name__ == "__main__":
    main()
