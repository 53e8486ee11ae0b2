import numpy as np
from _check_utils import CHECK, CHECK_CLOSE, CHECK_RAISES, main, mandatory_testcase
from pydantic import ValidationError

from rapid_svdd import (
    DEFAULT_SETTINGS,
    Dataset,
    IndexSet,
    KernelSpec,
    SopCpSatSolver,
    SopInstanceTooLargeError,
    SopSolution,
    check_feasible,
    gram_matrix,
    rapid_sample,
    solve_sop_exact,
)
from rapid_svdd._timer import Timer


def _gram(X, gamma=1.0):
    return gram_matrix(Dataset(observations=X), KernelSpec(gamma=gamma))


@mandatory_testcase(max_runtime_s=30)
def test_feasibility_of_simple_samples():
    gram = _gram([[0.0], [1.0], [2.0]])
    everything = IndexSet.full(3)
    CHECK(check_feasible(gram, everything, everything)[0], "S = I is always feasible.")
    single = _gram([[5.0]])
    CHECK(check_feasible(single, IndexSet.full(1), IndexSet.full(1))[0], "A singleton I.")
    feasible, violation = check_feasible(gram, everything, IndexSet(indices=[1], n=3))
    CHECK(not feasible, "The middle point alone leaves the endpoints below theta_min.")
    CHECK(violation.startswith("Inlier 1 "), f"The first violating inlier is named: {violation}")
    CHECK_RAISES(ValueError, check_feasible, gram, everything, IndexSet(indices=[], n=3))
    CHECK_RAISES(ValueError, check_feasible, gram, IndexSet(indices=[0], n=3), everything)


@mandatory_testcase(max_runtime_s=30)
def test_exact_solutions_of_tiny_instances():
    single = solve_sop_exact(_gram([[1.0]]), IndexSet.full(1))
    CHECK(single.sample == IndexSet.full(1) and single.objective == 0.0, "N = 1.")
    twins = solve_sop_exact(_gram([[1.0], [1.0]]), IndexSet.full(2))
    CHECK(twins.sample.indices.tolist() == [0], "Identical points: the first singleton wins.")
    CHECK(twins.objective == 0.0, "A singleton has no density gap.")


@mandatory_testcase(max_runtime_s=30)
def test_exact_is_at_least_as_good_as_rapid():
    gram = _gram([[0.0], [1.0], [2.0], [3.0]])
    exact = solve_sop_exact(gram, IndexSet.full(4))
    rapid = SopSolution.evaluate(gram, rapid_sample(gram, 0.0).sample)
    CHECK(exact.objective <= rapid.objective + 1e-12, "The optimum is never worse than RAPID.")
    CHECK(check_feasible(gram, IndexSet.full(4), exact.sample)[0], "The optimum is feasible.")


@mandatory_testcase(max_runtime_s=60)
def test_exact_optimum_is_feasible_and_minimal():
    rng = np.random.default_rng(31)
    for _ in range(30):
        n = int(rng.integers(2, 9))
        gram = _gram(rng.normal(size=(n, 2)), gamma=float(rng.choice([0.1, 1.0, 10.0])))
        inliers = IndexSet.full(n)
        exact = solve_sop_exact(gram, inliers)
        CHECK(check_feasible(gram, inliers, exact.sample, 0.0)[0], "Exact output at tolerance 0.")
        # a few random feasible samples are never better
        for _ in range(10):
            mask = rng.random(n) < 0.5
            if not mask.any():
                continue
            sample = IndexSet.from_mask(mask)
            if check_feasible(gram, inliers, sample)[0]:
                objective = SopSolution.evaluate(gram, sample).objective
                CHECK(exact.objective <= objective + 1e-12, "A feasible sample beats the optimum.")


@mandatory_testcase(max_runtime_s=30)
def test_exact_solver_limits():
    settings = DEFAULT_SETTINGS.model_copy(update={"sop_max_inliers": 3})
    gram = _gram([[0.0], [1.0], [2.0], [3.0]])
    CHECK_RAISES(SopInstanceTooLargeError, solve_sop_exact, gram, IndexSet.full(4), settings)
    CHECK_RAISES(ValueError, solve_sop_exact, gram, IndexSet(indices=[], n=4))
    CHECK_RAISES(TimeoutError, solve_sop_exact, gram, IndexSet.full(4), timer=Timer(-1.0))


@mandatory_testcase(max_runtime_s=30)
def test_solution_consistency():
    gram = _gram([[0.0], [1.0], [2.0]])
    solution = SopSolution.evaluate(gram, IndexSet(indices=[0, 2], n=3))
    CHECK(solution.argmin_witness in (0, 2), "The witness is part of the sample.")
    CHECK_CLOSE(solution.objective, 0.0, 1e-15, "Symmetric pair.")
    CHECK_RAISES(
        ValidationError,
        SopSolution,
        sample=IndexSet(indices=[0], n=3),
        theta_min=1.0,
        theta_max=1.0,
        objective=0.0,
        argmin_witness=2,
    )


@mandatory_testcase(max_runtime_s=120)
def test_cpsat_matches_exhaustive_search():
    rng = np.random.default_rng(32)
    for _ in range(10):
        n = int(rng.integers(3, 9))
        gram = _gram(rng.normal(size=(n, 2)), gamma=float(rng.choice([0.5, 1.0, 2.0])))
        inliers = IndexSet.full(n)
        exact = solve_sop_exact(gram, inliers)
        cpsat = SopCpSatSolver(gram, inliers).solve(timelimit=30)
        CHECK(
            check_feasible(gram, inliers, cpsat.sample, 1e-4)[0],
            "The CP-SAT sample is feasible up to the integer scaling.",
        )
        CHECK_CLOSE(cpsat.objective, exact.objective, 1e-4, "Objectives agree up to the scaling.")


if __name__ == "__main__":
    main()
