import math
import statistics

import numpy as np
from _check_utils import CHECK, CHECK_CLOSE, CHECK_RAISES, main, mandatory_testcase
from pydantic import ValidationError

from rapid_svdd import (
    BenchmarkConfig,
    ConfusionCounts,
    Dataset,
    GammaRule,
    KernelSpec,
    Label,
    LabelVector,
    MixtureConfig,
    Pipeline,
    PipelineConfig,
    PipelineStageError,
    bandwidth_scott,
    benchmark_suite,
    evaluate_pipeline,
    generate_mixture,
    mcc,
    rand_ratio_grid,
    sweep_configs,
    train_svdd,
)
from rapid_svdd.benchmark import rand_baseline_configs, summarize
from rapid_svdd.evaluation import evaluate_model


def _labels(*outlier: int) -> LabelVector:
    return LabelVector(outlier=[bool(o) for o in outlier])


def _counts_example():
    # tp=3, tn=4, fp=1, fn=2
    truth = _labels(1, 1, 1, 0, 0, 0, 0, 0, 1, 1)
    predicted = _labels(1, 1, 1, 0, 0, 0, 0, 1, 0, 0)
    return truth, predicted


@mandatory_testcase(max_runtime_s=30)
def test_mcc_values():
    truth = _labels(0, 1, 0, 0, 1)
    CHECK(mcc(truth, truth) == 1.0, "Perfect prediction.")
    complement = LabelVector(outlier=~truth.outlier)
    CHECK(mcc(truth, complement) == -1.0, "Perfect anticorrelation.")
    t, p = _counts_example()
    counts = ConfusionCounts.from_labels(t, p)
    CHECK((counts.tp, counts.tn, counts.fp, counts.fn) == (3, 4, 1, 2), f"Counts {counts}.")
    CHECK(counts.total == 10, "Counts add up to N.")
    CHECK_CLOSE(mcc(t, p), 10.0 / math.sqrt(600.0), 1e-9)
    CHECK_CLOSE(ConfusionCounts(tp=3, tn=4, fp=1, fn=2).mcc(), 0.40825, 1e-5)


@mandatory_testcase(max_runtime_s=30)
def test_mcc_symmetries_and_degenerate_cases():
    t, p = _counts_example()
    CHECK_CLOSE(mcc(p, t), mcc(t, p), 1e-15, "Swapping truth and prediction.")
    swapped = mcc(LabelVector(outlier=~t.outlier), LabelVector(outlier=~p.outlier))
    CHECK_CLOSE(swapped, mcc(t, p), 1e-15, "Swapping the classes.")
    single = _labels(0, 0, 0)
    CHECK(mcc(single, single) == 0.0, "A single class gives 0.")
    CHECK_RAISES(ValueError, mcc, single, _labels(0, 0))
    CHECK_RAISES(ValueError, mcc, _labels(), _labels())
    CHECK(ConfusionCounts(tp=0, tn=5, fp=0, fn=0).mcc() == 0.0, "Only true negatives give 0.")
    CHECK(ConfusionCounts(tp=0, tn=0, fp=0, fn=0).mcc() == 0.0, "No counts give 0.")
    CHECK(ConfusionCounts(tp=2, tn=0, fp=3, fn=0).mcc() == 0.0, "Predicting only outliers gives 0.")
    CHECK_CLOSE(ConfusionCounts(tp=2, tn=3, fp=0, fn=0).mcc(), 1.0, 1e-12, "Perfect counts.")


@mandatory_testcase(max_runtime_s=30)
def test_pipeline_on_a_single_observation():
    report = evaluate_pipeline(
        Dataset(observations=[[1.0, 2.0]]),
        LabelVector.from_labels([Label.IN]),
        method="rapid",
        p_out=0.0,
        gamma=1.0,
    )
    CHECK(report.sample_size == 1 and report.sample_ratio == 1.0, "The only observation.")
    CHECK(report.mcc == 0.0, "A single class gives MCC 0.")
    CHECK(report.seed is None, "RAPID is deterministic.")


@mandatory_testcase(max_runtime_s=60)
def test_full_random_sample_equals_no_sampling():
    data, truth = generate_mixture(MixtureConfig(n=150, m=2, components=2, outlier_ratio=0.05, seed=3))
    rand = Pipeline(PipelineConfig(method="rand", ratio=1.0, p_out=0.0, seed=4)).run(data, truth)
    full = Pipeline(PipelineConfig(method="full", p_out=0.0)).run(data, truth)
    CHECK(rand.predicted == full.predicted, "Identical training data, identical labels.")
    CHECK(rand.report.mcc == full.report.mcc, "Identical MCC.")
    CHECK(rand.report.sample_ratio == 1.0, "Every observation is sampled.")
    CHECK(rand.report.seed == 4, "The seed of a random run is reported.")


@mandatory_testcase(max_runtime_s=60)
def test_pipeline_report():
    data, truth = generate_mixture(MixtureConfig(n=200, m=2, components=2, outlier_ratio=0.05, seed=5))
    outcome = Pipeline(PipelineConfig(gamma_rule=GammaRule.MODIFIED_MEAN)).run(data, truth, "mix")
    report = outcome.report
    CHECK(report.dataset_id == "mix" and report.method == "rapid", "Identification.")
    CHECK(report.p_out == 0.05, "p_out defaults to 0.05.")
    CHECK(0 < report.sample_ratio < 1, f"RAPID samples, ratio {report.sample_ratio}.")
    CHECK(min(report.t_samp, report.t_train, report.t_inf) >= 0, "Timings are nonnegative.")
    CHECK(outcome.selection.sample.issubset(outcome.selection.prefilter.inliers), "S in I.")
    CHECK(len(outcome.predicted) == 200, "Every observation is classified.")


@mandatory_testcase(max_runtime_s=30)
def test_stage_attribution():
    data = Dataset(observations=np.random.default_rng(6).normal(size=(20, 2)))
    e = CHECK_RAISES(
        PipelineStageError, Pipeline(PipelineConfig()).run, data, _labels(*([0] * 19))
    )
    CHECK(e.stage == "scoring", f"The length mismatch is found while scoring, not in {e.stage}.")
    constant = Dataset(observations=np.ones((5, 2)))
    e = CHECK_RAISES(PipelineStageError, Pipeline(PipelineConfig()).run, constant, _labels(*([0] * 5)))
    CHECK(e.stage == "gamma", "Scott's rule fails on constant data.")


@mandatory_testcase(max_runtime_s=30)
def test_pipeline_config_bandwidth():
    CHECK(PipelineConfig().bandwidth().__class__.__name__ == "ScottsRule", "Scott by default.")
    CHECK(PipelineConfig(gamma=0.5).bandwidth().gamma(None) == 0.5, "An explicit gamma.")
    CHECK_RAISES(ValidationError, PipelineConfig, gamma=0.5, gamma_rule=GammaRule.SCOTT)
    CHECK_RAISES(ValidationError, PipelineConfig, gamma_rule=GammaRule.FIXED)
    CHECK_RAISES(ValidationError, PipelineConfig, p_out=1.0)


@mandatory_testcase(max_runtime_s=30)
def test_evaluate_trained_model():
    data, truth = generate_mixture(MixtureConfig(n=100, m=2, outlier_ratio=0.1, seed=7))
    model = train_svdd(data, KernelSpec(gamma=0.5))
    report = evaluate_model(model, data, truth, "mix")
    CHECK(report.method == "model" and report.sample_ratio == 1.0, "Trained on all of the data.")
    CHECK(report.t_samp == 0.0 and report.t_train == 0.0, "No sampling or training.")


@mandatory_testcase(max_runtime_s=120)
def test_benchmark_repetitions_and_failures():
    synthetic = MixtureConfig(n=80, m=2, components=2, outlier_ratio=0.05, seed=1)
    configs = [
        BenchmarkConfig(id="rapid", synthetic=synthetic),
        BenchmarkConfig(id="rand", synthetic=synthetic, pipeline=PipelineConfig(method="rand", ratio=0.3)),
        BenchmarkConfig(
            id="missing",
            path="/nonexistent/data.csv",
            label_column="label",
            label_map={"in": Label.IN, "out": Label.OUT},
        ),
    ]
    result = benchmark_suite(configs, repetitions=3, show_progress=False)
    methods = [r.method for r in result.reports]
    CHECK(methods == ["rapid", "rand", "rand", "rand"], f"Runs {methods}.")
    CHECK([r.seed for r in result.reports[1:]] == [0, 1, 2], "Random runs use seed, seed+1, ...")
    CHECK(len(result.failures) == 1, f"Failures {result.failures}.")
    failure = result.failures[0]
    CHECK(failure.config_id == "missing" and failure.stage == "loading", f"Failure {failure}.")
    by_id = {s.config_id: s for s in result.summaries}
    CHECK(by_id["rapid"].runs == 1 and by_id["rand"].runs == 3, "Runs per configuration.")
    rand_mcc = [r.mcc for r in result.reports[1:]]
    CHECK_CLOSE(by_id["rand"].median_mcc, float(np.median(rand_mcc)), 1e-12)
    CHECK_CLOSE(by_id["rand"].mean_mcc, float(np.mean(rand_mcc)), 1e-12)
    CHECK_RAISES(ValueError, benchmark_suite, [], 5)
    CHECK(summarize([], []) == [], "No reports, no summaries.")


@mandatory_testcase(max_runtime_s=120)
def test_sweep_over_n():
    base = BenchmarkConfig(id="sweep", synthetic=MixtureConfig(n=10, m=2, components=2, seed=2))
    configs = sweep_configs("n", [200, 500, 1000], base)
    CHECK([c.id for c in configs] == ["sweep-n200", "sweep-n500", "sweep-n1000"], "Identifiers.")
    CHECK([c.synthetic.n for c in configs] == [200, 500, 1000], "Only n varies.")
    result = benchmark_suite(configs, repetitions=1, show_progress=False)
    CHECK(len(result.reports) == 3 and not result.failures, "One report per size.")
    medians = [s.median_t_samp for s in result.summaries]
    CHECK(medians == sorted(medians), f"Sampling time grows with N: {medians}.")
    CHECK_RAISES(ValueError, sweep_configs, "gamma", [1], base)
    file_based = BenchmarkConfig(id="f", path="x.csv", label_column="l", label_map={"a": Label.IN})
    CHECK_RAISES(ValueError, sweep_configs, "n", [1], file_based)


@mandatory_testcase(max_runtime_s=30)
def test_rand_baselines():
    grid = rand_ratio_grid()
    CHECK(grid[0] == 0.01 and grid[-1] == 1.0 and grid == sorted(grid), f"Grid {grid}.")
    base = BenchmarkConfig(id="b", synthetic=MixtureConfig(n=50, m=2))
    configs = rand_baseline_configs(base, [0.1, 0.5])
    CHECK([c.id for c in configs] == ["b-rand0.1", "b-rand0.5"], "Identifiers.")
    CHECK(all(c.pipeline.method == "rand" for c in configs), "All random.")
    CHECK([c.pipeline.ratio for c in configs] == [0.1, 0.5], "Ratios.")
    CHECK_RAISES(ValidationError, BenchmarkConfig, id="none")


@mandatory_testcase(max_runtime_s=120)
def test_rapid_against_random_samples_of_the_same_size():
    data, truth = generate_mixture(
        MixtureConfig(n=400, m=2, components=2, outlier_ratio=0.05, seed=0)
    )
    gamma = 0.1 * bandwidth_scott(data)
    rapid = Pipeline(PipelineConfig(method="rapid", gamma=gamma)).run(data, truth)
    ratio = rapid.selection.size / len(rapid.selection.prefilter.inliers)
    rand = [
        evaluate_pipeline(data, truth, method="rand", gamma=gamma, ratio=ratio, seed=seed)
        for seed in range(5)
    ]
    CHECK(all(r.sample_size == rapid.report.sample_size for r in rand), "Same sample size.")
    rand_mcc = statistics.median(r.mcc for r in rand)
    CHECK(
        rapid.report.mcc >= rand_mcc,
        f"RAPID MCC {rapid.report.mcc:.4f} below the random median {rand_mcc:.4f}.",
    )


if __name__ == "__main__":
    main()
