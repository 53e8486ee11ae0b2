"""
Command line interface.

    rapid-svdd gen     synthetic Gaussian-mixture data -> CSV
    rapid-svdd sample  pre-filter and sample -> index file (and RAPID trace)
    rapid-svdd train   SVDD on a sample or the full data -> model JSON
    rapid-svdd eval    score a model or a full pipeline run -> report
    rapid-svdd bench   benchmark suite or sweep -> report CSV/JSON
    rapid-svdd oracle  exact SOP solution vs. RAPID on tiny data

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

import argparse
import logging
import sys
import typing
from pathlib import Path

from pydantic import BaseModel, model_validator

from .benchmark import (
    BenchmarkConfig,
    BenchmarkSuite,
    benchmark_suite,
    sweep_configs,
)
from .config import DEFAULT_SETTINGS
from .data_io import (
    load_csv,
    load_model,
    parse_label_map,
    read_indices,
    save_model,
    write_dataset_csv,
    write_indices,
    write_report,
    write_trace,
)
from .data_schema import Dataset, Label, LabelVector
from .density import empirical_density, level_set_predict
from .evaluation import Pipeline, PipelineConfig, RunReport, evaluate_model
from .exceptions import RapidSvddError
from .kernel import GammaRule, gram_matrix
from .prefilter import Prefilter
from .rapid import RapidSampler, ThetaMinScope
from .sampling_strategy import make_sampling_strategy, sampling_methods
from .sop import SopCpSatSolver, SopSolution, check_feasible, solve_sop_exact
from .svdd import SvddTrainer
from .synthetic import MixtureConfig, generate_mixture

_logger = logging.getLogger("rapid-svdd")


class UsageError(Exception):
    """
    Invalid command line. Leads to exit code 1.
    """


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> typing.NoReturn:
        msg = f"{self.prog}: {message}"
        raise UsageError(msg)


def _share(low: float, high: float, include_high: bool) -> typing.Callable[[str], float]:
    def parse(text: str) -> float:
        try:
            value = float(text)
        except ValueError:
            msg = f"'{text}' is not a real number"
            raise argparse.ArgumentTypeError(msg) from None
        if not (low <= value < high or (include_high and value == high)):
            closing = "]" if include_high else ")"
            msg = f"{value} is not within [{low}, {high}{closing}"
            raise argparse.ArgumentTypeError(msg)
        return value

    return parse


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        msg = f"'{text}' is not an integer"
        raise argparse.ArgumentTypeError(msg) from None
    if value < 1:
        msg = f"{value} is not positive"
        raise argparse.ArgumentTypeError(msg)
    return value


def _nonnegative_float(text: str) -> float:
    return _share(0.0, float("inf"), include_high=False)(text)


def _existing_file(text: str) -> Path:
    path = Path(text)
    if not path.is_file():
        msg = f"file '{text}' does not exist"
        raise argparse.ArgumentTypeError(msg)
    return path


def _label_map(text: str) -> typing.Dict[str, Label]:
    try:
        return parse_label_map(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _int_list(text: str) -> typing.List[int]:
    return [_positive_int(item) for item in text.split(",") if item.strip()]


class CliConfig(BaseModel):
    """
    The options shared by the subcommands that load data and run a pipeline.
    """

    command: str
    input: typing.Optional[Path] = None
    output: typing.Optional[Path] = None
    gamma: typing.Optional[float] = None
    gamma_rule: typing.Optional[GammaRule] = None
    p_out: float = 0.05
    method: str = "rapid"
    ratio: typing.Optional[float] = None
    seed: int = 0
    label_column: typing.Optional[str] = None
    label_map: typing.Optional[typing.Dict[str, Label]] = None
    header: typing.Optional[bool] = None
    theta_min_scope: ThetaMinScope = ThetaMinScope.CANDIDATE
    fmt: str = "csv"

    @model_validator(mode="after")
    def _consistent(self):
        if self.gamma is not None and self.gamma_rule not in (None, GammaRule.FIXED):
            msg = "--gamma and --gamma-rule cannot be combined."
            raise ValueError(msg)
        if self.gamma_rule == GammaRule.FIXED and self.gamma is None:
            msg = "--gamma-rule fixed needs --gamma."
            raise ValueError(msg)
        if (self.label_column is None) != (self.label_map is None):
            msg = "--label-column and --label-map must be given together."
            raise ValueError(msg)
        if self.method == "rand" and self.ratio is None:
            msg = "--method rand needs --ratio."
            raise ValueError(msg)
        return self

    @classmethod
    def from_namespace(cls, args: argparse.Namespace) -> "CliConfig":
        values = {
            key: getattr(args, key)
            for key in (
                "input",
                "output",
                "gamma",
                "p_out",
                "method",
                "ratio",
                "seed",
                "label_column",
                "label_map",
                "header",
                "fmt",
            )
            if getattr(args, key, None) is not None
        }
        if getattr(args, "gamma_rule", None) is not None:
            values["gamma_rule"] = GammaRule.from_str(args.gamma_rule)
        if getattr(args, "theta_scope", None) is not None:
            values["theta_min_scope"] = ThetaMinScope.from_str(args.theta_scope)
        return cls(command=args.command, **values)

    def pipeline(self) -> PipelineConfig:
        return PipelineConfig(
            method=self.method,
            gamma_rule=self.gamma_rule,
            gamma=self.gamma,
            p_out=self.p_out,
            ratio=self.ratio,
            seed=self.seed,
            theta_min_scope=self.theta_min_scope,
        )

    def load(self) -> typing.Tuple[Dataset, typing.Optional[LabelVector]]:
        assert self.input is not None, "Every data command has an input."
        return load_csv(self.input, self.label_column, self.label_map, header=self.header)


def _add_input(parser: argparse.ArgumentParser, labels_required: bool = False) -> None:
    parser.add_argument(
        "--in", dest="input", type=_existing_file, required=True, help="input CSV file"
    )
    parser.add_argument(
        "--label-column",
        required=labels_required,
        help="name of the label column (1-based position for files without header)",
    )
    parser.add_argument(
        "--label-map",
        type=_label_map,
        required=labels_required,
        help="mapping of label values, e.g., 'yes=out,no=in'",
    )
    parser.add_argument(
        "--header",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="whether the first row is a header (detected by default)",
    )


def _add_bandwidth(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--gamma", type=_nonnegative_float, help="explicit gamma >= 0")
    group.add_argument(
        "--gamma-rule",
        choices=[str(r) for r in GammaRule if r != GammaRule.FIXED],
        help="bandwidth heuristic (default: scott)",
    )


def _add_p_out(parser: argparse.ArgumentParser, default: float) -> None:
    parser.add_argument(
        "--p-out",
        type=_share(0.0, 1.0, include_high=False),
        default=default,
        help=f"outlier share removed by pre-filtering, in [0, 1) (default: {default})",
    )


def _add_sampling(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--method", choices=sampling_methods(), default="rapid", help="sampling method"
    )
    parser.add_argument(
        "--ratio",
        type=_share(0.0, 1.0, include_high=True),
        help="sample ratio in (0, 1], required for 'rand'",
    )
    parser.add_argument("--seed", type=int, default=0, help="random seed (default: 0)")
    parser.add_argument(
        "--theta-scope",
        choices=[str(s) for s in ThetaMinScope],
        default=str(ThetaMinScope.CANDIDATE),
        help="set over which RAPID takes the minimal sample density",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="rapid-svdd",
        description="Density-based sampling (RAPID) and Support Vector Data Description.",
    )
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG logs"
    )
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    gen = commands.add_parser("gen", help="generate a labeled Gaussian mixture")
    gen.add_argument("--n", type=_positive_int, required=True, help="number of observations >= 1")
    gen.add_argument("--m", type=_positive_int, required=True, help="dimensionality >= 1")
    gen.add_argument(
        "--components", type=_positive_int, default=1, help="number of components, 1 <= components <= n"
    )
    gen.add_argument(
        "--outlier-ratio",
        type=_share(0.0, 1.0, include_high=False),
        default=0.0,
        help="share of uniform outliers in [0, 1) (default: 0)",
    )
    gen.add_argument("--seed", type=int, required=True, help="random seed")
    gen.add_argument("--out", dest="output", type=Path, required=True, help="output CSV file")

    sample = commands.add_parser("sample", help="pre-filter and sample the inliers")
    _add_input(sample)
    _add_sampling(sample)
    _add_p_out(sample, 0.05)
    _add_bandwidth(sample)
    sample.add_argument("--out", dest="output", type=Path, required=True, help="index file")
    sample.add_argument("--trace", type=Path, help="CSV file for the RAPID iterations")

    train = commands.add_parser("train", help="train SVDD (C=1) on a sample or all data")
    _add_input(train)
    train.add_argument("--sample", type=_existing_file, help="index file of the sample")
    _add_bandwidth(train)
    train.add_argument("--out", dest="output", type=Path, required=True, help="model JSON file")

    evaluate = commands.add_parser("eval", help="evaluate a model or a pipeline run")
    _add_input(evaluate, labels_required=True)
    evaluate.add_argument("--model", type=_existing_file, help="trained model JSON file")
    _add_sampling(evaluate)
    _add_p_out(evaluate, 0.05)
    _add_bandwidth(evaluate)
    evaluate.add_argument("--dataset-id", default=None, help="name of the data in the report")
    evaluate.add_argument("--out", dest="output", type=Path, help="report file")
    evaluate.add_argument("--format", dest="fmt", choices=["csv", "json"], default="json")

    bench = commands.add_parser("bench", help="run a benchmark suite or sweep")
    source = bench.add_mutually_exclusive_group(required=True)
    source.add_argument("--suite", type=_existing_file, help="suite JSON file")
    source.add_argument(
        "--sweep", choices=["n", "m", "components"], help="synthetic factor to vary"
    )
    bench.add_argument("--values", type=_int_list, help="comma-separated values of the factor")
    bench.add_argument("--base-n", type=_positive_int, default=400)
    bench.add_argument("--base-m", type=_positive_int, default=2)
    bench.add_argument("--base-components", type=_positive_int, default=2)
    bench.add_argument(
        "--outlier-ratio", type=_share(0.0, 1.0, include_high=False), default=0.05
    )
    bench.add_argument("--methods", default="rapid", help="comma-separated sampling methods")
    bench.add_argument("--ratio", type=_share(0.0, 1.0, include_high=True), help="ratio of 'rand'")
    bench.add_argument("--repetitions", type=_positive_int, default=5)
    _add_p_out(bench, 0.05)
    bench.add_argument(
        "--gamma-rule", choices=[str(r) for r in GammaRule if r != GammaRule.FIXED]
    )
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--out", dest="output", type=Path, required=True, help="report file")
    bench.add_argument("--summary", type=Path, help="file for per-configuration summaries")
    bench.add_argument("--format", dest="fmt", choices=["csv", "json"], default="csv")

    oracle = commands.add_parser("oracle", help="exact SOP solution vs. RAPID on tiny data")
    _add_input(oracle)
    _add_p_out(oracle, 0.0)
    _add_bandwidth(oracle)
    oracle.add_argument("--solver", choices=["exhaustive", "cpsat"], default="exhaustive")
    oracle.add_argument(
        "--theta-scope",
        choices=[str(s) for s in ThetaMinScope],
        default=str(ThetaMinScope.CANDIDATE),
    )
    return parser


def _cmd_gen(args: argparse.Namespace, config: MixtureConfig) -> int:
    data, labels = generate_mixture(config)
    write_dataset_csv(data, args.output, labels)
    print(f"Wrote {data.n} observations ({labels.n_outliers} outliers) to {args.output}.")
    return 0


def _cmd_sample(args: argparse.Namespace, config: CliConfig) -> int:
    if args.trace is not None and config.method != "rapid":
        msg = "--trace is only available for --method rapid."
        raise UsageError(msg)
    data, _ = config.load()
    pipeline = config.pipeline()
    gram = gram_matrix(data, pipeline.bandwidth().kernel(data))
    prefiltered = Prefilter(config.p_out).apply(gram)
    if args.trace is not None:
        selection, trace = RapidSampler(
            config.p_out, config.theta_min_scope
        ).sample_traced(gram, prefiltered)
        write_trace(trace, args.trace)
    else:
        strategy = make_sampling_strategy(
            config.method, ratio=config.ratio, theta_min_scope=config.theta_min_scope
        )
        selection = strategy.select(gram, prefiltered, seed=config.seed)
    write_indices(selection.sample, config.output)
    print(f"inliers: {len(prefiltered.inliers)}")
    print(f"sample_size: {selection.size}")
    print(f"sample_ratio: {selection.ratio:.6g}")
    return 0


def _cmd_train(args: argparse.Namespace, config: CliConfig) -> int:
    data, _ = config.load()
    kernel = config.pipeline().bandwidth().kernel(data)
    sample = None if args.sample is None else read_indices(args.sample, data.n)
    model = SvddTrainer(kernel).train(data, sample)
    save_model(model, config.output)
    print(f"support_vectors: {len(model.support_vectors)}")
    print(f"radius_sq: {model.radius_sq:.10g}")
    return 0


def _print_report(report: RunReport) -> None:
    for key, value in report.model_dump().items():
        print(f"{key}: {value:.6g}" if isinstance(value, float) else f"{key}: {value}")


def _cmd_eval(args: argparse.Namespace, config: CliConfig) -> int:
    data, truth = config.load()
    assert truth is not None, "eval requires labels."
    dataset_id = args.dataset_id or Path(config.input).stem
    if args.model is not None:
        report = evaluate_model(load_model(args.model), data, truth, dataset_id)
    else:
        report = Pipeline(config.pipeline()).run(data, truth, dataset_id).report
    if config.output is not None:
        write_report(report, config.output, config.fmt)
    _print_report(report)
    return 0


def _cmd_bench(args: argparse.Namespace, config: CliConfig) -> int:
    if args.suite is not None:
        suite = BenchmarkSuite.model_validate_json(Path(args.suite).read_text())
        configs, repetitions = suite.configs, suite.repetitions
    else:
        if not args.values:
            msg = "--sweep needs --values."
            raise UsageError(msg)
        base_data = MixtureConfig(
            n=args.base_n,
            m=args.base_m,
            components=args.base_components,
            outlier_ratio=args.outlier_ratio,
            seed=args.seed,
        )
        configs = []
        for method in (m.strip() for m in args.methods.split(",") if m.strip()):
            if method not in sampling_methods():
                msg = f"Unknown method '{method}'. Available: {', '.join(sampling_methods())}."
                raise UsageError(msg)
            pipeline = PipelineConfig(
                method=method,
                gamma_rule=config.gamma_rule,
                p_out=config.p_out,
                ratio=config.ratio,
                seed=config.seed,
            )
            base = BenchmarkConfig(id=method, pipeline=pipeline, synthetic=base_data)
            configs.extend(sweep_configs(args.sweep, args.values, base))
        repetitions = args.repetitions
    result = benchmark_suite(configs, repetitions, show_progress=sys.stderr.isatty())
    write_report(result.reports, config.output, config.fmt)
    if args.summary is not None:
        write_report(result.summaries, args.summary, config.fmt)
    for failure in result.failures:
        print(
            f"Configuration '{failure.config_id}' failed in stage {failure.stage}: {failure.message}",
            file=sys.stderr,
        )
    print(f"runs: {len(result.reports)}")
    print(f"failures: {len(result.failures)}")
    return 0 if result.reports else 2


def _cmd_oracle(args: argparse.Namespace, config: CliConfig) -> int:
    data, _ = config.load()
    gram = gram_matrix(data, config.pipeline().bandwidth().kernel(data))
    prefiltered = Prefilter(config.p_out).apply(gram)
    if args.solver == "cpsat":
        exact = SopCpSatSolver(gram, prefiltered.inliers).solve()
    else:
        exact = solve_sop_exact(gram, prefiltered.inliers)
    selection = RapidSampler(config.p_out, config.theta_min_scope).sample(gram, prefiltered)
    rapid = SopSolution.evaluate(gram, selection.sample)
    feasible, violation = check_feasible(
        gram, prefiltered.inliers, selection.sample, DEFAULT_SETTINGS.feasibility_tolerance
    )
    # level-set classifiers of the exact sample and of all inliers, on the inliers
    inlier_points = data.observations[prefiltered.inliers.indices]
    full_theta = empirical_density(gram, prefiltered.inliers).d_min
    by_full = level_set_predict(gram.kernel, inlier_points, inlier_points, full_theta)
    by_sample = level_set_predict(
        gram.kernel,
        data.observations[exact.sample.indices],
        inlier_points,
        exact.theta_min,
    )
    agreement = float((by_full.outlier == by_sample.outlier).mean())

    print(f"delta_fit_exact: {exact.objective:.10g}")
    print(f"exact_sample: {' '.join(map(str, exact.sample.one_based()))}")
    print(f"rapid_sample: {' '.join(map(str, selection.sample.one_based()))}")
    print(f"delta_fit_rapid: {rapid.objective:.10g}")
    print(f"rapid_feasible: {str(feasible).lower()}")
    print(f"level_set_agreement: {agreement:.6g}")
    if violation is not None:
        print(f"violation: {violation}")
    return 0


_COMMANDS: typing.Dict[str, typing.Callable[..., int]] = {
    "gen": _cmd_gen,
    "sample": _cmd_sample,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "bench": _cmd_bench,
    "oracle": _cmd_oracle,
}


def _config_of(args: argparse.Namespace) -> typing.Union[MixtureConfig, CliConfig]:
    if args.command == "gen":
        return MixtureConfig(
            n=args.n,
            m=args.m,
            components=args.components,
            outlier_ratio=args.outlier_ratio,
            seed=args.seed,
        )
    return CliConfig.from_namespace(args)


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(name)s %(levelname)s: %(message)s",
        stream=sys.stderr,
    )


def run_cli(argv: typing.Optional[typing.Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _configure_logging(args.verbose)
        config = _config_of(args)
    except SystemExit as e:  # --help
        return int(e.code or 0)
    except UsageError as e:
        print(e, file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"{parser.prog} {args.command}: {e}", file=sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args, config)
    except UsageError as e:
        print(f"{parser.prog} {args.command}: {e}", file=sys.stderr)
        return 1
    except (RapidSvddError, OSError, ValueError) as e:
        _logger.debug("Command failed.", exc_info=True)
        print(f"{parser.prog} {args.command}: error: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_cli())
