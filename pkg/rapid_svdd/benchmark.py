"""
Benchmark suites: many pipeline runs with repetitions for randomized methods,
per-configuration medians and means, and failures recorded instead of raised.
"""

import logging
import typing

import pandas as pd
from pydantic import BaseModel, Field, model_validator
from tqdm import tqdm  # pip install tqdm

from .data_io import load_csv
from .data_schema import Dataset, Label, LabelVector
from .evaluation import Pipeline, PipelineConfig, RunReport
from .exceptions import PipelineStageError
from .sampling_strategy import make_sampling_strategy
from .synthetic import MixtureConfig, generate_mixture

SUMMARY_METRICS = ("t_samp", "t_train", "t_inf", "sample_size", "sample_ratio", "mcc")


class BenchmarkConfig(BaseModel):
    """
    One configuration of a suite: a data source and a pipeline configuration.
    The data is either a labeled CSV file or a synthetic mixture.
    """

    id: str = Field(..., description="Identifier of the configuration in reports.")
    pipeline: PipelineConfig = Field(default_factory=PipelineConfig)
    path: typing.Optional[str] = Field(default=None, description="Labeled CSV file.")
    label_column: typing.Optional[str] = None
    label_map: typing.Optional[typing.Dict[str, Label]] = None
    synthetic: typing.Optional[MixtureConfig] = None

    class Config:
        frozen = True

    @model_validator(mode="after")
    def _one_data_source(self):
        if (self.path is None) == (self.synthetic is None):
            msg = f"Configuration '{self.id}' needs exactly one of 'path' and 'synthetic'."
            raise ValueError(msg)
        if self.path is not None and (self.label_column is None or self.label_map is None):
            msg = f"Configuration '{self.id}' needs a label column and mapping for '{self.path}'."
            raise ValueError(msg)
        return self

    def load(self) -> typing.Tuple[Dataset, LabelVector]:
        if self.synthetic is not None:
            return generate_mixture(self.synthetic)
        data, labels = load_csv(self.path, self.label_column, self.label_map)
        assert labels is not None
        return data, labels


class BenchmarkSuite(BaseModel):
    """
    A suite as stored in a JSON file.
    """

    configs: typing.List[BenchmarkConfig]
    repetitions: int = Field(default=5, ge=1)


class ConfigSummary(BaseModel):
    config_id: str
    method: str
    runs: int
    median_t_samp: float
    mean_t_samp: float
    median_t_train: float
    mean_t_train: float
    median_t_inf: float
    mean_t_inf: float
    median_sample_size: float
    mean_sample_size: float
    median_sample_ratio: float
    mean_sample_ratio: float
    median_mcc: float
    mean_mcc: float


class BenchmarkFailure(BaseModel):
    config_id: str
    stage: str
    message: str


class BenchmarkResult(BaseModel):
    reports: typing.List[RunReport] = []
    summaries: typing.List[ConfigSummary] = []
    failures: typing.List[BenchmarkFailure] = []


def summarize(
    config_ids: typing.Sequence[str], reports: typing.Sequence[RunReport]
) -> typing.List[ConfigSummary]:
    """
    Median and mean of every metric per configuration, in order of first appearance.
    """
    if not reports:
        return []
    frame = pd.DataFrame([r.model_dump() for r in reports])
    frame["config_id"] = list(config_ids)
    grouped = frame.groupby("config_id", sort=False)
    stats = grouped[list(SUMMARY_METRICS)].agg(["median", "mean"])
    summaries = []
    for config_id, row in stats.iterrows():
        values = {}
        for metric in SUMMARY_METRICS:
            values[f"median_{metric}"] = float(row[(metric, "median")])
            values[f"mean_{metric}"] = float(row[(metric, "mean")])
        summaries.append(
            ConfigSummary(
                config_id=str(config_id),
                method=str(grouped.get_group(config_id)["method"].iloc[0]),
                runs=int(grouped.size()[config_id]),
                **values,
            )
        )
    return summaries


def benchmark_suite(
    configs: typing.Sequence[BenchmarkConfig],
    repetitions: int = 5,
    show_progress: bool = True,
    logger: typing.Optional[logging.Logger] = None,
) -> BenchmarkResult:
    """
    Runs every configuration once if its method is deterministic, else
    `repetitions` times with the seeds seed, seed+1, ... . A failing
    configuration is recorded and the suite continues.
    """
    logger = logger or logging.getLogger("Benchmark")
    if not configs:
        msg = "A benchmark suite needs at least one configuration."
        raise ValueError(msg)
    if repetitions < 1:
        msg = f"repetitions must be positive, got {repetitions}."
        raise ValueError(msg)
    reports: typing.List[RunReport] = []
    report_ids: typing.List[str] = []
    failures: typing.List[BenchmarkFailure] = []
    for config in tqdm(configs, desc="Benchmark", disable=not show_progress):
        try:
            data, truth = config.load()
        except (OSError, ValueError) as e:
            logger.error("Configuration '%s' could not load its data: %s", config.id, e)
            failures.append(BenchmarkFailure(config_id=config.id, stage="loading", message=str(e)))
            continue
        try:
            strategy = make_sampling_strategy(config.pipeline.method, ratio=config.pipeline.ratio)
        except ValueError as e:
            failures.append(BenchmarkFailure(config_id=config.id, stage="setup", message=str(e)))
            continue
        runs = 1 if strategy.deterministic else repetitions
        for k in range(runs):
            pipeline_config = config.pipeline.model_copy(
                update={"seed": config.pipeline.seed + k}
            )
            try:
                outcome = Pipeline(pipeline_config).run(data, truth, dataset_id=config.id)
            except PipelineStageError as e:
                logger.error("Configuration '%s' failed: %s", config.id, e)
                failures.append(
                    BenchmarkFailure(config_id=config.id, stage=e.stage, message=str(e.cause))
                )
                break
            reports.append(outcome.report)
            report_ids.append(config.id)
    logger.info(
        "Benchmark finished: %d runs, %d failed configurations.", len(reports), len(failures)
    )
    return BenchmarkResult(
        reports=reports, summaries=summarize(report_ids, reports), failures=failures
    )


def sweep_configs(
    factor: str,
    values: typing.Iterable[int],
    base: BenchmarkConfig,
) -> typing.List[BenchmarkConfig]:
    """
    Varies one factor of the synthetic data ('n', 'm' or 'components') of a
    base configuration.
    """
    if factor not in ("n", "m", "components"):
        msg = f"Unknown sweep factor '{factor}', expected 'n', 'm' or 'components'."
        raise ValueError(msg)
    if base.synthetic is None:
        msg = "Sweeps need a synthetic base configuration."
        raise ValueError(msg)
    return [
        base.model_copy(
            update={
                "id": f"{base.id}-{factor}{value}",
                "synthetic": MixtureConfig(
                    **{**base.synthetic.model_dump(), factor: int(value)}
                ),
            }
        )
        for value in values
    ]


def rand_ratio_grid() -> typing.List[float]:
    """
    Sample ratios of the Rand_r baselines between 0.01 and 1.
    """
    return [0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0]


def rand_baseline_configs(
    base: BenchmarkConfig, ratios: typing.Optional[typing.Iterable[float]] = None
) -> typing.List[BenchmarkConfig]:
    return [
        base.model_copy(
            update={
                "id": f"{base.id}-rand{r:g}",
                "pipeline": base.pipeline.model_copy(update={"method": "rand", "ratio": r}),
            }
        )
        for r in (rand_ratio_grid() if ratios is None else ratios)
    ]
