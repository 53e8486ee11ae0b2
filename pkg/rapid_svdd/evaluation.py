"""
Classification quality and the end-to-end evaluation pipeline:

    bandwidth -> Gram matrix -> pre-filter -> sampling -> SVDD training -> inference -> MCC

The SVDD is evaluated on the complete data set against the ground truth. There
is no train/test split, because the training never sees the labels.
"""

import contextlib
import logging
import typing

import numpy as np
from pydantic import BaseModel, Field, model_validator
from sklearn.metrics import confusion_matrix, matthews_corrcoef

from ._timer import Timer
from .config import DEFAULT_SETTINGS, Settings
from .data_schema import Dataset, LabelVector
from .exceptions import PipelineStageError
from .kernel import BandwidthStrategy, GammaRule, gram_matrix
from .prefilter import Prefilter
from .rapid import ThetaMinScope
from .sampling_strategy import make_sampling_strategy
from .solutions import SampleSelection
from .svdd import SvddModel, SvddTrainer, predict_batch


class ConfusionCounts(BaseModel):
    """
    Confusion counts with 'out' as the positive class.
    """

    tp: int = Field(..., ge=0)
    tn: int = Field(..., ge=0)
    fp: int = Field(..., ge=0)
    fn: int = Field(..., ge=0)

    class Config:
        frozen = True

    @classmethod
    def from_labels(cls, truth: LabelVector, predicted: LabelVector) -> "ConfusionCounts":
        if len(truth) != len(predicted):
            msg = f"Length mismatch: {len(truth)} true labels vs. {len(predicted)} predictions."
            raise ValueError(msg)
        if len(truth) == 0:
            msg = "Cannot score an empty label vector."
            raise ValueError(msg)
        (tn, fp), (fn, tp) = confusion_matrix(
            truth.outlier, predicted.outlier, labels=[False, True]
        )
        return cls(tp=int(tp), tn=int(tn), fp=int(fp), fn=int(fn))

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def mcc(self) -> float:
        """
        Matthews correlation coefficient, 0 if a factor of the denominator is 0.
        """
        if self.total == 0:
            return 0.0
        counts = [self.tp, self.fn, self.tn, self.fp]
        truth = np.repeat([True, True, False, False], counts)
        predicted = np.repeat([True, False, False, True], counts)
        return float(matthews_corrcoef(truth, predicted))


def mcc(truth: LabelVector, predicted: LabelVector) -> float:
    return ConfusionCounts.from_labels(truth, predicted).mcc()


class RunReport(BaseModel):
    """
    One evaluated run. Timings are in seconds; t_inf is per 1000 observations.
    """

    dataset_id: str
    method: str
    t_samp: float = Field(..., ge=0)
    t_train: float = Field(..., ge=0)
    t_inf: float = Field(..., ge=0)
    sample_size: int = Field(..., ge=1)
    sample_ratio: float = Field(..., gt=0, le=1)
    mcc: float = Field(..., ge=-1, le=1)
    gamma: float
    p_out: typing.Optional[float] = None
    seed: typing.Optional[int] = None

    class Config:
        frozen = True


class PipelineConfig(BaseModel):
    """
    Everything that determines a run, except for the data.
    """

    method: str = Field(default="rapid", description="Registered sampling method.")
    gamma_rule: typing.Optional[GammaRule] = Field(
        default=None, description="Bandwidth heuristic, Scott's rule if neither rule nor gamma is given."
    )
    gamma: typing.Optional[float] = Field(default=None, ge=0, description="Explicit gamma.")
    p_out: float = Field(default=0.05, ge=0, lt=1)
    ratio: typing.Optional[float] = Field(default=None, gt=0, le=1, description="Sample ratio of 'rand'.")
    seed: int = 0
    theta_min_scope: ThetaMinScope = ThetaMinScope.CANDIDATE

    class Config:
        frozen = True

    @model_validator(mode="after")
    def _one_bandwidth_source(self):
        self.bandwidth()
        return self

    def bandwidth(self) -> BandwidthStrategy:
        """
        An explicit gamma implies the fixed rule and cannot be combined with a
        heuristic.
        """
        if self.gamma is not None:
            return (self.gamma_rule or GammaRule.FIXED).strategy(self.gamma)
        return (self.gamma_rule or GammaRule.SCOTT).strategy()


class PipelineOutcome(BaseModel):
    report: RunReport
    selection: SampleSelection
    model: SvddModel
    predicted: LabelVector

    class Config:
        frozen = True


@contextlib.contextmanager
def _stage(name: str):
    try:
        yield
    except PipelineStageError:
        raise
    except Exception as e:
        raise PipelineStageError(name, e) from e


class Pipeline:
    def __init__(
        self,
        config: PipelineConfig,
        settings: Settings = DEFAULT_SETTINGS,
        logger: typing.Optional[logging.Logger] = None,
    ) -> None:
        self.config = config
        self.settings = settings
        self._logger = logger or logging.getLogger("Pipeline")

    def run(
        self,
        data: Dataset,
        truth: LabelVector,
        dataset_id: str = "data",
    ) -> PipelineOutcome:
        config = self.config
        self._logger.info(
            "Evaluating '%s' on %s (N=%d, M=%d).", config.method, dataset_id, data.n, data.m
        )
        with _stage("gamma"):
            kernel = config.bandwidth().kernel(data)
            strategy = make_sampling_strategy(
                config.method,
                ratio=config.ratio,
                theta_min_scope=config.theta_min_scope,
                settings=self.settings,
            )
        timer = Timer()
        with _stage("sampling"):
            gram = gram_matrix(data, kernel, self.settings)
            prefiltered = Prefilter(config.p_out).apply(gram)
            selection = strategy.select(gram, prefiltered, seed=config.seed)
            t_samp = timer.lap("sampling")
            selection = selection.with_timing(t_samp)
        with _stage("training"):
            model = SvddTrainer(kernel, settings=self.settings).train(data, selection.sample)
            t_train = timer.lap("training")
        self._logger.debug("Stage times: %s", timer.get_laps())
        with _stage("inference"):
            predicted, t_inf = predict_batch(model, data, self.settings.prediction_tolerance)
        with _stage("scoring"):
            score = mcc(truth, predicted)
        report = RunReport(
            dataset_id=dataset_id,
            method=config.method,
            t_samp=t_samp,
            t_train=t_train,
            t_inf=t_inf,
            sample_size=selection.size,
            sample_ratio=selection.ratio,
            mcc=score,
            gamma=kernel.gamma,
            p_out=config.p_out,
            seed=None if strategy.deterministic else config.seed,
        )
        self._logger.info(
            "%s on %s: |S|=%d (ratio %.4f), MCC=%.4f.",
            config.method,
            dataset_id,
            report.sample_size,
            report.sample_ratio,
            report.mcc,
        )
        return PipelineOutcome(
            report=report, selection=selection, model=model, predicted=predicted
        )


def evaluate_pipeline(
    data: Dataset,
    truth: LabelVector,
    method: str = "rapid",
    gamma_rule: typing.Optional[GammaRule] = None,
    p_out: float = 0.05,
    seed: int = 0,
    gamma: typing.Optional[float] = None,
    ratio: typing.Optional[float] = None,
    dataset_id: str = "data",
) -> RunReport:
    config = PipelineConfig(
        method=method,
        gamma_rule=gamma_rule,
        gamma=gamma,
        p_out=p_out,
        ratio=ratio,
        seed=seed,
    )
    return Pipeline(config).run(data, truth, dataset_id).report


def evaluate_model(
    model: SvddModel,
    data: Dataset,
    truth: LabelVector,
    dataset_id: str = "data",
    p_out: typing.Optional[float] = None,
) -> RunReport:
    """
    Scores a trained model on a data set. There is no sampling and training
    time. The sample ratio relates the training size to this data set and is
    capped at 1, since the model may have been trained on different data.
    """
    with _stage("inference"):
        predicted, t_inf = predict_batch(model, data)
    with _stage("scoring"):
        score = mcc(truth, predicted)
    size = int(np.asarray(model.alpha).size)
    return RunReport(
        dataset_id=dataset_id,
        method="model",
        t_samp=0.0,
        t_train=0.0,
        t_inf=t_inf,
        sample_size=size,
        sample_ratio=min(1.0, size / data.n),
        mcc=score,
        gamma=model.kernel.gamma,
        p_out=p_out,
    )
