"""
Sampling methods share one interface, so the pipeline and the benchmark can
treat them alike. New methods are added with `register_sampling_method`.
"""

import typing
from abc import ABC, abstractmethod

from .baselines import RandomSampleConfig, random_sample
from .config import DEFAULT_SETTINGS, Settings
from .kernel import GramMatrix
from .prefilter import PrefilterResult
from .rapid import RapidSampler, ThetaMinScope
from .solutions import SampleSelection


class SamplingStrategy(ABC):
    """
    Selects a sample from the inliers of a pre-filter result.
    """

    name: str = ""
    deterministic: bool = True

    @abstractmethod
    def select(
        self, gram: GramMatrix, prefiltered: PrefilterResult, seed: int = 0
    ) -> SampleSelection:
        ...


class RapidSampling(SamplingStrategy):
    name = "rapid"
    deterministic = True

    def __init__(
        self,
        theta_min_scope: ThetaMinScope = ThetaMinScope.CANDIDATE,
        settings: Settings = DEFAULT_SETTINGS,
        **_: typing.Any,
    ) -> None:
        self.theta_min_scope = theta_min_scope
        self.settings = settings

    def select(
        self, gram: GramMatrix, prefiltered: PrefilterResult, seed: int = 0  # noqa: ARG002
    ) -> SampleSelection:
        sampler = RapidSampler(
            prefiltered.p_out, self.theta_min_scope, settings=self.settings
        )
        return sampler.sample(gram, prefiltered)


class RandomSampling(SamplingStrategy):
    name = "rand"
    deterministic = False

    def __init__(self, ratio: typing.Optional[float] = None, **_: typing.Any) -> None:
        if ratio is None:
            msg = "The 'rand' method needs a sample ratio."
            raise ValueError(msg)
        self.ratio = RandomSampleConfig(ratio=ratio).ratio

    def select(
        self, gram: GramMatrix, prefiltered: PrefilterResult, seed: int = 0  # noqa: ARG002
    ) -> SampleSelection:
        return random_sample(prefiltered, RandomSampleConfig(ratio=self.ratio, seed=seed))


class FullSampling(SamplingStrategy):
    """
    No sampling: S = I.
    """

    name = "full"
    deterministic = True

    def __init__(self, **_: typing.Any) -> None:
        pass

    def select(
        self, gram: GramMatrix, prefiltered: PrefilterResult, seed: int = 0  # noqa: ARG002
    ) -> SampleSelection:
        return SampleSelection(
            sample=prefiltered.inliers,
            prefilter=prefiltered,
            method=self.name,
            parameters={"p_out": prefiltered.p_out},
        )


_REGISTRY: typing.Dict[str, typing.Type[SamplingStrategy]] = {}


def register_sampling_method(strategy: typing.Type[SamplingStrategy]) -> None:
    if not strategy.name:
        msg = f"{strategy.__name__} has no name."
        raise ValueError(msg)
    _REGISTRY[strategy.name] = strategy


def sampling_methods() -> typing.List[str]:
    return sorted(_REGISTRY)


def make_sampling_strategy(method: str, **kwargs: typing.Any) -> SamplingStrategy:
    """
    Instantiates a registered method. Arguments the method does not use (e.g.,
    a ratio for 'rapid') are ignored.
    """
    if method not in _REGISTRY:
        msg = f"Unknown sampling method '{method}'. Available: {', '.join(sampling_methods())}."
        raise ValueError(msg)
    return _REGISTRY[method](**kwargs)


for _strategy in (RapidSampling, RandomSampling, FullSampling):
    register_sampling_method(_strategy)
