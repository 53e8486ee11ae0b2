"""
Random sampling baselines Rand_r: a uniform sample of the pre-filtered inliers
with a fixed sample ratio r. Samples are drawn with numpy's PCG64 generator
(`numpy.random.default_rng`), which is reproducible across platforms.
"""

import math

import numpy as np
from pydantic import BaseModel, Field

from ._timer import Timer
from .data_schema import IndexSet
from .prefilter import PrefilterResult
from .solutions import SampleSelection


class RandomSampleConfig(BaseModel):
    ratio: float = Field(..., gt=0, le=1, description="Sample ratio r relative to |I|.")
    seed: int = Field(default=0, description="Seed of the random generator.")

    class Config:
        frozen = True

    def sample_size(self, n_inliers: int) -> int:
        """
        max(1, round-half-up(r * |I|)).
        """
        return max(1, int(math.floor(self.ratio * n_inliers + 0.5)))


def random_sample_indices(inliers: IndexSet, config: RandomSampleConfig) -> IndexSet:
    if len(inliers) == 0:
        msg = "Cannot sample from an empty inlier set."
        raise ValueError(msg)
    size = min(config.sample_size(len(inliers)), len(inliers))
    rng = np.random.default_rng(config.seed)
    chosen = rng.choice(inliers.indices, size=size, replace=False)
    return IndexSet(indices=chosen, n=inliers.n)


def random_sample(
    prefiltered: PrefilterResult, config: RandomSampleConfig
) -> SampleSelection:
    """
    Rand_r on the inliers of a pre-filter result.
    """
    timer = Timer()
    sample = random_sample_indices(prefiltered.inliers, config)
    return SampleSelection(
        sample=sample,
        prefilter=prefiltered,
        method="rand",
        seed=config.seed,
        t_samp=timer.time(),
        parameters={"ratio": config.ratio, "p_out": prefiltered.p_out},
    )
