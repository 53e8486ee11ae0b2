"""
Seeded Gaussian-mixture data with ground-truth labels.

Inliers come from an equal-weight mixture of isotropic Gaussians with means
uniform in [0, 10]^m and standard deviations uniform in [0.5, 1.5]. Outliers are
uniform in the bounding box of the inliers, enlarged by 3 units on every side.
All randomness comes from one `numpy.random.default_rng(seed)`.
"""

import logging
import typing

import numpy as np
from pydantic import BaseModel, Field, model_validator

from .data_schema import Dataset, LabelVector
from .density import floor_share

MEAN_RANGE = (0.0, 10.0)
STD_RANGE = (0.5, 1.5)
OUTLIER_MARGIN = 3.0


class MixtureConfig(BaseModel):
    n: int = Field(..., ge=1, description="Number of observations.")
    m: int = Field(..., ge=1, description="Dimensionality.")
    components: int = Field(default=1, ge=1, description="Number of Gaussian components.")
    outlier_ratio: float = Field(
        default=0.0, ge=0, lt=1, description="Share of uniformly placed outliers."
    )
    seed: int = Field(default=0, description="Seed of the random generator.")

    class Config:
        frozen = True

    @model_validator(mode="after")
    def _enough_observations(self):
        if self.n < self.components:
            msg = f"{self.components} components need at least as many observations, got n={self.n}."
            raise ValueError(msg)
        return self

    @property
    def n_outliers(self) -> int:
        return floor_share(self.outlier_ratio, self.n)


def generate_mixture(
    config: MixtureConfig, logger: typing.Optional[logging.Logger] = None
) -> typing.Tuple[Dataset, LabelVector]:
    logger = logger or logging.getLogger("Synthetic")
    rng = np.random.default_rng(config.seed)
    n_out = config.n_outliers
    n_in = config.n - n_out

    means = rng.uniform(*MEAN_RANGE, size=(config.components, config.m))
    stds = rng.uniform(*STD_RANGE, size=config.components)
    membership = rng.integers(0, config.components, size=n_in)
    inliers = means[membership] + rng.standard_normal((n_in, config.m)) * stds[membership, None]

    low = inliers.min(axis=0) - OUTLIER_MARGIN
    high = inliers.max(axis=0) + OUTLIER_MARGIN
    outliers = rng.uniform(low, high, size=(n_out, config.m))

    observations = np.vstack([inliers, outliers])
    is_outlier = np.concatenate([np.zeros(n_in, dtype=bool), np.ones(n_out, dtype=bool)])
    order = rng.permutation(config.n)
    logger.info(
        "Generated %d observations (%d outliers) in %d dimensions from %d components.",
        config.n,
        n_out,
        config.m,
        config.components,
    )
    return (
        Dataset(observations=observations[order]),
        LabelVector(outlier=is_outlier[order]),
    )
