"""
Splits the observations into inliers and outliers at a density quantile. The
outliers are excluded from all later steps, which is why SVDD can afterwards be
trained with a hard margin (C = 1).
"""

import logging
import typing

from pydantic import BaseModel

from .data_schema import IndexSet
from .density import (
    DensityVector,
    LevelThreshold,
    density_quantile_threshold,
    empirical_density,
)
from .exceptions import PrefilterError
from .kernel import GramMatrix


class PrefilterResult(BaseModel):
    p_out: float
    inliers: IndexSet
    outliers: IndexSet
    theta_pre: LevelThreshold
    density: DensityVector
    adjusted_density: DensityVector

    class Config:
        frozen = True

    @property
    def n(self) -> int:
        return self.inliers.n

    @property
    def realized_outlier_ratio(self) -> float:
        """
        |O| / N. Can be below p_out if densities are tied at the threshold.
        """
        return len(self.outliers) / self.n


class Prefilter:
    """
    Pre-filtering with a target outlier share p_out.
    """

    def __init__(self, p_out: float, logger: typing.Optional[logging.Logger] = None):
        if not 0.0 <= p_out < 1.0:
            msg = f"p_out must be within [0, 1), got {p_out}."
            raise PrefilterError(msg)
        self.p_out = p_out
        self._logger = logger or logging.getLogger("Prefilter")

    def apply(self, gram: GramMatrix) -> PrefilterResult:
        everything = IndexSet.full(gram.n)
        density = empirical_density(gram, everything)
        theta_pre = density_quantile_threshold(density, self.p_out)
        inliers = IndexSet.from_mask(density.values >= theta_pre)
        if len(inliers) == 0:
            msg = f"p_out={self.p_out} leaves no inlier."
            raise PrefilterError(msg)
        outliers = inliers.complement()
        # Equals the subtraction of the outlier columns up to rounding.
        adjusted = empirical_density(gram, inliers)
        self._logger.info(
            "Pre-filter with p_out=%.4f: theta_pre=%.6g, %d inliers, %d outliers.",
            self.p_out,
            theta_pre,
            len(inliers),
            len(outliers),
        )
        return PrefilterResult(
            p_out=self.p_out,
            inliers=inliers,
            outliers=outliers,
            theta_pre=theta_pre,
            density=density,
            adjusted_density=adjusted,
        )


def prefilter(gram: GramMatrix, p_out: float) -> PrefilterResult:
    return Prefilter(p_out).apply(gram)
