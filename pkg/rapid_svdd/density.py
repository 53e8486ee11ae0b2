"""
Empirical (unnormalized) kernel densities, level-set classification and
boundary points.

The density of observation i over a source set A is d_i = sum_{j in A} K[i][j].
It is evaluated at all N observations, also at those outside of A.
"""

import math

import numpy as np
from pydantic import BaseModel, Field, model_validator

from .data_schema import IndexSet, LabelVector
from .kernel import GramMatrix, KernelSpec

LevelThreshold = float

# Products like 0.29 * 100 evaluate to 28.999999999999996.
_FLOOR_SLACK = 1e-9


def floor_share(share: float, n: int) -> int:
    """
    floor(share * n), robust against representation errors of the share.
    """
    return int(math.floor(share * n + _FLOOR_SLACK))


class DensityVector(BaseModel):
    """
    Densities at all N observations, taken over the `source` set.
    """

    values: np.ndarray
    source: IndexSet

    class Config:
        frozen = True
        arbitrary_types_allowed = True

    @model_validator(mode="after")
    def _shape_matches_source(self):
        if self.values.ndim != 1 or self.values.size != self.source.n:
            msg = f"Expected {self.source.n} densities, got an array of shape {self.values.shape}."
            raise ValueError(msg)
        return self

    def __len__(self) -> int:
        return int(self.values.size)

    def on_source(self) -> np.ndarray:
        """
        The densities of the source observations.
        """
        return self.values[self.source.indices]

    @property
    def d_min(self) -> float:
        return float(self.on_source().min())

    @property
    def d_max(self) -> float:
        return float(self.on_source().max())


class BoundarySet(BaseModel):
    indices: IndexSet
    delta: float = Field(..., gt=0)

    class Config:
        frozen = True


def empirical_density(gram: GramMatrix, over: IndexSet) -> DensityVector:
    if over.n != gram.n:
        msg = f"Index set over {over.n} positions does not match a Gram matrix of size {gram.n}."
        raise ValueError(msg)
    if len(over) == 0:
        msg = "The density needs a nonempty source set."
        raise ValueError(msg)
    values = gram.column_sum(over.indices)
    values.setflags(write=False)
    return DensityVector(values=values, source=over)


def level_set_classify(d: DensityVector, theta: LevelThreshold) -> LabelVector:
    """
    Observation i is labeled 'in' iff d_i >= theta.
    """
    return LabelVector(outlier=d.values < theta)


def density_quantile_threshold(d: DensityVector, p_out: float) -> LevelThreshold:
    """
    The density at 1-based position max(1, floor(p_out * N)) of the ascending
    sorted densities. Ties at the threshold are classified 'in', so the number of
    observations below the threshold can be smaller than floor(p_out * N) - 1.
    """
    if not 0.0 <= p_out <= 1.0:
        msg = f"p_out must be within [0, 1], got {p_out}."
        raise ValueError(msg)
    if len(d) == 0:
        msg = "Cannot compute a quantile of an empty density vector."
        raise ValueError(msg)
    position = max(1, floor_share(p_out, len(d)))
    return float(np.sort(d.values)[position - 1])


def boundary_points(d: DensityVector, delta: float) -> BoundarySet:
    """
    All source observations with d_min <= d_i < d_min + delta, where d_min is
    the minimal density over the source set.
    """
    if delta <= 0:
        msg = f"delta must be positive, got {delta}."
        raise ValueError(msg)
    on_source = d.on_source()
    d_min = on_source.min()
    in_band = on_source < d_min + delta
    return BoundarySet(
        indices=IndexSet(indices=d.source.indices[in_band], n=d.source.n),
        delta=delta,
    )


def default_boundary_delta(d: DensityVector, share: float = 0.05) -> float:
    """
    `share` times the density range over the source set. If all densities are
    equal, `share` times the minimal density is used instead.
    """
    spread = d.d_max - d.d_min
    if spread > 0:
        return share * spread
    return share * d.d_min


def level_set_predict(
    kernel: KernelSpec,
    sample_points: np.ndarray,
    queries: np.ndarray,
    theta: LevelThreshold,
) -> LabelVector:
    """
    Classifies new points with the level-set classifier of a sample: a query is
    'in' iff its density over the sample points reaches theta. Costs O(|S|)
    kernel evaluations per query.
    """
    densities = kernel.cross(np.atleast_2d(queries), np.atleast_2d(sample_points)).sum(axis=1)
    return LabelVector(outlier=densities < theta)
