"""
The Gaussian kernel, Gram matrices and the bandwidth heuristics.

We use the squared Euclidean distance in the exponent, k(x, y) = exp(-gamma * ||x - y||^2),
so k(x, x) = 1 for every x and every gamma >= 0.
"""

import math
import typing
from abc import ABC, abstractmethod
from enum import Enum

import numpy as np
from pydantic import BaseModel, Field, field_validator
from scipy.spatial.distance import cdist, pdist, squareform

from .config import DEFAULT_SETTINGS, Settings
from .data_schema import Dataset
from .exceptions import DegenerateDataError, GramMatrixTooLargeError


class KernelSpec(BaseModel):
    """
    A Gaussian kernel with bandwidth parameter gamma.
    """

    gamma: float = Field(..., ge=0, description="Bandwidth parameter of the Gaussian kernel.")

    class Config:
        frozen = True

    @field_validator("gamma")
    @classmethod
    def _finite(cls, v: float) -> float:
        if not math.isfinite(v):
            msg = f"gamma must be finite, got {v}."
            raise ValueError(msg)
        return v

    def __call__(self, x: typing.Sequence[float], y: typing.Sequence[float]) -> float:
        return gaussian_kernel(x, y, self.gamma)

    def cross(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """
        The kernel values between every row of `a` and every row of `b`.
        """
        if a.shape[1] != b.shape[1]:
            msg = f"Dimension mismatch: {a.shape[1]} features vs. {b.shape[1]} features."
            raise ValueError(msg)
        return np.exp(-self.gamma * cdist(a, b, "sqeuclidean"))


def gaussian_kernel(
    x: typing.Sequence[float], y: typing.Sequence[float], gamma: float
) -> float:
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.shape != y.shape:
        msg = f"Dimension mismatch: {x.size} vs. {y.size}."
        raise ValueError(msg)
    if gamma < 0:
        msg = f"gamma must be nonnegative, got {gamma}."
        raise ValueError(msg)
    diff = x - y
    return float(np.exp(-gamma * float(diff @ diff)))


class GramMatrix(BaseModel):
    """
    The N x N matrix of pairwise kernel values, together with the kernel used.
    Rows are indexed by the 0-based observation position.
    """

    values: np.ndarray
    kernel: KernelSpec

    class Config:
        frozen = True
        arbitrary_types_allowed = True

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def column_sum(self, over: np.ndarray) -> np.ndarray:
        """
        Sum of the columns `over` for all N rows.
        """
        return self.values[:, over].sum(axis=1)


def gram_matrix(
    data: Dataset, kernel: KernelSpec, settings: Settings = DEFAULT_SETTINGS
) -> GramMatrix:
    if data.n > settings.gram_max_n:
        msg = (
            f"A dense Gram matrix for {data.n} observations exceeds the limit of "
            f"{settings.gram_max_n}. Raise 'gram_max_n' if there is enough memory."
        )
        raise GramMatrixTooLargeError(msg)
    # pdist evaluates each pair once, so the mirrored matrix is exactly symmetric.
    sq_dists = squareform(pdist(data.observations, "sqeuclidean"))
    values = np.exp(-kernel.gamma * sq_dists)
    values.setflags(write=False)
    return GramMatrix(values=values, kernel=kernel)


class BandwidthStrategy(ABC):
    """
    Chooses gamma for a data set.
    """

    @abstractmethod
    def gamma(self, data: Dataset) -> float:
        ...

    def kernel(self, data: Dataset) -> KernelSpec:
        return KernelSpec(gamma=self.gamma(data))


class ScottsRule(BandwidthStrategy):
    """
    h = (mean of the per-feature sample standard deviations) * N^(-1/(M+4)),
    gamma = 1 / (2 h^2).
    """

    def gamma(self, data: Dataset) -> float:
        if data.n < 2:
            msg = "Scott's rule needs at least two observations."
            raise DegenerateDataError(msg)
        spread = float(np.mean(np.std(data.observations, axis=0, ddof=1)))
        if spread <= 0:
            msg = "All features are constant, Scott's rule cannot choose a bandwidth."
            raise DegenerateDataError(msg)
        h = spread * data.n ** (-1.0 / (data.m + 4))
        return 1.0 / (2.0 * h * h)


class ModifiedMeanCriterion(BandwidthStrategy):
    """
    The modified mean criterion for Gaussian-kernel SVDD:

        s^2 = (2N / (N-1) * sum_j var_j) / ln((N-1) / delta^2)

    where delta is a fitted polynomial in phi = 1 / ln(N-1). The returned
    gamma is 1 / (2 s^2). For N = 2, N-1 is clamped to 2 inside phi and the
    logarithm, as ln(1) = 0 would divide by zero.
    """

    _DELTA_COEFFICIENTS = (
        -0.14818008,
        0.2846623624,
        -0.252853808,
        0.159059498,
        -0.001381145,
    )

    @classmethod
    def delta(cls, n: int) -> float:
        phi = 1.0 / math.log(max(n - 1, 2))
        return float(np.polyval(cls._DELTA_COEFFICIENTS, phi))

    def gamma(self, data: Dataset) -> float:
        n = data.n
        if n < 2:
            msg = "The modified mean criterion needs at least two observations."
            raise DegenerateDataError(msg)
        total_variance = float(np.var(data.observations, axis=0, ddof=1).sum())
        if total_variance <= 0:
            msg = "All features are constant, the modified mean criterion cannot choose a bandwidth."
            raise DegenerateDataError(msg)
        delta = self.delta(n)
        s_sq = (2.0 * n / (n - 1) * total_variance) / math.log(max(n - 1, 2) / delta**2)
        return 1.0 / (2.0 * s_sq)


class FixedGamma(BandwidthStrategy):
    def __init__(self, gamma: float) -> None:
        self._gamma = KernelSpec(gamma=gamma).gamma

    def gamma(self, data: Dataset) -> float:  # noqa: ARG002
        return self._gamma


class GammaRule(Enum):
    SCOTT = "scott"
    MODIFIED_MEAN = "modified_mean"
    FIXED = "fixed"

    def __str__(self):
        return self.value

    @staticmethod
    def from_str(s: str) -> "GammaRule":
        return GammaRule(s.strip().lower().replace("-", "_"))

    def strategy(self, gamma: typing.Optional[float] = None) -> BandwidthStrategy:
        if self == GammaRule.FIXED:
            if gamma is None:
                msg = "The fixed gamma rule needs an explicit gamma."
                raise ValueError(msg)
            return FixedGamma(gamma)
        if gamma is not None:
            msg = f"An explicit gamma cannot be combined with the '{self}' rule."
            raise ValueError(msg)
        if self == GammaRule.SCOTT:
            return ScottsRule()
        return ModifiedMeanCriterion()


def bandwidth_scott(data: Dataset) -> float:
    return ScottsRule().gamma(data)


def bandwidth_modified_mean(data: Dataset) -> float:
    return ModifiedMeanCriterion().gamma(data)
