"""
The core data types shared by all components: the data set, ground-truth or
predicted labels, and index sets over the observations.

Internally, positions are 0-based numpy indices. Everything that leaves the
library (index files, CLI output, messages) uses 1-based positions.
"""

import typing
from enum import Enum

import numpy as np
from pydantic import BaseModel, field_validator, model_validator


class Label(Enum):
    """
    Label of an observation. The outlier class is the positive class.
    """

    IN = "in"
    OUT = "out"

    def __str__(self):
        return self.value

    @staticmethod
    def from_str(s: str) -> "Label":
        return Label(s.strip().lower())


class Dataset(BaseModel):
    """
    N observations with M real-valued features. Immutable after construction,
    so it can be shared between workers without copying.
    """

    observations: np.ndarray

    class Config:
        frozen = True
        arbitrary_types_allowed = True

    @field_validator("observations", mode="before")
    @classmethod
    def _as_finite_matrix(cls, value) -> np.ndarray:
        matrix = np.array(value, dtype=float)
        if matrix.ndim != 2:
            msg = f"Observations must form a matrix, got an array with {matrix.ndim} dimensions."
            raise ValueError(msg)
        if matrix.shape[0] < 1 or matrix.shape[1] < 1:
            msg = f"A data set needs at least one observation and one feature, got shape {matrix.shape}."
            raise ValueError(msg)
        if not np.all(np.isfinite(matrix)):
            row, col = np.argwhere(~np.isfinite(matrix))[0]
            msg = f"Observation {row + 1} has a non-finite value in feature {col + 1}."
            raise ValueError(msg)
        matrix.setflags(write=False)
        return matrix

    @property
    def n(self) -> int:
        """
        Number of observations N.
        """
        return self.observations.shape[0]

    @property
    def m(self) -> int:
        """
        Dimensionality M.
        """
        return self.observations.shape[1]

    def __len__(self) -> int:
        return self.n

    def subset(self, indices: "IndexSet") -> "Dataset":
        """
        The observations at the given positions, in ascending order.
        """
        if indices.n != self.n:
            msg = f"Index set over {indices.n} positions does not match a data set of {self.n} observations."
            raise ValueError(msg)
        return Dataset(observations=self.observations[indices.indices])


class LabelVector(BaseModel):
    """
    One label per observation, stored as a boolean outlier mask.
    """

    outlier: np.ndarray

    class Config:
        frozen = True
        arbitrary_types_allowed = True

    @field_validator("outlier", mode="before")
    @classmethod
    def _as_mask(cls, value) -> np.ndarray:
        mask = np.array(value, dtype=bool).reshape(-1)
        mask.setflags(write=False)
        return mask

    @classmethod
    def from_labels(cls, labels: typing.Iterable[typing.Union[Label, str]]) -> "LabelVector":
        return cls(
            outlier=[
                (label if isinstance(label, Label) else Label.from_str(label)) == Label.OUT
                for label in labels
            ]
        )

    def labels(self) -> typing.List[Label]:
        return [Label.OUT if out else Label.IN for out in self.outlier]

    @property
    def n_outliers(self) -> int:
        return int(self.outlier.sum())

    @property
    def n_inliers(self) -> int:
        return len(self) - self.n_outliers

    def __len__(self) -> int:
        return len(self.outlier)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, LabelVector) and np.array_equal(
            self.outlier, other.outlier
        )

    __hash__ = None  # type: ignore[assignment]


class IndexSet(BaseModel):
    """
    A set of distinct positions within 0..n-1, kept in ascending order.
    The inlier set, the outlier set and samples are index sets.
    """

    indices: np.ndarray
    n: int

    class Config:
        frozen = True
        arbitrary_types_allowed = True

    @field_validator("indices", mode="before")
    @classmethod
    def _as_sorted_positions(cls, value) -> np.ndarray:
        positions = np.array(value, dtype=np.int64).reshape(-1)
        ordered = np.sort(positions)
        if ordered.size > 1 and np.any(ordered[1:] == ordered[:-1]):
            duplicates = sorted({int(i) + 1 for i in ordered[1:][ordered[1:] == ordered[:-1]]})
            msg = f"Index set contains duplicate positions {duplicates}."
            raise ValueError(msg)
        ordered.setflags(write=False)
        return ordered

    @model_validator(mode="after")
    def _within_range(self):
        if self.n < 0:
            msg = "The number of positions must not be negative."
            raise ValueError(msg)
        if self.indices.size and (self.indices[0] < 0 or self.indices[-1] >= self.n):
            msg = f"Index set contains positions outside of 1..{self.n}."
            raise ValueError(msg)
        return self

    @classmethod
    def full(cls, n: int) -> "IndexSet":
        return cls(indices=np.arange(n), n=n)

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> "IndexSet":
        mask = np.asarray(mask, dtype=bool)
        return cls(indices=np.flatnonzero(mask), n=mask.size)

    @classmethod
    def from_one_based(cls, positions: typing.Iterable[int], n: int) -> "IndexSet":
        return cls(indices=[int(p) - 1 for p in positions], n=n)

    def one_based(self) -> typing.List[int]:
        return [int(i) + 1 for i in self.indices]

    def mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[self.indices] = True
        return mask

    def complement(self) -> "IndexSet":
        return IndexSet.from_mask(~self.mask())

    def issubset(self, other: "IndexSet") -> bool:
        return self.n == other.n and bool(np.all(np.isin(self.indices, other.indices)))

    def __len__(self) -> int:
        return int(self.indices.size)

    def __iter__(self) -> typing.Iterator[int]:  # type: ignore[override]
        return (int(i) for i in self.indices)

    def __contains__(self, position: int) -> bool:
        k = int(np.searchsorted(self.indices, position))
        return k < self.indices.size and int(self.indices[k]) == position

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, IndexSet)
            and self.n == other.n
            and np.array_equal(self.indices, other.indices)
        )

    __hash__ = None  # type: ignore[assignment]

    def __str__(self) -> str:
        return "{" + ", ".join(str(i) for i in self.one_based()) + "}"
