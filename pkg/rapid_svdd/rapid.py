"""
RAPID: starting with all inliers, greedily remove the observation of highest
density as long as no inlier drops below the minimal density of the sample.

Only the density vector is maintained. Removing r subtracts the r-th Gram
column, so each iteration costs O(N) and a full run O(N^2).
"""

import logging
import typing
from enum import Enum

import numpy as np
from pydantic import BaseModel

from ._timer import Timer
from .config import DEFAULT_SETTINGS, Settings
from .data_schema import IndexSet
from .kernel import GramMatrix
from .prefilter import Prefilter, PrefilterResult
from .solutions import SampleSelection


class ThetaMinScope(Enum):
    """
    The set over which the minimal sample density is taken after the density
    of the removal candidate r has been subtracted.

    CANDIDATE: the sample without r. The algorithm stops as soon as removing r
        would let an inlier fall below the minimal density of the remaining
        sample, so the returned sample is always feasible.
    PSEUDOCODE: the sample with r still in it. r's own density drops by
        K[r][r] = 1, which can hide a violation. Kept to compare against the
        printed algorithm.
    """

    CANDIDATE = "candidate"
    PSEUDOCODE = "pseudocode"

    def __str__(self):
        return self.value

    @staticmethod
    def from_str(s: str) -> "ThetaMinScope":
        return ThetaMinScope(s.strip().lower())


class TraceRecord(BaseModel):
    """
    One iteration of RAPID. Positions are 0-based. theta_max is the density of
    the removal candidate before its removal, the maximal density of the sample.
    """

    iteration: int
    removed: int
    theta_max: float
    theta_min: float
    violator: typing.Optional[int] = None

    class Config:
        frozen = True


class RapidTrace(BaseModel):
    records: typing.List[TraceRecord] = []

    def __len__(self) -> int:
        return len(self.records)

    @property
    def removals(self) -> int:
        """
        Number of observations actually removed from the sample. The candidate
        of a violating iteration stays in the sample.
        """
        return sum(1 for r in self.records if r.violator is None)

    @property
    def terminated_by_violation(self) -> bool:
        return bool(self.records) and self.records[-1].violator is not None


class RapidSampler:
    """
    Runs pre-filtering and the greedy removal loop on a Gram matrix.
    Ties of the argmax are broken towards the lowest position.
    """

    def __init__(
        self,
        p_out: float = 0.0,
        theta_min_scope: ThetaMinScope = ThetaMinScope.CANDIDATE,
        settings: Settings = DEFAULT_SETTINGS,
        logger: typing.Optional[logging.Logger] = None,
    ) -> None:
        self.p_out = p_out
        self.theta_min_scope = theta_min_scope
        self.settings = settings
        self._logger = logger or logging.getLogger("RAPID")

    def sample(
        self, gram: GramMatrix, prefiltered: typing.Optional[PrefilterResult] = None
    ) -> SampleSelection:
        return self._sample(gram, prefiltered, trace=None)

    def sample_traced(
        self, gram: GramMatrix, prefiltered: typing.Optional[PrefilterResult] = None
    ) -> typing.Tuple[SampleSelection, RapidTrace]:
        records: typing.List[TraceRecord] = []
        selection = self._sample(gram, prefiltered, trace=records)
        return selection, RapidTrace(records=records)

    def _sample(
        self,
        gram: GramMatrix,
        prefiltered: typing.Optional[PrefilterResult],
        trace: typing.Optional[typing.List[TraceRecord]],
    ) -> SampleSelection:
        timer = Timer()
        if prefiltered is None:
            prefiltered = Prefilter(self.p_out, logger=self._logger).apply(gram)
        in_sample = self._remove_greedily(gram, prefiltered, trace)
        t_samp = timer.time()
        sample = IndexSet.from_mask(in_sample)
        self._logger.info(
            "Selected %d of %d inliers (%d observations) in %.3fs.",
            len(sample),
            len(prefiltered.inliers),
            gram.n,
            t_samp,
        )
        return SampleSelection(
            sample=sample,
            prefilter=prefiltered,
            method="rapid",
            t_samp=t_samp,
            parameters={
                "p_out": prefiltered.p_out,
                "theta_min_scope": str(self.theta_min_scope),
            },
        )

    def _remove_greedily(
        self,
        gram: GramMatrix,
        prefiltered: PrefilterResult,
        trace: typing.Optional[typing.List[TraceRecord]],
    ) -> np.ndarray:
        K = gram.values
        inlier_mask = prefiltered.inliers.mask()
        in_sample = inlier_mask.copy()
        d = np.array(prefiltered.adjusted_density.values, dtype=float)
        exclude_candidate = self.theta_min_scope == ThetaMinScope.CANDIDATE

        for iteration in range(len(prefiltered.inliers) - 1):
            r = int(np.argmax(np.where(in_sample, d, -np.inf)))
            theta_max = float(d[r])
            # K is exactly symmetric, so the contiguous row equals the column.
            d -= K[r]
            if exclude_candidate:
                in_sample[r] = False
                theta_min = float(np.where(in_sample, d, np.inf).min())
                in_sample[r] = True
            else:
                theta_min = float(np.where(in_sample, d, np.inf).min())
            violators = np.flatnonzero(inlier_mask & (d < theta_min))
            violator = int(violators[0]) if violators.size else None
            if trace is not None:
                trace.append(
                    TraceRecord(
                        iteration=iteration,
                        removed=r,
                        theta_max=theta_max,
                        theta_min=theta_min,
                        violator=violator,
                    )
                )
            self._logger.debug(
                "Iteration %d: candidate %d, theta_min=%.6g, violator=%s",
                iteration,
                r + 1,
                theta_min,
                "-" if violator is None else violator + 1,
            )
            if violator is not None:
                return in_sample
            in_sample[r] = False
            if (iteration + 1) % self.settings.recompute_interval == 0:
                d = gram.column_sum(np.flatnonzero(in_sample))
        return in_sample


def rapid_sample(
    gram: GramMatrix,
    p_out: float,
    theta_min_scope: ThetaMinScope = ThetaMinScope.CANDIDATE,
) -> SampleSelection:
    return RapidSampler(p_out, theta_min_scope).sample(gram)


def rapid_sample_traced(
    gram: GramMatrix,
    p_out: float,
    theta_min_scope: ThetaMinScope = ThetaMinScope.CANDIDATE,
) -> typing.Tuple[SampleSelection, RapidTrace]:
    return RapidSampler(p_out, theta_min_scope).sample_traced(gram)
