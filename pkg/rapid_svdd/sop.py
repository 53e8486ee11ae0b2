"""
The sample optimization problem (SOP): find a sample S of the inliers I that
minimizes Delta_fit = theta_max - theta_min, where theta_min and theta_max are the
minimal and maximal density d_S over S, subject to every inlier having a
density of at least theta_min.

Two solvers are provided. `solve_sop_exact` enumerates all subsets and is the
correctness oracle for RAPID on tiny instances. `SopCpSatSolver` states the same
problem as a CP-SAT model with integer-scaled kernel values.
"""

import itertools
import logging
import math
import typing

import numpy as np
from ortools.sat.python.cp_model import FEASIBLE, OPTIMAL, CpModel, CpSolver
from pydantic import BaseModel, model_validator

from ._timer import Timer
from .config import DEFAULT_SETTINGS, Settings
from .data_schema import IndexSet
from .exceptions import SopInstanceTooLargeError
from .kernel import GramMatrix


class SopSolution(BaseModel):
    sample: IndexSet
    theta_min: float
    theta_max: float
    objective: float
    argmin_witness: int

    class Config:
        frozen = True

    @model_validator(mode="after")
    def _consistent(self):
        if self.argmin_witness not in self.sample:
            msg = f"The witness {self.argmin_witness + 1} is not part of the sample."
            raise ValueError(msg)
        if self.theta_min > self.theta_max:
            msg = f"theta_min={self.theta_min} exceeds theta_max={self.theta_max}."
            raise ValueError(msg)
        return self

    @classmethod
    def evaluate(cls, gram: GramMatrix, sample: IndexSet) -> "SopSolution":
        """
        Computes theta_min, theta_max and the witness of a given sample.
        """
        d_sample = gram.column_sum(sample.indices)[sample.indices]
        k = int(np.argmin(d_sample))
        theta_min = float(d_sample[k])
        theta_max = float(d_sample.max())
        return cls(
            sample=sample,
            theta_min=theta_min,
            theta_max=theta_max,
            objective=theta_max - theta_min,
            argmin_witness=int(sample.indices[k]),
        )


def check_feasible(
    gram: GramMatrix,
    inliers: IndexSet,
    sample: IndexSet,
    tolerance: float = 0.0,
) -> typing.Tuple[bool, typing.Optional[str]]:
    """
    Checks that every inlier has a density over the sample of at least the
    minimal density of the sample (minus the tolerance).

    Returns:
        The feasibility and, if infeasible, a description of the first violation.
    """
    if len(sample) == 0:
        msg = "Cannot check the feasibility of an empty sample."
        raise ValueError(msg)
    if not sample.issubset(inliers):
        msg = f"Sample {sample} is not a subset of the inliers {inliers}."
        raise ValueError(msg)
    d_sample = gram.column_sum(sample.indices)
    theta_min = float(d_sample[sample.indices].min())
    for i in inliers:
        if d_sample[i] < theta_min - tolerance:
            return (
                False,
                f"Inlier {i + 1} has density {d_sample[i]:.10g} below theta_min={theta_min:.10g}.",
            )
    return True, None


def solve_sop_exact(
    gram: GramMatrix,
    inliers: IndexSet,
    settings: Settings = DEFAULT_SETTINGS,
    timer: typing.Optional[Timer] = None,
    logger: typing.Optional[logging.Logger] = None,
) -> SopSolution:
    """
    Enumerates all nonempty subsets of the inliers, by increasing cardinality and
    lexicographically within a cardinality. The first subset with the strictly
    smallest objective wins, so ties go to the smaller and then the
    lexicographically smaller sample.
    """
    logger = logger or logging.getLogger("SOP-Exact")
    n_in = len(inliers)
    if n_in == 0:
        msg = "The inlier set is empty."
        raise ValueError(msg)
    if n_in > settings.sop_max_inliers:
        msg = (
            f"{n_in} inliers exceed the limit of {settings.sop_max_inliers} "
            f"for exhaustive enumeration of 2^{n_in} subsets."
        )
        raise SopInstanceTooLargeError(msg)
    K_in = gram.values[np.ix_(inliers.indices, inliers.indices)]
    best: typing.Optional[typing.Tuple[float, np.ndarray]] = None
    for k in range(1, n_in + 1):
        if timer is not None:
            timer.check()
        subsets = np.array(list(itertools.combinations(range(n_in), k)), dtype=np.int64)
        # densities[c, i]: density of inlier i over subset c
        densities = K_in[:, subsets].sum(axis=2).T
        selected = np.take_along_axis(densities, subsets, axis=1)
        theta_min = selected.min(axis=1)
        objective = selected.max(axis=1) - theta_min
        feasible = np.all(densities >= theta_min[:, None], axis=1)
        if not feasible.any():
            continue
        candidates = np.flatnonzero(feasible)
        c = int(candidates[np.argmin(objective[candidates])])
        if best is None or objective[c] < best[0]:
            best = (float(objective[c]), subsets[c])
            logger.debug("New best subset of size %d with objective %.6g.", k, objective[c])
    assert best is not None, "The full inlier set is always feasible."
    solution = SopSolution.evaluate(
        gram, IndexSet(indices=inliers.indices[best[1]], n=inliers.n)
    )
    logger.info(
        "Exact SOP optimum over %d inliers: |S|=%d, objective=%.6g.",
        n_in,
        len(solution.sample),
        solution.objective,
    )
    return solution


class SopCpSatSolver:
    """
    SOP as a CP-SAT model. Kernel values are scaled to integers, so the model
    is exact only up to the rounding of the scaling.

    Variables, for each inlier j:
    - v[j]: j is part of the sample
    - w[j]: j attains the minimal sample density (exactly one witness)
    The objective minimizes the density gap first and the sample size second.
    """

    def __init__(
        self,
        gram: GramMatrix,
        inliers: IndexSet,
        scale: int = 10**6,
        logger: typing.Optional[logging.Logger] = None,
    ) -> None:
        if len(inliers) == 0:
            msg = "The inlier set is empty."
            raise ValueError(msg)
        self._logger = logger or logging.getLogger("SOP-CPSAT")
        self.gram = gram
        self.inliers = inliers
        n_in = len(inliers)
        K_int = np.rint(
            gram.values[np.ix_(inliers.indices, inliers.indices)] * scale
        ).astype(np.int64)

        self.model = CpModel()
        self.v = [self.model.NewBoolVar(f"v_{j}") for j in range(n_in)]
        self.w = [self.model.NewBoolVar(f"w_{j}") for j in range(n_in)]
        upper = int(K_int.sum(axis=1).max())
        self.theta_min = self.model.NewIntVar(0, upper, "theta_min")
        self.theta_max = self.model.NewIntVar(0, upper, "theta_max")

        for i in range(n_in):
            density = sum(int(K_int[i, j]) * self.v[j] for j in range(n_in))
            # every inlier reaches the minimal sample density
            self.model.Add(density >= self.theta_min)
            # theta_max bounds the densities of the selected observations
            self.model.Add(density <= self.theta_max).OnlyEnforceIf(self.v[i])
            # the witness attains theta_min
            self.model.Add(density <= self.theta_min).OnlyEnforceIf(self.w[i])
            self.model.AddImplication(self.w[i], self.v[i])
        self.model.AddExactlyOne(self.w)
        self.model.AddBoolOr(self.v)
        # sum(v) <= n_in, so the gap dominates the sample size
        self.model.Minimize(
            (self.theta_max - self.theta_min) * (n_in + 1) + sum(self.v)
        )
        self.solver = CpSolver()
        self.solver.parameters.num_workers = 1
        self._logger.info("Built CP-SAT model for SOP with %d inliers.", n_in)

    def solve(self, timelimit: float = math.inf) -> SopSolution:
        if timelimit < math.inf:
            self.solver.parameters.max_time_in_seconds = timelimit
        status = self.solver.Solve(self.model)
        if status not in (OPTIMAL, FEASIBLE):
            msg = f"CP-SAT did not find a sample (status {self.solver.StatusName(status)})."
            raise TimeoutError(msg)
        if status != OPTIMAL:
            self._logger.warning("CP-SAT stopped before proving optimality.")
        selected = [
            self.inliers.indices[j]
            for j, v in enumerate(self.v)
            if self.solver.Value(v) == 1
        ]
        solution = SopSolution.evaluate(
            self.gram, IndexSet(indices=selected, n=self.inliers.n)
        )
        self._logger.info(
            "CP-SAT SOP solution: |S|=%d, objective=%.6g.",
            len(solution.sample),
            solution.objective,
        )
        return solution
