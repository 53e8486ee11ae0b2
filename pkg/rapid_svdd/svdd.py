"""
Support Vector Data Description: the minimum enclosing ball of the training
data in kernel feature space.

We solve the dual
    min_alpha  alpha^T K alpha - sum_i alpha_i K_ii
    s.t.       sum_i alpha_i = 1,  0 <= alpha_i <= C
which is 0.5 * alpha^T Q alpha + p^T alpha with Q = 2K and p = -diag(K), by
Sequential Minimal Optimization: each step moves weight between two variables,
chosen by second order working set selection. For the Gaussian kernel the
linear term is constant on the simplex, so the solution is the same as for
min alpha^T K alpha.

After pre-filtering the training data contains no outliers, so C = 1 (hard
margin) everywhere except in tests of the dual.
"""

import logging
import typing

import numpy as np
from pydantic import BaseModel

from ._timer import Timer
from .config import DEFAULT_SETTINGS, Settings
from .data_schema import Dataset, IndexSet, Label, LabelVector
from .exceptions import ConvergenceError
from .kernel import KernelSpec, gram_matrix

# Replaces non-positive curvature in the pair update.
_TAU = 1e-12


class SmoResult(BaseModel):
    alpha: np.ndarray
    updates: int
    kkt_gap: float
    converged: bool

    class Config:
        frozen = True
        arbitrary_types_allowed = True


class SmoSolver:
    """
    SMO with second order working set selection for
        min 0.5 a^T Q a + p^T a,  s.t. sum(a) = 1, 0 <= a_i <= C.
    """

    def __init__(
        self,
        Q: np.ndarray,
        p: np.ndarray,
        C: float = 1.0,
        tolerance: float = 1e-6,
        max_updates: int = 1_000_000,
        logger: typing.Optional[logging.Logger] = None,
    ) -> None:
        n = Q.shape[0]
        if C * n < 1.0:
            msg = f"C={C} is too small: {n} weights of at most C cannot sum up to 1."
            raise ValueError(msg)
        self.Q = Q
        self.p = p
        self.C = C
        self.tolerance = tolerance
        self.max_updates = max_updates
        self._logger = logger or logging.getLogger("SVDD-SMO")
        self._diag = np.diag(Q)

    def _select_working_set(
        self, alpha: np.ndarray, G: np.ndarray
    ) -> typing.Tuple[int, int, float]:
        """
        Returns (i, j, gap) where i gains weight and j loses weight.
        j is -1 if no pair makes progress.
        """
        up = alpha < self.C
        low = alpha > 0
        neg_G = -G
        i = int(np.argmax(np.where(up, neg_G, -np.inf)))
        g_max = neg_G[i]
        g_min = float(np.where(low, neg_G, np.inf).min())
        gap = float(g_max - g_min)
        if gap < self.tolerance:
            return i, -1, gap
        b = g_max + G
        a = self._diag[i] + self._diag - 2.0 * self.Q[i]
        a = np.where(a > 0, a, _TAU)
        candidates = low & (b > 0)
        if not candidates.any():
            return i, -1, gap
        obj_diff = np.where(candidates, -(b * b) / a, np.inf)
        return i, int(np.argmin(obj_diff)), gap

    def solve(self, alpha: typing.Optional[np.ndarray] = None) -> SmoResult:
        n = self.Q.shape[0]
        alpha = np.full(n, 1.0 / n) if alpha is None else np.array(alpha, dtype=float)
        G = self.Q @ alpha + self.p
        updates = 0
        gap = float("inf")
        while updates < self.max_updates:
            i, j, gap = self._select_working_set(alpha, G)
            if j == -1:
                break
            a = self.Q[i, i] + self.Q[j, j] - 2.0 * self.Q[i, j]
            if a <= 0:
                a = _TAU
            delta = (G[j] - G[i]) / a
            old_i, old_j = alpha[i], alpha[j]
            total = old_i + old_j
            # move along the pair, keeping the sum and the box
            alpha_i = min(max(old_i + delta, 0.0), self.C)
            alpha_j = min(max(total - alpha_i, 0.0), self.C)
            alpha_i = total - alpha_j
            alpha[i], alpha[j] = alpha_i, alpha_j
            G += self.Q[:, i] * (alpha_i - old_i) + self.Q[:, j] * (alpha_j - old_j)
            updates += 1
        else:
            _, _, gap = self._select_working_set(alpha, G)
        converged = gap < self.tolerance or updates < self.max_updates
        self._logger.debug("SMO finished after %d updates with KKT gap %.3g.", updates, gap)
        return SmoResult(alpha=alpha, updates=updates, kkt_gap=gap, converged=converged)


class SvddModel(BaseModel):
    """
    A trained SVDD. Inference only needs the support vectors, their weights and
    the cached squared norm of the center.
    """

    alpha: np.ndarray
    support_vectors: IndexSet
    support_points: np.ndarray
    radius_sq: float
    center_norm_sq: float
    kernel: KernelSpec
    dual_objective: float = 0.0
    converged: bool = True
    training_indices: typing.Optional[IndexSet] = None

    class Config:
        frozen = True
        arbitrary_types_allowed = True

    @property
    def support_alpha(self) -> np.ndarray:
        return self.alpha[self.support_vectors.indices]

    @property
    def m(self) -> int:
        return self.support_points.shape[1]

    def squared_distances(self, X: np.ndarray) -> np.ndarray:
        """
        Feature-space squared distances ||phi(x) - a||^2 of the rows of X to
        the center, using k(x, x) = 1.
        """
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.m:
            msg = f"Expected observations with {self.m} features, got shape {X.shape}."
            raise ValueError(msg)
        if X.shape[0] == 0:
            return np.zeros(0)
        cross = self.kernel.cross(X, self.support_points)
        return 1.0 - 2.0 * cross @ self.support_alpha + self.center_norm_sq


class Prediction(BaseModel):
    label: Label
    squared_distance: float
    margin: float

    class Config:
        frozen = True


class SvddTrainer:
    def __init__(
        self,
        kernel: KernelSpec,
        C: float = 1.0,
        settings: Settings = DEFAULT_SETTINGS,
        strict: bool = False,
        logger: typing.Optional[logging.Logger] = None,
    ) -> None:
        """
        Args:
            kernel: The Gaussian kernel.
            C: Upper bound of the dual weights. The pipeline always uses 1.
            settings: Tolerances and limits.
            strict: Raise a ConvergenceError instead of a warning if the
                solver hits its update limit.
            logger: Defaults to the "SVDD-SMO" logger.
        """
        self.kernel = kernel
        self.C = C
        self.settings = settings
        self.strict = strict
        self._logger = logger or logging.getLogger("SVDD-SMO")

    def train(self, data: Dataset, sample: typing.Optional[IndexSet] = None) -> SvddModel:
        training = data if sample is None else data.subset(sample)
        K = gram_matrix(training, self.kernel, self.settings).values
        result = SmoSolver(
            2.0 * K,
            -np.diag(K),
            C=self.C,
            tolerance=self.settings.smo_tolerance,
            max_updates=self.settings.smo_max_updates,
            logger=self._logger,
        ).solve()
        if not result.converged:
            diagnostics = {
                "updates": float(result.updates),
                "kkt_gap": result.kkt_gap,
                "n_train": float(training.n),
            }
            msg = f"SMO stopped after {result.updates} updates with KKT gap {result.kkt_gap:.3g}."
            if self.strict:
                raise ConvergenceError(msg, diagnostics)
            self._logger.warning(msg)

        alpha = np.where(result.alpha < self.settings.support_threshold, 0.0, result.alpha)
        alpha /= alpha.sum()
        support = np.flatnonzero(alpha > 0)
        K_sv = K[np.ix_(support, support)]
        center_norm_sq = float(alpha[support] @ K_sv @ alpha[support])
        sq_dists = np.diag(K) - 2.0 * K[:, support] @ alpha[support] + center_norm_sq
        radius_sq = self._radius_sq(alpha, support, sq_dists)
        self._logger.info(
            "Trained SVDD on %d observations: %d support vectors, R^2=%.6g, %d SMO updates.",
            training.n,
            len(support),
            radius_sq,
            result.updates,
        )
        return SvddModel(
            alpha=alpha,
            support_vectors=IndexSet(indices=support, n=training.n),
            support_points=training.observations[support],
            radius_sq=radius_sq,
            center_norm_sq=center_norm_sq,
            kernel=self.kernel,
            dual_objective=float(np.diag(K) @ alpha - center_norm_sq),
            converged=result.converged,
            training_indices=sample,
        )

    def _radius_sq(
        self, alpha: np.ndarray, support: np.ndarray, sq_dists: np.ndarray
    ) -> float:
        threshold = self.settings.support_threshold
        unconstrained = support[alpha[support] < self.C - threshold]
        if unconstrained.size:
            radius_sq = float(np.mean(sq_dists[unconstrained]))
        else:
            radius_sq = float(np.max(sq_dists[support]))
        # hard margin: every training observation lies inside the ball
        farthest = float(np.max(sq_dists))
        if farthest > radius_sq:
            self._logger.debug("Raising R^2 from %.12g to %.12g.", radius_sq, farthest)
            radius_sq = farthest
        return max(radius_sq, 0.0)


def train_svdd(
    data: Dataset, kernel: KernelSpec, sample: typing.Optional[IndexSet] = None
) -> SvddModel:
    return SvddTrainer(kernel).train(data, sample)


def predict(
    model: SvddModel,
    x: typing.Sequence[float],
    tolerance: float = DEFAULT_SETTINGS.prediction_tolerance,
) -> Prediction:
    squared_distance = float(model.squared_distances(np.asarray(x, dtype=float).reshape(1, -1))[0])
    margin = model.radius_sq - squared_distance
    return Prediction(
        label=Label.IN if margin >= -tolerance else Label.OUT,
        squared_distance=squared_distance,
        margin=margin,
    )


def predict_batch(
    model: SvddModel,
    data: typing.Union[Dataset, np.ndarray],
    tolerance: float = DEFAULT_SETTINGS.prediction_tolerance,
) -> typing.Tuple[LabelVector, float]:
    """
    Returns:
        The labels and the inference time in seconds per 1000 observations.
    """
    X = data.observations if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    if X.size == 0:
        return LabelVector(outlier=np.zeros(0, dtype=bool)), 0.0
    timer = Timer()
    margins = model.radius_sq - model.squared_distances(X)
    labels = LabelVector(outlier=margins < -tolerance)
    elapsed = timer.time()
    return labels, elapsed * 1000.0 / X.shape[0]
