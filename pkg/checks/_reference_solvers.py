"""
Independent reference computations used by several check files.
"""

import numpy as np


def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """
    Euclidean projection onto {a : a >= 0, sum(a) = 1}.
    """
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    rho = int(np.nonzero(u - css / k > 0)[0][-1])
    return np.maximum(v - css[rho] / (rho + 1), 0.0)


def svdd_dual_by_projected_gradient(K: np.ndarray, iterations: int = 20_000) -> np.ndarray:
    """
    Minimizes a^T K a - diag(K)^T a over the simplex with accelerated projected
    gradient steps. For C = 1 the box constraints are implied by the simplex.
    """
    n = K.shape[0]
    step = 1.0 / (2.0 * np.linalg.eigvalsh(K).max())
    diag = np.diag(K)
    alpha = np.full(n, 1.0 / n)
    y = alpha.copy()
    t = 1.0
    for _ in range(iterations):
        grad = 2.0 * K @ y - diag
        nxt = project_to_simplex(y - step * grad)
        t_next = (1.0 + np.sqrt(1.0 + 4.0 * t * t)) / 2.0
        y = nxt + (t - 1.0) / t_next * (nxt - alpha)
        alpha, t = nxt, t_next
    return alpha


def dual_value(K: np.ndarray, alpha: np.ndarray) -> float:
    """
    The maximized form of the SVDD dual, diag(K)^T a - a^T K a.
    """
    return float(np.diag(K) @ alpha - alpha @ K @ alpha)
