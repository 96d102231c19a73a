"""Linear epsilon-insensitive support vector regression.

Solves the standard dual of the epsilon-SVR primal (slack variables xi,
xi*, box constant C) with sequential minimal optimization over
maximally-violating coefficient pairs.  Only the linear kernel is
implemented; the prediction is w.x + b.

The solver exposes its KKT residual so callers can verify optimality:
dual coefficients stay inside [-C, C], and each sample's functional
margin matches its coefficient's complementary-slackness case.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConvergenceError, ValidationError


@dataclass(eq=False)
class SvrModel:
    weights: np.ndarray
    intercept: float
    beta: np.ndarray          # dual coefficients alpha - alpha*, one per sample
    c: float
    epsilon: float
    kkt_residual: float
    n_iterations: int

    def predict(self, x: np.ndarray) -> np.ndarray:
        return x @ self.weights + self.intercept


@njit(cache=True)
def _smo(k_mat, y, c, epsilon, tol, max_iter):
    """Max-violating-pair SMO on the dual in beta = alpha - alpha* form.

    The up/down costs fold in the subgradient of eps*|beta|; steps stop at
    the box or at the |beta| kink where that subgradient changes.
    """
    n = y.shape[0]
    beta = np.zeros(n)
    grad = -y.copy()
    diag = np.empty(n)
    for t in range(n):
        diag[t] = k_mat[t, t]
    it = 0
    min_up = 0.0
    max_dn = 0.0
    gap = np.inf
    while True:
        min_up = np.inf
        max_dn = -np.inf
        i = -1
        for t in range(n):
            if beta[t] < c:
                v = grad[t] + epsilon if beta[t] >= 0 else grad[t] - epsilon
                if v < min_up:
                    min_up = v
                    i = t
            if beta[t] > -c:
                v = grad[t] - epsilon if beta[t] <= 0 else grad[t] + epsilon
                if v > max_dn:
                    max_dn = v
        gap = max_dn - min_up
        if gap <= tol or it >= max_iter:
            break
        # second-order partner choice: largest decrease estimate d^2/(2 eta)
        # among coefficients whose down-gain still beats i's up-cost
        j = -1
        best = -1.0
        for t in range(n):
            if beta[t] <= -c:
                continue
            v = grad[t] - epsilon if beta[t] <= 0 else grad[t] + epsilon
            d = v - min_up
            if d <= 0:
                continue
            eta_t = diag[i] + diag[t] - 2.0 * k_mat[i, t]
            if eta_t < 1e-12:
                eta_t = 1e-12
            score = d * d / eta_t
            if score > best:
                best = score
                j = t
        if j < 0:
            break
        eta = diag[i] + diag[j] - 2.0 * k_mat[i, j]
        if eta < 1e-12:
            eta = 1e-12
        v_j = grad[j] - epsilon if beta[j] <= 0 else grad[j] + epsilon
        step = (v_j - min_up) / eta
        if c - beta[i] < step:
            step = c - beta[i]
        if beta[j] + c < step:
            step = beta[j] + c
        if beta[i] < 0 and -beta[i] < step:
            step = -beta[i]
        if beta[j] > 0 and beta[j] < step:
            step = beta[j]
        if step <= 0:
            break
        beta[i] += step
        beta[j] -= step
        for t in range(n):
            grad[t] += step * (k_mat[t, i] - k_mat[t, j])
        it += 1
    return beta, it, gap, min_up, max_dn


def _kkt_residual(k_mat: np.ndarray, y: np.ndarray, beta: np.ndarray,
                  b: float, c: float, epsilon: float) -> float:
    """Worst-case optimality violation of the dual solution.

    Interior coefficients must sit on the epsilon tube boundary, zero
    coefficients inside the tube, bound coefficients outside it.
    """
    f = k_mat @ beta + b
    err = y - f
    resid = 0.0
    bound_tol = 1e-8 * max(c, 1.0)
    for i in range(y.shape[0]):
        resid = max(resid, abs(beta[i]) - c)
        if abs(beta[i]) <= bound_tol:
            resid = max(resid, abs(err[i]) - epsilon)
        elif beta[i] >= c - bound_tol:
            resid = max(resid, epsilon - err[i])
        elif beta[i] <= -c + bound_tol:
            resid = max(resid, epsilon + err[i])
        elif beta[i] > 0:
            resid = max(resid, abs(err[i] - epsilon))
        else:
            resid = max(resid, abs(err[i] + epsilon))
    return max(resid, 0.0)


def fit_svr(x: np.ndarray, y: np.ndarray, c: float = 1.0, epsilon: float = 0.1,
            tol: float = 1e-6, max_iter: int = 2_000_000) -> SvrModel:
    """Fit linear epsilon-SVR by SMO on the dual.

    Deterministic: pair selection is by maximal violation with the lowest
    index breaking ties.  Raises ConvergenceError carrying the residual if
    the violation gap is still above tol after max_iter pair updates.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise ValidationError("x must be (n, d) and y (n,) with matching n")
    if c <= 0 or epsilon < 0:
        raise ValidationError("need C > 0 and epsilon >= 0")
    if x.shape[0] == 0:
        raise ValidationError("cannot fit on zero samples")

    k_mat = x @ x.T
    beta, it, gap, min_up, max_dn = _smo(k_mat, y, float(c), float(epsilon),
                                         float(tol), int(max_iter))
    if gap > tol:
        raise ConvergenceError(
            f"SMO did not reach gap {tol:g} within {max_iter} iterations",
            residual=float(gap),
        )
    # the optimality separator -b lies between the best down-gain and the
    # best up-cost; the midpoint satisfies every KKT case within gap/2
    b = -(min_up + max_dn) / 2.0
    resid = _kkt_residual(k_mat, y, beta, b, c, epsilon)
    weights = x.T @ beta
    return SvrModel(weights=weights, intercept=float(b), beta=beta,
                    c=c, epsilon=epsilon, kkt_residual=float(resid),
                    n_iterations=int(it))
