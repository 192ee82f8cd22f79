"""Compiled coordinate-descent kernel for the Lasso (covariance form)."""

import numpy as np
from numba import njit


@njit(cache=True)
def lasso_cd_gram(G, C, W, lam, tol, max_iter, objective, converged):
    """Cyclic coordinate descent on 1/2 w'Gw - c'w + lam*|w|_1 for each column.

    G is the (p, p) scaled Gram matrix X'X/n, C the (p, m) matrix X'Y/n and
    W a (p, m) warm start that is updated in place.  ``objective`` is a
    (max_iter, m) buffer receiving the objective (without the constant
    y'y/2n term) after every sweep and ``converged`` a per-output flag.
    Returns the number of sweeps per output.
    """
    p, m = C.shape
    sweeps = np.zeros(m, dtype=np.int64)
    q = np.empty(p)
    for out in range(m):
        for i in range(p):
            acc = 0.0
            for k in range(p):
                acc += G[i, k] * W[k, out]
            q[i] = acc
        for it in range(max_iter):
            max_delta = 0.0
            for j in range(p):
                gjj = G[j, j]
                old = W[j, out]
                if gjj <= 0.0:
                    new = 0.0
                else:
                    rho = C[j, out] - q[j] + gjj * old
                    if rho > lam:
                        new = (rho - lam) / gjj
                    elif rho < -lam:
                        new = (rho + lam) / gjj
                    else:
                        new = 0.0
                delta = new - old
                if delta != 0.0:
                    W[j, out] = new
                    for k in range(p):
                        q[k] += delta * G[j, k]
                    if abs(delta) > max_delta:
                        max_delta = abs(delta)
            obj = 0.0
            for j in range(p):
                obj += 0.5 * W[j, out] * q[j] - C[j, out] * W[j, out] + lam * abs(W[j, out])
            objective[it, out] = obj
            sweeps[out] = it + 1
            if max_delta < tol:
                converged[out] = True
                break
    return sweeps
